"""Random program generators.

:class:`ProgramGenerator` produces closed, well-typed, fully annotated
programs, type-directed from a goal type, for a given effect signature.
Every value and computation type it makes up is closed, so contexts never
need shifting; dependency enters through identity types, the extra rule for
``return V to x. N`` and, in Plus mode, dependent Kleisli extensions whose
types mention the head computation.

The ``random_*`` functions produce well-scoped but untyped terms covering
every constructor, for syntactic properties (printing, substitution).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import surface as sf
from .effects import EFFECT_NAMES, EffectSignature, signature_for
from .syntax import (
    App, Choose, Diverge, Error, F, Force, Id, Inj, Lam, LetC, LetV, Mu, One, Pair, Pi, PiN,
    PmId, PmIdV, PmPair, PmPairV, PmSum, PmSumV, PmUnit, PmUnitV, Print, Proj, Read, Refl,
    Return, Sigma, SumN, Thunk, ToIn, Tuple, U, Unit, Var, Write, subst, tr,
)

PROFILES = {
    "pure": (),
    "error": ("error",),
    "diverge+rec": ("diverge", "rec"),
    "print": ("print",),
    "state": ("state",),
    "choose": ("choose",),
    "all": EFFECT_NAMES,
}

MAX_DEPTH = 8


def profile_signature(name: str) -> EffectSignature:
    return signature_for(PROFILES[name])


@dataclass(frozen=True)
class Generated:
    comp: object
    ty: object
    seed: int


class ProgramGenerator:
    """Type-directed generator of closed annotated programs.

    ``budget`` bounds the number of non-leaf rules used per program so that
    sizes stay moderate while every form keeps a chance to appear.
    """

    def __init__(self, rng: random.Random, sig: EffectSignature, *, plus: bool = False,
                 max_depth: int = MAX_DEPTH, budget: int = 40, complex_values: bool = False,
                 first_order: bool = False, saturate: bool = True):
        self.rng = rng
        self.saturate_programs = saturate
        self.sig = sig
        self.plus = plus
        self.max_depth = max_depth
        self.budget = budget
        self.left = budget
        self.complex_values = complex_values
        self.first_order = first_order

    # types --------------------------------------------------------------

    def vtype(self, d: int = 2, first_order: bool = False):
        # type indices stay free of complex values
        saved, self.complex_values = self.complex_values, False
        try:
            return self._vtype(d, first_order)
        finally:
            self.complex_values = saved

    def _vtype(self, d: int, first_order: bool):
        r = self.rng.random()
        if d <= 0 or r < 0.3:
            return One() if self.rng.random() < 0.6 else SumN((One(), One()))
        if r < 0.5:
            n = self.rng.randint(1, 3)
            return SumN(tuple(self.vtype(d - 1, first_order) for _ in range(n)))
        if r < 0.65:
            return Sigma(self.vtype(d - 1, first_order), self.vtype(d - 1, first_order))
        if r < 0.8 and not first_order:
            return U(self.ctype(d - 1))
        a = self.vtype(d - 1, first_order)
        if self.plus and not first_order and self.rng.random() < 0.5:
            return self.kleisli_type()
        v = self.value((), a, 1)
        return Id(a, v, v)

    def kleisli_type(self):
        """``Id (U F A) (thunk H) (thunk H)``, the shape dependent Kleisli extensions produce."""
        ha = self.vtype(0)
        h = self.comp((), F(ha), 3)
        return Id(U(F(ha)), Thunk(h), Thunk(h))

    def ctype(self, d: int = 2):
        r = self.rng.random()
        if d <= 0 or r < 0.55:
            return F(self.vtype(d - 1, self.first_order))
        if r < 0.8:
            return Pi(self.vtype(d - 1), self.ctype(d - 1))
        return PiN(tuple(self.ctype(d - 1) for _ in range(self.rng.randint(1, 3))))

    # values ---------------------------------------------------------------

    def _vars(self, ctx: tuple, a) -> list:
        n = len(ctx)
        return [n - 1 - j for j, t in enumerate(ctx) if t == a]

    def value(self, ctx: tuple, a, d: int):
        vs = self._vars(ctx, a)
        if vs and self.rng.random() < 0.4:
            return Var(self.rng.choice(vs))
        if self.complex_values and d > 0 and self.left > 0 and self.rng.random() < 0.25:
            self.left -= 1
            return self.complex_value(ctx, a, d - 1)
        if isinstance(a, One):
            return Unit()
        if isinstance(a, SumN):
            i = self.rng.randrange(len(a.components))
            return Inj(i + 1, len(a.components), self.value(ctx, a.components[i], d - 1), a)
        if isinstance(a, Sigma):
            return Pair(self.value(ctx, a.base, d - 1), self.value(ctx, a.fiber, d - 1))
        if isinstance(a, U):
            return Thunk(self.comp(ctx, a.b, d - 1))
        if isinstance(a, Id):
            return Refl(a.lhs)
        raise TypeError(a)

    def scrutinee(self, ctx: tuple, a, d: int):
        vs = self._vars(ctx, a)
        if vs and self.rng.random() < 0.7:
            return Var(self.rng.choice(vs))
        return self.value(ctx, a, d)

    def complex_value(self, ctx: tuple, a, d: int):
        kind = self.rng.choice(("let", "sum", "pair", "unit", "id"))
        if kind == "let":
            b = self.vtype(1)
            return LetV(self.value(ctx, b, d), self.value(ctx + (b,), a, d), b)
        if kind == "sum":
            s = SumN(tuple(self.vtype(1) for _ in range(self.rng.randint(1, 2))))
            return PmSumV(self.scrutinee(ctx, s, d),
                          tuple(self.value(ctx + (c,), a, d) for c in s.components))
        if kind == "pair":
            s = Sigma(self.vtype(1), self.vtype(1))
            return PmPairV(self.scrutinee(ctx, s, d), (self.value(ctx + (s.base, s.fiber), a, d),))
        if kind == "unit":
            return PmUnitV(self.scrutinee(ctx, One(), d), (self.value(ctx, a, d),))
        c = self.vtype(1)
        v = self.value((), c, 1)
        return PmIdV(self.scrutinee(ctx, Id(c, v, v), d), (self.value(ctx + (c,), a, d),))

    # computations -----------------------------------------------------------

    def leaf(self, ctx: tuple, b):
        if isinstance(b, F):
            return Return(self.value(ctx, b.a, 0))
        if isinstance(b, Pi):
            return Lam(self.leaf(ctx + (b.base,), b.body), b.base)
        if isinstance(b, PiN):
            return Tuple(tuple(self.leaf(ctx, c) for c in b.components))
        raise TypeError(b)

    def _rules(self, b) -> list:
        rules = [("intro", 4), ("to", 3), ("let", 1), ("app", 1), ("force", 1), ("proj", 1),
                 ("pm_sum", 2), ("pm_pair", 1), ("pm_unit", 1), ("pm_id", 1)]
        sig = self.sig
        if sig.errors:
            rules.append(("error", 1))
        if sig.diverge:
            rules.append(("diverge", 1))
        if sig.rec:
            rules.append(("rec", 1))
        if sig.print:
            rules.append(("print", 2))
        if sig.choose:
            rules.append(("choose", 2))
        if sig.state:
            rules += [("write", 2), ("read", 1)]
        if isinstance(b, F) and isinstance(b.a, Id):
            rules.append(("dep", 4))
        return rules

    def comp(self, ctx: tuple, b, d: int, intro: bool = True):
        if d <= 0 or self.left <= 0:
            return self.leaf(ctx, b)
        rules = [r for r in self._rules(b) if intro or r[0] != "intro"]
        rule = self.rng.choices([r for r, _ in rules], [w for _, w in rules])[0]
        self.left -= 1
        return getattr(self, "_" + rule)(ctx, b, d - 1)

    def _intro(self, ctx, b, d):
        if isinstance(b, F):
            return Return(self.value(ctx, b.a, d))
        if isinstance(b, Pi):
            return Lam(self.comp(ctx + (b.base,), b.body, d), b.base)
        return Tuple(tuple(self.comp(ctx, c, d) for c in b.components))

    def _maybe(self, t, p: float = 0.5):
        return t if self.rng.random() < p else None

    def _to(self, ctx, b, d):
        a = self.vtype(1)
        head = self.comp(ctx, F(a), d)
        body = self.comp(ctx + (a,), b, d)
        return ToIn(head, body, self._maybe(b), a)

    def _let(self, ctx, b, d):
        a = self.vtype(1)
        return LetC(self.value(ctx, a, d), self.comp(ctx + (a,), b, d), a)

    def _app(self, ctx, b, d):
        a = self.vtype(1)
        return App(self.value(ctx, a, d), self.comp(ctx, Pi(a, b), d))

    def _force(self, ctx, b, d):
        vs = self._vars(ctx, U(b))
        if vs and self.rng.random() < 0.7:
            return Force(Var(self.rng.choice(vs)))
        return Force(Thunk(self.comp(ctx, b, d)))

    def _proj(self, ctx, b, d):
        n = self.rng.randint(1, 3)
        i = self.rng.randrange(n)
        comps = [b if j == i else self.ctype(0) for j in range(n)]
        return Proj(i + 1, self.comp(ctx, PiN(tuple(comps)), d))

    def _pm_sum(self, ctx, b, d):
        s = SumN(tuple(self.vtype(1) for _ in range(self.rng.randint(1, 3))))
        branches = tuple(self.comp(ctx + (c,), b, d) for c in s.components)
        return PmSum(self.scrutinee(ctx, s, d), branches, self._maybe(b, 0.3))

    def _pm_pair(self, ctx, b, d):
        s = Sigma(self.vtype(1), self.vtype(1))
        return PmPair(self.scrutinee(ctx, s, d), (self.comp(ctx + (s.base, s.fiber), b, d),),
                      self._maybe(b, 0.3))

    def _pm_unit(self, ctx, b, d):
        return PmUnit(self.scrutinee(ctx, One(), d), (self.comp(ctx, b, d),), self._maybe(b, 0.3))

    def _pm_id(self, ctx, b, d):
        c = self.vtype(1)
        v = self.value((), c, 1)
        return PmId(self.scrutinee(ctx, Id(c, v, v), d), (self.comp(ctx + (c,), b, d),),
                    self._maybe(b, 0.3))

    def _error(self, ctx, b, d):
        return Error(self.rng.choice(self.sig.errors), b)

    def _diverge(self, ctx, b, d):
        return Diverge(b)

    def _rec(self, ctx, b, d):
        return Mu(self.comp(ctx + (U(b),), b, d), b)

    def _print(self, ctx, b, d):
        return Print(self.rng.choice(self.sig.alphabet), self.comp(ctx, b, d))

    def _choose(self, ctx, b, d):
        return Choose(tuple(self.comp(ctx, b, d) for _ in range(self.rng.randint(1, 3))))

    def _write(self, ctx, b, d):
        return Write(self.rng.choice(self.sig.states), self.comp(ctx, b, d))

    def _read(self, ctx, b, d):
        return Read(tuple((st, self.comp(ctx, b, d)) for st in self.sig.states))

    def _dep(self, ctx, b, d):
        ident = b.a
        a = ident.carrier
        h = ident.lhs
        if self.plus and isinstance(a, U) and isinstance(a.b, F) and isinstance(h, Thunk) \
                and ident.rhs == h:
            # a dependent Kleisli extension: (H to x. return refl (tr x)) : F (Id (U F A) (thunk H) (thunk H))
            inner = a.b.a
            motive = F(Id(U(F(inner)), Var(0), Var(0))) if self.rng.random() < 0.7 else None
            return ToIn(h.body, Return(Refl(tr(Var(0)))), motive, inner)
        # the extra rule: return V to x. return refl x : F (Id A V V)
        return ToIn(Return(h), Return(Refl(Var(0))), None, a)

    # programs -----------------------------------------------------------------

    def program(self, ty=None) -> tuple:
        self.left = self.budget
        if ty is None:
            if self.first_order:
                ty = F(self.vtype(2, first_order=True))
            elif self.plus and self.rng.random() < 0.3:
                ty = F(self.kleisli_type())
            else:
                ty = self.ctype(2)
        self.left = self.budget
        # an introduction at the root is terminal at once; prefer work
        m = self.comp((), ty, self.max_depth, intro=False)
        return self.saturate(m, ty) if self.saturate_programs else (m, ty)

    def saturate(self, m, ty) -> tuple:
        """Apply ``m`` to arguments and projections until its type is an ``F``.

        A lambda or tuple at the empty stack is already terminal, so without
        this most programs of function type would never run their bodies.
        """
        while isinstance(ty, (Pi, PiN)):
            if isinstance(ty, Pi):
                v = self.value((), ty.base, 2)
                m, ty = App(v, m), subst(ty.body, v)
            elif ty.components:
                i = self.rng.randrange(len(ty.components))
                m, ty = Proj(i + 1, m), ty.components[i]
            else:
                break
        return m, ty


def programs(profile: str, n: int, seed: int = 0, **kw):
    """``n`` generated programs for an effect profile, each with its own seed."""
    sig = profile_signature(profile)
    out = []
    for k in range(n):
        s = seed * 1_000_003 + k
        g = ProgramGenerator(random.Random(s), sig, **kw)
        m, ty = g.program()
        out.append(Generated(m, ty, s))
    return out


# -- untyped well-scoped terms ----------------------------------------------------


class TermGenerator:
    """Well-scoped random terms over every constructor, ignoring types."""

    def __init__(self, rng: random.Random, annotations: bool = True):
        self.rng = rng
        self.ann = annotations

    def _opt(self, f, n):
        return f(n, 1) if self.ann and self.rng.random() < 0.4 else None

    def value(self, n: int, d: int):
        r = self.rng
        if d <= 0:
            choices = ["unit"] + (["var"] if n else [])
        else:
            choices = ["unit", "thunk", "inj", "pair", "refl", "let", "pm"] + (["var"] * 2 if n else [])
        k = r.choice(choices)
        if k == "var":
            return Var(r.randrange(n))
        if k == "unit":
            return Unit()
        if k == "thunk":
            return Thunk(self.comp(n, d - 1))
        if k == "inj":
            arity = r.randint(1, 3)
            return Inj(r.randint(1, arity), arity, self.value(n, d - 1), self._opt(self.vtype, n))
        if k == "pair":
            return Pair(self.value(n, d - 1), self.value(n, d - 1))
        if k == "refl":
            return Refl(self.value(n, d - 1))
        if k == "let":
            return LetV(self.value(n, d - 1), self.value(n + 1, d - 1), self._opt(self.vtype, n))
        return self._pm(n, d, self.value, self.vtype, (PmSumV, PmUnitV, PmPairV, PmIdV))

    def _pm(self, n, d, body, motive, classes):
        r = self.rng
        cls = r.choice(classes)
        scrut = self.value(n, d - 1)
        if cls in (PmSum, PmSumV):
            branches = tuple(body(n + 1, d - 1) for _ in range(r.randint(0, 3)))
            mb = 1
        elif cls in (PmUnit, PmUnitV):
            branches, mb = (body(n, d - 1),), 1
        elif cls in (PmPair, PmPairV):
            branches, mb = (body(n + 2, d - 1),), 1
        else:
            branches, mb = (body(n + 1, d - 1),), 3
        m = motive(n + mb, 1) if self.ann and r.random() < 0.4 else None
        return cls(scrut, branches, m)

    def comp(self, n: int, d: int):
        r = self.rng
        if d <= 0:
            k = r.choice(["return", "diverge", "error"] + (["force"] if n else []))
        else:
            k = r.choice(["return", "force", "to", "let", "pm", "tuple", "proj", "lam", "app",
                          "diverge", "error", "mu", "print", "choose", "write", "read"])
        if k == "return":
            return Return(self.value(n, d - 1))
        if k == "force":
            return Force(self.value(n, d - 1))
        if k == "to":
            return ToIn(self.comp(n, d - 1), self.comp(n + 1, d - 1), self._opt(self.ctype, n + 1),
                        self._opt(self.vtype, n))
        if k == "let":
            return LetC(self.value(n, d - 1), self.comp(n + 1, d - 1), self._opt(self.vtype, n))
        if k == "pm":
            return self._pm(n, d, self.comp, self.ctype, (PmSum, PmUnit, PmPair, PmId))
        if k == "tuple":
            return Tuple(tuple(self.comp(n, d - 1) for _ in range(r.randint(0, 3))))
        if k == "proj":
            return Proj(r.randint(1, 3), self.comp(n, d - 1))
        if k == "lam":
            return Lam(self.comp(n + 1, d - 1), self._opt(self.vtype, n))
        if k == "app":
            return App(self.value(n, d - 1), self.comp(n, d - 1))
        if k == "diverge":
            return Diverge(self._opt(self.ctype, n))
        if k == "error":
            return Error(r.choice(("crash", "oops")), self._opt(self.ctype, n))
        if k == "mu":
            return Mu(self.comp(n + 1, d - 1), self._opt(self.ctype, n))
        if k == "print":
            return Print(r.choice("ab"), self.comp(n, d - 1))
        if k == "choose":
            return Choose(tuple(self.comp(n, d - 1) for _ in range(r.randint(1, 3))))
        if k == "write":
            return Write(r.choice(("s0", "s1")), self.comp(n, d - 1))
        return Read(tuple((st, self.comp(n, d - 1)) for st in ("s0", "s1")))

    def vtype(self, n: int, d: int):
        r = self.rng
        k = r.choice(["one", "sum"] if d <= 0 else ["one", "sum", "u", "sigma", "id"])
        if k == "one":
            return One()
        if k == "sum":
            return SumN(tuple(self.vtype(n, d - 1) for _ in range(r.randint(0, 2))))
        if k == "u":
            return U(self.ctype(n, d - 1))
        if k == "sigma":
            return Sigma(self.vtype(n, d - 1), self.vtype(n + 1, d - 1))
        return Id(self.vtype(n, d - 1), self.value(n, 1), self.value(n, 1))

    def ctype(self, n: int, d: int):
        r = self.rng
        k = r.choice(["f"] if d <= 0 else ["f", "pi", "prod"])
        if k == "f":
            return F(self.vtype(n, d - 1))
        if k == "pi":
            return Pi(self.vtype(n, d - 1), self.ctype(n + 1, d - 1))
        return PiN(tuple(self.ctype(n, d - 1) for _ in range(r.randint(0, 2))))

    # surface
    def sterm(self, n: int, d: int):
        r = self.rng
        if d <= 0:
            k = r.choice(["unit"] + (["var"] if n else []))
        else:
            k = r.choice(["unit", "var", "ann", "let", "inj", "pm", "lami", "proj", "lam", "app",
                          "pair", "refl", "diverge", "error", "mu", "print", "choose", "write",
                          "read"] if n else ["unit", "let", "lam", "pair", "inj", "print"])
        if k == "var":
            return sf.SVar(r.randrange(n))
        if k == "unit":
            return sf.SUnit()
        if k == "ann":
            return sf.SAnn(self.sterm(n, d - 1), self.stype(n, 1))
        if k == "let":
            return sf.SLet(self.sterm(n, d - 1), self.sterm(n + 1, d - 1))
        if k == "inj":
            arity = r.randint(1, 3)
            return sf.SInj(r.randint(1, arity), arity, self.sterm(n, d - 1))
        if k == "pm":
            cls = r.choice((sf.SPmSum, sf.SPmUnit, sf.SPmPair, sf.SPmId))
            scrut = self.sterm(n, d - 1)
            if cls is sf.SPmSum:
                br, mb = tuple(self.sterm(n + 1, d - 1) for _ in range(r.randint(0, 3))), 1
            elif cls is sf.SPmUnit:
                br, mb = (self.sterm(n, d - 1),), 1
            elif cls is sf.SPmPair:
                br, mb = (self.sterm(n + 2, d - 1),), 1
            else:
                br, mb = (self.sterm(n + 1, d - 1),), 3
            motive = self.stype(n + mb, 1) if r.random() < 0.4 else None
            return cls(scrut, br, motive)
        if k == "lami":
            return sf.SLamI(tuple(self.sterm(n, d - 1) for _ in range(r.randint(0, 3))))
        if k == "proj":
            return sf.SProjI(r.randint(1, 3), self.sterm(n, d - 1))
        if k == "lam":
            return sf.SLam(self.stype(n, 1), self.sterm(n + 1, d - 1))
        if k == "app":
            return sf.SApp(self.sterm(n, d - 1), self.sterm(n, d - 1))
        if k == "pair":
            return sf.SPair(self.sterm(n, d - 1), self.sterm(n, d - 1))
        if k == "refl":
            return sf.SRefl(self.sterm(n, d - 1))
        if k == "diverge":
            return sf.SDiverge(self.stype(n, 1))
        if k == "error":
            return sf.SError("crash", self.stype(n, 1))
        if k == "mu":
            return sf.SMu(self.stype(n, 1), self.sterm(n + 1, d - 1))
        if k == "print":
            return sf.SPrint(r.choice("ab"), self.sterm(n, d - 1))
        if k == "choose":
            return sf.SChoose(tuple(self.sterm(n, d - 1) for _ in range(r.randint(1, 2))))
        if k == "write":
            return sf.SWrite("s0", self.sterm(n, d - 1))
        return sf.SRead((("s0", self.sterm(n, d - 1)), ("s1", self.sterm(n, d - 1))))

    def stype(self, n: int, d: int):
        r = self.rng
        k = r.choice(["one", "sum"] if d <= 0 else ["one", "sum", "prod", "pi", "sigma", "id"])
        if k == "one":
            return sf.SOne()
        if k == "sum":
            return sf.SSum(tuple(self.stype(n, d - 1) for _ in range(r.randint(0, 2))))
        if k == "prod":
            return sf.SProd(tuple(self.stype(n, d - 1) for _ in range(r.randint(0, 2))))
        if k == "pi":
            return sf.SPi(self.stype(n, d - 1), self.stype(n + 1, d - 1))
        if k == "sigma":
            return sf.SSigma(self.stype(n, d - 1), self.stype(n + 1, d - 1))
        return sf.SId(self.stype(n, d - 1), self.sterm(n, 1), self.sterm(n, 1))


def random_term(rng: random.Random, kind: str = "comp", n: int = 0, depth: int = 4,
                annotations: bool = True):
    """A well-scoped random term of the given syntactic category over ``n`` free variables."""
    g = TermGenerator(rng, annotations)
    return {
        "value": g.value, "comp": g.comp, "vtype": g.vtype, "ctype": g.ctype,
        "surface": g.sterm, "stype": g.stype,
    }[kind](n, depth)
