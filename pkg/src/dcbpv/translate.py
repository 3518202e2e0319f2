"""CBV and CBN translations of the surface theory, and complex-value elimination.

Both translations are compositional and annotate everything they generate:
every ``to`` carries its motive and head type, every ``pm`` its motive and
every lambda its domain, so the output can be checked without inference.

The environment maps each surface variable to the core computation that
stands for it: ``return x`` for a CBV variable bound to a value, ``force z``
for one known only as a thunk of its computation (inside motives), and
``force x`` for CBN variables.  Entries remember the depth at which they
were made and are shifted on lookup, which is all the fresh-name handling
the translations need.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import surface as sf
from .equality import hoist_once
from .syntax import (
    App, Choose, Context, Diverge, Error, F, Force, Id, Inj, Lam, LetC, Mu, Node, One, Pair,
    Pi, PiN, PmId, PmPair, PmSum, PmUnit, Print, Proj, Read, Refl, Return, Sigma, SumN, Thunk,
    ToIn, Tuple, Type, U, Unit, Value, Computation, Var, Write, _spec, instantiate, shift, subst, tr,
)

CBV = "cbv"
CBN = "cbn"
WEAK = "weak"
DEPENDENT = "dependent"


class TranslationError(Exception):
    pass


@dataclass(frozen=True)
class Env:
    entries: tuple = ()
    depth: int = 0

    @property
    def sctx(self) -> tuple:
        return tuple(e[0] for e in self.entries)

    def lookup(self, i: int):
        n = len(self.entries)
        if not 0 <= i < n:
            raise TranslationError(f"unbound surface variable {i}")
        _, d0, comp = self.entries[n - 1 - i]
        return shift(comp, self.depth - d0)

    def bind(self, sty, comp) -> "Env":
        """A new core variable standing (through ``comp``) for a surface one."""
        return Env(self.entries + ((sty, self.depth + 1, comp),), self.depth + 1)

    def bind_at(self, sty, comp) -> "Env":
        """A surface variable replaced by ``comp`` without a core binder."""
        return Env(self.entries + ((sty, self.depth, comp),), self.depth)

    def push(self, n: int = 1) -> "Env":
        return Env(self.entries, self.depth + n)


def _id_ctx(a):
    """Surface telescope ``x1 : A, x2 : A, p : Id A x1 x2`` for ``Id`` motives."""
    return a, shift(a, 1), sf.SId(shift(a, 2), sf.SVar(1), sf.SVar(0))


def _branch_type(m, motive, i: int, arity: int):
    """The motive instantiated at the pattern of branch ``i`` (surface)."""
    if isinstance(m, sf.SPmSum):
        return subst(shift(motive, 1, 1), sf.SInj(i, arity, sf.SVar(0)))
    if isinstance(m, sf.SPmUnit):
        return subst(motive, sf.SUnit())
    if isinstance(m, sf.SPmPair):
        return subst(shift(motive, 2, 1), sf.SPair(sf.SVar(1), sf.SVar(0)))
    return instantiate(shift(motive, 1, 3), [sf.SVar(0), sf.SVar(0), sf.SRefl(sf.SVar(0))])


class Translator:
    """Shared traversal; subclasses fix the reading of variables and types."""

    direction = ""

    def synth(self, m, env: Env, expected=None):
        if expected is not None:
            return expected
        try:
            return sf.synth(m, env.sctx)
        except sf.SurfaceTypeError as e:
            raise TranslationError(str(e)) from None

    # effect rows are the same for both directions
    def effect(self, m, env: Env, expected):
        if isinstance(m, sf.SDiverge):
            return Diverge(self.ctype(m.ty, env))
        if isinstance(m, sf.SError):
            return Error(m.name, self.ctype(m.ty, env))
        if isinstance(m, sf.SPrint):
            return Print(m.letter, self.term(m.rest, env, expected))
        if isinstance(m, sf.SWrite):
            return Write(m.state, self.term(m.rest, env, expected))
        if isinstance(m, sf.SChoose):
            return Choose(tuple(self.term(a, env, expected) for a in m.alternatives))
        if isinstance(m, sf.SRead):
            return Read(tuple((st, self.term(a, env, expected)) for st, a in m.branches))
        return None

    def ctype(self, a, env: Env):
        raise NotImplementedError

    def term(self, m, env: Env, expected=None):
        raise NotImplementedError

    def eliminator(self, m, env: Env, expected):
        """``M to z. pm z as ...`` with motives for both the ``to`` and the ``pm``."""
        try:
            s_ty, cases = sf.scrutinee_cases(m, env.sctx)
        except sf.SurfaceTypeError as e:
            raise TranslationError(str(e)) from None
        head = self.term(m.scrutinee, env, s_ty)
        head_ty = self.head_type(s_ty, env)
        if m.motive is None:
            r = self.synth(m, env, expected)
            to_motive = shift(self.ctype(r, env), 1)
            pm_motive = shift(self.ctype(r, env), 1 + sf.motive_arity(m))
        else:
            to_motive = self.ctype(m.motive, self.motive_env(m, s_ty, env))
            pm_motive = self.ctype(m.motive, self.pm_motive_env(m, s_ty, env.push()))
        env1 = env.push()
        branches = []
        arity = len(m.branches)
        for i, (body, (ext, _)) in enumerate(zip(m.branches, cases), 1):
            if m.motive is not None:
                bexp = _branch_type(m, m.motive, i, arity)
            else:
                bexp = shift(self.synth(m, env, expected), len(ext))
            branches.append(self.branch(m, body, ext, env1, bexp))
        cls = {sf.SPmSum: PmSum, sf.SPmUnit: PmUnit, sf.SPmPair: PmPair, sf.SPmId: PmId}[type(m)]
        return ToIn(head, cls(Var(0), tuple(branches), pm_motive), to_motive, head_ty)

    def motive_env(self, m, s_ty, env: Env) -> Env:
        """Environment for the ``to`` motive, whose variable is the scrutinee thunk."""
        if isinstance(m, sf.SPmId):
            a, a2, p = _id_ctx(s_ty.carrier)
            e = env.bind_at(a, self.term(s_ty.lhs, env)).bind_at(a2, self.term(s_ty.rhs, env))
            return e.bind(p, self.scrutinee_var())
        return env.bind(s_ty, self.scrutinee_var())

    def pm_motive_env(self, m, s_ty, env: Env) -> Env:
        if isinstance(m, sf.SPmId):
            a, a2, p = _id_ctx(s_ty.carrier)
            return env.bind(a, self.endpoint_var()).bind(a2, self.endpoint_var()).bind(p, Return(Var(0)))
        return env.bind(s_ty, Return(Var(0)))


class CBVTranslator(Translator):
    direction = CBV

    def scrutinee_var(self):
        return Force(Var(0))

    def endpoint_var(self):
        return Force(Var(0))

    def head_type(self, s_ty, env: Env):
        return self.vtype(s_ty, env)

    def vtype(self, a, env: Env):
        if isinstance(a, sf.SOne):
            return One()
        if isinstance(a, sf.SSum):
            return SumN(tuple(self.vtype(c, env) for c in a.components))
        if isinstance(a, sf.SProd):
            return U(PiN(tuple(F(self.vtype(c, env)) for c in a.components)))
        if isinstance(a, sf.SPi):
            inner = env.bind(a.base, Return(Var(0)))
            return U(Pi(self.vtype(a.base, env), F(self.vtype(a.body, inner))))
        if isinstance(a, sf.SSigma):
            inner = env.bind(a.base, Return(Var(0)))
            return Sigma(self.vtype(a.base, env), self.vtype(a.fiber, inner))
        if isinstance(a, sf.SId):
            return Id(U(F(self.vtype(a.carrier, env))),
                      Thunk(self.term(a.lhs, env, a.carrier)), Thunk(self.term(a.rhs, env, a.carrier)))
        raise TranslationError(f"not a surface type: {a!r}")

    def ctype(self, a, env: Env):
        return F(self.vtype(a, env))

    def branch(self, m, body, ext, env1: Env, bexp):
        if isinstance(m, sf.SPmId):
            # the branch variable is a thunk y : U F A; force it to get x : A
            a = ext[0]
            env2 = env1.push()
            motive = self.ctype(bexp, env2.bind(a, Force(Var(0))))
            inner = self.term(body, env2.bind(a, Return(Var(0))), bexp)
            return ToIn(Force(Var(0)), inner, motive, self.vtype(a, env2))
        e = env1
        for a in ext:
            e = e.bind(a, Return(Var(0)))
        return self.term(body, e, bexp)

    def term(self, m, env: Env, expected=None):
        if isinstance(m, sf.SVar):
            return env.lookup(m.index)
        if isinstance(m, sf.SAnn):
            return self.term(m.term, env, m.ty)
        if isinstance(m, sf.SUnit):
            return Return(Unit())
        if isinstance(m, sf.SLet):
            a = self.synth(m.bound, env)
            # the body's own type keeps its dependency on x; ``expected`` has
            # already been instantiated at the bound term
            try:
                r = self.synth(m.body, env.bind_at(a, None))
            except TranslationError:
                if expected is None:
                    raise
                r = shift(expected, 1)
            motive = self.ctype(r, env.bind(a, Force(Var(0))))
            body = self.term(m.body, env.bind(a, Return(Var(0))), r)
            return ToIn(self.term(m.bound, env, a), body, motive, self.vtype(a, env))
        if isinstance(m, sf.SInj):
            s = expected
            if not isinstance(s, sf.SSum) or len(s.components) != m.arity:
                raise TranslationError("injection needs a sum type annotation")
            a = s.components[m.tag - 1]
            sum_ty = shift(self.vtype(s, env), 1)
            return ToIn(self.term(m.payload, env, a), Return(Inj(m.tag, m.arity, Var(0), sum_ty)),
                        shift(self.ctype(s, env), 1), self.vtype(a, env))
        if isinstance(m, sf.SLamI):
            comps = expected.components if isinstance(expected, sf.SProd) else (None,) * len(m.components)
            return Return(Thunk(Tuple(tuple(self.term(c, env, t) for c, t in zip(m.components, comps)))))
        if isinstance(m, sf.SProjI):
            t = self.synth(m.target, env)
            r = self.synth(m, env, expected)
            return ToIn(self.term(m.target, env, t), Proj(m.tag, Force(Var(0))),
                        shift(self.ctype(r, env), 1), self.vtype(t, env))
        if isinstance(m, sf.SLam):
            cod = expected.body if isinstance(expected, sf.SPi) else None
            body = self.term(m.body, env.bind(m.dom, Return(Var(0))), cod)
            return Return(Thunk(Lam(body, self.vtype(m.dom, env))))
        if isinstance(m, sf.SApp):
            return self.app(m, env)
        if isinstance(m, sf.SPair):
            return self.pair(m, env, expected)
        if isinstance(m, sf.SRefl):
            a = self.synth(m.subject, env)
            a1 = shift(self.vtype(a, env), 1)
            motive = F(Id(U(F(a1)), Var(0), Var(0)))
            return ToIn(self.term(m.subject, env, a), Return(Refl(tr(Var(0)))), motive, self.vtype(a, env))
        if isinstance(m, sf.SURFACE_ELIMINATORS):
            return self.eliminator(m, env, expected)
        if isinstance(m, sf.SMu):
            a = self.vtype(m.ty, env)
            body = self.term(m.body, env.push().bind(m.ty, Return(Var(0))), shift(m.ty, 1))
            return Mu(ToIn(Force(Var(0)), body, shift(F(a), 2), shift(a, 1)), F(a))
        out = self.effect(m, env, expected)
        if out is None:
            raise TranslationError(f"not a surface term: {m!r}")
        return out

    def app(self, m, env: Env):
        fty = self.synth(m.fn, env)
        if not isinstance(fty, sf.SPi):
            raise TranslationError(f"application of a term of type {fty!r}")
        a, cod = fty.base, fty.body
        outer_motive = self.ctype(cod, env.bind(a, Force(Var(0))))
        env1 = env.push()
        inner_motive = shift(self.ctype(cod, env.bind(a, Return(Var(0)))), 1)
        inner = ToIn(self.term(m.fn, env1, fty), App(Var(1), Force(Var(0))), inner_motive,
                     self.vtype(fty, env1))
        return ToIn(self.term(m.arg, env, a), inner, outer_motive, self.vtype(a, env))

    def pair(self, m, env: Env, expected):
        s = expected if isinstance(expected, sf.SSigma) else self.synth(m, env)
        a, a2 = s.base, subst(s.fiber, m.fst)
        r = self.ctype(s, env)
        v = self.value(m.fst, env, a)
        if v is not None:
            # a value needs no sequencing; this keeps dependent fibers typable
            return ToIn(self.term(m.snd, env, a2), Return(Pair(shift(v, 1), Var(0))), shift(r, 1),
                        self.vtype(a2, env))
        env1 = env.push()
        inner = ToIn(self.term(m.snd, env1, a2), Return(Pair(Var(1), Var(0))), shift(r, 2),
                     self.vtype(a2, env1))
        return ToIn(self.term(m.fst, env, a), inner, shift(r, 1), self.vtype(a, env))


    def value(self, m, env: Env, expected=None):
        """The value ``V`` with ``m`` translating to ``return V``, if ``m`` is a syntactic value."""
        if isinstance(m, sf.SVar):
            c = env.lookup(m.index)
            return c.v if isinstance(c, Return) else None
        if isinstance(m, sf.SAnn):
            return self.value(m.term, env, m.ty)
        if isinstance(m, sf.SUnit):
            return Unit()
        if isinstance(m, sf.SInj):
            s = expected
            if not isinstance(s, sf.SSum) or len(s.components) != m.arity:
                return None
            v = self.value(m.payload, env, s.components[m.tag - 1])
            return None if v is None else Inj(m.tag, m.arity, v, self.vtype(s, env))
        if isinstance(m, sf.SRefl):
            v = self.value(m.subject, env)
            return None if v is None else Refl(tr(v))
        return None


class CBNTranslator(Translator):
    direction = CBN

    def scrutinee_var(self):
        return Force(Var(0))

    def endpoint_var(self):
        return Force(Var(0))

    def head_type(self, s_ty, env: Env):
        b = self.ctype(s_ty, env)
        if not isinstance(b, F):
            raise TranslationError(f"cannot eliminate a term of type {s_ty!r}")
        return b.a

    def ctype(self, b, env: Env):
        if isinstance(b, sf.SOne):
            return F(One())
        if isinstance(b, sf.SSum):
            return F(SumN(tuple(U(self.ctype(c, env)) for c in b.components)))
        if isinstance(b, sf.SProd):
            return PiN(tuple(self.ctype(c, env) for c in b.components))
        if isinstance(b, sf.SPi):
            inner = env.bind(b.base, Force(Var(0)))
            return Pi(U(self.ctype(b.base, env)), self.ctype(b.body, inner))
        if isinstance(b, sf.SSigma):
            inner = env.bind(b.base, Force(Var(0)))
            return F(Sigma(U(self.ctype(b.base, env)), U(self.ctype(b.fiber, inner))))
        if isinstance(b, sf.SId):
            return F(Id(U(self.ctype(b.carrier, env)),
                        Thunk(self.term(b.lhs, env, b.carrier)), Thunk(self.term(b.rhs, env, b.carrier))))
        raise TranslationError(f"not a surface type: {b!r}")

    def branch(self, m, body, ext, env1: Env, bexp):
        e = env1
        for a in ext:
            e = e.bind(a, Force(Var(0)))
        return self.term(body, e, bexp)

    def term(self, m, env: Env, expected=None):
        if isinstance(m, sf.SVar):
            return env.lookup(m.index)
        if isinstance(m, sf.SAnn):
            return self.term(m.term, env, m.ty)
        if isinstance(m, sf.SUnit):
            return Return(Unit())
        if isinstance(m, sf.SLet):
            a = self.synth(m.bound, env)
            r = shift(expected, 1) if expected is not None else None
            body = self.term(m.body, env.bind(a, Force(Var(0))), r)
            return LetC(Thunk(self.term(m.bound, env, a)), body, U(self.ctype(a, env)))
        if isinstance(m, sf.SInj):
            comps = expected.components if isinstance(expected, sf.SSum) else None
            a = comps[m.tag - 1] if comps and len(comps) == m.arity else None
            sum_ty = self.ctype(expected, env).a if comps and len(comps) == m.arity else None
            return Return(Inj(m.tag, m.arity, Thunk(self.term(m.payload, env, a)), sum_ty))
        if isinstance(m, sf.SLamI):
            comps = expected.components if isinstance(expected, sf.SProd) else (None,) * len(m.components)
            return Tuple(tuple(self.term(c, env, t) for c, t in zip(m.components, comps)))
        if isinstance(m, sf.SProjI):
            return Proj(m.tag, self.term(m.target, env))
        if isinstance(m, sf.SLam):
            cod = expected.body if isinstance(expected, sf.SPi) else None
            body = self.term(m.body, env.bind(m.dom, Force(Var(0))), cod)
            return Lam(body, U(self.ctype(m.dom, env)))
        if isinstance(m, sf.SApp):
            fty = self.synth(m.fn, env)
            a = fty.base if isinstance(fty, sf.SPi) else None
            return App(Thunk(self.term(m.arg, env, a)), self.term(m.fn, env, fty))
        if isinstance(m, sf.SPair):
            s = expected if isinstance(expected, sf.SSigma) else None
            a = s.base if s else None
            a2 = subst(s.fiber, m.fst) if s else None
            return Return(Pair(Thunk(self.term(m.fst, env, a)), Thunk(self.term(m.snd, env, a2))))
        if isinstance(m, sf.SRefl):
            return Return(Refl(Thunk(self.term(m.subject, env))))
        if isinstance(m, sf.SURFACE_ELIMINATORS):
            return self.eliminator(m, env, expected)
        if isinstance(m, sf.SMu):
            body = self.term(m.body, env.bind(m.ty, Force(Var(0))), shift(m.ty, 1))
            return Mu(body, self.ctype(m.ty, env))
        out = self.effect(m, env, expected)
        if out is None:
            raise TranslationError(f"not a surface term: {m!r}")
        return out


_TRANSLATORS = {CBV: CBVTranslator(), CBN: CBNTranslator()}


def translator(direction: str) -> Translator:
    try:
        return _TRANSLATORS[direction]
    except KeyError:
        raise ValueError(f"unknown direction {direction!r}") from None


def translate_context(ctx: tuple, direction: str):
    """The translated context and the environment reading the surface one."""
    t = translator(direction)
    env = Env()
    entries = []
    for a in ctx:
        if direction == CBV:
            entries.append(t.vtype(a, env))
            env = env.bind(a, Return(Var(0)))
        else:
            entries.append(U(t.ctype(a, env)))
            env = env.bind(a, Force(Var(0)))
    return Context(tuple(entries)), env


def cbv_translate_type(a, ctx: tuple = ()):
    _, env = translate_context(ctx, CBV)
    return CBVTranslator().vtype(a, env)


def cbv_translate_term(m, ctx: tuple = ()):
    _, env = translate_context(ctx, CBV)
    return _TRANSLATORS[CBV].term(m, env)


def cbn_translate_type(b, ctx: tuple = ()):
    _, env = translate_context(ctx, CBN)
    return _TRANSLATORS[CBN].ctype(b, env)


def cbn_translate_term(m, ctx: tuple = ()):
    _, env = translate_context(ctx, CBN)
    return _TRANSLATORS[CBN].term(m, env)


@dataclass(frozen=True)
class Translation:
    context: Context
    comp: Computation
    ty: object


def translate(m, direction: str = CBV, strength: str = DEPENDENT, ctx: tuple = ()) -> Translation:
    """Translate a surface judgement ``ctx |- m``.

    With ``strength='weak'`` a dependent eliminator is an error: the weak
    translation is the one meant for the Minus checker.
    """
    if strength not in (WEAK, DEPENDENT):
        raise ValueError(f"unknown strength {strength!r}")
    if strength == WEAK and sf.uses_strong_elimination(m):
        raise TranslationError("dependent elimination in a weak translation")
    t = translator(direction)
    g, env = translate_context(ctx, direction)
    ty = t.synth(m, env)
    comp = t.term(m, env, ty)
    return Translation(g, comp, t.ctype(ty, env))


# -- complex values ----------------------------------------------------------


def eliminate_complex_values(m: Computation) -> Computation:
    """An equal computation of the same type without complex values.

    Sub-computations are cleaned first; then complex values are lifted out of
    the value positions of each node one at a time, innermost first.
    """
    m = _descend(m)
    out = hoist_once(m)
    return m if out is None else eliminate_complex_values(out)


def _descend(t):
    if not isinstance(t, Node) or isinstance(t, Type):
        return t
    spec = _spec(type(t))
    if not spec:
        return t
    new = [_field(getattr(t, name)) for name, _ in spec]
    if all(a is getattr(t, name) for a, (name, _) in zip(new, spec)):
        return t
    return type(t)(*new)


def _field(v):
    if isinstance(v, tuple):
        out = tuple(_field(x) for x in v)
        return v if all(a is b for a, b in zip(out, v)) else out
    if isinstance(v, Computation):
        return eliminate_complex_values(v)
    if isinstance(v, Value):
        return _descend(v)
    return v
