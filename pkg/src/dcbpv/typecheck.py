"""Bidirectional type checking for dCBPV- and dCBPV+.

Introduction forms are checked, elimination forms inferred.  Motives on
``to``/``pm`` and annotations on lambdas and effect operations are
optional; when one is missing the checker falls back to the rules that do
not need it, and reports ``MotiveRequired`` when none applies.

In ``Minus`` mode a sequencing ``M to x. N`` whose result type depends on
the head is accepted only when ``M`` is judgmentally ``return V``.  In
``Plus`` mode the dependent Kleisli rule is available: the motive binds
``z : U(F A)``, the body is checked at ``B[thunk return x/z]`` and the
result type is ``B[thunk M/z]``.  With subtyping on, the generative steps
``M <= print m M``, ``M <= write s M``, ``M_i <= choose{..M_i..}`` and
``M_s <= read{..M_s..}`` are admitted at computation positions in types.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import syntax as s
from .effects import ALL, EffectNotEnabled, EffectSignature
from .equality import DEFAULT_FUEL, Comparer, FuelExhausted, Normalizer
from .syntax import (
    App, ArgFrame, Choose, Context, Diverge, Error, F, Force, Id, Inj, Lam, LetC, LetV,
    Mu, Nil, One, Pair, Pi, PiN, Print, Proj, ProjFrame, Read, Refl, Return, Sigma, SumN,
    Thunk, ToFrame, ToIn, Tuple, U, Unit, Var, Write, instantiate, shift, subst, tr,
)

MISMATCH = "Mismatch"
DEPENDENT_SEQUENCING = "DependentSequencingNotAllowed"
UNBOUND_INDEX = "UnboundIndex"
ARITY_MISMATCH = "ArityMismatch"
EFFECT_NOT_ENABLED = "EffectNotEnabled"
MOTIVE_REQUIRED = "MotiveRequired"
SUBTYPE_FAILURE = "SubtypeFailure"
FUEL_EXHAUSTED = "FuelExhausted"

ERROR_KINDS = (
    MISMATCH, DEPENDENT_SEQUENCING, UNBOUND_INDEX, ARITY_MISMATCH,
    EFFECT_NOT_ENABLED, MOTIVE_REQUIRED, SUBTYPE_FAILURE, FUEL_EXHAUSTED,
)


@dataclass(frozen=True)
class Mode:
    plus: bool = False
    subtyping: bool = False

    def __post_init__(self):
        if self.subtyping and not self.plus:
            raise ValueError("subtyping requires plus mode")

    @property
    def name(self) -> str:
        if not self.plus:
            return "minus"
        return "plus" if self.subtyping else "plus (no subtyping)"


MINUS = Mode()
PLUS = Mode(plus=True, subtyping=True)
PLUS_NO_SUBTYPING = Mode(plus=True, subtyping=False)


class TypingError(Exception):
    def __init__(self, kind: str, message: str, expected=None, actual=None, position=None):
        assert kind in ERROR_KINDS, kind
        self.kind = kind
        self.message = message
        self.expected = expected
        self.actual = actual
        self.position = position
        super().__init__(f"[{kind}] {message}")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "message": self.message,
            "expected": None if self.expected is None else show(self.expected),
            "actual": None if self.actual is None else show(self.actual),
            "position": self.position,
        }


def show(t) -> str:
    try:
        from .parser import pretty
    except ImportError:  # pragma: no cover
        return repr(t)
    try:
        return pretty(t)
    except Exception:
        return repr(t)


def _strengthen(t, k: int):
    """Drop the ``k`` innermost variables of ``t``; None if one is used."""
    if any(i < k for i in s.free_indices(t)):
        return None
    return shift(t, -k)


class Checker:
    """A type checking session: a mode, an effect signature and a fuel budget.

    ``fuel`` bounds each normalization or comparison separately.
    ``mu_unfold`` defaults to one unfolding in plus mode and none otherwise.
    """

    def __init__(self, mode: Mode = MINUS, sig: EffectSignature = ALL, fuel: int = DEFAULT_FUEL,
                 eta_id: bool = False, mu_unfold: Optional[int] = None):
        self.mode = mode
        self.sig = sig
        self.fuel = fuel
        self.eta_id = eta_id
        self.mu_unfold = (1 if mode.plus else 0) if mu_unfold is None else mu_unfold

    # -- equality and subtyping ------------------------------------------

    def _comparer(self, g) -> Comparer:
        return Comparer(Normalizer(self.fuel), self.mu_unfold, self.eta_id, g)

    def nf(self, t):
        return Normalizer(self.fuel).nf(t)

    def conv(self, g, a, b) -> bool:
        return self._comparer(g).equal(a, b)

    def subtype(self, g, a, b) -> bool:
        """``a <= b`` by conversion interleaved with the generative steps."""
        if not (self.mode.plus and self.mode.subtyping):
            return self.conv(g, a, b)
        cmp = self._comparer(g)
        a, b = cmp.n.nf(a), cmp.n.nf(b)
        if cmp.eq(a, b):
            return True
        if self.eta_id and cmp._reflect(a, b, set()):
            return True
        return self._sub(cmp, a, b)

    def _sub(self, cmp: Comparer, x, y) -> bool:
        if cmp.eq(x, y):
            return True
        if isinstance(x, tuple) or isinstance(y, tuple):
            return (
                isinstance(x, tuple) and isinstance(y, tuple) and len(x) == len(y)
                and all(self._sub(cmp, a, b) for a, b in zip(x, y))
            )
        if isinstance(x, s.Computation):
            cmp.n.tick()
            if isinstance(y, (Print, Write)) and self._sub(cmp, x, y.rest):
                return True
            if isinstance(y, Choose) and any(self._sub(cmp, x, a) for a in y.alternatives):
                return True
            if isinstance(y, Read) and any(self._sub(cmp, x, m) for _, m in y.branches):
                return True
        if isinstance(x, s.Node) and type(x) is type(y):
            return all(self._sub(cmp, getattr(x, f), getattr(y, f)) for f, _ in s._spec(type(x)))
        return False

    def compare(self, g, actual, expected, what: str = "type"):
        if self.conv(g, actual, expected):
            return
        if self.mode.plus and self.mode.subtyping and self.subtype(g, actual, expected):
            return
        raise TypingError(
            MISMATCH,
            f"{what} mismatch: expected {show(expected)}, got {show(actual)}",
            expected, actual,
        )

    def require(self, m):
        try:
            self.sig.require(m)
        except EffectNotEnabled as e:
            raise TypingError(EFFECT_NOT_ENABLED, str(e)) from None

    # -- contexts and types ----------------------------------------------

    def check_context(self, g: Context):
        for k, entry in enumerate(g.entries):
            self.check_vtype(Context(g.entries[:k]), entry)
        if g.stoup is not None:
            self.check_ctype(Context(g.entries), g.stoup)

    def check_vtype(self, g, a):
        if isinstance(a, U):
            self.check_ctype(g, a.b)
        elif isinstance(a, SumN):
            for c in a.components:
                self.check_vtype(g, c)
        elif isinstance(a, One):
            pass
        elif isinstance(a, Sigma):
            self.check_vtype(g, a.base)
            self.check_vtype(g.extend(a.base), a.fiber)
        elif isinstance(a, Id):
            self.check_vtype(g, a.carrier)
            self.check_value(g, a.lhs, a.carrier)
            self.check_value(g, a.rhs, a.carrier)
        else:
            raise TypingError(MISMATCH, f"not a value type: {show(a)}", actual=a)

    def check_ctype(self, g, b):
        if isinstance(b, F):
            self.check_vtype(g, b.a)
        elif isinstance(b, PiN):
            for c in b.components:
                self.check_ctype(g, c)
        elif isinstance(b, Pi):
            self.check_vtype(g, b.base)
            self.check_ctype(g.extend(b.base), b.body)
        else:
            raise TypingError(MISMATCH, f"not a computation type: {show(b)}", actual=b)

    # -- values ------------------------------------------------------------

    def infer_value(self, g, v):
        if isinstance(v, Var):
            try:
                return g.lookup(v.index)
            except IndexError:
                raise TypingError(UNBOUND_INDEX, f"index {v.index} unbound in a context of length {len(g)}") from None
        if isinstance(v, Thunk):
            return U(self.infer_comp(g, v.body))
        if isinstance(v, Inj):
            if not 1 <= v.tag <= v.arity:
                raise TypingError(ARITY_MISMATCH, f"injection {v.tag} out of range for arity {v.arity}")
            if v.ty is None:
                raise TypingError(MOTIVE_REQUIRED, "cannot infer the sum type of an injection; annotate it")
            self.check_vtype(g, v.ty)
            self.check_value(g, v, v.ty)
            return v.ty
        if isinstance(v, Unit):
            return One()
        if isinstance(v, Pair):
            a = self.infer_value(g, v.fst)
            b = self.infer_value(g, v.snd)
            return Sigma(a, shift(b, 1))
        if isinstance(v, Refl):
            a = self.infer_value(g, v.subject)
            return Id(a, v.subject, v.subject)
        if isinstance(v, LetV):
            a = self._bound_type(g, v)
            b = self.infer_value(g.extend(a), v.body)
            return subst(b, v.bound)
        if isinstance(v, s.COMPLEX_VALUES):
            return self._infer_pm(g, v, value_level=True)
        raise TypingError(MISMATCH, f"not a value: {show(v)}", actual=v)

    def _bound_type(self, g, t):
        """Type of the bound value of a ``let``, from its annotation if any."""
        if t.ty is None:
            return self.infer_value(g, t.bound)
        self.check_vtype(g, t.ty)
        self.check_value(g, t.bound, t.ty)
        return t.ty

    def check_value(self, g, v, a):
        if isinstance(v, Inj):
            if not isinstance(a, SumN):
                raise TypingError(MISMATCH, f"injection checked against {show(a)}", a, v)
            if v.arity != len(a.components) or not 1 <= v.tag <= v.arity:
                raise TypingError(
                    ARITY_MISMATCH,
                    f"injection {v.tag}/{v.arity} against a sum of arity {len(a.components)}",
                    a, v,
                )
            self.check_value(g, v.payload, a.components[v.tag - 1])
            if v.ty is not None and v.ty is not a:
                self.compare(g, v.ty, a)
        elif isinstance(v, Pair) and isinstance(a, Sigma):
            self.check_value(g, v.fst, a.base)
            self.check_value(g, v.snd, subst(a.fiber, v.fst))
        elif isinstance(v, Thunk) and isinstance(a, U):
            self.check_comp(g, v.body, a.b)
        elif isinstance(v, Refl) and isinstance(a, Id):
            self.check_value(g, v.subject, a.carrier)
            if not all(self.conv(g, end, v.subject) for end in (a.lhs, a.rhs)):
                try:
                    self.compare(g, Id(a.carrier, v.subject, v.subject), a)
                except TypingError:
                    raise TypingError(MISMATCH, f"refl {show(v.subject)} does not prove {show(a)}", a, v) from None
        elif isinstance(v, LetV):
            b = self._bound_type(g, v)
            self.check_value(g.extend(b), v.body, shift(a, 1))
        elif isinstance(v, s.COMPLEX_VALUES) and v.motive is None:
            self._check_pm(g, v, a, value_level=True)
        else:
            self.compare(g, self.infer_value(g, v), a)

    # -- pattern matching (shared by values and computations) ----------------

    def _pm_shape(self, g, t):
        """Cases of a pattern match on ``t.scrutinee``.

        Returns ``(motive_ext, result_args, cases)`` where ``motive_ext`` are
        the types the motive binds, ``result_args`` instantiate the motive for
        the whole match, and each case is ``(branch_ext, motive_args)``.
        """
        ty = self.infer_value(g, t.scrutinee)
        v = t.scrutinee
        n = len(t.branches)
        if isinstance(t, (s.PmSum, s.PmSumV)):
            if not isinstance(ty, SumN):
                raise TypingError(MISMATCH, f"pm on a non-sum of type {show(ty)}", actual=ty)
            if len(ty.components) != n:
                raise TypingError(
                    ARITY_MISMATCH, f"{n} branches for a sum of arity {len(ty.components)}", ty,
                )
            cases = [((a,), [Inj(i, n, Var(0), shift(ty, 1))]) for i, a in enumerate(ty.components, 1)]
            return (ty,), [v], cases
        if n != 1:
            raise TypingError(ARITY_MISMATCH, f"pattern match needs exactly one branch, got {n}")
        if isinstance(t, (s.PmUnit, s.PmUnitV)):
            if not isinstance(ty, One):
                raise TypingError(MISMATCH, f"unit pm on type {show(ty)}", One(), ty)
            return (ty,), [v], [((), [Unit()])]
        if isinstance(t, (s.PmPair, s.PmPairV)):
            if not isinstance(ty, Sigma):
                raise TypingError(MISMATCH, f"pair pm on type {show(ty)}", actual=ty)
            return (ty,), [v], [((ty.base, ty.fiber), [Pair(Var(1), Var(0))])]
        if not isinstance(ty, Id):
            raise TypingError(MISMATCH, f"identity pm on type {show(ty)}", actual=ty)
        a = ty.carrier
        ext = (a, shift(a, 1), Id(shift(a, 2), Var(1), Var(0)))
        return ext, [ty.lhs, ty.rhs, v], [((a,), [Var(0), Var(0), Refl(Var(0))])]

    def _branch_fns(self, value_level):
        if value_level:
            return self.check_vtype, self.infer_value, self.check_value
        return self.check_ctype, self.infer_comp, self.check_comp

    def _infer_pm(self, g, t, value_level):
        check_ty, infer, check = self._branch_fns(value_level)
        ext, result_args, cases = self._pm_shape(g, t)
        if t.motive is not None:
            check_ty(g.extend(*ext), t.motive)
            mb = len(ext)
            for (bext, margs), branch in zip(cases, t.branches):
                k = len(bext)
                target = instantiate(shift(t.motive, k, mb), margs)
                check(g.extend(*bext), branch, target)
            return instantiate(t.motive, result_args)
        result = None
        for (bext, _), branch in zip(cases, t.branches):
            k = len(bext)
            bt = infer(g.extend(*bext), branch)
            st = _strengthen(bt, k)
            if st is None:
                raise TypingError(
                    MOTIVE_REQUIRED,
                    "branch type depends on the pattern variables; annotate the match with a motive",
                    actual=bt,
                )
            if result is None:
                result = st
            else:
                self.compare(g, st, result, "branch type")
        if result is None:
            raise TypingError(MOTIVE_REQUIRED, "empty match needs a motive or an expected type")
        return result

    def _check_pm(self, g, t, expected, value_level):
        check = self._branch_fns(value_level)[2]
        if t.motive is not None:
            self.compare(g, self._infer_pm(g, t, value_level), expected)
            return
        ext, _, cases = self._pm_shape(g, t)
        try:
            for (bext, _), branch in zip(cases, t.branches):
                check(g.extend(*bext), branch, shift(expected, len(bext)))
        except TypingError as e:
            motive = _abstract_scrutinee(t.scrutinee, expected, len(ext))
            if motive is None or not s.mentions(motive, 0):
                raise
            try:
                self.compare(g, self._infer_pm(g, replace(t, motive=motive), value_level), expected)
            except TypingError:
                raise e from None

    # -- computations --------------------------------------------------------

    def infer_comp(self, g, m):
        if isinstance(m, Return):
            return F(self.infer_value(g, m.v))
        if isinstance(m, Force):
            ty = self.infer_value(g, m.v)
            if not isinstance(ty, U):
                raise TypingError(MISMATCH, f"force of a value of type {show(ty)}", actual=ty)
            return ty.b
        if isinstance(m, LetC):
            a = self._bound_type(g, m)
            b = self.infer_comp(g.extend(a), m.body)
            return subst(b, m.bound)
        if isinstance(m, s.PM_COMPUTATIONS):
            return self._infer_pm(g, m, value_level=False)
        if isinstance(m, Tuple):
            return PiN(tuple(self.infer_comp(g, c) for c in m.components))
        if isinstance(m, Proj):
            ty = self.infer_comp(g, m.target)
            if not isinstance(ty, PiN):
                raise TypingError(MISMATCH, f"projection from type {show(ty)}", actual=ty)
            if not 1 <= m.tag <= len(ty.components):
                raise TypingError(ARITY_MISMATCH, f"projection {m.tag} from arity {len(ty.components)}", actual=ty)
            return ty.components[m.tag - 1]
        if isinstance(m, Lam):
            if m.dom is None:
                raise TypingError(MOTIVE_REQUIRED, "cannot infer the domain of an unannotated lambda")
            self.check_vtype(g, m.dom)
            return Pi(m.dom, self.infer_comp(g.extend(m.dom), m.body))
        if isinstance(m, App):
            if isinstance(m.fn, Lam) and m.fn.dom is None:
                a = self.infer_value(g, m.arg)
                return subst(self.infer_comp(g.extend(a), m.fn.body), m.arg)
            ty = self.infer_comp(g, m.fn)
            if not isinstance(ty, Pi):
                raise TypingError(MISMATCH, f"application of a computation of type {show(ty)}", actual=ty)
            self.check_value(g, m.arg, ty.base)
            return subst(ty.body, m.arg)
        if isinstance(m, ToIn):
            return self._infer_to(g, m)
        if isinstance(m, (Diverge, Error, Mu)):
            self.require(m)
            if m.ty is None:
                raise TypingError(MOTIVE_REQUIRED, f"{type(m).__name__.lower()} needs a type annotation here")
            self.check_ctype(g, m.ty)
            if isinstance(m, Mu):
                self.check_comp(g.extend(U(m.ty)), m.body, shift(m.ty, 1))
            return m.ty
        if isinstance(m, (Print, Write)):
            self.require(m)
            return self.infer_comp(g, m.rest)
        if isinstance(m, Choose):
            self.require(m)
            if not m.alternatives:
                raise TypingError(ARITY_MISMATCH, "choose needs at least one alternative")
            types = [self.infer_comp(g, a) for a in m.alternatives]
            return self._join(g, types, lambda parts: Choose(tuple(parts)))
        if isinstance(m, Read):
            self.require(m)
            self._check_read_total(m)
            states = [st for st, _ in m.branches]
            types = [self.infer_comp(g, b) for _, b in m.branches]
            return self._join(g, types, lambda parts: Read(tuple(zip(states, parts))))
        raise TypingError(MISMATCH, f"not a computation: {show(m)}", actual=m)

    def _check_read_total(self, m: Read):
        states = [st for st, _ in m.branches]
        if sorted(states) != sorted(self.sig.states) or len(set(states)) != len(states):
            raise TypingError(
                ARITY_MISMATCH,
                f"read branches {states} do not cover the states {list(self.sig.states)} exactly",
            )

    def _join(self, g, types, wrap):
        first = types[0]
        if all(self.conv(g, t, first) for t in types[1:]):
            return first
        if not (self.mode.plus and self.mode.subtyping):
            raise TypingError(
                MISMATCH, f"branch types differ: {', '.join(show(t) for t in types)}", first, types[1],
            )
        nfs = [self.nf(t) for t in types]
        joined = _antiunify(nfs, wrap)
        if joined is not None and all(self.subtype(g, t, joined) for t in nfs):
            return joined
        for cand in nfs:
            if all(self.subtype(g, t, cand) for t in nfs):
                return cand
        raise TypingError(SUBTYPE_FAILURE, f"no common supertype of {', '.join(show(t) for t in types)}")

    def _head_type(self, g, m: ToIn):
        if m.head_ty is not None:
            self.check_vtype(g, m.head_ty)
            self.check_comp(g, m.head, F(m.head_ty))
            return m.head_ty
        ht = self.infer_comp(g, m.head)
        if not isinstance(ht, F):
            raise TypingError(MISMATCH, f"sequencing a computation of type {show(ht)}", actual=ht)
        return ht.a

    def _returned(self, m):
        """``V`` if ``m`` is judgmentally ``return V``, else None."""
        n = self.nf(m)
        return n.v if isinstance(n, Return) else None

    def _infer_to(self, g, m: ToIn):
        a = self._head_type(g, m)
        gx = g.extend(a)
        if m.motive is not None:
            self.check_ctype(g.extend(U(F(a))), m.motive)
            dependent = s.mentions(m.motive, 0)
            if dependent and not self.mode.plus and self._returned(m.head) is None:
                raise TypingError(
                    DEPENDENT_SEQUENCING,
                    "the motive depends on the head, which is not judgmentally a return",
                    actual=m.motive,
                )
            self.check_comp(gx, m.body, subst(shift(m.motive, 1, 1), tr(Var(0))))
            return subst(m.motive, Thunk(m.head))
        b = self.infer_comp(gx, m.body)
        st = _strengthen(b, 1)
        if st is not None:
            return st
        v = self._returned(m.head)
        if v is not None:
            return subst(b, v)
        if not self.mode.plus:
            raise TypingError(
                DEPENDENT_SEQUENCING,
                "the result type mentions the bound variable but the head is not judgmentally a return",
                actual=b,
            )
        motive = _abstract_tr(b)
        if motive is None:
            raise TypingError(
                MOTIVE_REQUIRED,
                "the result type depends on the bound variable other than through thunk return; annotate a motive",
                actual=b,
            )
        return subst(motive, Thunk(m.head))

    def check_comp(self, g, m, c):
        if isinstance(m, (Diverge, Error)):
            self.require(m)
            if m.ty is not None:
                self.check_ctype(g, m.ty)
                self.compare(g, m.ty, c)
        elif isinstance(m, Mu):
            self.require(m)
            ty = c
            if m.ty is not None:
                self.check_ctype(g, m.ty)
                ty = m.ty
            self.check_comp(g.extend(U(ty)), m.body, shift(ty, 1))
            if m.ty is not None:
                self.compare(g, ty, c)
        elif isinstance(m, Lam) and isinstance(c, Pi):
            if m.dom is not None:
                self.check_vtype(g, m.dom)
                self.compare(g, c.base, m.dom, "domain")
            self.check_comp(g.extend(c.base), m.body, c.body)
        elif isinstance(m, Lam) and m.dom is None:
            raise TypingError(MISMATCH, f"lambda checked against {show(c)}", c, m)
        elif isinstance(m, Tuple) and isinstance(c, PiN):
            if len(m.components) != len(c.components):
                raise TypingError(
                    ARITY_MISMATCH, f"tuple of {len(m.components)} against arity {len(c.components)}", c,
                )
            for x, b in zip(m.components, c.components):
                self.check_comp(g, x, b)
        elif isinstance(m, Return) and isinstance(c, F):
            self.check_value(g, m.v, c.a)
        elif isinstance(m, Force) and isinstance(m.v, Thunk):
            self.check_comp(g, m.v.body, c)
        elif isinstance(m, App) and isinstance(m.fn, Lam):
            # a redex: check the argument, then the body at the expected type
            fn = m.fn
            if fn.dom is not None:
                self.check_vtype(g, fn.dom)
                self.check_value(g, m.arg, fn.dom)
                a = fn.dom
            else:
                a = self.infer_value(g, m.arg)
            try:
                self.check_comp(g.extend(a), fn.body, shift(c, 1))
            except TypingError as e:
                try:
                    self.compare(g, self.infer_comp(g, m), c)
                except TypingError:
                    raise e from None
        elif isinstance(m, LetC):
            a = self._bound_type(g, m)
            try:
                self.check_comp(g.extend(a), m.body, shift(c, 1))
            except TypingError as e:
                # the expected type may mention the bound value itself
                try:
                    self.compare(g, subst(self.infer_comp(g.extend(a), m.body), m.bound), c)
                except TypingError:
                    raise e from None
        elif isinstance(m, s.PM_COMPUTATIONS) and m.motive is None:
            self._check_pm(g, m, c, value_level=False)
        elif isinstance(m, (Print, Write)):
            self.require(m)
            self.check_comp(g, m.rest, c)
        elif isinstance(m, Choose):
            self.require(m)
            if not m.alternatives:
                raise TypingError(ARITY_MISMATCH, "choose needs at least one alternative")
            for x in m.alternatives:
                self.check_comp(g, x, c)
        elif isinstance(m, Read):
            self.require(m)
            self._check_read_total(m)
            for _, x in m.branches:
                self.check_comp(g, x, c)
        elif isinstance(m, ToIn) and m.motive is None:
            self._check_to(g, m, c)
        else:
            self.compare(g, self.infer_comp(g, m), c)

    def _check_to(self, g, m: ToIn, c):
        a = self._head_type(g, m)
        gx = g.extend(a)
        try:
            self.check_comp(gx, m.body, shift(c, 1))
            return
        except TypingError as e:
            first = e
        try:
            self.compare(g, self.infer_comp(g, m), c)
            return
        except TypingError as e:
            if e.kind == DEPENDENT_SEQUENCING:
                raise
            if not self.mode.plus:
                raise first from None
        motive = self._abstract_head(m.head, c)
        if motive is None:
            raise first
        self.check_comp(gx, m.body, subst(shift(motive, 1, 1), tr(Var(0))))

    def _abstract_head(self, head, c):
        """A motive ``B`` with ``B[thunk head/z] = c``, by abstracting thunks of ``head``."""
        target = self.nf(shift(head, 1))
        found = False

        def pred(t, depth):
            nonlocal found
            if isinstance(t, Thunk) and self.nf(t.body) == shift(target, depth):
                found = True
                return Var(depth)
            return None

        motive = _replace_nodes(shift(c, 1), pred)
        return motive if found else None

    # -- stacks and configurations -------------------------------------------

    def check_stack(self, g, stoup, k, c):
        while not isinstance(k, Nil):
            if isinstance(k, ToFrame):
                if not isinstance(stoup, F):
                    raise TypingError(MISMATCH, f"to-frame on a hole of type {show(stoup)}", actual=stoup)
                gx = g.extend(stoup.a)
                if k.motive is not None:
                    if s.mentions(k.motive, 0):
                        kind = MISMATCH if self.mode.plus else DEPENDENT_SEQUENCING
                        raise TypingError(kind, "stack frames cannot carry a dependent motive", actual=k.motive)
                    nxt = shift(k.motive, -1)
                    self.check_comp(gx, k.body, shift(nxt, 1))
                elif isinstance(k.rest, Nil):
                    self.check_comp(gx, k.body, shift(c, 1))
                    nxt = c
                else:
                    b = self.infer_comp(gx, k.body)
                    nxt = _strengthen(b, 1)
                    if nxt is None:
                        kind = MISMATCH if self.mode.plus else DEPENDENT_SEQUENCING
                        raise TypingError(kind, "a to-frame's type mentions its bound variable", actual=b)
                stoup = nxt
            elif isinstance(k, ProjFrame):
                if not isinstance(stoup, PiN):
                    raise TypingError(MISMATCH, f"projection frame on a hole of type {show(stoup)}", actual=stoup)
                if not 1 <= k.tag <= len(stoup.components):
                    raise TypingError(
                        ARITY_MISMATCH, f"projection {k.tag} from arity {len(stoup.components)}", actual=stoup,
                    )
                stoup = stoup.components[k.tag - 1]
            elif isinstance(k, ArgFrame):
                if not isinstance(stoup, Pi):
                    raise TypingError(MISMATCH, f"argument frame on a hole of type {show(stoup)}", actual=stoup)
                self.check_value(g, k.arg, stoup.base)
                stoup = subst(stoup.body, k.arg)
            else:
                raise TypingError(MISMATCH, f"not a stack: {k!r}")
            k = k.rest
        self.compare(g, stoup, c)

    def check_configuration(self, comp, stack, c, g: Context = Context()):
        """The configuration ``comp, stack`` has type ``c``.

        Checked as the plugged computation, which agrees with the stack
        rules and also accommodates dependent to-frames in plus mode.
        """
        self.check_comp(g, s.plug(comp, stack), c)


def _replace_nodes(t, pred, depth: int = 0):
    """Replace subterms for which ``pred(node, depth)`` returns a node."""
    if isinstance(t, s.Node):
        r = pred(t, depth)
        if r is not None:
            return r
        if isinstance(t, s.VarNode):
            return t
        spec = s._spec(type(t))
        if not spec:
            return t
        return type(t)(*(_replace_field(getattr(t, f), pred, depth + n) for f, n in spec))
    return t


def _replace_field(v, pred, depth):
    if isinstance(v, tuple):
        return tuple(_replace_field(x, pred, depth) for x in v)
    return _replace_nodes(v, pred, depth)


def _abstract_scrutinee(v, c, mb: int):
    """Motive for a match on the variable ``v``, read off the expected type ``c``.

    The scrutinee becomes the motive variable.  Identity matches are left
    alone: their motive also binds the endpoints.
    """
    if not isinstance(v, Var) or mb != 1:
        return None
    lifted = shift(c, 1)

    def fn(var, depth):
        return Var(depth) if var.index - depth == v.index + 1 else var

    return s.map_vars(lifted, fn)


def _abstract_tr(b):
    """Turn ``B`` over ``x`` into a motive over ``z`` by ``thunk return x -> z``.

    Returns None if ``x`` also occurs elsewhere.
    """

    def is_tr(t, depth):
        return isinstance(t, Thunk) and t.body == Return(Var(depth))

    motive = _replace_nodes(b, lambda t, d: Var(d) if is_tr(t, d) else None)
    residue = _replace_nodes(b, lambda t, d: Unit() if is_tr(t, d) else None)
    if s.mentions(residue, 0):
        return None
    return motive


def _antiunify(terms, wrap):
    """Least common generalisation of ``terms`` with effect nodes at differences."""
    first = terms[0]
    if all(t == first for t in terms):
        return first
    if all(isinstance(t, tuple) for t in terms):
        if len({len(t) for t in terms}) != 1:
            return None
        parts = [_antiunify(list(col), wrap) for col in zip(*terms)]
        return None if any(p is None for p in parts) else tuple(parts)
    if all(isinstance(t, s.Computation) for t in terms) and len({type(t) for t in terms}) > 1:
        return wrap(terms)
    if isinstance(first, s.Node) and all(type(t) is type(first) for t in terms):
        spec = s._spec(type(first))
        if spec:
            parts = []
            for f, _ in spec:
                p = _antiunify([getattr(t, f) for t in terms], wrap)
                if p is None:
                    return None
                parts.append(p)
            return type(first)(*parts)
    if all(isinstance(t, s.Computation) for t in terms):
        return wrap(terms)
    return None


# -- module-level entry points ------------------------------------------------


def _session(mode=MINUS, sig=ALL, fuel=DEFAULT_FUEL, **kw) -> Checker:
    return Checker(mode, sig, fuel, **kw)


def _guard(fn, *args):
    try:
        return fn(*args)
    except FuelExhausted as e:
        raise TypingError(FUEL_EXHAUSTED, str(e)) from None


def check_context(g, **kw):
    return _guard(_session(**kw).check_context, g)


def check_vtype(g, a, **kw):
    return _guard(_session(**kw).check_vtype, g, a)


def check_ctype(g, b, **kw):
    return _guard(_session(**kw).check_ctype, g, b)


def infer_value(g, v, **kw):
    return _guard(_session(**kw).infer_value, g, v)


def check_value(g, v, a, **kw):
    return _guard(_session(**kw).check_value, g, v, a)


def infer_computation(g, m, mode: Mode = MINUS, **kw):
    return _guard(_session(mode, **kw).infer_comp, g, m)


def check_computation(g, m, b, mode: Mode = MINUS, **kw):
    return _guard(_session(mode, **kw).check_comp, g, m, b)


def subtype_ctype(g, b1, b2, fuel: int = DEFAULT_FUEL, **kw):
    """Raise ``SubtypeFailure`` unless ``b1 <= b2`` in plus mode with subtyping."""
    chk = _session(PLUS, fuel=fuel, **kw)
    if not _guard(chk.subtype, g, b1, b2):
        raise TypingError(SUBTYPE_FAILURE, f"{show(b1)} is not a subtype of {show(b2)}", b2, b1)


def check_stack(g, stoup, k, c, mode: Mode = MINUS, **kw):
    return _guard(_session(mode, **kw).check_stack, g, stoup, k, c)


def check_configuration(cfg, c, mode: Mode = MINUS, g: Context = Context(), **kw):
    return _guard(_session(mode, **kw).check_configuration, cfg.comp, cfg.stack, c, g)
