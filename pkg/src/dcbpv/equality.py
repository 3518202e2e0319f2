"""Judgmental equality by directed rewriting plus untyped eta comparison.

Normal forms are computed bottom-up: children first, then a root rewrite,
then the result is normalized again.  The oriented equations are the beta
rules, ``to``-associativity, the commutation of ``to`` with tuples and
lambdas, the algebraicity of effects with respect to ``to``, and the
contractions ``thunk force V ~> V`` and ``M to x. return x ~> M``.
Application and projection are pushed through effect operations; both
rules are consequences of the effect/lambda laws together with beta.
Stuck complex values in value positions of computations are hoisted into
computation-level matches, and inside a match on a variable the variable is
replaced by the branch's pattern; both are instances of the eta laws for
positive types.

Normal forms carry no annotations (motives, domains, effect result types):
they exist only to be compared.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import syntax as s
from .syntax import (
    App, Choose, Diverge, Error, Force, Inj, Lam, LetC, LetV, Mu, Pair, PmId, PmIdV,
    PmPair, PmPairV, PmSum, PmSumV, PmUnit, PmUnitV, Print, Proj, Read, Refl, Return,
    Thunk, ToIn, Tuple, Unit, Var, Write, instantiate, shift, subst, swap01,
)

DEFAULT_FUEL = 10**6

_ANNOTATIONS = frozenset({"motive", "head_ty", "dom", "ty"})


class FuelExhausted(Exception):
    def __init__(self, fuel: int):
        self.fuel = fuel
        super().__init__(f"normalization fuel exhausted after {fuel} rule applications")


@dataclass(frozen=True)
class NormalForm:
    term: object
    fuel_used: int


class Normalizer:
    def __init__(self, fuel: int = DEFAULT_FUEL):
        self.fuel = fuel
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.fuel:
            raise FuelExhausted(self.fuel)

    def nf(self, t):
        if isinstance(t, tuple):
            return tuple(self.nf(x) for x in t)
        if not isinstance(t, s.Node) or isinstance(t, Var):
            return t
        spec = s._spec(type(t))
        if spec:
            args = []
            for name, _ in spec:
                v = getattr(t, name)
                args.append(None if name in _ANNOTATIONS else self.nf(v))
            t = type(t)(*args)
        rule = _RULES.get(type(t))
        if rule is None:
            return t
        out = rule(t)
        if out is None:
            return t
        self.tick()
        return self.nf(out)


# Complex values in value positions of a computation are hoisted into
# computation-level matches: ``return (pm V as {1 x. W1 | 2 x. W2})`` becomes
# ``pm V as {1 x. return W1 | 2 x. return W2}``.  The same step drives
# complex-value elimination, so the two always agree.

_VALUE_FIELDS = {
    Return: ("v",),
    Force: ("v",),
    App: ("arg",),
    LetC: ("bound",),
    PmSum: ("scrutinee",),
    PmUnit: ("scrutinee",),
    PmPair: ("scrutinee",),
    PmId: ("scrutinee",),
}
_VALUE_CTORS = {Inj: ("payload",), Pair: ("fst", "snd"), Refl: ("subject",)}


def _find_complex(v, path=()):
    if isinstance(v, s.COMPLEX_VALUES):
        return path
    for f in _VALUE_CTORS.get(type(v), ()):
        p = _find_complex(getattr(v, f), path + (f,))
        if p is not None:
            return p
    return None


def _get_path(t, path):
    for f in path:
        t = getattr(t, f)
    return t


def _put_path(t, path, new):
    if not path:
        return new
    return replace(t, **{path[0]: _put_path(getattr(t, path[0]), path[1:], new)})


def hoist_once(m):
    """Lift the leftmost complex value out of a value position of ``m``.

    Only positions reachable through injections, pairs and ``refl`` count;
    thunks delimit their own computations.  Returns None if there is none.
    """
    for f in _VALUE_FIELDS.get(type(m), ()):
        p = _find_complex(getattr(m, f))
        if p is None:
            continue
        path = (f,) + p
        cv = _get_path(m, path)
        if isinstance(cv, LetV):
            return LetC(cv.bound, _put_path(shift(m, 1), path, cv.body), cv.ty)
        if isinstance(cv, PmUnitV):
            return PmUnit(cv.scrutinee, (_put_path(m, path, cv.branches[0]),))
        cls, k = {PmSumV: (PmSum, 1), PmPairV: (PmPair, 2), PmIdV: (PmId, 1)}[type(cv)]
        lifted = shift(m, k)
        return cls(cv.scrutinee, tuple(_put_path(lifted, path, w) for w in cv.branches))
    return None


def _first(*rules):
    def rule(t):
        for r in rules:
            out = r(t)
            if out is not None:
                return out
        return None

    return rule


# Each rule inspects a node whose children are already normal and returns the
# rewritten term, or None when no rule applies at the root.


def _to_in(t: ToIn):
    m, n = t.head, t.body
    if isinstance(m, Return):
        return subst(n, m.v)
    if isinstance(m, ToIn):
        return ToIn(m.head, ToIn(m.body, shift(n, 1, 1)))
    if isinstance(m, Diverge):
        return Diverge()
    if isinstance(m, Error):
        return Error(m.name)
    if isinstance(m, Choose):
        return Choose(tuple(ToIn(a, n) for a in m.alternatives))
    if isinstance(m, Read):
        return Read(tuple((st, ToIn(a, n)) for st, a in m.branches))
    if isinstance(m, Print):
        return Print(m.letter, ToIn(m.rest, n))
    if isinstance(m, Write):
        return Write(m.state, ToIn(m.rest, n))
    if n == Return(Var(0)):
        return m
    if isinstance(n, s.Tuple):
        return Tuple(tuple(ToIn(m, c) for c in n.components))
    if isinstance(n, Lam):
        return Lam(ToIn(shift(m, 1), swap01(n.body)))
    return None


def _through_effect(m, wrap):
    """Push an elimination ``wrap`` through an effect operation ``m``."""
    if isinstance(m, Diverge):
        return Diverge()
    if isinstance(m, Error):
        return Error(m.name)
    if isinstance(m, Print):
        return Print(m.letter, wrap(m.rest))
    if isinstance(m, Write):
        return Write(m.state, wrap(m.rest))
    if isinstance(m, Choose):
        return Choose(tuple(wrap(a) for a in m.alternatives))
    if isinstance(m, Read):
        return Read(tuple((st, wrap(a)) for st, a in m.branches))
    return None


def _app(t: App):
    if isinstance(t.fn, Lam):
        return subst(t.fn.body, t.arg)
    return _through_effect(t.fn, lambda m: App(t.arg, m))


def _proj(t: Proj):
    if isinstance(t.target, Tuple):
        comps = t.target.components
        if 1 <= t.tag <= len(comps):
            return comps[t.tag - 1]
        return None
    return _through_effect(t.target, lambda m: Proj(t.tag, m))


def _force(t: Force):
    if isinstance(t.v, Thunk):
        return t.v.body
    return None


def _thunk(t: Thunk):
    if isinstance(t.body, Force):
        return t.body.v
    return None


def _let(t):
    return subst(t.body, t.bound)


def _pm_sum(t):
    v = t.scrutinee
    if isinstance(v, Inj) and 1 <= v.tag <= len(t.branches):
        return subst(t.branches[v.tag - 1], v.payload)
    return None


def _pm_unit(t):
    if isinstance(t.scrutinee, Unit):
        return t.branches[0]
    return None


def _pm_pair(t):
    v = t.scrutinee
    if isinstance(v, Pair):
        return instantiate(t.branches[0], [v.fst, v.snd])
    return None


def _pm_id(t):
    v = t.scrutinee
    if isinstance(v, Refl):
        return subst(t.branches[0], v.subject)
    return None


def _refine(t):
    """Inside each branch of a match on a variable, that variable is the pattern.

    An instance of the eta laws for positive types; it lets nested matches
    on one variable collapse.
    """
    v = t.scrutinee
    if not isinstance(v, Var):
        return None
    if isinstance(t, (PmSum, PmSumV)):
        n = len(t.branches)
        pats = [(1, Inj(i, n, Var(0))) for i in range(1, n + 1)]
    elif isinstance(t, (PmUnit, PmUnitV)):
        pats = [(0, Unit())]
    elif isinstance(t, (PmPair, PmPairV)):
        pats = [(2, Pair(Var(1), Var(0)))]
    else:
        pats = [(1, Refl(Var(0)))]
    branches = tuple(_replace(b, v.index + k, pat) for b, (k, pat) in zip(t.branches, pats))
    if branches == t.branches:
        return None
    return replace(t, branches=branches)


def _read(t: Read):
    ordered = tuple(sorted(t.branches, key=lambda b: b[0]))
    if ordered != t.branches:
        return Read(ordered)
    return None


_RULES = {
    ToIn: _to_in,
    App: _first(_app, hoist_once),
    Proj: _proj,
    Return: hoist_once,
    Force: _first(_force, hoist_once),
    Thunk: _thunk,
    LetC: _let,
    LetV: _let,
    PmSum: _first(_pm_sum, _refine, hoist_once),
    PmSumV: _first(_pm_sum, _refine),
    PmUnit: _first(_pm_unit, _refine, hoist_once),
    PmUnitV: _first(_pm_unit, _refine),
    PmPair: _first(_pm_pair, _refine, hoist_once),
    PmPairV: _first(_pm_pair, _refine),
    PmId: _first(_pm_id, _refine, hoist_once),
    PmIdV: _first(_pm_id, _refine),
    Read: _read,
}


def normalize(t, fuel: int = DEFAULT_FUEL) -> NormalForm:
    n = Normalizer(fuel)
    return NormalForm(n.nf(t), n.used)


class Comparer:
    """Compares normal forms up to eta for lambdas, tuples and thunks.

    ``mu_unfold`` bounds how many fixpoint unfoldings each side may take;
    ``eta_id`` enables reflection of identity hypotheses found in ``ctx``.
    """

    def __init__(self, normalizer: Normalizer, mu_unfold: int = 0, eta_id: bool = False, ctx=None):
        self.n = normalizer
        self.unfold_left = mu_unfold
        self.unfold_right = mu_unfold
        self.eta_id = eta_id
        self.ctx = ctx

    def equal(self, a, b) -> bool:
        a, b = self.n.nf(a), self.n.nf(b)
        if self.eq(a, b):
            return True
        if self.eta_id and self.ctx is not None:
            return self._reflect(a, b, set())
        return False

    def eq(self, a, b) -> bool:
        if a == b:
            return True
        if isinstance(a, tuple) or isinstance(b, tuple):
            return (
                isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b)
                and all(self.eq(x, y) for x, y in zip(a, b))
            )
        if not isinstance(a, s.Node) or not isinstance(b, s.Node):
            return False
        if isinstance(a, Lam) != isinstance(b, Lam):
            lam, other = (a, b) if isinstance(a, Lam) else (b, a)
            if isinstance(other, s.Computation):
                return self.eq(lam.body, self.n.nf(App(Var(0), shift(other, 1))))
        if isinstance(a, Tuple) != isinstance(b, Tuple):
            tup, other = (a, b) if isinstance(a, Tuple) else (b, a)
            if isinstance(other, s.Computation):
                return all(
                    self.eq(c, self.n.nf(Proj(i, other)))
                    for i, c in enumerate(tup.components, 1)
                )
        if isinstance(a, Thunk) != isinstance(b, Thunk):
            th, other = (a, b) if isinstance(a, Thunk) else (b, a)
            if isinstance(other, s.Value):
                return self.eq(th.body, self.n.nf(Force(other)))
        if isinstance(a, Mu) and isinstance(b, Mu) and self._fields_eq(a, b):
            return True
        # unfoldings are budgeted along each comparison path
        if isinstance(a, Mu) and self.unfold_left > 0:
            self.unfold_left -= 1
            try:
                if self.eq(self.n.nf(subst(a.body, Thunk(a))), b):
                    return True
            finally:
                self.unfold_left += 1
        if isinstance(b, Mu) and self.unfold_right > 0:
            self.unfold_right -= 1
            try:
                if self.eq(a, self.n.nf(subst(b.body, Thunk(b)))):
                    return True
            finally:
                self.unfold_right += 1
        return type(a) is type(b) and not isinstance(a, Mu) and self._fields_eq(a, b)

    def _fields_eq(self, a, b) -> bool:
        return all(self.eq(getattr(a, f), getattr(b, f)) for f, _ in s._spec(type(a)))

    def _reflect(self, a, b, used) -> bool:
        """Identify the endpoints of identity hypotheses, one at a time."""
        ctx = self.ctx
        for i in range(len(ctx)):
            if i in used:
                continue
            ty = self.n.nf(ctx.lookup(i))
            if not isinstance(ty, s.Id):
                continue
            for var, other in ((ty.lhs, ty.rhs), (ty.rhs, ty.lhs)):
                if not isinstance(var, Var) or var == other or s.mentions(other, var.index):
                    continue
                a2 = self.n.nf(_replace(a, var.index, other))
                b2 = self.n.nf(_replace(b, var.index, other))
                self.n.tick()
                if self.eq(a2, b2) or self._reflect(a2, b2, used | {i}):
                    return True
        return False


def _replace(t, index: int, v):
    """Replace free ``Var(index)`` by ``v`` without removing the binder."""

    def fn(var, depth):
        if var.index == index + depth:
            return shift(v, depth)
        return var

    return s.map_vars(t, fn)


def conv(a, b, classifier=None, fuel: int = DEFAULT_FUEL, *, ctx=None, eta_id: bool = False,
         mu_unfold: int = 0) -> bool:
    """Decide ``a = b`` at ``classifier`` (a type, or None for types themselves).

    The comparison is untyped; ``classifier`` is accepted for the judgement's
    shape.  Raises :class:`FuelExhausted` when the budget runs out.
    """
    return Comparer(Normalizer(fuel), mu_unfold, eta_id, ctx).equal(a, b)


def conv_vtype(a: s.VType, b: s.VType, fuel: int = DEFAULT_FUEL, **kw) -> bool:
    return conv(a, b, None, fuel, **kw)


def conv_ctype(a: s.CType, b: s.CType, fuel: int = DEFAULT_FUEL, **kw) -> bool:
    return conv(a, b, None, fuel, **kw)
