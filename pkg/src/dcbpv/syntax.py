"""Abstract syntax of dependently typed call-by-push-value.

Every binder is a de Bruijn index.  Each node class records, per field,
how many variables that field binds (``binds`` metadata), and one generic
traversal (:func:`map_vars`) derives shifting, substitution and scope
queries from that table for the core calculus and the surface calculi alike.

Optional annotation fields (motives, lambda domains, effect result types)
are part of the tree and take part in substitution and structural equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable, Optional


def binds(n: int, default=None, *, has_default: bool = False):
    if has_default:
        return field(default=default, metadata={"binds": n})
    return field(metadata={"binds": n})


class NegativeIndex(ValueError):
    pass


class Node:
    __slots__ = ()


class VarNode(Node):
    """Marker base for variable nodes (core ``Var`` and surface ``SVar``)."""

    __slots__ = ()


class Value(Node):
    __slots__ = ()


class Computation(Node):
    __slots__ = ()


class VType(Node):
    __slots__ = ()


class CType(Node):
    __slots__ = ()


class Stack(Node):
    __slots__ = ()


Type = (VType, CType)


# ---------------------------------------------------------------------------
# Value types and computation types


@dataclass(frozen=True, slots=True)
class U(VType):
    b: CType


@dataclass(frozen=True, slots=True)
class SumN(VType):
    components: tuple


@dataclass(frozen=True, slots=True)
class One(VType):
    pass


@dataclass(frozen=True, slots=True)
class Sigma(VType):
    base: VType
    fiber: VType = binds(1)


@dataclass(frozen=True, slots=True)
class Id(VType):
    carrier: VType
    lhs: Value
    rhs: Value


@dataclass(frozen=True, slots=True)
class F(CType):
    a: VType


@dataclass(frozen=True, slots=True)
class PiN(CType):
    components: tuple


@dataclass(frozen=True, slots=True)
class Pi(CType):
    base: VType
    body: CType = binds(1)


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True, slots=True)
class Var(VarNode, Value):
    index: int


@dataclass(frozen=True, slots=True)
class Thunk(Value):
    body: Computation


@dataclass(frozen=True, slots=True)
class Inj(Value):
    """``inj i/n V``; ``ty`` optionally annotates the whole sum type."""

    tag: int
    arity: int
    payload: Value
    ty: Optional[VType] = binds(0, has_default=True)


@dataclass(frozen=True, slots=True)
class Unit(Value):
    pass


@dataclass(frozen=True, slots=True)
class Pair(Value):
    fst: Value
    snd: Value


@dataclass(frozen=True, slots=True)
class Refl(Value):
    subject: Value


@dataclass(frozen=True, slots=True)
class LetV(Value):
    bound: Value
    body: Value = binds(1)
    ty: Optional[VType] = binds(0, has_default=True)


# Complex-value eliminators.  ``motive`` binds the scrutinee (three variables
# ``x, x', p`` for identity types) and yields a value type.


@dataclass(frozen=True, slots=True)
class PmSumV(Value):
    scrutinee: Value
    branches: tuple = binds(1)
    motive: Optional[VType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class PmUnitV(Value):
    scrutinee: Value
    branches: tuple
    motive: Optional[VType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class PmPairV(Value):
    scrutinee: Value
    branches: tuple = binds(2)
    motive: Optional[VType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class PmIdV(Value):
    scrutinee: Value
    branches: tuple = binds(1)
    motive: Optional[VType] = binds(3, has_default=True)


COMPLEX_VALUES = (LetV, PmSumV, PmUnitV, PmPairV, PmIdV)


# ---------------------------------------------------------------------------
# Computations


@dataclass(frozen=True, slots=True)
class Return(Computation):
    v: Value


@dataclass(frozen=True, slots=True)
class ToIn(Computation):
    """``head to x. body``.

    ``motive`` binds ``z : U(F A)`` (the thunk of the head) and gives the
    result type once instantiated at ``thunk head``; ``head_ty`` is ``A``.
    """

    head: Computation
    body: Computation = binds(1)
    motive: Optional[CType] = binds(1, has_default=True)
    head_ty: Optional[VType] = binds(0, has_default=True)


@dataclass(frozen=True, slots=True)
class Force(Computation):
    v: Value


@dataclass(frozen=True, slots=True)
class LetC(Computation):
    """``let x = V in M``; ``ty`` optionally annotates the type of ``V``."""

    bound: Value
    body: Computation = binds(1)
    ty: Optional[VType] = binds(0, has_default=True)


@dataclass(frozen=True, slots=True)
class PmSum(Computation):
    scrutinee: Value
    branches: tuple = binds(1)
    motive: Optional[CType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class PmUnit(Computation):
    scrutinee: Value
    branches: tuple
    motive: Optional[CType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class PmPair(Computation):
    scrutinee: Value
    branches: tuple = binds(2)
    motive: Optional[CType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class PmId(Computation):
    scrutinee: Value
    branches: tuple = binds(1)
    motive: Optional[CType] = binds(3, has_default=True)


@dataclass(frozen=True, slots=True)
class Tuple(Computation):
    components: tuple


@dataclass(frozen=True, slots=True)
class Proj(Computation):
    tag: int
    target: Computation


@dataclass(frozen=True, slots=True)
class Lam(Computation):
    body: Computation = binds(1)
    dom: Optional[VType] = binds(0, has_default=True)


@dataclass(frozen=True, slots=True)
class App(Computation):
    arg: Value
    fn: Computation


@dataclass(frozen=True, slots=True)
class Diverge(Computation):
    ty: Optional[CType] = None


@dataclass(frozen=True, slots=True)
class Error(Computation):
    name: str
    ty: Optional[CType] = None


@dataclass(frozen=True, slots=True)
class Mu(Computation):
    body: Computation = binds(1)
    ty: Optional[CType] = binds(0, has_default=True)


@dataclass(frozen=True, slots=True)
class Print(Computation):
    letter: str
    rest: Computation


@dataclass(frozen=True, slots=True)
class Choose(Computation):
    alternatives: tuple


@dataclass(frozen=True, slots=True)
class Write(Computation):
    state: str
    rest: Computation


@dataclass(frozen=True, slots=True)
class Read(Computation):
    """``branches`` is a tuple of ``(state, computation)`` pairs."""

    branches: tuple

    def branch(self, state: str) -> Computation:
        for s, m in self.branches:
            if s == state:
                return m
        raise KeyError(state)


PM_COMPUTATIONS = (PmSum, PmUnit, PmPair, PmId)
EFFECTS = (Diverge, Error, Mu, Print, Choose, Write, Read)


# ---------------------------------------------------------------------------
# Stacks


@dataclass(frozen=True, slots=True)
class Nil(Stack):
    pass


@dataclass(frozen=True, slots=True)
class ToFrame(Stack):
    body: Computation = binds(1)
    rest: Stack = binds(0)
    motive: Optional[CType] = binds(1, has_default=True)
    head_ty: Optional[VType] = binds(0, has_default=True)


@dataclass(frozen=True, slots=True)
class ProjFrame(Stack):
    tag: int
    rest: Stack


@dataclass(frozen=True, slots=True)
class ArgFrame(Stack):
    arg: Value
    rest: Stack


NIL = Nil()


@dataclass(frozen=True)
class Context:
    """A telescope of value types, innermost last, plus an optional stoup."""

    entries: tuple = ()
    stoup: Optional[CType] = None

    def __len__(self) -> int:
        return len(self.entries)

    def extend(self, *types: VType) -> "Context":
        return Context(self.entries + tuple(types), self.stoup)

    def lookup(self, index: int) -> VType:
        """Type of ``Var(index)``, shifted into the full context."""
        n = len(self.entries)
        if not 0 <= index < n:
            raise IndexError(index)
        return shift(self.entries[n - 1 - index], index + 1)


# ---------------------------------------------------------------------------
# Generic traversal

_SPEC: dict = {}


def _spec(cls) -> tuple:
    try:
        return _SPEC[cls]
    except KeyError:
        spec = tuple((f.name, f.metadata.get("binds", 0)) for f in fields(cls))
        _SPEC[cls] = spec
        return spec


def map_vars(t, fn: Callable, depth: int = 0):
    """Rebuild ``t`` replacing each variable node by ``fn(var, depth)``.

    ``depth`` counts the binders crossed so far.  Subtrees in which nothing
    changes are returned as-is.
    """
    if isinstance(t, VarNode):
        return fn(t, depth)
    if isinstance(t, Node):
        spec = _spec(type(t))
        if not spec:
            return t
        new = []
        changed = False
        for name, n in spec:
            old = getattr(t, name)
            nv = _map_field(old, fn, depth + n)
            changed = changed or nv is not old
            new.append(nv)
        return type(t)(*new) if changed else t
    return t


def _map_field(v, fn, depth):
    if isinstance(v, Node):
        return map_vars(v, fn, depth)
    if isinstance(v, tuple):
        out = tuple(_map_field(x, fn, depth) for x in v)
        if all(a is b for a, b in zip(out, v)):
            return v
        return out
    return v


def iter_vars(t, depth: int = 0):
    """Yield ``(var, depth)`` for every variable occurrence in ``t``."""
    if isinstance(t, VarNode):
        yield t, depth
    elif isinstance(t, Node):
        for name, n in _spec(type(t)):
            yield from _iter_field(getattr(t, name), depth + n)


def _iter_field(v, depth):
    if isinstance(v, Node):
        yield from iter_vars(v, depth)
    elif isinstance(v, tuple):
        for x in v:
            yield from _iter_field(x, depth)


def shift(t, amount: int, cutoff: int = 0):
    """Displace free indices ``>= cutoff`` by ``amount``."""
    if amount == 0:
        return t

    def fn(v, depth):
        if v.index >= cutoff + depth:
            k = v.index + amount
            if k < 0:
                raise NegativeIndex(f"index {v.index} shifted by {amount}")
            return type(v)(k)
        return v

    return map_vars(t, fn)


def subst(t, v, index: int = 0):
    """Replace ``Var(index)`` in ``t`` by ``v`` and close the gap.

    ``v`` lives in the context of ``t`` with position ``index`` removed.
    """

    def fn(var, depth):
        k = var.index
        if k < index + depth:
            return var
        if k == index + depth:
            return shift(v, depth)
        return type(var)(k - 1)

    return map_vars(t, fn)


def instantiate(t, values):
    """Substitute for the innermost ``len(values)`` variables of ``t`` at once.

    ``values`` is ordered outermost binder first and lives in the context
    with those binders removed.
    """
    n = len(values)
    if n == 0:
        return t

    def fn(var, depth):
        k = var.index - depth
        if k < 0:
            return var
        if k < n:
            return shift(values[n - 1 - k], depth)
        return type(var)(var.index - n)

    return map_vars(t, fn)


def rename(t, mapping: Callable[[int], int], cutoff: int = 0):
    """Apply ``mapping`` to free indices ``>= cutoff`` (relative to ``t``)."""

    def fn(v, depth):
        if v.index >= cutoff + depth:
            return type(v)(mapping(v.index - depth) + depth)
        return v

    return map_vars(t, fn)


def swap01(t):
    """Exchange the two innermost free variables."""
    return rename(t, lambda k: 1 if k == 0 else 0 if k == 1 else k)


def free_indices(t) -> set:
    return {v.index - d for v, d in iter_vars(t) if v.index >= d}


def mentions(t, index: int) -> bool:
    return any(v.index - d == index for v, d in iter_vars(t))


def max_free(t) -> int:
    """One more than the largest free index, i.e. the scope ``t`` needs."""
    return max((v.index - d + 1 for v, d in iter_vars(t) if v.index >= d), default=0)


def is_well_scoped(t, n: int) -> bool:
    return max_free(t) <= n


def structural_eq(a, b) -> bool:
    return a == b


def is_complex_value_free(m) -> bool:
    """No ``let``/``pm`` value subterm outside of type annotations."""
    if isinstance(m, COMPLEX_VALUES):
        return False
    if isinstance(m, Type) or not isinstance(m, Node):
        return True
    for name, _ in _spec(type(m)):
        if not _cvf_field(getattr(m, name)):
            return False
    return True


def _cvf_field(v):
    if isinstance(v, tuple):
        return all(_cvf_field(x) for x in v)
    if isinstance(v, Node):
        return is_complex_value_free(v)
    return True


def size(t) -> int:
    if not isinstance(t, Node):
        return 0
    total = 1
    for name, _ in _spec(type(t)):
        total += _size_field(getattr(t, name))
    return total


def _size_field(v):
    if isinstance(v, tuple):
        return sum(_size_field(x) for x in v)
    return size(v) if isinstance(v, Node) else 0


def tr(v: Value) -> Value:
    """``thunk (return v)``."""
    return Thunk(Return(v))


def plug(m: Computation, k: Stack) -> Computation:
    """The computation obtained by filling the hole of ``k`` with ``m``."""
    while not isinstance(k, Nil):
        if isinstance(k, ToFrame):
            m = ToIn(m, k.body, k.motive, k.head_ty)
        elif isinstance(k, ProjFrame):
            m = Proj(k.tag, m)
        elif isinstance(k, ArgFrame):
            m = App(k.arg, m)
        else:
            raise TypeError(k)
        k = k.rest
    return m


def stack_depth(k: Stack) -> int:
    n = 0
    while not isinstance(k, Nil):
        n += 1
        k = k.rest
    return n


def stack_frames(k: Stack) -> list:
    out = []
    while not isinstance(k, Nil):
        out.append(k)
        k = k.rest
    return out
