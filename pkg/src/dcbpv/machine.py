"""The CK-machine with output and global state.

A configuration is ``M, K, m, s``: the computation in focus, the stack,
the output printed so far (a sequence of letters) and the current state.
:func:`step` is a direct transcription of the transition table;
:func:`is_terminal` decides terminality from the shape of the
configuration alone so that the two can be cross-checked.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Optional

from . import equality
from . import syntax as s
from .effects import EffectSignature
from .syntax import (
    App, ArgFrame, Choose, Diverge, Error, Force, Inj, Lam, LetC, Mu, Nil, Pair, PmId,
    PmPair, PmSum, PmUnit, Print, Proj, ProjFrame, Read, Refl, Return, Thunk, ToFrame,
    ToIn, Tuple, Unit, Var, Write, instantiate, subst,
)

RETURN_AT_NIL = "ReturnAtNil"
LAMBDA_AT_NIL = "LambdaAtNil"
TUPLE_AT_NIL = "TupleAtNil"
ERROR_HALT = "ErrorHalt"
STUCK_OPEN_TERM = "StuckOpenTerm"
# A constructor meeting the wrong frame or eliminator; only ill-typed
# configurations get here.
STUCK_ILL_TYPED = "StuckIllTyped"
FUEL_EXHAUSTED = "FuelExhausted"


class ComplexValuePresent(ValueError):
    pass


class OpenTerm(ValueError):
    pass


class FuelExhausted(equality.FuelExhausted):
    def __init__(self, config: "Configuration", steps: int):
        self.config = config
        self.steps = steps
        Exception.__init__(self, f"machine fuel exhausted after {steps} steps")
        self.fuel = steps


@dataclass(frozen=True)
class Configuration:
    comp: s.Computation
    stack: s.Stack = s.NIL
    output: tuple = ()
    store: Optional[str] = None

    @property
    def out(self) -> str:
        return "".join(self.output)


@dataclass(frozen=True)
class Terminal:
    reason: str


@dataclass(frozen=True)
class Branches:
    successors: tuple


def initial(m: s.Computation, sig: EffectSignature) -> Configuration:
    if not s.is_complex_value_free(m):
        raise ComplexValuePresent("the machine runs complex-value-free computations only")
    if s.max_free(m) > 0:
        raise OpenTerm("the machine runs closed computations only")
    return Configuration(m, s.NIL, (), sig.initial)


def _one(c: Configuration, **changes) -> Branches:
    return Branches((replace(c, **changes),))


def step(c: Configuration):
    m, k = c.comp, c.stack
    if isinstance(m, Return):
        if isinstance(k, ToFrame):
            return _one(c, comp=subst(k.body, m.v), stack=k.rest)
        return Terminal(RETURN_AT_NIL if isinstance(k, Nil) else STUCK_ILL_TYPED)
    if isinstance(m, ToIn):
        return _one(c, comp=m.head, stack=ToFrame(m.body, k, m.motive, m.head_ty))
    if isinstance(m, Force):
        if isinstance(m.v, Thunk):
            return _one(c, comp=m.v.body)
        return Terminal(STUCK_OPEN_TERM if isinstance(m.v, Var) else STUCK_ILL_TYPED)
    if isinstance(m, LetC):
        return _one(c, comp=subst(m.body, m.bound))
    if isinstance(m, (PmSum, PmUnit, PmPair, PmId)):
        v = m.scrutinee
        if isinstance(v, Var):
            return Terminal(STUCK_OPEN_TERM)
        if isinstance(m, PmSum) and isinstance(v, Inj) and 1 <= v.tag <= len(m.branches):
            return _one(c, comp=subst(m.branches[v.tag - 1], v.payload))
        if isinstance(m, PmUnit) and isinstance(v, Unit):
            return _one(c, comp=m.branches[0])
        if isinstance(m, PmPair) and isinstance(v, Pair):
            return _one(c, comp=instantiate(m.branches[0], [v.fst, v.snd]))
        if isinstance(m, PmId) and isinstance(v, Refl):
            return _one(c, comp=subst(m.branches[0], v.subject))
        return Terminal(STUCK_ILL_TYPED)
    if isinstance(m, Proj):
        return _one(c, comp=m.target, stack=ProjFrame(m.tag, k))
    if isinstance(m, Tuple):
        if isinstance(k, ProjFrame) and 1 <= k.tag <= len(m.components):
            return _one(c, comp=m.components[k.tag - 1], stack=k.rest)
        return Terminal(TUPLE_AT_NIL if isinstance(k, Nil) else STUCK_ILL_TYPED)
    if isinstance(m, App):
        return _one(c, comp=m.fn, stack=ArgFrame(m.arg, k))
    if isinstance(m, Lam):
        if isinstance(k, ArgFrame):
            return _one(c, comp=subst(m.body, k.arg), stack=k.rest)
        return Terminal(LAMBDA_AT_NIL if isinstance(k, Nil) else STUCK_ILL_TYPED)
    if isinstance(m, Diverge):
        return Branches((c,))
    if isinstance(m, Mu):
        return _one(c, comp=subst(m.body, Thunk(m)))
    if isinstance(m, Choose):
        if not m.alternatives:
            return Terminal(STUCK_ILL_TYPED)
        return Branches(tuple(replace(c, comp=a) for a in m.alternatives))
    if isinstance(m, Error):
        return Terminal(ERROR_HALT)
    if isinstance(m, Print):
        return _one(c, comp=m.rest, output=c.output + (m.letter,))
    if isinstance(m, Write):
        return _one(c, comp=m.rest, store=m.state)
    if isinstance(m, Read):
        try:
            return _one(c, comp=m.branch(c.store))
        except KeyError:
            return Terminal(STUCK_ILL_TYPED)
    raise TypeError(f"not a computation: {m!r}")


def terminal_reason(c: Configuration) -> Optional[str]:
    """The terminal category of ``c`` by inspection, or None if it can step."""
    m, k = c.comp, c.stack
    if isinstance(m, Error):
        return ERROR_HALT
    if isinstance(m, Return):
        if isinstance(k, Nil):
            return RETURN_AT_NIL
        return None if isinstance(k, ToFrame) else STUCK_ILL_TYPED
    if isinstance(m, Lam):
        if isinstance(k, Nil):
            return LAMBDA_AT_NIL
        return None if isinstance(k, ArgFrame) else STUCK_ILL_TYPED
    if isinstance(m, Tuple):
        if isinstance(k, Nil):
            return TUPLE_AT_NIL
        ok = isinstance(k, ProjFrame) and 1 <= k.tag <= len(m.components)
        return None if ok else STUCK_ILL_TYPED
    if isinstance(m, Force):
        if isinstance(m.v, Var):
            return STUCK_OPEN_TERM
        return None if isinstance(m.v, Thunk) else STUCK_ILL_TYPED
    if isinstance(m, (PmSum, PmUnit, PmPair, PmId)):
        v = m.scrutinee
        if isinstance(v, Var):
            return STUCK_OPEN_TERM
        matches = {PmSum: Inj, PmUnit: Unit, PmPair: Pair, PmId: Refl}[type(m)]
        if not isinstance(v, matches):
            return STUCK_ILL_TYPED
        if isinstance(m, PmSum) and not 1 <= v.tag <= len(m.branches):
            return STUCK_ILL_TYPED
        return None
    if isinstance(m, Choose) and not m.alternatives:
        return STUCK_ILL_TYPED
    if isinstance(m, Read) and all(st != c.store for st, _ in m.branches):
        return STUCK_ILL_TYPED
    return None


def is_terminal(c: Configuration) -> bool:
    return terminal_reason(c) is not None


@dataclass(frozen=True)
class RunResult:
    config: Configuration
    steps: int
    reason: str

    def __iter__(self):
        return iter((self.config, self.steps))


def run(c: Configuration, fuel: int = equality.DEFAULT_FUEL, seed: int = 0, on_step=None) -> RunResult:
    """Step until terminal, resolving ``choose`` with a seeded generator.

    ``on_step(n, config)`` is called for every configuration visited,
    including the first.  Raises :class:`FuelExhausted` after ``fuel`` steps.
    """
    rng = random.Random(seed)
    steps = 0
    while True:
        if on_step is not None:
            on_step(steps, c)
        out = step(c)
        if isinstance(out, Terminal):
            return RunResult(c, steps, out.reason)
        if steps >= fuel:
            raise FuelExhausted(c, steps)
        succ = out.successors
        c = succ[rng.randrange(len(succ))] if len(succ) > 1 else succ[0]
        steps += 1


@dataclass(frozen=True)
class Leaf:
    config: Configuration
    steps: int
    reason: str

    @property
    def exhausted(self) -> bool:
        return self.reason == FUEL_EXHAUSTED


def run_all(c: Configuration, fuel: int = equality.DEFAULT_FUEL) -> list:
    """Every leaf of the execution tree, in branch order.

    Fuel is counted per path; a path that runs out yields an exhausted leaf.
    """
    leaves = []
    todo = [(c, 0)]
    while todo:
        c, n = todo.pop()
        out = step(c)
        if isinstance(out, Terminal):
            leaves.append(Leaf(c, n, out.reason))
        elif n >= fuel:
            leaves.append(Leaf(c, n, FUEL_EXHAUSTED))
        else:
            todo.extend((x, n + 1) for x in reversed(out.successors))
    return leaves


def evaluate(m: s.Computation, sig: EffectSignature, fuel: int = equality.DEFAULT_FUEL, seed: int = 0) -> RunResult:
    """Big-step evaluation from the initial configuration of ``m``."""
    return run(initial(m, sig), fuel, seed)
