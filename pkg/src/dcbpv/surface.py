"""The surface dependent type theory translated by CBV and CBN.

One syntax serves both readings; the translation chosen decides whether a
term is evaluated eagerly or by name.  Application follows the core
notation: ``SApp(arg, fn)`` is ``arg ' fn``, the function ``fn`` applied to
``arg``.  Binary and nullary forms are the n-ary ones at fixed arity.

:func:`synth` computes surface types structurally, without conversion.  It
exists so the translations can annotate the code they produce; the core
checker remains the judge of well-typedness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import Node, VarNode, _spec, binds, free_indices, instantiate, shift, subst


class SurfaceTerm(Node):
    __slots__ = ()


class SurfaceType(Node):
    __slots__ = ()


class SurfaceTypeError(Exception):
    pass


# -- types -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SOne(SurfaceType):
    pass


@dataclass(frozen=True, slots=True)
class SSum(SurfaceType):
    components: tuple


@dataclass(frozen=True, slots=True)
class SProd(SurfaceType):
    components: tuple


@dataclass(frozen=True, slots=True)
class SPi(SurfaceType):
    base: SurfaceType
    body: SurfaceType = binds(1)


@dataclass(frozen=True, slots=True)
class SSigma(SurfaceType):
    base: SurfaceType
    fiber: SurfaceType = binds(1)


@dataclass(frozen=True, slots=True)
class SId(SurfaceType):
    carrier: SurfaceType
    lhs: SurfaceTerm
    rhs: SurfaceTerm


# -- terms -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SVar(VarNode, SurfaceTerm):
    index: int


@dataclass(frozen=True, slots=True)
class SAnn(SurfaceTerm):
    term: SurfaceTerm
    ty: SurfaceType


@dataclass(frozen=True, slots=True)
class SLet(SurfaceTerm):
    bound: SurfaceTerm
    body: SurfaceTerm = binds(1)


@dataclass(frozen=True, slots=True)
class SInj(SurfaceTerm):
    tag: int
    arity: int
    payload: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SPmSum(SurfaceTerm):
    scrutinee: SurfaceTerm
    branches: tuple = binds(1)
    motive: Optional[SurfaceType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class SLamI(SurfaceTerm):
    components: tuple


@dataclass(frozen=True, slots=True)
class SProjI(SurfaceTerm):
    tag: int
    target: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SLam(SurfaceTerm):
    dom: SurfaceType
    body: SurfaceTerm = binds(1)


@dataclass(frozen=True, slots=True)
class SApp(SurfaceTerm):
    arg: SurfaceTerm
    fn: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SUnit(SurfaceTerm):
    pass


@dataclass(frozen=True, slots=True)
class SPmUnit(SurfaceTerm):
    scrutinee: SurfaceTerm
    branches: tuple
    motive: Optional[SurfaceType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class SPair(SurfaceTerm):
    fst: SurfaceTerm
    snd: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SPmPair(SurfaceTerm):
    scrutinee: SurfaceTerm
    branches: tuple = binds(2)
    motive: Optional[SurfaceType] = binds(1, has_default=True)


@dataclass(frozen=True, slots=True)
class SRefl(SurfaceTerm):
    subject: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SPmId(SurfaceTerm):
    scrutinee: SurfaceTerm
    branches: tuple = binds(1)
    motive: Optional[SurfaceType] = binds(3, has_default=True)


@dataclass(frozen=True, slots=True)
class SDiverge(SurfaceTerm):
    ty: SurfaceType


@dataclass(frozen=True, slots=True)
class SError(SurfaceTerm):
    name: str
    ty: SurfaceType


@dataclass(frozen=True, slots=True)
class SMu(SurfaceTerm):
    """``mu x : A. M``: recursion, with ``x : A`` standing for the whole term."""

    ty: SurfaceType
    body: SurfaceTerm = binds(1)


@dataclass(frozen=True, slots=True)
class SPrint(SurfaceTerm):
    letter: str
    rest: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SChoose(SurfaceTerm):
    alternatives: tuple


@dataclass(frozen=True, slots=True)
class SWrite(SurfaceTerm):
    state: str
    rest: SurfaceTerm


@dataclass(frozen=True, slots=True)
class SRead(SurfaceTerm):
    branches: tuple


SURFACE_ELIMINATORS = (SPmSum, SPmUnit, SPmPair, SPmId)


def _lookup(ctx: tuple, i: int):
    n = len(ctx)
    if not 0 <= i < n:
        raise SurfaceTypeError(f"unbound surface variable {i}")
    return shift(ctx[n - 1 - i], i + 1)


def _strengthen(t, k: int, what: str):
    if any(i < k for i in free_indices(t)):
        raise SurfaceTypeError(f"{what}: the result type depends on the scrutinee; give a motive")
    return shift(t, -k)


def synth(m, ctx: tuple = ()):
    """The surface type of ``m`` in the telescope ``ctx`` (outermost first)."""
    if isinstance(m, SVar):
        return _lookup(ctx, m.index)
    if isinstance(m, SAnn):
        return m.ty
    if isinstance(m, SUnit):
        return SOne()
    if isinstance(m, SInj):
        raise SurfaceTypeError("annotate injections with their sum type: (inj i/n M : Sum[...])")
    if isinstance(m, SPair):
        return SSigma(synth(m.fst, ctx), shift(synth(m.snd, ctx), 1))
    if isinstance(m, SLet):
        a = synth(m.bound, ctx)
        return subst(synth(m.body, ctx + (a,)), m.bound)
    if isinstance(m, SLamI):
        return SProd(tuple(synth(c, ctx) for c in m.components))
    if isinstance(m, SProjI):
        t = synth(m.target, ctx)
        if not isinstance(t, SProd) or not 1 <= m.tag <= len(t.components):
            raise SurfaceTypeError(f"projection {m.tag} from {t!r}")
        return t.components[m.tag - 1]
    if isinstance(m, SLam):
        return SPi(m.dom, synth(m.body, ctx + (m.dom,)))
    if isinstance(m, SApp):
        t = synth(m.fn, ctx)
        if not isinstance(t, SPi):
            raise SurfaceTypeError(f"application of a term of type {t!r}")
        return subst(t.body, m.arg)
    if isinstance(m, SRefl):
        return SId(synth(m.subject, ctx), m.subject, m.subject)
    if isinstance(m, SURFACE_ELIMINATORS):
        return _synth_pm(m, ctx)
    if isinstance(m, (SDiverge, SError, SMu)):
        return m.ty
    if isinstance(m, (SPrint, SWrite)):
        return synth(m.rest, ctx)
    if isinstance(m, SChoose):
        if not m.alternatives:
            raise SurfaceTypeError("choose needs an alternative")
        return synth(m.alternatives[0], ctx)
    if isinstance(m, SRead):
        if not m.branches:
            raise SurfaceTypeError("read needs a branch")
        return synth(m.branches[0][1], ctx)
    raise SurfaceTypeError(f"not a surface term: {m!r}")


def scrutinee_cases(m, ctx: tuple):
    """``(scrutinee type, [(branch context extension, pattern terms)])``.

    The pattern terms instantiate the motive for each branch, written in the
    branch context.
    """
    t = synth(m.scrutinee, ctx)
    if isinstance(m, SPmSum):
        if not isinstance(t, SSum) or len(t.components) != len(m.branches):
            raise SurfaceTypeError(f"sum match against {t!r}")
        n = len(t.components)
        return t, [((a,), [SInj(i, n, SVar(0))]) for i, a in enumerate(t.components, 1)]
    if isinstance(m, SPmUnit):
        if not isinstance(t, SOne):
            raise SurfaceTypeError(f"unit match against {t!r}")
        return t, [((), [SUnit()])]
    if isinstance(m, SPmPair):
        if not isinstance(t, SSigma):
            raise SurfaceTypeError(f"pair match against {t!r}")
        return t, [((t.base, t.fiber), [SPair(SVar(1), SVar(0))])]
    if not isinstance(t, SId):
        raise SurfaceTypeError(f"identity match against {t!r}")
    return t, [((t.carrier,), [SVar(0), SVar(0), SRefl(SVar(0))])]


def motive_arity(m) -> int:
    return 3 if isinstance(m, SPmId) else 1


def result_args(m, t) -> list:
    """Values instantiating the motive for the whole match."""
    if isinstance(m, SPmId):
        return [t.lhs, t.rhs, m.scrutinee]
    return [m.scrutinee]


def _synth_pm(m, ctx):
    t, cases = scrutinee_cases(m, ctx)
    if m.motive is not None:
        return instantiate(m.motive, result_args(m, t))
    if not cases or not m.branches:
        raise SurfaceTypeError("an empty match needs a motive")
    ext, _ = cases[0]
    bt = synth(m.branches[0], ctx + tuple(ext))
    return _strengthen(bt, len(ext), "match")


def is_strong(m) -> bool:
    """Whether an eliminator's motive depends on what is eliminated."""
    if m.motive is None:
        return False
    k = motive_arity(m)
    return any(i < k for i in free_indices(m.motive))


def uses_strong_elimination(m) -> bool:
    found = False

    def walk(t):
        nonlocal found
        if isinstance(t, tuple):
            for x in t:
                walk(x)
            return
        if not isinstance(t, Node):
            return
        if isinstance(t, SURFACE_ELIMINATORS) and is_strong(t):
            found = True
        for f, _ in _spec(type(t)):
            walk(getattr(t, f))

    walk(m)
    return found
