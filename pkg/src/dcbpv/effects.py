"""Effect signatures: which effects a program may use, and their carriers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import syntax as s

EFFECT_NAMES = ("diverge", "rec", "error", "print", "choose", "state")


class EffectNotEnabled(Exception):
    def __init__(self, effect: str, detail: str = ""):
        self.effect = effect
        super().__init__(f"effect '{effect}' is not enabled" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class EffectSignature:
    diverge: bool = False
    rec: bool = False
    print: bool = False
    choose: bool = False
    state: bool = False
    alphabet: tuple = ()
    states: tuple = ()
    initial: Optional[str] = None
    errors: tuple = ()

    def __post_init__(self):
        if self.print and not self.alphabet:
            raise ValueError("print enabled with an empty alphabet")
        if self.state:
            if not self.states:
                raise ValueError("state enabled with an empty state set")
            if self.initial not in self.states:
                raise ValueError(f"initial state {self.initial!r} not among {self.states}")

    @property
    def error(self) -> bool:
        return bool(self.errors)

    def enabled(self, effect: str) -> bool:
        return getattr(self, effect)

    def profile(self) -> frozenset:
        return frozenset(e for e in EFFECT_NAMES if self.enabled(e))

    def require(self, m: s.Computation) -> None:
        """Raise :class:`EffectNotEnabled` if ``m`` (the node itself) is not allowed."""
        if isinstance(m, s.Diverge):
            if not self.diverge:
                raise EffectNotEnabled("diverge")
        elif isinstance(m, s.Mu):
            if not self.rec:
                raise EffectNotEnabled("rec")
        elif isinstance(m, s.Error):
            if m.name not in self.errors:
                raise EffectNotEnabled("error", f"unknown error {m.name!r}")
        elif isinstance(m, s.Print):
            if not self.print:
                raise EffectNotEnabled("print")
            if m.letter not in self.alphabet:
                raise EffectNotEnabled("print", f"letter {m.letter!r} not in alphabet")
        elif isinstance(m, s.Choose):
            if not self.choose:
                raise EffectNotEnabled("choose")
        elif isinstance(m, (s.Write, s.Read)):
            if not self.state:
                raise EffectNotEnabled("state")
            if isinstance(m, s.Write) and m.state not in self.states:
                raise EffectNotEnabled("state", f"unknown state {m.state!r}")


PURE = EffectSignature()

ALL = EffectSignature(
    diverge=True,
    rec=True,
    print=True,
    choose=True,
    state=True,
    alphabet=("a", "b"),
    states=("s0", "s1"),
    initial="s0",
    errors=("crash",),
)


def signature_for(profile) -> EffectSignature:
    """A signature enabling exactly the named effects, with small carriers."""
    profile = set(profile)
    unknown = profile - set(EFFECT_NAMES)
    if unknown:
        raise ValueError(f"unknown effects {sorted(unknown)}")
    return EffectSignature(
        diverge="diverge" in profile,
        rec="rec" in profile,
        print="print" in profile,
        choose="choose" in profile,
        state="state" in profile,
        alphabet=("a", "b") if "print" in profile else (),
        states=("s0", "s1") if "state" in profile else (),
        initial="s0" if "state" in profile else None,
        errors=("crash", "oops") if "error" in profile else (),
    )


def effects_used(t) -> set:
    """Names of the effects whose constructors occur anywhere in ``t``."""
    found = set()

    def walk(x):
        if isinstance(x, tuple):
            for y in x:
                walk(y)
            return
        if not isinstance(x, s.Node):
            return
        if isinstance(x, s.Diverge):
            found.add("diverge")
        elif isinstance(x, s.Mu):
            found.add("rec")
        elif isinstance(x, s.Error):
            found.add("error")
        elif isinstance(x, s.Print):
            found.add("print")
        elif isinstance(x, s.Choose):
            found.add("choose")
        elif isinstance(x, (s.Write, s.Read)):
            found.add("state")
        for name, _ in s._spec(type(x)):
            walk(getattr(x, name))

    walk(t)
    return found
