import random

import pytest
from hypothesis import given, settings, strategies as st

from dcbpv.effects import ALL, PURE, EffectSignature
from dcbpv.generate import PROFILES, ProgramGenerator, profile_signature
from dcbpv.machine import (
    ERROR_HALT, FUEL_EXHAUSTED, RETURN_AT_NIL, STUCK_OPEN_TERM, Branches, ComplexValuePresent,
    Configuration, FuelExhausted, OpenTerm, Terminal, evaluate, initial, is_terminal, run, run_all,
    step, terminal_reason,
)
from dcbpv.syntax import (
    NIL, Choose, Diverge, Error, F, Force, Inj, LetV, One, Print, Return, ToFrame, ToIn, Unit, Var,
)

from cases import TERMINALS, TRANSITIONS

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("row,config,expected", TRANSITIONS, ids=[r for r, _, _ in TRANSITIONS])
def test_transition_table(row, config, expected):
    assert step(config) == expected
    assert not is_terminal(config)


@pytest.mark.parametrize("row,config,reason", TERMINALS, ids=[r for r, _, _ in TERMINALS])
def test_terminal_configurations(row, config, reason):
    assert step(config) == Terminal(reason)
    assert terminal_reason(config) == reason


def test_initial_configuration():
    sig = EffectSignature(state=True, states=("s0", "s1"), initial="s0")
    assert initial(Return(Unit()), sig) == Configuration(Return(Unit()), NIL, (), "s0")
    with pytest.raises(ComplexValuePresent):
        initial(Return(LetV(Unit(), Var(0))), sig)
    with pytest.raises(OpenTerm):
        initial(Force(Var(0)), sig)


def test_is_terminal_examples():
    assert is_terminal(Configuration(Return(Unit())))
    assert is_terminal(Configuration(Error("e"), ToFrame(Return(Var(0)), NIL)))
    assert not is_terminal(Configuration(Return(Unit()), ToFrame(Return(Var(0)), NIL)))


def test_run_two_steps():
    r = evaluate(ToIn(Return(Unit()), Return(Var(0))), PURE)
    assert r.config == Configuration(Return(Unit()), NIL, (), None)
    assert r.steps == 2 and r.reason == RETURN_AT_NIL


def test_run_diverge_exhausts_fuel():
    with pytest.raises(FuelExhausted) as e:
        evaluate(Diverge(F(One())), ALL, fuel=10)
    assert e.value.steps == 10


def test_run_prints():
    r = evaluate(Print("a", Print("b", Return(Unit()))), ALL)
    assert r.config.out == "ab" and r.config.store == "s0"


def test_run_seeded_choice_is_reproducible():
    m = Choose(tuple(Return(Inj(i, 4, Unit())) for i in range(1, 5)))
    picks = {evaluate(m, ALL, seed=s).config.comp for s in range(20)}
    assert len(picks) > 1
    assert evaluate(m, ALL, seed=7) == evaluate(m, ALL, seed=7)


def test_run_all_choice():
    m = Choose((Return(Inj(1, 2, Unit())), Return(Inj(2, 2, Unit()))))
    leaves = run_all(initial(m, ALL))
    assert [leaf.config.comp for leaf in leaves] == [Return(Inj(1, 2, Unit())), Return(Inj(2, 2, Unit()))]


def test_run_all_deterministic_matches_run():
    m = ToIn(Print("a", Return(Unit())), Return(Var(0)))
    (leaf,) = run_all(initial(m, ALL))
    r = run(initial(m, ALL))
    assert (leaf.config, leaf.steps, leaf.reason) == (r.config, r.steps, r.reason)


def test_run_all_records_exhaustion_per_leaf():
    m = Choose((Diverge(F(One())), Return(Unit())))
    leaves = run_all(initial(m, ALL), fuel=10)
    assert [leaf.reason for leaf in leaves] == [FUEL_EXHAUSTED, RETURN_AT_NIL]
    assert leaves[0].exhausted and not leaves[1].exhausted


def test_error_halts_under_frames():
    r = evaluate(ToIn(Error("crash"), Return(Var(0))), ALL)
    assert r.reason == ERROR_HALT and r.steps == 1


# -- properties over generated programs ----------------------------------------

def _program(seed, profile):
    g = ProgramGenerator(random.Random(seed), profile_signature(profile), max_depth=6, budget=25)
    m, ty = g.program()
    return m, g.sig


def _walk(m, sig, fuel=300):
    """Every configuration reachable within ``fuel`` steps, paired with its outcome."""
    seen = []
    todo = [(initial(m, sig), 0)]
    while todo and len(seen) < 2000:
        c, n = todo.pop()
        out = step(c)
        seen.append((c, out))
        if isinstance(out, Branches) and n < fuel:
            todo.extend((x, n + 1) for x in out.successors)
    return seen


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from(sorted(PROFILES)))
def test_terminality_soundness(seed, profile):
    m, sig = _program(seed, profile)
    for c, out in _walk(m, sig):
        assert is_terminal(c) == isinstance(out, Terminal)
        if isinstance(out, Terminal):
            assert out.reason == terminal_reason(c)
            assert out.reason != STUCK_OPEN_TERM


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from([p for p in PROFILES if p not in ("choose", "all")]))
def test_determinism(seed, profile):
    m, sig = _program(seed, profile)
    for _, out in _walk(m, sig):
        if isinstance(out, Branches):
            assert len(out.successors) == 1


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from(["pure", "error", "print", "state", "choose"]))
def test_strong_normalization(seed, profile):
    m, sig = _program(seed, profile)
    leaves = run_all(initial(m, sig), fuel=10**6)
    assert leaves and not any(leaf.exhausted for leaf in leaves)
