import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dcbpv.equality import DEFAULT_FUEL, FuelExhausted, conv, conv_ctype, conv_vtype, normalize
from dcbpv.generate import programs, random_term
from dcbpv.parser import load
from dcbpv.syntax import (
    App, Choose, Context, Error, F, Force, Id, Inj, Lam, LetC, Mu, One, Pair, Pi, PmId, PmSum, Print,
    Proj, Read, Refl, Return, SumN, Thunk, ToIn, Tuple, U, Unit, Var, Write, shift,
)

BOOL = SumN((One(), One()))
TT = Return(Inj(1, 2, Unit()))
FF = Return(Inj(2, 2, Unit()))
CORPUS = Path(__file__).resolve().parent.parent / "corpus"
seeds = st.integers(0, 2**32 - 1)


def nf(t):
    return normalize(t).term


# -- directed rules ------------------------------------------------------------

def test_force_thunk():
    assert nf(Force(Thunk(Return(Unit())))) == Return(Unit())


def test_return_to_beta():
    assert nf(ToIn(Return(Unit()), Return(Var(0)))) == Return(Unit())


def test_error_is_algebraic():
    assert nf(ToIn(Error("e"), Return(Var(0)))) == Error("e")


def test_idpm_refl_beta():
    assert nf(PmId(Refl(Unit()), (Return(Var(0)),))) == Return(Unit())


def test_to_associativity():
    m = ToIn(ToIn(Force(Var(0)), Force(Var(1))), Return(Var(0)))
    assert nf(m) == ToIn(Force(Var(0)), Force(Var(1)))


def test_effects_pushed_out_of_to():
    body = Return(Pair(Var(0), Var(0)))
    assert nf(ToIn(Print("a", Force(Var(0))), body)) == Print("a", nf(ToIn(Force(Var(0)), body)))
    assert nf(ToIn(Write("s1", TT), Return(Var(0)))) == Write("s1", TT)
    assert nf(ToIn(Choose((TT, FF)), Return(Var(0)))) == Choose((TT, FF))
    assert nf(ToIn(Read((("s0", TT), ("s1", FF))), Return(Var(0)))) == Read((("s0", TT), ("s1", FF)))


def test_beta_for_lambda_tuple_let_and_sum():
    assert nf(App(Unit(), Lam(Return(Var(0))))) == Return(Unit())
    assert nf(Proj(2, Tuple((TT, FF)))) == FF
    assert nf(LetC(Unit(), Return(Var(0)))) == Return(Unit())
    assert nf(PmSum(Inj(2, 2, Unit()), (TT, FF))) == FF


def test_mu_is_not_unfolded():
    m = Mu(Force(Var(0)), F(One()))
    assert nf(m) == Mu(Force(Var(0)))


def test_annotations_are_erased():
    assert nf(ToIn(Force(Var(0)), Return(Var(0)), F(One()), One())) == Force(Var(0))


def test_fuel_exhausted():
    m = ToIn(ToIn(ToIn(Return(Unit()), Return(Var(0))), Return(Var(0))), Return(Var(0)))
    with pytest.raises(FuelExhausted):
        normalize(m, fuel=1)


# -- conversion ----------------------------------------------------------------

def test_eta_for_thunks():
    assert conv(Var(0), Thunk(Force(Var(0))), U(F(One())))


def test_eta_for_functions():
    m = Force(Var(0))
    assert conv(Lam(App(Var(0), shift(m, 1))), m, Pi(One(), F(One())))


def test_eta_for_tuples():
    m = Force(Var(0))
    assert conv(Tuple((Proj(1, m), Proj(2, m))), m)


def test_distinct_constructors():
    assert not conv(TT, FF, F(BOOL))


def test_conv_types():
    assert conv_ctype(F(One()), F(One()))
    assert not conv_ctype(Pi(One(), F(One())), F(One()))
    a = Id(U(F(BOOL)), Thunk(ToIn(Return(Unit()), Return(Inj(1, 2, Var(0))))), Thunk(TT))
    b = Id(U(F(BOOL)), Thunk(TT), Thunk(TT))
    assert conv_vtype(a, b)


def test_mu_unfold_flag():
    m = Mu(Print("a", Force(Var(0))))
    once = Print("a", Force(Thunk(m)))
    assert not conv(m, once)
    assert conv(m, once, mu_unfold=1)


def test_eta_id_flag_identifies_endpoints():
    g = Context((BOOL, BOOL, Id(BOOL, Var(1), Var(0))))
    x, y = Return(Var(2)), Return(Var(1))
    assert not conv(x, y, ctx=g)
    assert conv(x, y, ctx=g, eta_id=True)


# -- properties ----------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(seeds)
def test_normalize_idempotent(seed):
    r = random.Random(seed)
    t = random_term(r, r.choice(("comp", "value", "vtype", "ctype")), r.randint(0, 3), 4)
    once = nf(t)
    assert nf(once) == once


def _contexts(hole):
    return [
        Thunk(hole), ToIn(hole, Return(Var(0))), ToIn(TT, shift(hole, 1)), Lam(shift(hole, 1)),
        Print("a", hole), Tuple((hole, TT)), Choose((TT, hole)), PmSum(Var(0), (shift(hole, 1), TT)),
    ]


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_conv_equivalence_and_congruence(seed):
    r = random.Random(seed)
    m = random_term(r, "comp", 2, 4)
    n = nf(m)
    other = random_term(r, "comp", 2, 3)
    assert conv(m, m) and conv(m, n) and conv(n, m)
    assert conv(m, other) == conv(other, m)
    if conv(n, other):
        assert conv(m, other)
    for c1, c2 in zip(_contexts(m), _contexts(n)):
        assert conv(c1, c2)


@pytest.mark.parametrize("seed", range(3))
def test_typed_programs_normalize_within_fuel(seed):
    for g in programs("pure", 60, seed=seed):
        r = normalize(g.comp, DEFAULT_FUEL)
        assert r.fuel_used < DEFAULT_FUEL


def test_corpus_normalizes_within_fuel():
    for path in sorted(CORPUS.glob("golden/*.dcbpv")):
        for d in load(path.read_text()).definitions:
            assert normalize(d.term, DEFAULT_FUEL).fuel_used < DEFAULT_FUEL
