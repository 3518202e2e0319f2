import random

import pytest
from hypothesis import given, settings, strategies as st

from dcbpv.generate import random_term
from dcbpv.parser import load
from dcbpv.syntax import (
    App, F, Force, Id, Inj, Lam, LetV, NegativeIndex, One, Pair, PmPair, PmPairV, Return,
    SumN, Thunk, Unit, Var, free_indices, is_complex_value_free, is_well_scoped, shift,
    structural_eq, subst,
)
from named import oracle_shift, oracle_subst

KINDS = ("value", "comp", "vtype", "ctype", "surface", "stype")
seeds = st.integers(0, 2**32 - 1)


def _case(seed, kinds=KINDS):
    r = random.Random(seed)
    n = r.randint(1, 4)
    kind = r.choice(kinds)
    vkind = "surface" if kind in ("surface", "stype") else "value"
    return r, n, random_term(r, kind, n, 4), vkind


# -- shift ---------------------------------------------------------------------

def test_shift_free_variable():
    assert shift(Var(0), 1, 0) == Var(1)


def test_shift_cutoff_protects_binder():
    t = Lam(App(Var(0), Force(Var(1))))
    assert shift(t, 1, 0) == Lam(App(Var(0), Force(Var(2))))


def test_shift_strengthens_above_cutoff():
    assert shift(Return(Var(3)), -1, 2) == Return(Var(2))


def test_shift_negative_index_raises():
    with pytest.raises(NegativeIndex):
        shift(Var(0), -1, 0)


# -- subst ---------------------------------------------------------------------

TT = Thunk(Return(Inj(1, 2, Unit())))


def test_subst_return():
    assert subst(Return(Var(0)), Unit(), 0) == Return(Unit())


def test_subst_into_identity_type():
    b = F(Id(SumN((One(), One())), Var(0), TT))
    assert subst(b, TT, 0) == F(Id(SumN((One(), One())), TT, TT))
    assert oracle_subst(b, TT, 0) == subst(b, TT, 0)


def test_subst_under_binder():
    t = Lam(Return(Var(1)))
    v = Pair(Unit(), Unit())
    assert subst(t, v, 0) == Lam(Return(v))
    assert oracle_subst(t, v, 0) == subst(t, v, 0)


def test_subst_shifts_value_under_binder():
    assert subst(Lam(Return(Var(1))), Var(0), 0) == Lam(Return(Var(1)))
    assert subst(Lam(Return(Var(2))), Var(5), 0) == Lam(Return(Var(1)))


# -- structural equality and complex values ------------------------------------

def test_structural_eq():
    assert structural_eq(Lam(Return(Var(0))), Lam(Return(Var(0))))
    assert not structural_eq(Lam(Return(Var(0))), Lam(Return(Var(1))))


def test_binder_names_are_erased():
    a = load("comp m = \\x : 1. return x;").get("m").term
    b = load("comp m = \\y : 1. return y;").get("m").term
    assert structural_eq(a, b)


def test_complex_value_free():
    assert is_complex_value_free(Return(Unit()))
    assert not is_complex_value_free(Return(PmPairV(Pair(Unit(), Unit()), (Var(0),))))
    assert is_complex_value_free(PmPair(Pair(Unit(), Unit()), (Return(Var(0)),)))
    assert not is_complex_value_free(Force(Thunk(Return(LetV(Unit(), Var(0))))))


# -- properties ----------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(seeds)
def test_subst_matches_named_oracle(seed):
    r, n, t, vkind = _case(seed)
    i = r.randrange(n)
    v = random_term(r, vkind, n - 1, 3)
    assert subst(t, v, i) == oracle_subst(t, v, i)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_shift_matches_named_oracle(seed):
    r, n, t, _ = _case(seed)
    c, k = r.randint(0, n), r.randint(1, 3)
    assert shift(t, k, c) == oracle_shift(t, k, c)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_shift_roundtrip(seed):
    r, n, t, _ = _case(seed)
    c = r.randint(0, n)
    # A fresh variable at position c is never mentioned by the weakened term.
    assert shift(shift(t, 1, c), -1, c) == t


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_substitution_lemma(seed):
    # t[v/0][w/0] = t[w'/1][v[w/0]/0], with w' = w weakened past x.
    r = random.Random(seed)
    n = r.randint(0, 3)
    t = random_term(r, r.choice(("value", "comp", "vtype", "ctype")), n + 2, 4)
    v = random_term(r, "value", n + 1, 3)
    w = random_term(r, "value", n, 3)
    assert subst(subst(t, v, 0), w, 0) == subst(subst(t, shift(w, 1), 1), subst(v, w, 0), 0)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_weakening_commutes_with_subst(seed):
    r, n, t, vkind = _case(seed)
    v = random_term(r, vkind, n - 1, 3)
    assert shift(subst(t, v, 0), 1, 0) == subst(shift(t, 1, 1), shift(v, 1, 0), 0)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_subst_keeps_scope(seed):
    r, n, t, vkind = _case(seed)
    v = random_term(r, vkind, n - 1, 3)
    assert is_well_scoped(subst(t, v, 0), n - 1)
    assert (n - 1) not in free_indices(subst(t, v, 0))


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_subst_preserves_complex_value_freedom(seed):
    r = random.Random(seed)
    t = random_term(r, "comp", 2, 4)
    v = Thunk(random_term(r, "comp", 1, 2))
    if is_complex_value_free(t) and is_complex_value_free(v.body):
        assert is_complex_value_free(subst(t, v, 0))
