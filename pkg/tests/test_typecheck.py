import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dcbpv.effects import PURE
from dcbpv.equality import conv
from dcbpv.generate import PROFILES, ProgramGenerator, profile_signature, programs
from dcbpv.machine import Configuration
from dcbpv.parser import load
from dcbpv.syntax import (
    NIL, ArgFrame, Choose, Context, Diverge, Error, F, Force, Id, Inj, Lam, Mu, One, Pair,
    Pi, PiN, PmPairV, Print, ProjFrame, Read, Refl, Return, Sigma, SumN, Thunk, ToFrame, ToIn,
    U, Unit, Var, Write, shift, subst,
)
from dcbpv.typecheck import (
    ARITY_MISMATCH, DEPENDENT_SEQUENCING, EFFECT_NOT_ENABLED, MINUS, MISMATCH, MOTIVE_REQUIRED,
    PLUS, PLUS_NO_SUBTYPING, SUBTYPE_FAILURE, UNBOUND_INDEX, TypingError, check_computation,
    check_configuration, check_context, check_ctype, check_stack, check_value, check_vtype,
    infer_computation, infer_value, subtype_ctype,
)

BOOL = SumN((One(), One()))
TT = Inj(1, 2, Unit(), BOOL)
FF = Inj(2, 2, Unit(), BOOL)
EMPTY = Context()
CORE = Path(__file__).resolve().parent.parent / "corpus" / "core"
seeds = st.integers(0, 2**32 - 1)


def kind_of(fn, *args, **kw):
    with pytest.raises(TypingError) as e:
        fn(*args, **kw)
    return e.value.kind


# -- contexts and types --------------------------------------------------------

def test_contexts():
    check_context(EMPTY)
    check_context(Context((One(), Id(One(), Var(0), Unit()))))
    assert kind_of(check_context, Context((Id(One(), Var(0), Unit()),))) == UNBOUND_INDEX


def test_type_formation():
    check_vtype(EMPTY, U(F(One())))
    check_vtype(Context((One(),)), Id(One(), Var(0), Unit()))
    assert kind_of(check_vtype, EMPTY, Id(One(), Var(0), Unit())) == UNBOUND_INDEX
    assert kind_of(check_vtype, EMPTY, Id(One(), Unit(), TT)) == MISMATCH
    check_ctype(EMPTY, Pi(BOOL, F(Id(BOOL, Var(0), Var(0)))))


# -- values --------------------------------------------------------------------

def test_infer_values():
    assert infer_value(Context((BOOL,)), Var(0)) == BOOL
    assert infer_value(EMPTY, Refl(Unit())) == Id(One(), Unit(), Unit())
    assert kind_of(infer_value, EMPTY, Inj(3, 2, Unit())) == ARITY_MISMATCH
    assert kind_of(infer_value, EMPTY, Inj(1, 2, Unit())) == MOTIVE_REQUIRED


def test_check_values():
    check_value(EMPTY, Thunk(Return(Unit())), U(F(One())))
    assert kind_of(check_value, EMPTY, Unit(), U(F(One()))) == MISMATCH
    check_value(Context((Sigma(One(), One()),)), PmPairV(Var(0), (Var(0),)), One())
    check_value(EMPTY, Pair(TT, Refl(TT)), Sigma(BOOL, Id(BOOL, Var(0), Var(0))))


# -- computations --------------------------------------------------------------

H = Choose((Return(TT), Return(FF)))
MOTIVE = F(Id(U(F(BOOL)), Var(0), Var(0)))
DEP = ToIn(H, Return(Refl(Thunk(Return(Var(0))))), MOTIVE, BOOL)


def test_infer_return():
    assert infer_computation(EMPTY, Return(Unit())) == F(One())


def test_minus_rejects_dependent_sequencing():
    plain = ToIn(H, Return(Refl(Thunk(Return(Var(0))))))
    assert kind_of(infer_computation, EMPTY, plain, MINUS) == DEPENDENT_SEQUENCING
    assert kind_of(infer_computation, EMPTY, DEP, MINUS) == DEPENDENT_SEQUENCING


def test_plus_dependent_kleisli_extension():
    assert infer_computation(EMPTY, DEP, PLUS) == F(Id(U(F(BOOL)), Thunk(H), Thunk(H)))


def test_plus_reconstructs_motive():
    plain = ToIn(H, Return(Refl(Thunk(Return(Var(0))))))
    b = infer_computation(EMPTY, plain, PLUS)
    assert conv(b, F(Id(U(F(BOOL)), Thunk(H), Thunk(H))))


def test_extra_rule_for_returning_heads():
    m = ToIn(Return(Unit()), Return(Refl(Var(0))))
    assert conv(infer_computation(EMPTY, m, MINUS), F(Id(One(), Unit(), Unit())))


def test_effects_check_against_annotations():
    check_computation(EMPTY, Diverge(), F(One()))
    check_computation(EMPTY, Mu(Force(Var(0))), F(One()))
    check_computation(EMPTY, Error("crash"), Pi(BOOL, F(One())))
    assert kind_of(infer_computation, EMPTY, Diverge()) == MOTIVE_REQUIRED


def test_effect_not_enabled():
    assert kind_of(check_computation, EMPTY, Diverge(), F(One()), sig=PURE) == EFFECT_NOT_ENABLED
    assert kind_of(check_computation, EMPTY, Print("a", Return(Unit())), F(One()), sig=PURE) == EFFECT_NOT_ENABLED


def test_minus_branches_must_agree():
    m = Choose((Return(Refl(TT)), Return(Refl(FF))))
    assert kind_of(infer_computation, EMPTY, m, MINUS) == MISMATCH


# -- subtyping -----------------------------------------------------------------

def _idf(m):
    return F(Id(U(F(BOOL)), Thunk(m), Thunk(m)))


def test_print_subtyping():
    subtype_ctype(EMPTY, _idf(Return(TT)), F(Id(U(F(BOOL)), Thunk(Print("a", Return(TT))), Thunk(Return(TT)))))


def test_choose_subtyping():
    subtype_ctype(EMPTY, F(Id(U(F(BOOL)), Thunk(Return(TT)), Thunk(Return(TT)))),
                  F(Id(U(F(BOOL)), Thunk(H), Thunk(Return(TT)))))


def test_state_subtyping():
    r = Read((("s0", Return(TT)), ("s1", Return(FF))))
    subtype_ctype(EMPTY, _idf(Return(TT)), F(Id(U(F(BOOL)), Thunk(Write("s1", Return(TT))), Thunk(Return(TT)))))
    subtype_ctype(EMPTY, F(Id(U(F(BOOL)), Thunk(Return(TT)), Thunk(Return(TT)))),
                  F(Id(U(F(BOOL)), Thunk(r), Thunk(Return(TT)))))


def test_subtyping_is_directional():
    big = F(Id(U(F(BOOL)), Thunk(Print("a", Return(TT))), Thunk(Return(TT))))
    assert kind_of(subtype_ctype, EMPTY, big, _idf(Return(TT))) == SUBTYPE_FAILURE


def test_subtyping_used_only_when_enabled():
    m = Return(Refl(Thunk(Return(TT))))
    target = F(Id(U(F(BOOL)), Thunk(Print("a", Return(TT))), Thunk(Print("a", Return(TT)))))
    check_computation(EMPTY, m, target, PLUS)
    with pytest.raises(TypingError):
        check_computation(EMPTY, m, target, PLUS_NO_SUBTYPING)


# -- stacks and configurations -------------------------------------------------

def test_stacks():
    check_stack(EMPTY, F(One()), NIL, F(One()))
    check_stack(EMPTY, Pi(One(), F(One())), ArgFrame(Unit(), NIL), F(One()))
    assert kind_of(check_stack, EMPTY, PiN((F(One()), F(One()))), ProjFrame(3, NIL), F(One())) == ARITY_MISMATCH


def test_configurations():
    check_configuration(Configuration(Return(Unit())), F(One()))
    check_configuration(Configuration(Return(Unit()), ToFrame(Return(Var(0)), NIL)), F(One()))
    bad = Configuration(Lam(Return(Var(0)), One()), ToFrame(Return(Var(0)), NIL))
    assert kind_of(check_configuration, bad, F(One())) == MISMATCH


def test_dependent_frame_in_configuration():
    cfg = Configuration(H, ToFrame(Return(Refl(Thunk(Return(Var(0))))), NIL, MOTIVE, BOOL))
    check_configuration(cfg, F(Id(U(F(BOOL)), Thunk(H), Thunk(H))), PLUS)


def test_corpus_dependent_program_modes():
    prog = load((CORE / "dependent_to_in.dcbpv").read_text())
    d = prog.main()
    assert kind_of(check_computation, EMPTY, d.term, d.ty, MINUS, sig=prog.effects) == DEPENDENT_SEQUENCING
    check_computation(EMPTY, d.term, d.ty, PLUS, sig=prog.effects)


def test_mutual_rejection_corpus():
    # Minus rejects exactly the dependent Kleisli extensions that Plus accepts.
    accepted_by_plus_only = 0
    for g in programs("print", 80, seed=3, plus=True):
        check_computation(EMPTY, g.comp, g.ty, PLUS, sig=profile_signature("print"))
        try:
            check_computation(EMPTY, g.comp, g.ty, MINUS, sig=profile_signature("print"))
        except TypingError as e:
            assert e.kind in (DEPENDENT_SEQUENCING, MISMATCH)
            accepted_by_plus_only += 1
    assert accepted_by_plus_only > 0


# -- properties ----------------------------------------------------------------

def _gen(seed, profile="all", plus=False):
    return ProgramGenerator(random.Random(seed), profile_signature(profile), plus=plus, max_depth=5, budget=20)


@settings(max_examples=150, deadline=None)
@given(seeds, st.sampled_from(sorted(PROFILES)))
def test_generated_programs_typecheck_uniquely(seed, profile):
    g = _gen(seed, profile)
    m, ty = g.program()
    sig = profile_signature(profile)
    check_computation(EMPTY, m, ty, MINUS, sig=sig)
    try:
        b1 = infer_computation(EMPTY, m, MINUS, sig=sig)
    except TypingError as e:
        assert e.kind == MOTIVE_REQUIRED
        return
    assert conv(b1, ty, mu_unfold=1)
    assert conv(infer_computation(EMPTY, m, MINUS, sig=sig), b1)


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from(["print", "state", "choose"]))
def test_plus_inference_is_minimal(seed, profile):
    g = _gen(seed, profile, plus=True)
    m, ty = g.program()
    sig = profile_signature(profile)
    try:
        b = infer_computation(EMPTY, m, PLUS, sig=sig)
    except TypingError as e:
        assert e.kind == MOTIVE_REQUIRED
        return
    subtype_ctype(EMPTY, b, ty, sig=sig)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_weakening(seed):
    g = _gen(seed)
    a, c = g.vtype(2), g.vtype(1)
    b = g.ctype(2)
    body = g.comp((a,), b, 5)
    check_computation(Context((a,)), body, shift(b, 1), MINUS, sig=g.sig)
    check_computation(Context((a, c)), shift(body, 1), shift(b, 2), MINUS, sig=g.sig)
    check_computation(Context((c, shift(a, 1))), shift(body, 1, 1), shift(b, 2), MINUS, sig=g.sig)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_substitution(seed):
    g = _gen(seed)
    a, b = g.vtype(2), g.ctype(2)
    body = g.comp((a,), b, 5)
    v = g.value((), a, 3)
    check_computation(Context((a,)), body, shift(b, 1), MINUS, sig=g.sig)
    check_computation(EMPTY, subst(body, v), subst(shift(b, 1), v), MINUS, sig=g.sig)
