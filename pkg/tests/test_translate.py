import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dcbpv.cli import emit_translation, translate_program
from dcbpv.equality import conv
from dcbpv.generate import ProgramGenerator, profile_signature
from dcbpv.parser import load, parse_surface, parse_surface_type
from dcbpv.surface import SId, SOne, SSum, SVar, uses_strong_elimination
from dcbpv.syntax import (
    App, Context, F, Force, Id, Inj, Lam, LetC, LetV, One, Pair, Pi, PmPair, PmPairV, Refl, Return, Sigma, SumN,
    Thunk, ToIn, U, Unit, Var, is_complex_value_free, tr,
)
from dcbpv.translate import (
    CBN, CBV, DEPENDENT, WEAK, TranslationError, cbn_translate_term, cbn_translate_type,
    cbv_translate_term, cbv_translate_type, eliminate_complex_values, translate, translate_context,
)
from dcbpv.typecheck import MINUS, PLUS, TypingError, check_computation

from cases import id_beta_programs

ROOT = Path(__file__).resolve().parent.parent
SURFACE = sorted((ROOT / "corpus" / "surface").glob("*.dcbpv"))
GOLDEN = ROOT / "corpus" / "golden"
LIMITS = ROOT / "corpus" / "limitations"
SBOOL = SSum((SOne(), SOne()))
BOOL = SumN((One(), One()))
NBOOL = SumN((U(F(One())), U(F(One()))))


# -- table rows ----------------------------------------------------------------

def test_cbv_types():
    assert cbv_translate_type(SOne()) == One()
    a = parse_surface_type("Pi x : Sum[1 | 1]. Id Sum[1 | 1] x x")
    assert cbv_translate_type(a) == U(Pi(BOOL, F(Id(U(F(BOOL)), tr(Var(0)), tr(Var(0))))))
    idt = cbv_translate_type(SId(SBOOL, parse_surface("(inj 1/2 () : Sum[1 | 1])"), parse_surface("(inj 2/2 () : Sum[1 | 1])")))
    assert isinstance(idt, Id) and idt.carrier == U(F(BOOL))
    assert isinstance(idt.lhs, Thunk) and isinstance(idt.rhs, Thunk)


def test_cbv_terms():
    assert cbv_translate_term(SVar(0), (SBOOL,)) == Return(Var(0))
    # M'N: M to x. (N to z. (x ' force z)), the argument M evaluated first.
    app = cbv_translate_term(parse_surface("x ' f", ("f", "x")), (parse_surface_type("Pi y : Sum[1 | 1]. Sum[1 | 1]"), SBOOL))
    assert app.head == Return(Var(0)) and app.body.head == Return(Var(2))
    assert app.body.body == App(Var(1), Force(Var(0)))
    refl = cbv_translate_term(parse_surface("refl x", ("x",)), (SBOOL,))
    assert refl.head == Return(Var(0)) and refl.body == Return(Refl(tr(Var(0))))
    lam = cbv_translate_term(parse_surface("\\y : Sum[1 | 1]. y"))
    assert lam == Return(Thunk(Lam(Return(Var(0)), BOOL)))


def test_cbn_rows():
    assert cbn_translate_term(SVar(0), (SBOOL,)) == Force(Var(0))
    pair = cbn_translate_term(parse_surface("<x, x>", ("x",)), (SBOOL,))
    assert pair == Return(Pair(Thunk(Force(Var(0))), Thunk(Force(Var(0)))))
    idt = cbn_translate_type(SId(SBOOL, SVar(0), SVar(0)), (SBOOL,))
    assert cbn_translate_type(SBOOL) == F(NBOOL)
    assert idt == F(Id(U(F(NBOOL)), Thunk(Force(Var(0))), Thunk(Force(Var(0)))))


def test_translation_contexts():
    g, _ = translate_context((SBOOL, SId(SBOOL, SVar(0), SVar(0))), CBV)
    assert g.entries == (BOOL, Id(U(F(BOOL)), tr(Var(0)), tr(Var(0))))
    g, _ = translate_context((SBOOL,), CBN)
    assert g.entries == (U(F(NBOOL)),)


# -- corpus preservation -------------------------------------------------------

def _checks(t, mode, sig):
    check_computation(t.context, t.comp, t.ty, mode, sig=sig)


@pytest.mark.parametrize("path", SURFACE, ids=lambda p: p.stem)
def test_corpus_translations_typecheck(path):
    prog = load(path.read_text())
    main = prog.main(("surface",))
    sig = prog.effects
    cbv = translate(main.term, CBV)
    cbn = translate(main.term, CBN)
    _checks(cbv, PLUS, sig)
    _checks(cbn, PLUS, sig)
    assert is_complex_value_free(cbv.comp) and is_complex_value_free(cbn.comp)
    if uses_strong_elimination(main.term):
        with pytest.raises(TranslationError):
            translate(main.term, CBN, WEAK)
    else:
        _checks(translate(main.term, CBN, WEAK), MINUS, sig)


@pytest.mark.parametrize("path", SURFACE, ids=lambda p: p.stem)
@pytest.mark.parametrize("direction", [CBV, CBN])
def test_golden_fixtures(path, direction):
    prog = load(path.read_text())
    text = emit_translation(prog, translate_program(prog, direction, DEPENDENT))
    assert text == (GOLDEN / f"{path.stem}.{direction}.dcbpv").read_text()


def test_cbv_rejected_by_minus_somewhere():
    rejected = 0
    for path in SURFACE:
        prog = load(path.read_text())
        t = translate(prog.main(("surface",)).term, CBV)
        try:
            _checks(t, MINUS, prog.effects)
        except TypingError:
            rejected += 1
    assert rejected > 0


def test_known_limitation_cbv_proof_dependent_motive():
    prog = load((LIMITS / "cbv_idpm_motive_uses_proof.dcbpv").read_text())
    main = prog.main(("surface",))
    _checks(translate(main.term, CBN), PLUS, prog.effects)
    with pytest.raises(TypingError):
        _checks(translate(main.term, CBV), PLUS, prog.effects)


# -- identity types ------------------------------------------------------------

@pytest.mark.parametrize("prog", id_beta_programs(), ids=lambda p: str(id(p))[-4:])
def test_cbv_id_beta(prog):
    lhs = translate(prog.get("lhs").term, CBV)
    rhs = translate(prog.get("rhs").term, CBV)
    assert conv(lhs.comp, rhs.comp)
    _checks(lhs, PLUS, prog.effects)


def test_id_eta_fails():
    ctx = (SBOOL, SBOOL, SId(SBOOL, SVar(1), SVar(0)))
    t = translate(SVar(0), CBV, ctx=ctx)
    _checks(t, MINUS, profile_signature("pure"))
    ident = t.context.entries[-1]
    assert not conv(ident.lhs, ident.rhs)
    # The proof p does not make x and y interchangeable.
    refl_type = F(Id(U(F(BOOL)), tr(Var(2)), tr(Var(2))))
    with pytest.raises(TypingError):
        check_computation(t.context, t.comp, refl_type, PLUS)


# -- complex values ------------------------------------------------------------

def test_eliminate_let():
    assert eliminate_complex_values(Return(LetV(Unit(), Var(0)))) == LetC(Unit(), Return(Var(0)))


def test_eliminate_pm_pair():
    m = Return(PmPairV(Var(0), (Pair(Var(1), Var(0)),)))
    out = eliminate_complex_values(m)
    assert out == PmPair(Var(0), (Return(Pair(Var(1), Var(0))),))
    check_computation(Context((Sigma(One(), One()),)), out, F(Sigma(One(), One())))


def test_eliminate_identity_on_clean_input():
    m = ToIn(Return(Inj(1, 2, Unit())), Return(Var(0)))
    assert eliminate_complex_values(m) is m


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["pure", "all"]))
def test_eliminate_complex_values_property(seed, profile):
    g = ProgramGenerator(random.Random(seed), profile_signature(profile), complex_values=True,
                         max_depth=6, budget=25)
    m, ty = g.program()
    out = eliminate_complex_values(m)
    assert is_complex_value_free(out)
    assert conv(m, out)
    check_computation(Context(), out, ty, MINUS, sig=g.sig)
