import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dcbpv.effects import EffectNotEnabled
from dcbpv.generate import random_term
from dcbpv.parser import (
    DuplicateDefinition, ParseError, UnboundIdentifier, load, parse, parse_comp, parse_ctype,
    parse_surface, parse_surface_type, parse_value, parse_vtype, pretty, pretty_program,
)
from dcbpv.syntax import (
    F, Inj, Lam, One, PmSum, Return, ToIn, Unit, Var, is_well_scoped,
)

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
PARSERS = {
    "value": parse_value, "comp": parse_comp, "vtype": parse_vtype, "ctype": parse_ctype,
    "surface": parse_surface, "stype": parse_surface_type,
}


def test_parse_return_unit():
    assert parse_comp("return ()") == Return(Unit())


def test_parse_to_in_binds_variable():
    assert parse_comp("return () to x. return x") == ToIn(Return(Unit()), Return(Var(0)))


def test_parse_pm_sum():
    m = parse_comp("pm inj 1/2 () as {1 x. return x | 2 y. return ()}")
    assert isinstance(m, PmSum) and len(m.branches) == 2
    assert m.scrutinee == Inj(1, 2, Unit())


def test_resolve_lambda():
    assert parse_comp("\\x. return x") == Lam(Return(Var(0)))


def test_resolve_shadowing_innermost_wins():
    assert parse_comp("\\x. \\x. return x") == Lam(Lam(Return(Var(0))))


def test_unbound_identifier():
    with pytest.raises(UnboundIdentifier) as e:
        load("comp m = force foo;")
    assert e.value.name == "foo" and e.value.line == 1


def test_duplicate_definition():
    with pytest.raises(DuplicateDefinition):
        load("comp m = return (); comp m = return ();")


def test_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse("comp m = return (;")
    assert (e.value.line, e.value.column) == (1, 18)
    assert "value" in e.value.expected


def test_effect_outside_signature_rejected():
    with pytest.raises(EffectNotEnabled):
        load('comp m = print "a"; return ();')
    load('effects { print ["a"] }\ncomp m = print "a"; return ();')


def test_definitions_are_inlined():
    p = load("value u : 1 = (); comp m : F 1 = return u;")
    assert p.get("m").term == Return(Unit())


def test_pretty_examples():
    assert pretty(Lam(Return(Var(0)))) == "\\x0. return x0"
    assert pretty(F(One())) == "F 1"


def test_comments_and_header():
    src = ('effects { print ["a","b"]; state {s0,s1} init s0; errors {crash}; choose; diverge; rec }\n'
           "-- a comment\ncomp main : F 1 = return ();\n")
    p = load(src)
    assert p.effects.initial == "s0" and p.effects.alphabet == ("a", "b")
    assert p.effects.errors == ("crash",)


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*/*.dcbpv")), ids=lambda p: p.name)
def test_corpus_fmt_idempotent(path):
    src = path.read_text()
    try:
        once = pretty_program(parse(src))
    except ParseError:
        assert path.name == "bad_syntax.dcbpv"
        return
    assert pretty_program(parse(once)) == once


@settings(max_examples=400, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(PARSERS)))
def test_pretty_parse_roundtrip(seed, kind):
    r = random.Random(seed)
    n = r.randint(0, 3)
    names = tuple(f"a{i}" for i in range(n))
    t = random_term(r, kind, n, 4)
    back = PARSERS[kind](pretty(t, names), names)
    assert back == t
    assert is_well_scoped(back, n)
