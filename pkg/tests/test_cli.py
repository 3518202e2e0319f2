import io
import json
from pathlib import Path

import pytest

from dcbpv.cli import main, translate_program
from dcbpv.parser import load
from dcbpv.syntax import structural_eq
from dcbpv.translate import DEPENDENT

ROOT = Path(__file__).resolve().parent.parent
CORE = ROOT / "corpus" / "core"
SURFACE = ROOT / "corpus" / "surface"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def cli_json(*argv):
    code, out, err = cli(*argv, "--json")
    doc = json.loads(out)
    assert doc["exit_code"] == code
    return code, doc


# -- exit codes ----------------------------------------------------------------

@pytest.mark.parametrize("name,code", [
    ("print_ab", 0), ("ill_typed", 1), ("bad_syntax", 2), ("error", 5),
])
def test_run_exit_codes(name, code):
    assert cli("run", CORE / f"{name}.dcbpv")[0] == code


def test_missing_file_is_io_error():
    code, out, err = cli("check", "nope.dcbpv")
    assert code == 3 and out == ""
    assert err.startswith("nope.dcbpv: error[IO]: cannot read nope.dcbpv")


def test_fuel_exhaustion():
    code, out, _ = cli("run", CORE / "diverge.dcbpv", "--fuel", 100)
    assert code == 4 and "fuel exhausted after 100 steps" in out


def test_fuel_from_environment(monkeypatch):
    monkeypatch.setenv("DCBPV_FUEL", "50")
    code, out, _ = cli("run", CORE / "diverge.dcbpv")
    assert code == 4 and "after 50 steps" in out


def test_syntax_diagnostic_format():
    code, _, err = cli("check", CORE / "bad_syntax.dcbpv")
    assert code == 2
    assert err.startswith(f"{CORE / 'bad_syntax.dcbpv'}:") and "error[Syntax]" in err


# -- check ---------------------------------------------------------------------

def test_check_ok():
    code, out, _ = cli("check", CORE / "print_ab.dcbpv")
    assert code == 0
    assert "main : F 1" in out
    assert "ok: 1 definition(s) checked in minus mode" in out


def test_check_dependent_sequencing_needs_plus():
    code, _, err = cli("check", CORE / "dependent_to_in.dcbpv")
    assert code == 1 and "error[DependentSequencingNotAllowed]" in err
    assert cli("check", CORE / "dependent_to_in.dcbpv", "--mode", "plus")[0] == 0


def test_json_error_document():
    code, doc = cli_json("check", CORE / "ill_typed.dcbpv")
    assert code == 1
    assert doc["errors"][0]["kind"] == "Mismatch"


def test_json_stdout_is_one_document():
    for f in sorted(CORE.glob("*.dcbpv")):
        code, out, _ = cli("run", f, "--json", "--fuel", 100)
        assert json.loads(out)["exit_code"] == code


# -- run -----------------------------------------------------------------------

def test_run_summary():
    code, out, _ = cli("run", CORE / "print_ab.dcbpv")
    assert code == 0
    for part in ('out="ab"', "state=s0", "steps=2", "terminal=ReturnAtNil"):
        assert part in out


def test_run_json_final_configuration():
    code, doc = cli_json("run", CORE / "error.dcbpv")
    assert code == 5 and doc["terminal"] == "ErrorHalt"
    assert doc["final"]["out"] == "a" and doc["final"]["stack"] == []


def test_trace_lines():
    code, out, _ = cli("run", CORE / "print_ab.dcbpv", "--trace")
    first = out.splitlines()[0]
    assert code == 0
    assert first.startswith("0  print \"a\";")
    assert first.endswith('|  0  |  out=""  |  state=s0')


def test_trace_json():
    _, doc = cli_json("run", CORE / "print_ab.dcbpv", "--trace")
    assert [t["step"] for t in doc["trace"]] == [0, 1, 2]
    assert set(doc["trace"][0]) >= {"comp", "stack", "out", "state"}
    assert doc["trace"][-1]["out"] == "ab"


def test_all_branches_in_order():
    code, out, _ = cli("run", CORE / "choose_two.dcbpv", "--all-branches")
    assert code == 0
    assert out.splitlines() == [
        'leaf 1: return inj 1/2 ()  |  out=""  |  state=-  |  steps=1  |  ReturnAtNil',
        'leaf 2: return inj 2/2 ()  |  out=""  |  state=-  |  steps=1  |  ReturnAtNil',
    ]


def test_seeded_run_is_reproducible():
    a = cli("run", CORE / "choose_two.dcbpv", "--seed", 5)
    assert a == cli("run", CORE / "choose_two.dcbpv", "--seed", 5)


# -- translate -----------------------------------------------------------------

def test_translate_notes_acceptance():
    code, out, err = cli("translate", SURFACE / "03_let.dcbpv")
    assert code == 0 and "main: accepted in minus mode" in err
    assert "comp main : F 1 =" in out


def test_translate_weak_rejects_strong_elimination():
    code, _, err = cli("translate", SURFACE / "07_pm_sum_strong.dcbpv", "--direction", "cbn", "--strength", "weak")
    assert code == 1 and "StrongElimination" in err


def test_translate_minus_expected_failure():
    code, _, err = cli("translate", SURFACE / "31_dependent_kleisli.dcbpv", "--mode", "minus")
    assert code == 1 and "expected failure" in err
    assert cli("translate", SURFACE / "31_dependent_kleisli.dcbpv")[0] == 0


@pytest.mark.parametrize("direction", ["cbv", "cbn"])
def test_translate_output_reparses(direction, tmp_path):
    target = tmp_path / "out.dcbpv"
    src = SURFACE / "13_app_dependent.dcbpv"
    assert cli("translate", src, "--direction", direction, "-o", target)[0] == 0
    assert cli("check", target, "--mode", "plus")[0] == 0
    prog = load(src.read_text())
    back = load(target.read_text())
    for d, t in translate_program(prog, direction, DEPENDENT):
        assert structural_eq(back.get(d.name).term, t.comp)
        assert structural_eq(back.get(d.name).ty, t.ty)


# -- fmt -----------------------------------------------------------------------

def test_fmt_is_idempotent(tmp_path):
    code, out, _ = cli("fmt", CORE / "state.dcbpv")
    assert code == 0
    f = tmp_path / "state.dcbpv"
    f.write_text(out + "\n")
    assert cli("fmt", "-i", f)[0] == 0
    assert f.read_text().rstrip("\n") == out.rstrip("\n")


def test_fmt_syntax_error():
    assert cli("fmt", CORE / "bad_syntax.dcbpv")[0] == 2
