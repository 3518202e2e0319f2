"""``dcbpv check|run|translate|fmt``.

Exit codes: 0 success, 1 type error, 2 syntax error, 3 I/O error,
4 fuel exhausted, 5 error or stuck terminal.  Diagnostics go to stderr as
``file:line:col: error[KIND]: message``; with ``--json`` stdout carries a
single JSON document and nothing else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import machine, translate as tr
from .effects import EffectNotEnabled
from .equality import DEFAULT_FUEL
from .parser import (
    Definition, DuplicateDefinition, ParseError, Program, UnboundIdentifier, load, parse,
    pretty, pretty_header, pretty_program,
)
from .surface import SAnn, SurfaceTypeError, synth
from .syntax import ArgFrame, Context, ProjFrame, ToFrame, is_complex_value_free
from .typecheck import Checker, Mode, TypingError

EXIT_OK = 0
EXIT_TYPE = 1
EXIT_SYNTAX = 2
EXIT_IO = 3
EXIT_FUEL = 4
EXIT_ERROR_TERMINAL = 5

_HALTS = (machine.RETURN_AT_NIL, machine.LAMBDA_AT_NIL, machine.TUPLE_AT_NIL)


class Failure(Exception):
    def __init__(self, code: int, kind: str, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.message = message
        self.line = line
        self.column = column


@dataclass
class Report:
    """What a command prints: text lines for stdout, or one JSON document."""

    args: argparse.Namespace
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def say(self, text: str) -> None:
        self.lines.append(text)

    def diagnose(self, f: Failure) -> None:
        self.diagnostics.append({
            "file": self.args.file, "line": f.line, "column": f.column,
            "kind": f.kind, "message": f.message,
        })

    def emit(self, code: int, out, err) -> int:
        if self.args.json:
            doc = dict(self.data, exit_code=code)
            if self.diagnostics:
                doc["errors"] = self.diagnostics
            out.write(json.dumps(doc, indent=2) + "\n")
            return code
        for line in self.lines:
            out.write(line + "\n")
        for n in self.notes:
            err.write(n + "\n")
        for d in self.diagnostics:
            where = f"{d['file']}:{d['line']}:{d['column']}" if d["line"] else d["file"]
            err.write(f"{where}: error[{d['kind']}]: {d['message']}\n")
        return code


def default_fuel() -> int:
    env = os.environ.get("DCBPV_FUEL")
    if env is None:
        return DEFAULT_FUEL
    try:
        n = int(env)
    except ValueError:
        raise SystemExit(f"DCBPV_FUEL must be a natural number, got {env!r}")
    if n < 0:
        raise SystemExit(f"DCBPV_FUEL must be a natural number, got {env!r}")
    return n


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise Failure(EXIT_IO, "IO", f"cannot read {path}: {e.strerror or e}")
    except UnicodeDecodeError as e:
        raise Failure(EXIT_IO, "IO", f"cannot decode {path}: {e}")


def _load(path: str) -> Program:
    src = _read(path)
    try:
        return load(src)
    except ParseError as e:
        raise Failure(EXIT_SYNTAX, "Syntax", e.message, e.line, e.column)
    except (UnboundIdentifier, DuplicateDefinition) as e:
        raise Failure(EXIT_SYNTAX, type(e).__name__, e.message, e.line, e.column)
    except EffectNotEnabled as e:
        raise Failure(EXIT_TYPE, "EffectNotEnabled", str(e), getattr(e, "line", 0), getattr(e, "column", 0))


def _mode(args) -> Mode:
    plus = args.mode == "plus"
    return Mode(plus=plus, subtyping=plus and args.subtyping == "on")


def _checker(args, prog: Program, mode: Mode = None) -> Checker:
    return Checker(mode or _mode(args), prog.effects, args.fuel, eta_id=args.eta_id, mu_unfold=args.mu_unfold)


def _check_definition(chk: Checker, d: Definition):
    """The type of a definition, or raise :class:`Failure`."""
    g = Context()
    try:
        if d.kind == "vtype":
            chk.check_vtype(g, d.term)
            return None
        if d.kind == "ctype":
            chk.check_ctype(g, d.term)
            return None
        if d.kind == "stype":
            return None
        if d.kind == "surface":
            return synth(d.term, ()) if d.ty is None else d.ty
        if d.kind == "value":
            if d.ty is None:
                return chk.infer_value(g, d.term)
            chk.check_vtype(g, d.ty)
            chk.check_value(g, d.term, d.ty)
            return d.ty
        if d.ty is None:
            return chk.infer_comp(g, d.term)
        chk.check_ctype(g, d.ty)
        chk.check_comp(g, d.term, d.ty)
        return d.ty
    except TypingError as e:
        raise Failure(EXIT_TYPE, e.kind, f"in {d.name!r}: {e.message}", d.line, d.column)
    except SurfaceTypeError as e:
        raise Failure(EXIT_TYPE, "SurfaceType", f"in {d.name!r}: {e}", d.line, d.column)
    except EffectNotEnabled as e:
        raise Failure(EXIT_TYPE, "EffectNotEnabled", f"in {d.name!r}: {e}", d.line, d.column)
    except RecursionError:
        raise Failure(EXIT_TYPE, "FuelExhausted", f"in {d.name!r}: term too deep", d.line, d.column)


# -- commands ------------------------------------------------------------------


def cmd_check(args, rep: Report) -> int:
    prog = _load(args.file)
    chk = _checker(args, prog)
    rep.data.update(command="check", mode=args.mode, definitions=[])
    for d in prog.definitions:
        ty = _check_definition(chk, d)
        shown = None if ty is None else pretty(ty)
        rep.data["definitions"].append({"name": d.name, "kind": d.kind, "type": shown})
        rep.say(f"{d.name} : {shown}" if shown is not None else f"{d.name} : {d.kind}")
    rep.data["ok"] = True
    rep.say(f"ok: {len(prog.definitions)} definition(s) checked in {args.mode} mode")
    return EXIT_OK


def _entry(args, prog: Program) -> Definition:
    if args.entry is not None:
        try:
            d = prog.get(args.entry)
        except KeyError:
            raise Failure(EXIT_TYPE, "NoEntry", f"no definition named {args.entry!r}")
        if d.kind not in ("comp", "computation"):
            raise Failure(EXIT_TYPE, "NoEntry", f"{args.entry!r} is not a computation", d.line, d.column)
        return d
    d = prog.main(("comp", "computation"))
    if d is None:
        raise Failure(EXIT_TYPE, "NoEntry", "the program defines no computation to run")
    return d


def _frames(k) -> list:
    out = []
    while not isinstance(k, machine.s.Nil):
        if isinstance(k, ToFrame):
            out.append({"frame": "to", "body": pretty(k.body, ("x0",))})
        elif isinstance(k, ProjFrame):
            out.append({"frame": "proj", "tag": k.tag})
        elif isinstance(k, ArgFrame):
            out.append({"frame": "arg", "value": pretty(k.arg)})
        k = k.rest
    return out


def _depth(k) -> int:
    n = 0
    while not isinstance(k, machine.s.Nil):
        n += 1
        k = k.rest
    return n


def _state(c: machine.Configuration) -> str:
    return "-" if c.store is None else c.store


def trace_line(n: int, c: machine.Configuration) -> str:
    return f"{n}  {pretty(c.comp)}  |  {_depth(c.stack)}  |  out={json.dumps(c.out)}  |  state={_state(c)}"


def _config_json(c: machine.Configuration) -> dict:
    return {"comp": pretty(c.comp), "stack": _frames(c.stack), "out": c.out, "state": c.store}


def _leaf_code(reason: str) -> int:
    if reason in _HALTS:
        return EXIT_OK
    if reason == machine.FUEL_EXHAUSTED:
        return EXIT_FUEL
    return EXIT_ERROR_TERMINAL


def cmd_run(args, rep: Report) -> int:
    prog = _load(args.file)
    d = _entry(args, prog)
    rep.data.update(command="run", entry=d.name)
    if not args.unsafe:
        _check_definition(_checker(args, prog), d)
    m = d.term
    if not is_complex_value_free(m):
        m = tr.eliminate_complex_values(m)
    try:
        start = machine.initial(m, prog.effects)
    except (machine.OpenTerm, machine.ComplexValuePresent) as e:
        raise Failure(EXIT_TYPE, type(e).__name__, str(e), d.line, d.column)

    if args.all_branches:
        leaves = machine.run_all(start, args.fuel)
        rep.data["leaves"] = []
        for i, leaf in enumerate(leaves, 1):
            c = leaf.config
            rep.data["leaves"].append(dict(_config_json(c), steps=leaf.steps, terminal=leaf.reason))
            rep.say(f"leaf {i}: {pretty(c.comp)}  |  out={json.dumps(c.out)}  |  state={_state(c)}"
                    f"  |  steps={leaf.steps}  |  {leaf.reason}")
        codes = {_leaf_code(leaf.reason) for leaf in leaves}
        for code in (EXIT_ERROR_TERMINAL, EXIT_FUEL):
            if code in codes:
                return code
        return EXIT_OK

    trace = []

    def on_step(n, c):
        if args.trace:
            if args.json:
                trace.append(dict(_config_json(c), step=n))
            else:
                rep.say(trace_line(n, c))

    try:
        res = machine.run(start, args.fuel, args.seed, on_step=on_step if args.trace else None)
    except machine.FuelExhausted as e:
        c = e.config
        if args.trace:
            rep.data["trace"] = trace
        rep.data.update(final=_config_json(c), steps=e.steps, terminal=machine.FUEL_EXHAUSTED)
        rep.say(f"fuel exhausted after {e.steps} steps")
        rep.say(f"last: {pretty(c.comp)}")
        rep.say(f"out={json.dumps(c.out)}")
        rep.say(f"state={_state(c)}")
        return EXIT_FUEL
    c = res.config
    if args.trace:
        rep.data["trace"] = trace
    rep.data.update(final=_config_json(c), steps=res.steps, terminal=res.reason)
    rep.say(f"result: {pretty(c.comp)}")
    rep.say(f"out={json.dumps(c.out)}")
    rep.say(f"state={_state(c)}")
    rep.say(f"steps={res.steps}")
    rep.say(f"terminal={res.reason}")
    return _leaf_code(res.reason)


def recheck(prog_effects, comp, ty, args, modes=("minus", "plus")):
    """The first mode accepting ``comp : ty``, and the errors of those that did not."""
    errors = {}
    for name in modes:
        mode = Mode(plus=name == "plus", subtyping=name == "plus" and args.subtyping == "on")
        chk = Checker(mode, prog_effects, args.fuel, eta_id=args.eta_id, mu_unfold=args.mu_unfold)
        try:
            chk.check_ctype(Context(), ty)
            chk.check_comp(Context(), comp, ty)
            return name, errors
        except TypingError as e:
            errors[name] = e
    return None, errors


def translate_program(prog: Program, direction: str, strength: str):
    """``[(definition, Translation)]`` for every surface term definition."""
    out = []
    for d in prog.definitions:
        if d.kind != "surface":
            continue
        term = d.term if d.ty is None else SAnn(d.term, d.ty)
        try:
            out.append((d, tr.translate(term, direction, strength)))
        except tr.TranslationError as e:
            raise Failure(EXIT_TYPE, "StrongElimination", f"in {d.name!r}: {e}", d.line, d.column)
        except SurfaceTypeError as e:
            raise Failure(EXIT_TYPE, "SurfaceType", f"in {d.name!r}: {e}", d.line, d.column)
    return out


def emit_translation(prog: Program, pairs) -> str:
    lines = [pretty_header(prog.effects), ""]
    for d, t in pairs:
        lines.append(f"comp {d.name} : {pretty(t.ty)} = {pretty(t.comp)};")
    return "\n".join(lines) + "\n"


def cmd_translate(args, rep: Report) -> int:
    prog = _load(args.file)
    pairs = translate_program(prog, args.direction, args.strength)
    if not pairs:
        raise Failure(EXIT_TYPE, "NoEntry", "the program defines no surface term to translate")
    text = emit_translation(prog, pairs)
    modes = ("minus", "plus") if args.mode is None else (args.mode,)
    rep.data.update(command="translate", direction=args.direction, strength=args.strength,
                    program=text, definitions=[])
    code = EXIT_OK
    notes = []
    for d, t in pairs:
        accepted, errors = recheck(prog.effects, t.comp, t.ty, args, modes)
        entry = {"name": d.name, "type": pretty(t.ty), "accepted_by": accepted}
        if accepted is None:
            code = EXIT_TYPE
            e = errors[modes[-1]]
            expected = args.direction == tr.CBV or args.strength == tr.DEPENDENT
            entry["error"] = e.to_json()
            entry["expected_failure"] = modes == ("minus",) and expected
            tag = " (expected failure: dependent translations need plus mode)" if entry["expected_failure"] else ""
            msg = f"translation of {d.name!r} rejected in {'/'.join(modes)} mode{tag}: {e.message}"
            rep.diagnose(Failure(EXIT_TYPE, e.kind, msg, d.line, d.column))
        else:
            notes.append(f"{d.name}: accepted in {accepted} mode")
        rep.data["definitions"].append(entry)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise Failure(EXIT_IO, "IO", f"cannot write {args.output}: {e.strerror or e}")
    else:
        rep.say(text.rstrip("\n"))
    rep.notes.extend(notes)
    return code


def cmd_fmt(args, rep: Report) -> int:
    src = _read(args.file)
    try:
        p = parse(src)
    except ParseError as e:
        raise Failure(EXIT_SYNTAX, "Syntax", e.message, e.line, e.column)
    text = pretty_program(p)
    rep.data.update(command="fmt", program=text)
    if args.in_place:
        try:
            with open(args.file, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise Failure(EXIT_IO, "IO", f"cannot write {args.file}: {e.strerror or e}")
    else:
        rep.say(text.rstrip("\n"))
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------


def _natural(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="source file, or - for stdin")
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--fuel", type=_natural, default=None,
                        help="step and normalization budget (default: $DCBPV_FUEL or 10^6)")
    common.add_argument("--subtyping", choices=("on", "off"), default="on",
                        help="plus-mode subtyping (default on)")
    common.add_argument("--eta-id", action="store_true", help="reflect identity hypotheses in conversion")
    common.add_argument("--mu-unfold", type=_natural, default=None,
                        help="fixpoint unfoldings allowed in conversion (default 1 in plus mode)")

    p = argparse.ArgumentParser(prog="dcbpv", description="Dependently typed call-by-push-value.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="typecheck every definition")
    c.add_argument("--mode", choices=("minus", "plus"), default="minus")
    c.set_defaults(fn=cmd_check)

    r = sub.add_parser("run", parents=[common], help="typecheck, then run on the CK-machine")
    r.add_argument("--mode", choices=("minus", "plus"), default="minus")
    r.add_argument("--seed", type=_natural, default=0, help="scheduler seed for choose")
    r.add_argument("--all-branches", action="store_true", help="explore every choose branch")
    r.add_argument("--trace", action="store_true", help="print every configuration")
    r.add_argument("--unsafe", action="store_true", help="skip the type check")
    r.add_argument("--entry", default=None, help="definition to run (default main, else the last)")
    r.set_defaults(fn=cmd_run)

    t = sub.add_parser("translate", parents=[common], help="translate surface terms to core")
    t.add_argument("--direction", choices=(tr.CBV, tr.CBN), default=tr.CBV)
    t.add_argument("--strength", choices=(tr.WEAK, tr.DEPENDENT), default=tr.DEPENDENT)
    t.add_argument("--mode", choices=("minus", "plus"), default=None,
                   help="re-check only in this mode (default: minus, then plus)")
    t.add_argument("-o", "--output", default=None, help="write the core program here")
    t.set_defaults(fn=cmd_translate)

    f = sub.add_parser("fmt", parents=[common], help="pretty-print a source file")
    f.add_argument("-i", "--in-place", action="store_true")
    f.set_defaults(fn=cmd_fmt)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.fuel is None:
        args.fuel = default_fuel()
    rep = Report(args)
    try:
        code = args.fn(args, rep)
    except Failure as f:
        rep.diagnose(f)
        code = f.code
    return rep.emit(code, out, err)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
