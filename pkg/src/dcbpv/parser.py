"""Concrete syntax: lexing, parsing, resolution and pretty-printing.

Parsing resolves bound names to de Bruijn indices on the fly; names that are
not bound become :class:`Ref` placeholders, which :func:`resolve` replaces by
the definitions they name.  Definitions are closed, so inlining needs no
shifting.

The printer names the binder at depth ``d`` ``x<d>``, which never captures,
and parenthesizes conservatively so that ``parse(pretty(t))`` gives back
``t`` exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from . import surface as sf
from . import syntax as s
from .effects import EffectNotEnabled, EffectSignature, PURE
from .syntax import (
    App, Choose, Diverge, Error, F, Force, Id, Inj, Lam, LetC, LetV, Mu, Node, One, Pair, Pi,
    PiN, PmId, PmIdV, PmPair, PmPairV, PmSum, PmSumV, PmUnit, PmUnitV, Print, Proj, Read, Refl,
    Return, Sigma, SumN, Thunk, ToIn, Tuple, Unit, Var, Write,
)


class ParseError(Exception):
    """A syntax error at ``line``:``column`` (1-based)."""

    def __init__(self, line: int, column: int, expected, got: str = "", message: str = ""):
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        self.got = got
        text = message or f"expected {' or '.join(sorted(self.expected))}, got {got!r}"
        super().__init__(text)
        self.message = text


class UnboundIdentifier(Exception):
    def __init__(self, name: str, line: int = 0, column: int = 0, detail: str = ""):
        self.name = name
        self.line = line
        self.column = column
        self.message = detail or f"unbound identifier {name!r}"
        super().__init__(self.message)


class DuplicateDefinition(Exception):
    def __init__(self, name: str, line: int = 0, column: int = 0):
        self.name = name
        self.line = line
        self.column = column
        self.message = f"duplicate definition {name!r}"
        super().__init__(self.message)


class ResolveEffectError(EffectNotEnabled):
    def __init__(self, inner: EffectNotEnabled, name: str, line: int, column: int):
        self.__dict__.update(inner.__dict__)
        self.line = line
        self.column = column
        self.message = f"in {name!r}: {inner}"
        Exception.__init__(self, self.message)


@dataclass(frozen=True, slots=True)
class Ref(Node):
    """A reference to a definition, before inlining."""

    name: str
    category: str
    line: int = 0
    column: int = 0


# -- lexer ------------------------------------------------------------------

KEYWORDS = frozenset("""
    thunk force return to let in inj refl pm as proj tuple diverge error mu print choose
    write read lam U F Pi Sg Id Sum Prod effects value comp computation vtype ctype surface
    state init errors rec
""".split())

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[(){}\[\]<>,.;:|='\\/])
""", re.VERBOSE)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # 'ident', 'int', 'string', 'eof', or the keyword / symbol itself
    text: str
    line: int
    column: int


def tokenize(src: str) -> list:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(line, col, {"a token"}, src[pos], f"unexpected character {src[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind == "ident":
                out.append(Token(text if text in KEYWORDS else "ident", text, line, col))
            elif kind == "sym":
                out.append(Token(text, text, line, col))
            elif kind in ("int", "string"):
                out.append(Token(kind, text, line, col))
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# -- programs ---------------------------------------------------------------

DEF_KINDS = ("value", "comp", "vtype", "ctype", "surface")


@dataclass(frozen=True)
class Definition:
    name: str
    kind: str
    term: object
    ty: object = None
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class SourceProgram:
    effects: EffectSignature
    definitions: tuple
    has_header: bool = False


@dataclass(frozen=True)
class Program:
    """A resolved program: every definition closed and inlined."""

    effects: EffectSignature
    definitions: tuple
    has_header: bool = False

    def get(self, name: str) -> Definition:
        for d in self.definitions:
            if d.name == name:
                return d
        raise KeyError(name)

    def main(self, kinds=("comp",)) -> Optional[Definition]:
        """The definition called ``main``, else the last one of the given kinds."""
        pick = None
        for d in self.definitions:
            if d.kind in kinds:
                if d.name == "main":
                    return d
                pick = d
        return pick


_VALUE_START = {"ident", "thunk", "inj", "refl", "<", "("}
_PM_KINDS = {
    "sum": (PmSum, PmSumV, 1),
    "unit": (PmUnit, PmUnitV, 1),
    "pair": (PmPair, PmPairV, 1),
    "id": (PmId, PmIdV, 3),
}
_SURFACE_PM = {"sum": sf.SPmSum, "unit": sf.SPmUnit, "pair": sf.SPmPair, "id": sf.SPmId}
_TYPE_START = {"Sum", "Prod", "Pi", "Sg", "Id", "int", "U", "F"}


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # token plumbing
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *kinds) -> bool:
        return self.peek().kind in kinds

    def next(self) -> Token:
        t = self.peek()
        self.i = min(self.i + 1, len(self.toks) - 1)
        return t

    def fail(self, expected, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(tok.line, tok.column, expected, tok.text or "end of input")

    def expect(self, kind: str) -> Token:
        if not self.at(kind):
            self.fail({kind})
        return self.next()

    def accept(self, kind: str) -> bool:
        if self.at(kind):
            self.next()
            return True
        return False

    def ident(self) -> str:
        return self.expect("ident").text

    def int(self) -> int:
        return int(self.expect("int").text)

    def string(self) -> str:
        return json.loads(self.expect("string").text)

    def sep_by(self, item, open_: str, close: str, sep: str = "|") -> list:
        self.expect(open_)
        out = []
        if self.accept(close):
            return out
        while True:
            out.append(item())
            if self.accept(close):
                return out
            if not self.at(sep):
                self.fail({sep, close})
            self.next()

    def done(self):
        if not self.at("eof"):
            self.fail({"end of input"})

    def ref(self, tok: Token, scope: tuple, category: str):
        """A free identifier: a definition reference (bound names are errors here)."""
        if tok.text in scope:
            raise ParseError(tok.line, tok.column, {category}, tok.text,
                             f"variable {tok.text!r} used where a {category} is expected")
        return Ref(tok.text, category, tok.line, tok.column)

    # values -----------------------------------------------------------------

    def value(self, sc: tuple):
        if self.accept("thunk"):
            return Thunk(self.comp_head(sc))
        if self.accept("inj"):
            tag = self.int()
            self.expect("/")
            arity = self.int()
            ty = None
            if self.accept("{"):
                ty = self.vtype(sc)
                self.expect("}")
            return Inj(tag, arity, self.value(sc), ty)
        if self.accept("refl"):
            return Refl(self.value(sc))
        if self.accept("let"):
            x, ty = self.binder_ann(sc, self.vtype)
            self.expect("=")
            bound = self.value(sc)
            self.expect("in")
            return LetV(bound, self.value(sc + (x,)), ty)
        if self.accept("pm"):
            return self.pm(sc, value_level=True)
        return self.value_atom(sc)

    def value_atom(self, sc: tuple):
        t = self.peek()
        if t.kind == "ident":
            self.next()
            if t.text in sc:
                return Var(len(sc) - 1 - _rindex(sc, t.text))
            return Ref(t.text, "value", t.line, t.column)
        if self.accept("("):
            if self.accept(")"):
                return Unit()
            v = self.value(sc)
            self.expect(")")
            return v
        if self.accept("<"):
            a = self.value(sc)
            self.expect(",")
            b = self.value(sc)
            self.expect(">")
            return Pair(a, b)
        self.fail({"value"})

    def binder_ann(self, sc, ty_parser):
        x = self.ident()
        ty = ty_parser(sc) if self.accept(":") else None
        return x, ty

    def pm(self, sc: tuple, value_level: bool, surface: bool = False):
        scrut = self.sterm(sc) if surface else self.value(sc)
        motive_names, motive_tok = None, None
        if self.at("["):
            motive_tok = self.next()
            motive_names = [self.ident()]
            while self.at("ident"):
                motive_names.append(self.ident())
            self.expect(".")
            mscope = sc + tuple(motive_names)
            if surface:
                motive = self.stype(mscope)
            else:
                motive = self.vtype(mscope) if value_level else self.ctype(mscope)
            self.expect("]")
        self.expect("as")
        body = self.comp if not value_level else self.value
        if surface:
            body = self.sterm
        kind, branches = self.pm_branches(sc, body)
        _, _, mb = _PM_KINDS[kind]
        if motive_names is not None and len(motive_names) != mb:
            raise ParseError(motive_tok.line, motive_tok.column, {f"{mb} motive binder(s)"},
                             str(len(motive_names)))
        if surface:
            cls = _SURFACE_PM[kind]
        else:
            comp_cls, val_cls, _ = _PM_KINDS[kind]
            cls = val_cls if value_level else comp_cls
        return cls(scrut, tuple(branches), motive if motive_names is not None else None)

    def pm_branches(self, sc, body):
        self.expect("{")
        if self.accept("}"):
            return "sum", []
        t = self.peek()
        if t.kind == "int":
            branches = []
            while True:
                tok = self.peek()
                if self.int() != len(branches) + 1:
                    raise ParseError(tok.line, tok.column, {str(len(branches) + 1)}, tok.text,
                                     "sum branches must be numbered 1, 2, ... in order")
                x = self.ident()
                self.expect(".")
                branches.append(body(sc + (x,)))
                if self.accept("}"):
                    return "sum", branches
                self.expect("|")
        if self.accept("("):
            self.expect(")")
            self.expect(".")
            b = body(sc)
            self.expect("}")
            return "unit", [b]
        if self.accept("<"):
            x = self.ident()
            self.expect(",")
            y = self.ident()
            self.expect(">")
            self.expect(".")
            b = body(sc + (x, y))
            self.expect("}")
            return "pair", [b]
        if self.accept("refl"):
            x = self.ident()
            self.expect(".")
            b = body(sc + (x,))
            self.expect("}")
            return "id", [b]
        self.fail({"int", "(", "<", "refl", "}"})

    # computations -------------------------------------------------------------

    def comp(self, sc: tuple):
        head = self.comp_head(sc)
        if not self.accept("to"):
            return head
        x = self.ident()
        head_ty = self.vtype(sc) if self.accept(":") else None
        motive = None
        if self.accept("["):
            z = self.ident()
            self.expect(".")
            motive = self.ctype(sc + (z,))
            self.expect("]")
        self.expect(".")
        return ToIn(head, self.comp(sc + (x,)), motive, head_ty)

    def comp_head(self, sc: tuple):
        t = self.peek()
        k = t.kind
        if k == "return":
            self.next()
            return Return(self.value(sc))
        if k == "force":
            self.next()
            return Force(self.value(sc))
        if k == "proj":
            self.next()
            tag = self.int()
            return Proj(tag, self.comp_head(sc))
        if k == "\\":
            self.next()
            x, dom = self.binder_ann(sc, self.vtype)
            self.expect(".")
            return Lam(self.comp(sc + (x,)), dom)
        if k == "let":
            self.next()
            x, ty = self.binder_ann(sc, self.vtype)
            self.expect("=")
            bound = self.value(sc)
            self.expect("in")
            return LetC(bound, self.comp(sc + (x,)), ty)
        if k == "pm":
            self.next()
            return self.pm(sc, value_level=False)
        if k == "tuple":
            self.next()
            return Tuple(tuple(self.sep_by(lambda: self.comp(sc), "{", "}")))
        if k == "diverge":
            self.next()
            return Diverge(self.ctype(sc) if self.accept(":") else None)
        if k == "error":
            self.next()
            name = self.ident()
            return Error(name, self.ctype(sc) if self.accept(":") else None)
        if k == "mu":
            self.next()
            x = self.ident()
            ty = self.ctype(sc) if self.accept(":") else None
            self.expect(".")
            return Mu(self.comp(sc + (x,)), ty)
        if k == "print":
            self.next()
            letter = self.string()
            self.expect(";")
            return Print(letter, self.comp(sc))
        if k == "write":
            self.next()
            st = self.ident()
            self.expect(";")
            return Write(st, self.comp(sc))
        if k == "choose":
            self.next()
            return Choose(tuple(self.sep_by(lambda: self.comp(sc), "{", "}")))
        if k == "read":
            self.next()
            return Read(tuple(self.sep_by(lambda: self.read_branch(sc), "{", "}")))
        if k == "(":
            if self._after_parens().kind != "'":
                self.next()
                m = self.comp(sc)
                self.expect(")")
                return m
        elif k == "ident" and self.peek(1).kind != "'":
            self.next()
            return self.ref(t, sc, "computation")
        if k in _VALUE_START:
            v = self.value(sc)
            self.expect("'")
            return App(v, self.comp_head(sc))
        self.fail({"computation"})

    def read_branch(self, sc):
        st = self.ident()
        self.expect(".")
        return st, self.comp(sc)

    def _after_parens(self) -> Token:
        depth = 0
        j = self.i
        while True:
            t = self.toks[j]
            if t.kind == "eof":
                return t
            if t.kind == "(":
                depth += 1
            elif t.kind == ")":
                depth -= 1
                if depth == 0:
                    return self.toks[min(j + 1, len(self.toks) - 1)]
            j += 1

    # types ----------------------------------------------------------------

    def vtype(self, sc: tuple):
        t = self.peek()
        if self.accept("U"):
            return s.U(self.ctype(sc))
        if self.accept("Sum"):
            return SumN(tuple(self.sep_by(lambda: self.vtype(sc), "[", "]")))
        if self.accept("Sg"):
            x = self.ident()
            self.expect(":")
            a = self.vtype(sc)
            self.expect(".")
            return Sigma(a, self.vtype(sc + (x,)))
        if self.accept("Id"):
            a = self.vtype(sc)
            return Id(a, self.value(sc), self.value(sc))
        if t.kind == "int":
            self.next()
            if t.text != "1":
                raise ParseError(t.line, t.column, {"1"}, t.text, "the only numeric type is 1")
            return One()
        if self.accept("("):
            a = self.vtype(sc)
            self.expect(")")
            return a
        if t.kind == "ident":
            self.next()
            return self.ref(t, sc, "vtype")
        self.fail({"value type"})

    def ctype(self, sc: tuple):
        t = self.peek()
        if self.accept("F"):
            return F(self.vtype(sc))
        if self.accept("Prod"):
            return PiN(tuple(self.sep_by(lambda: self.ctype(sc), "[", "]")))
        if self.accept("Pi"):
            x = self.ident()
            self.expect(":")
            a = self.vtype(sc)
            self.expect(".")
            return Pi(a, self.ctype(sc + (x,)))
        if self.accept("("):
            b = self.ctype(sc)
            self.expect(")")
            return b
        if t.kind == "ident":
            self.next()
            return self.ref(t, sc, "ctype")
        self.fail({"computation type"})

    # surface terms and types -------------------------------------------------

    def sterm(self, sc: tuple):
        t = self.peek()
        k = t.kind
        if k == "let":
            self.next()
            x = self.ident()
            self.expect("=")
            bound = self.sterm(sc)
            self.expect("in")
            return sf.SLet(bound, self.sterm(sc + (x,)))
        if k == "\\":
            self.next()
            x = self.ident()
            self.expect(":")
            dom = self.stype(sc)
            self.expect(".")
            return sf.SLam(dom, self.sterm(sc + (x,)))
        if k == "pm":
            self.next()
            return self.pm(sc, value_level=False, surface=True)
        if k == "lam":
            self.next()
            return sf.SLamI(tuple(self.sep_by(lambda: self.sterm(sc), "{", "}")))
        if k == "proj":
            self.next()
            return sf.SProjI(self.int(), self.sterm(sc))
        if k == "inj":
            self.next()
            tag = self.int()
            self.expect("/")
            arity = self.int()
            return sf.SInj(tag, arity, self.sterm(sc))
        if k == "refl":
            self.next()
            return sf.SRefl(self.sterm(sc))
        if k == "diverge":
            self.next()
            self.expect(":")
            return sf.SDiverge(self.stype(sc))
        if k == "error":
            self.next()
            name = self.ident()
            self.expect(":")
            return sf.SError(name, self.stype(sc))
        if k == "mu":
            self.next()
            x = self.ident()
            self.expect(":")
            ty = self.stype(sc)
            self.expect(".")
            return sf.SMu(ty, self.sterm(sc + (x,)))
        if k == "print":
            self.next()
            letter = self.string()
            self.expect(";")
            return sf.SPrint(letter, self.sterm(sc))
        if k == "write":
            self.next()
            st = self.ident()
            self.expect(";")
            return sf.SWrite(st, self.sterm(sc))
        if k == "choose":
            self.next()
            return sf.SChoose(tuple(self.sep_by(lambda: self.sterm(sc), "{", "}")))
        if k == "read":
            self.next()
            return sf.SRead(tuple(self.sep_by(lambda: self.sread_branch(sc), "{", "}")))
        a = self.satom(sc)
        if self.accept("'"):
            return sf.SApp(a, self.sterm(sc))
        return a

    def sread_branch(self, sc):
        st = self.ident()
        self.expect(".")
        return st, self.sterm(sc)

    def satom(self, sc: tuple):
        t = self.peek()
        if t.kind == "ident":
            self.next()
            if t.text in sc:
                return sf.SVar(len(sc) - 1 - _rindex(sc, t.text))
            return Ref(t.text, "surface", t.line, t.column)
        if self.accept("("):
            if self.accept(")"):
                return sf.SUnit()
            m = self.sterm(sc)
            if self.accept(":"):
                ty = self.stype(sc)
                self.expect(")")
                return sf.SAnn(m, ty)
            self.expect(")")
            return m
        if self.accept("<"):
            a = self.sterm(sc)
            self.expect(",")
            b = self.sterm(sc)
            self.expect(">")
            return sf.SPair(a, b)
        self.fail({"surface term"})

    def stype(self, sc: tuple):
        t = self.peek()
        if self.accept("Sum"):
            return sf.SSum(tuple(self.sep_by(lambda: self.stype(sc), "[", "]")))
        if self.accept("Prod"):
            return sf.SProd(tuple(self.sep_by(lambda: self.stype(sc), "[", "]")))
        if t.kind in ("Pi", "Sg"):
            self.next()
            x = self.ident()
            self.expect(":")
            a = self.stype(sc)
            self.expect(".")
            b = self.stype(sc + (x,))
            return sf.SPi(a, b) if t.kind == "Pi" else sf.SSigma(a, b)
        if self.accept("Id"):
            a = self.stype(sc)
            return sf.SId(a, self.satom(sc), self.satom(sc))
        if t.kind == "int":
            self.next()
            if t.text != "1":
                raise ParseError(t.line, t.column, {"1"}, t.text, "the only numeric type is 1")
            return sf.SOne()
        if self.accept("("):
            a = self.stype(sc)
            self.expect(")")
            return a
        if t.kind == "ident":
            self.next()
            return self.ref(t, sc, "stype")
        self.fail({"surface type"})

    # programs -------------------------------------------------------------

    def program(self) -> SourceProgram:
        sig, has_header = PURE, False
        if self.at("effects"):
            sig, has_header = self.header(), True
        defs = []
        while not self.at("eof"):
            defs.append(self.definition())
        return SourceProgram(sig, tuple(defs), has_header)

    def header(self) -> EffectSignature:
        start = self.expect("effects")
        flags = {}
        self.expect("{")
        while not self.accept("}"):
            t = self.next()
            if t.kind == "print":
                flags["print"] = True
                flags["alphabet"] = tuple(self.sep_by(self.string, "[", "]", ","))
            elif t.kind == "state":
                flags["state"] = True
                flags["states"] = tuple(self.sep_by(self.ident, "{", "}", ","))
                self.expect("init")
                flags["initial"] = self.ident()
            elif t.kind == "errors":
                flags["errors"] = tuple(self.sep_by(self.ident, "{", "}", ","))
            elif t.kind in ("choose", "diverge", "rec"):
                flags[t.kind] = True
            else:
                self.fail({"print", "state", "errors", "choose", "diverge", "rec"}, t)
            if not self.accept(";") and not self.at("}"):
                self.fail({";", "}"})
        try:
            return EffectSignature(**flags)
        except ValueError as e:
            raise ParseError(start.line, start.column, {"a valid effect header"}, "effects", str(e)) from None

    def definition(self) -> Definition:
        t = self.peek()
        if t.kind not in DEF_KINDS + ("computation",):
            self.fail(set(DEF_KINDS))
        self.next()
        kind = "comp" if t.kind == "computation" else t.kind
        name = self.ident()
        ty = None
        if kind == "surface" and self.at(":"):
            self.next()
            ty = self.stype(())
        elif kind in ("value", "comp") and self.accept(":"):
            ty = self.vtype(()) if kind == "value" else self.ctype(())
        self.expect("=")
        if kind == "value":
            term = self.value(())
        elif kind == "comp":
            term = self.comp(())
        elif kind == "vtype":
            term = self.vtype(())
        elif kind == "ctype":
            term = self.ctype(())
        elif self.peek().kind in _TYPE_START:
            kind, term = "stype", self.stype(())
        else:
            term = self.sterm(())
        self.expect(";")
        return Definition(name, kind, term, ty, t.line, t.column)


def _rindex(sc: tuple, name: str) -> int:
    return len(sc) - 1 - sc[::-1].index(name)


# -- entry points -----------------------------------------------------------


def parse(src: str) -> SourceProgram:
    p = Parser(src)
    return p.program()


def _parse_one(method: str, src: str, names=()):
    p = Parser(src)
    out = getattr(p, method)(tuple(names))
    p.done()
    return out


def parse_value(src: str, names=()):
    return _parse_one("value", src, names)


def parse_comp(src: str, names=()):
    return _parse_one("comp", src, names)


def parse_vtype(src: str, names=()):
    return _parse_one("vtype", src, names)


def parse_ctype(src: str, names=()):
    return _parse_one("ctype", src, names)


def parse_surface(src: str, names=()):
    return _parse_one("sterm", src, names)


def parse_surface_type(src: str, names=()):
    return _parse_one("stype", src, names)


_CATEGORY_KINDS = {
    "value": ("value",),
    "computation": ("comp",),
    "vtype": ("vtype",),
    "ctype": ("ctype",),
    "surface": ("surface",),
    "stype": ("stype",),
}


def inline(t, env: dict):
    """Replace every :class:`Ref` in ``t`` by the definition it names."""
    if isinstance(t, Ref):
        d = env.get(t.name)
        if d is None:
            raise UnboundIdentifier(t.name, t.line, t.column)
        if d.kind not in _CATEGORY_KINDS[t.category]:
            raise UnboundIdentifier(
                t.name, t.line, t.column, f"{t.name!r} is a {d.kind} definition, expected a {t.category}"
            )
        return d.term
    if isinstance(t, tuple):
        out = tuple(inline(x, env) for x in t)
        return t if all(a is b for a, b in zip(out, t)) else out
    if not isinstance(t, Node):
        return t
    spec = s._spec(type(t))
    new = [inline(getattr(t, name), env) for name, _ in spec]
    if all(a is getattr(t, name) for a, (name, _) in zip(new, spec)):
        return t
    return type(t)(*new)


_SURFACE_EFFECTS = {
    sf.SDiverge: lambda m: Diverge(),
    sf.SMu: lambda m: Mu(Diverge()),
    sf.SError: lambda m: Error(m.name),
    sf.SPrint: lambda m: Print(m.letter, Diverge()),
    sf.SChoose: lambda m: Choose(()),
    sf.SWrite: lambda m: Write(m.state, Diverge()),
    sf.SRead: lambda m: Read(()),
}


def check_effects(t, sig: EffectSignature) -> None:
    """Raise :class:`EffectNotEnabled` for the first effect ``sig`` forbids."""
    if isinstance(t, tuple):
        for x in t:
            check_effects(x, sig)
        return
    if not isinstance(t, Node):
        return
    if isinstance(t, s.EFFECTS):
        sig.require(t)
    elif type(t) in _SURFACE_EFFECTS:
        sig.require(_SURFACE_EFFECTS[type(t)](t))
    for name, _ in s._spec(type(t)):
        check_effects(getattr(t, name), sig)


def resolve(p: SourceProgram) -> Program:
    env = {}
    out = []
    for d in p.definitions:
        if d.name in env:
            raise DuplicateDefinition(d.name, d.line, d.column)
        term = inline(d.term, env)
        ty = inline(d.ty, env) if d.ty is not None else None
        try:
            check_effects(term, p.effects)
        except EffectNotEnabled as e:
            raise ResolveEffectError(e, d.name, d.line, d.column) from None
        r = Definition(d.name, d.kind, term, ty, d.line, d.column)
        env[d.name] = r
        out.append(r)
    return Program(p.effects, tuple(out), p.has_header)


def load(src: str) -> Program:
    return resolve(parse(src))


# -- pretty printing --------------------------------------------------------


def _name(depth: int) -> str:
    return f"x{depth}"


class Printer:
    def __init__(self, names=()):
        self.names = tuple(names)

    def var(self, i: int, sc: tuple) -> str:
        if i < len(sc):
            return sc[len(sc) - 1 - i]
        return f"_free{i - len(sc)}"

    def fresh(self, sc: tuple, n: int = 1):
        names = tuple(_name(len(sc) + k) for k in range(n))
        return names, sc + names

    # values
    def value(self, v, sc: tuple) -> str:
        if isinstance(v, Var):
            return self.var(v.index, sc)
        if isinstance(v, Ref):
            return v.name
        if isinstance(v, Unit):
            return "()"
        if isinstance(v, Pair):
            return f"<{self.value(v.fst, sc)}, {self.value(v.snd, sc)}>"
        if isinstance(v, Inj):
            ann = f" {{{self.vtype(v.ty, sc)}}}" if v.ty is not None else ""
            return f"inj {v.tag}/{v.arity}{ann} {self.simple(v.payload, sc)}"
        if isinstance(v, Refl):
            return f"refl {self.simple(v.subject, sc)}"
        if isinstance(v, Thunk):
            return f"thunk {self.thunk_body(v.body, sc)}"
        if isinstance(v, LetV):
            (x,), sc2 = self.fresh(sc)
            ann = f" : {self.vtype(v.ty, sc)}" if v.ty is not None else ""
            return f"let {x}{ann} = {self.value(v.bound, sc)} in {self.value(v.body, sc2)}"
        if isinstance(v, s.COMPLEX_VALUES):
            return self.pm(v, sc, self.value, self.vtype)
        raise TypeError(f"not a value: {v!r}")

    def simple(self, v, sc) -> str:
        if _is_simple(v):
            return self.value(v, sc)
        return f"({self.value(v, sc)})"

    def thunk_body(self, m, sc) -> str:
        if isinstance(m, (Return, Force)) and _is_simple(m.v) or isinstance(m, (Tuple, Choose, Read)) \
                or isinstance(m, (Diverge, Error)) and m.ty is None:
            return self.comp(m, sc)
        return f"({self.comp(m, sc)})"

    def pm(self, t, sc, body, motive_printer) -> str:
        head = f"pm {self.simple(t.scrutinee, sc)}"
        if t.motive is not None:
            k = 3 if isinstance(t, (PmId, PmIdV)) else 1
            names, sc2 = self.fresh(sc, k)
            head += f" [{' '.join(names)}. {motive_printer(t.motive, sc2)}]"
        return f"{head} as {{{self.branches(t, sc, body)}}}"

    def branches(self, t, sc, body) -> str:
        if isinstance(t, (PmSum, PmSumV, sf.SPmSum)):
            (x,), sc2 = self.fresh(sc)
            return " | ".join(f"{i} {x}. {body(b, sc2)}" for i, b in enumerate(t.branches, 1))
        if isinstance(t, (PmUnit, PmUnitV, sf.SPmUnit)):
            return "(). " + body(t.branches[0], sc)
        if isinstance(t, (PmPair, PmPairV, sf.SPmPair)):
            (x, y), sc2 = self.fresh(sc, 2)
            return f"<{x}, {y}>. {body(t.branches[0], sc2)}"
        (x,), sc2 = self.fresh(sc)
        return f"refl {x}. {body(t.branches[0], sc2)}"

    # computations
    def comp(self, m, sc: tuple, full: bool = True, last: bool = True) -> str:
        text = self.comp_raw(m, sc, last)
        if isinstance(m, ToIn) and not full or _extends(m) and not last:
            return f"({text})"
        return text

    def comp_raw(self, m, sc: tuple, last: bool) -> str:
        if isinstance(m, Ref):
            return m.name
        if isinstance(m, Return):
            return f"return {self.simple(m.v, sc)}"
        if isinstance(m, Force):
            return f"force {self.simple(m.v, sc)}"
        if isinstance(m, ToIn):
            (x,), sc2 = self.fresh(sc)
            ann = ""
            if m.head_ty is not None:
                ann += f" : {self.vtype(m.head_ty, sc)}"
            if m.motive is not None:
                (z,), scz = self.fresh(sc)
                ann += f" [{z}. {self.ctype(m.motive, scz)}]"
            head = self.comp(m.head, sc, full=False, last=False)
            return f"{head} to {x}{ann}. {self.comp(m.body, sc2)}"
        if isinstance(m, Lam):
            (x,), sc2 = self.fresh(sc)
            ann = f" : {self.vtype(m.dom, sc)}" if m.dom is not None else ""
            return f"\\{x}{ann}. {self.comp(m.body, sc2)}"
        if isinstance(m, App):
            return f"{self.simple(m.arg, sc)} ' {self.comp(m.fn, sc, full=False, last=last)}"
        if isinstance(m, LetC):
            (x,), sc2 = self.fresh(sc)
            ann = f" : {self.vtype(m.ty, sc)}" if m.ty is not None else ""
            return f"let {x}{ann} = {self.value(m.bound, sc)} in {self.comp(m.body, sc2)}"
        if isinstance(m, s.PM_COMPUTATIONS):
            return self.pm(m, sc, self.comp, self.ctype)
        if isinstance(m, Tuple):
            return "tuple {" + " | ".join(self.comp(c, sc) for c in m.components) + "}"
        if isinstance(m, Proj):
            return f"proj {m.tag} {self.comp(m.target, sc, full=False, last=last)}"
        if isinstance(m, Diverge):
            return "diverge" + (f" : {self.ctype(m.ty, sc)}" if m.ty is not None else "")
        if isinstance(m, Error):
            return f"error {m.name}" + (f" : {self.ctype(m.ty, sc)}" if m.ty is not None else "")
        if isinstance(m, Mu):
            (x,), sc2 = self.fresh(sc)
            ann = f" : {self.ctype(m.ty, sc)}" if m.ty is not None else ""
            return f"mu {x}{ann}. {self.comp(m.body, sc2)}"
        if isinstance(m, Print):
            return f"print {json.dumps(m.letter)}; {self.comp(m.rest, sc)}"
        if isinstance(m, Write):
            return f"write {m.state}; {self.comp(m.rest, sc)}"
        if isinstance(m, Choose):
            return "choose {" + " | ".join(self.comp(c, sc) for c in m.alternatives) + "}"
        if isinstance(m, Read):
            return "read {" + " | ".join(f"{st}. {self.comp(c, sc)}" for st, c in m.branches) + "}"
        raise TypeError(f"not a computation: {m!r}")

    # types
    def vtype(self, a, sc: tuple) -> str:
        if isinstance(a, Ref):
            return a.name
        if isinstance(a, One):
            return "1"
        if isinstance(a, s.U):
            return f"U {self.ctype(a.b, sc)}"
        if isinstance(a, SumN):
            return "Sum[" + " | ".join(self.vtype(c, sc) for c in a.components) + "]"
        if isinstance(a, Sigma):
            (x,), sc2 = self.fresh(sc)
            return f"Sg {x} : {self.vtype(a.base, sc)}. {self.vtype(a.fiber, sc2)}"
        if isinstance(a, Id):
            carrier = self.vtype(a.carrier, sc)
            if not isinstance(a.carrier, (One, SumN)):
                carrier = f"({carrier})"
            return f"Id {carrier} {self.simple(a.lhs, sc)} {self.simple(a.rhs, sc)}"
        raise TypeError(f"not a value type: {a!r}")

    def ctype(self, b, sc: tuple) -> str:
        if isinstance(b, Ref):
            return b.name
        if isinstance(b, F):
            return f"F {self.vtype(b.a, sc)}"
        if isinstance(b, PiN):
            return "Prod[" + " | ".join(self.ctype(c, sc) for c in b.components) + "]"
        if isinstance(b, Pi):
            (x,), sc2 = self.fresh(sc)
            return f"Pi {x} : {self.vtype(b.base, sc)}. {self.ctype(b.body, sc2)}"
        raise TypeError(f"not a computation type: {b!r}")

    # surface
    def sterm(self, m, sc: tuple, last: bool = True) -> str:
        text = self.sterm_raw(m, sc, last)
        if not last and _s_extends(m):
            return f"({text})"
        return text

    def satom(self, m, sc) -> str:
        if isinstance(m, (sf.SVar, sf.SUnit, sf.SAnn, sf.SPair, Ref)):
            return self.sterm(m, sc)
        return f"({self.sterm(m, sc)})"

    def sterm_raw(self, m, sc: tuple, last: bool) -> str:
        if isinstance(m, Ref):
            return m.name
        if isinstance(m, sf.SVar):
            return self.var(m.index, sc)
        if isinstance(m, sf.SUnit):
            return "()"
        if isinstance(m, sf.SAnn):
            return f"({self.sterm(m.term, sc)} : {self.stype(m.ty, sc)})"
        if isinstance(m, sf.SPair):
            return f"<{self.sterm(m.fst, sc)}, {self.sterm(m.snd, sc)}>"
        if isinstance(m, sf.SLet):
            (x,), sc2 = self.fresh(sc)
            return f"let {x} = {self.sterm(m.bound, sc)} in {self.sterm(m.body, sc2)}"
        if isinstance(m, sf.SLam):
            (x,), sc2 = self.fresh(sc)
            return f"\\{x} : {self.stype(m.dom, sc)}. {self.sterm(m.body, sc2)}"
        if isinstance(m, sf.SApp):
            return f"{self.satom(m.arg, sc)} ' {self.sterm(m.fn, sc, last)}"
        if isinstance(m, sf.SInj):
            return f"inj {m.tag}/{m.arity} {self.satom(m.payload, sc)}"
        if isinstance(m, sf.SRefl):
            return f"refl {self.satom(m.subject, sc)}"
        if isinstance(m, sf.SLamI):
            return "lam {" + " | ".join(self.sterm(c, sc) for c in m.components) + "}"
        if isinstance(m, sf.SProjI):
            return f"proj {m.tag} {self.satom(m.target, sc)}"
        if isinstance(m, sf.SURFACE_ELIMINATORS):
            head = f"pm {self.satom(m.scrutinee, sc)}"
            if m.motive is not None:
                names, sc2 = self.fresh(sc, sf.motive_arity(m))
                head += f" [{' '.join(names)}. {self.stype(m.motive, sc2)}]"
            return f"{head} as {{{self.branches(m, sc, self.sterm)}}}"
        if isinstance(m, sf.SDiverge):
            return f"diverge : {self.stype(m.ty, sc)}"
        if isinstance(m, sf.SError):
            return f"error {m.name} : {self.stype(m.ty, sc)}"
        if isinstance(m, sf.SMu):
            (x,), sc2 = self.fresh(sc)
            return f"mu {x} : {self.stype(m.ty, sc)}. {self.sterm(m.body, sc2)}"
        if isinstance(m, sf.SPrint):
            return f"print {json.dumps(m.letter)}; {self.sterm(m.rest, sc)}"
        if isinstance(m, sf.SWrite):
            return f"write {m.state}; {self.sterm(m.rest, sc)}"
        if isinstance(m, sf.SChoose):
            return "choose {" + " | ".join(self.sterm(c, sc) for c in m.alternatives) + "}"
        if isinstance(m, sf.SRead):
            return "read {" + " | ".join(f"{st}. {self.sterm(c, sc)}" for st, c in m.branches) + "}"
        raise TypeError(f"not a surface term: {m!r}")

    def stype(self, a, sc: tuple) -> str:
        if isinstance(a, Ref):
            return a.name
        if isinstance(a, sf.SOne):
            return "1"
        if isinstance(a, sf.SSum):
            return "Sum[" + " | ".join(self.stype(c, sc) for c in a.components) + "]"
        if isinstance(a, sf.SProd):
            return "Prod[" + " | ".join(self.stype(c, sc) for c in a.components) + "]"
        if isinstance(a, (sf.SPi, sf.SSigma)):
            (x,), sc2 = self.fresh(sc)
            kw = "Pi" if isinstance(a, sf.SPi) else "Sg"
            body = a.body if isinstance(a, sf.SPi) else a.fiber
            return f"{kw} {x} : {self.stype(a.base, sc)}. {self.stype(body, sc2)}"
        if isinstance(a, sf.SId):
            carrier = self.stype(a.carrier, sc)
            if not isinstance(a.carrier, (sf.SOne, sf.SSum, sf.SProd)):
                carrier = f"({carrier})"
            return f"Id {carrier} {self.satom(a.lhs, sc)} {self.satom(a.rhs, sc)}"
        raise TypeError(f"not a surface type: {a!r}")

    def any(self, t, sc: tuple = ()) -> str:
        if isinstance(t, s.Value):
            return self.value(t, sc)
        if isinstance(t, s.Computation):
            return self.comp(t, sc)
        if isinstance(t, s.VType):
            return self.vtype(t, sc)
        if isinstance(t, s.CType):
            return self.ctype(t, sc)
        if isinstance(t, sf.SurfaceTerm):
            return self.sterm(t, sc)
        if isinstance(t, sf.SurfaceType):
            return self.stype(t, sc)
        if isinstance(t, Ref):
            return t.name
        raise TypeError(f"cannot print {t!r}")


def _is_simple(v) -> bool:
    if isinstance(v, (Var, Unit, Pair, Ref)):
        return True
    if isinstance(v, Inj):
        return _is_simple(v.payload)
    if isinstance(v, Refl):
        return _is_simple(v.subject)
    return False


def _extends(m) -> bool:
    """Whether the printed form of ``m`` extends to the right indefinitely."""
    if isinstance(m, (Lam, LetC, Print, Write, Mu, ToIn)):
        return True
    if isinstance(m, (Diverge, Error)):
        return m.ty is not None
    if isinstance(m, App):
        return _extends(m.fn)
    if isinstance(m, Proj):
        return _extends(m.target)
    return False


def _s_extends(m) -> bool:
    if isinstance(m, (sf.SLet, sf.SLam, sf.SPrint, sf.SWrite, sf.SMu, sf.SDiverge, sf.SError)):
        return True
    if isinstance(m, sf.SApp):
        return _s_extends(m.fn)
    return False


def pretty(t, names=()) -> str:
    """Concrete syntax for a term or type; ``names`` name its free variables."""
    return Printer().any(t, tuple(names))


def pretty_header(sig: EffectSignature) -> str:
    items = []
    if sig.print:
        items.append("print [" + ", ".join(json.dumps(c) for c in sig.alphabet) + "]")
    if sig.state:
        items.append("state {" + ", ".join(sig.states) + f"}} init {sig.initial}")
    if sig.errors:
        items.append("errors {" + ", ".join(sig.errors) + "}")
    for flag in ("choose", "diverge", "rec"):
        if getattr(sig, flag):
            items.append(flag)
    return "effects { " + "; ".join(items) + " }" if items else "effects { }"


def pretty_definition(d: Definition) -> str:
    p = Printer()
    kw = "surface" if d.kind == "stype" else d.kind
    ann = ""
    if d.ty is not None:
        ann = f" : {p.any(d.ty)}"
    return f"{kw} {d.name}{ann} = {p.any(d.term)};"


def pretty_program(prog) -> str:
    lines = []
    if prog.has_header or prog.effects != PURE:
        lines.append(pretty_header(prog.effects))
        lines.append("")
    for d in prog.definitions:
        lines.append(pretty_definition(d))
    return "\n".join(lines) + "\n"
