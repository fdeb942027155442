"""Concrete syntax for program files (.qgcl).

A file is a declarations header followed by one program::

    qvar c : 2;
    qvar q : 2;
    cvar x : {0, 1};                      # optional; inferred from measures
    gate G = [0, 1; 1, 0];                # matrix literal, rows ';'-separated
    meas M = {0: [1,0; 0,0], 1: [0,0; 0,1]};

    H[c];
    qif [c] |0> -> X[q] [] |1> -> Y[q] fiq

Statements::

    abort | skip | GATE[q1, q2]
    measure M[qs : x] = lbl -> P [] lbl -> P end
    qif alpha(z1, ..., zn)? [qs] |g> -> P [] |g> -> P fiq
    qif [qs] {|g>, |g>} -> P [] ... fiq        (subspace guards)
    begin local qs := |k>; P end               (or := matrix literal)
    pchoice P @ 0.5 P @ 0.5 end
    [P] (+) |g> -> P [] |g> -> P               (quantum choice sugar)
    (P)                                        (grouping)

Guards are basis indices ``|3>`` (row-major ``|1, 0>`` for several coin
variables) or explicit vectors ``|(0.7071, -0.7071i)>``.  Branch programs
extend across ';' until the next branch marker or closing keyword.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ast import (
    Abort, Block, Guard, Measure, ProbChoice, Program, QChoice, QIf, Seq,
    Skip, SubQIf, Unitary, to_source,
)
from .errors import ParseError
from .gates import GateLib, MeasLib
from .linalg import format_complex, parse_complex
from .registry import Registry

__all__ = ["Module", "parse", "parse_file", "module_to_source"]

_KEYWORDS = {
    "abort", "skip", "measure", "end", "qif", "fiq", "begin", "local",
    "pchoice", "alpha", "qvar", "cvar", "gate", "meas",
}

_PUNCT = ("(+)", ":=", "->", "[]", ";", ":", ",", "[", "]", "{", "}",
          "(", ")", "@", "=")


@dataclass
class Token:
    kind: str  # IDENT KEYWORD INT NUMBER IMAG GUARD PUNCT EOF
    value: object
    line: int
    col: int


def _tokenize(src: str) -> list:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def error(msg):
        raise ParseError(msg, line, col)

    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#" or src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c == "|":  # guard literal |...>
            j = src.find(">", i)
            if j < 0 or "\n" in src[i:j]:
                error("unterminated guard literal")
            toks.append(Token("GUARD", src[i + 1:j], line, col))
            col += j - i + 1
            i = j + 1
            continue
        matched = False
        for p in _PUNCT:
            if src.startswith(p, i):
                toks.append(Token("PUNCT", p, line, col))
                i += len(p)
                col += len(p)
                matched = True
                break
        if matched:
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE" and j + 1 < n and (
                    src[j + 1].isdigit() or src[j + 1] in "+-"):
                j += 2
                while j < n and src[j].isdigit():
                    j += 1
            text = src[i:j]
            imag = j < n and src[j] == "i" and (j + 1 >= n or not src[j + 1].isalnum())
            if imag:
                j += 1
            try:
                if "." in text or "e" in text or "E" in text or imag:
                    toks.append(Token("IMAG" if imag else "NUMBER", float(text), line, col))
                else:
                    toks.append(Token("INT", int(text), line, col))
            except ValueError:
                error(f"bad numeric literal {text!r}")
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            if word == "i":
                toks.append(Token("IMAG", 1.0, line, col))
            elif word in _KEYWORDS:
                toks.append(Token("KEYWORD", word, line, col))
            else:
                toks.append(Token("IDENT", word, line, col))
            col += j - i
            i = j
            continue
        if c in "+-":
            toks.append(Token("PUNCT", c, line, col))
            i += 1
            col += 1
            continue
        error(f"unexpected character {c!r}")
    toks.append(Token("EOF", None, line, col))
    return toks


@dataclass
class Module:
    """A parsed program file: declarations plus the program."""

    registry: Registry
    gates: GateLib
    meases: MeasLib
    program: Program
    decls: list = field(default_factory=list)  # source-order declaration records


_STOPPERS = {"end", "fiq"}


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.pos = 0
        self.registry = Registry()
        self.gates = GateLib()
        self.meases = MeasLib()
        self.decls: list = []

    # -- token helpers --------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.cur
        self.pos += 1
        return t

    def error(self, msg):
        raise ParseError(msg, self.cur.line, self.cur.col)

    def at(self, kind, value=None) -> bool:
        t = self.cur
        return t.kind == kind and (value is None or t.value == value)

    def accept(self, kind, value=None):
        if self.at(kind, value):
            return self.advance()
        return None

    def expect(self, kind, value=None) -> Token:
        if not self.at(kind, value):
            want = value if value is not None else kind
            got = self.cur.value if self.cur.kind != "EOF" else "end of input"
            self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    # -- module ----------------------------------------------------------

    def module(self) -> Module:
        while self.at("KEYWORD") and self.cur.value in ("qvar", "cvar", "gate", "meas"):
            self.declaration()
        prog = self.program()
        self.expect("EOF")
        return Module(self.registry, self.gates, self.meases, prog, self.decls)

    def declaration(self):
        kw = self.advance().value
        name = self.expect("IDENT").value
        if kw == "qvar":
            self.expect("PUNCT", ":")
            dim = self.expect("INT").value
            self.registry.declare_q(name, dim)
            self.decls.append(("qvar", name, dim))
        elif kw == "cvar":
            self.expect("PUNCT", ":")
            self.expect("PUNCT", "{")
            labels = [self.label()]
            while self.accept("PUNCT", ","):
                labels.append(self.label())
            self.expect("PUNCT", "}")
            self.registry.declare_c(name, labels)
            self.decls.append(("cvar", name, tuple(labels)))
        elif kw == "gate":
            self.expect("PUNCT", "=")
            m = self.matrix_literal()
            self.gates.define(name, m)
            self.decls.append(("gate", name, m))
        else:  # meas
            self.expect("PUNCT", "=")
            self.expect("PUNCT", "{")
            pairs = [self.meas_clause()]
            while self.accept("PUNCT", ","):
                pairs.append(self.meas_clause())
            self.expect("PUNCT", "}")
            self.meases.define(name, pairs)
            self.decls.append(("meas", name, tuple(pairs)))
        self.expect("PUNCT", ";")

    def meas_clause(self):
        lbl = self.label()
        self.expect("PUNCT", ":")
        return lbl, self.matrix_literal()

    def label(self):
        if self.at("INT"):
            return self.advance().value
        if self.at("IDENT"):
            return self.advance().value
        if self.at("PUNCT", "+") or self.at("PUNCT", "-"):
            return self.advance().value
        self.error("expected an outcome label")

    # -- numeric literals -------------------------------------------------

    def complex_entry(self) -> complex:
        """A literal like 1, -i, 0.5+0.5i, 2e-3i."""
        sign = 1.0
        while self.at("PUNCT", "+") or self.at("PUNCT", "-"):
            if self.advance().value == "-":
                sign = -sign
        value = sign * self.number_part()
        if self.at("PUNCT", "+") or self.at("PUNCT", "-"):
            sign2 = 1.0 if self.advance().value == "+" else -1.0
            value = value + sign2 * self.number_part()
        return complex(value)

    def number_part(self) -> complex:
        if self.at("IMAG"):
            return complex(0.0, self.advance().value)
        if self.at("NUMBER") or self.at("INT"):
            return complex(float(self.advance().value), 0.0)
        self.error("expected a number")

    def real_number(self) -> float:
        z = self.complex_entry()
        if z.imag != 0.0:
            self.error("expected a real number")
        return z.real

    def matrix_literal(self) -> np.ndarray:
        self.expect("PUNCT", "[")
        rows = [self.matrix_row()]
        while self.accept("PUNCT", ";"):
            rows.append(self.matrix_row())
        self.expect("PUNCT", "]")
        if len({len(r) for r in rows}) != 1:
            self.error("matrix rows have different lengths")
        return np.array(rows, dtype=complex)

    def matrix_row(self) -> list:
        row = [self.complex_entry()]
        while self.accept("PUNCT", ","):
            row.append(self.complex_entry())
        return row

    # -- programs ----------------------------------------------------------

    def program(self) -> Program:
        prog = self.statement()
        while self.at("PUNCT", ";"):
            self.advance()
            prog = Seq(prog, self.statement())
        return prog

    def branch_program(self) -> Program:
        # same as program(); callers stop it via the surrounding markers
        return self.program()

    def statement(self) -> Program:
        t = self.cur
        if t.kind == "KEYWORD":
            if t.value == "abort":
                self.advance()
                return Abort()
            if t.value == "skip":
                self.advance()
                return Skip()
            if t.value == "measure":
                return self.measure_stmt()
            if t.value == "qif":
                return self.qif_stmt()
            if t.value == "begin":
                return self.block_stmt()
            if t.value == "pchoice":
                return self.pchoice_stmt()
            self.error(f"unexpected keyword {t.value!r}")
        if t.kind == "IDENT":
            return self.gate_stmt()
        if self.at("PUNCT", "("):
            self.advance()
            prog = self.program()
            self.expect("PUNCT", ")")
            return prog
        if self.at("PUNCT", "["):
            return self.qchoice_stmt()
        self.error(f"expected a statement, found {t.value!r}")

    def qvar_list(self) -> tuple:
        names = [self.expect("IDENT").value]
        while self.accept("PUNCT", ","):
            names.append(self.expect("IDENT").value)
        for nm in names:
            if not self.registry.has_q(nm):
                self.error(f"unknown quantum variable {nm!r}")
        return tuple(names)

    def gate_stmt(self) -> Program:
        name = self.advance().value
        self.expect("PUNCT", "[")
        qvars = self.qvar_list()
        self.expect("PUNCT", "]")
        if not self.gates.known(name):
            self.error(f"unknown gate {name!r}")
        dim = self.registry.dim_of(qvars)
        try:
            m = self.gates.resolve(name, dim)
        except Exception as exc:  # dimension mismatch etc.
            self.error(str(exc))
        return Unitary(name, qvars, m)

    def measure_stmt(self) -> Program:
        self.expect("KEYWORD", "measure")
        name = self.expect("IDENT").value
        self.expect("PUNCT", "[")
        qvars = self.qvar_list()
        self.expect("PUNCT", ":")
        x = self.expect("IDENT").value
        self.expect("PUNCT", "]")
        if not self.meases.known(name):
            self.error(f"unknown measurement {name!r}")
        try:
            meas = self.meases.resolve(name, self.registry.dim_of(qvars))
        except Exception as exc:
            self.error(str(exc))
        branches = []
        while self.at("PUNCT", "=") or self.at("PUNCT", "[]"):
            self.advance()
            lbl = self.label()
            self.expect("PUNCT", "->")
            branches.append((lbl, self.branch_program()))
        if not branches:
            self.error("measurement needs at least one branch")
        self.expect("KEYWORD", "end")
        self.registry.ensure_c(x, meas.outcomes)
        return Measure(meas, qvars, x, tuple(branches))

    def alpha_clause(self):
        if not self.accept("KEYWORD", "alpha"):
            return None
        self.expect("PUNCT", "(")
        phases = [self.complex_entry()]
        while self.accept("PUNCT", ","):
            phases.append(self.complex_entry())
        self.expect("PUNCT", ")")
        return tuple(phases)

    def qif_stmt(self) -> Program:
        self.expect("KEYWORD", "qif")
        alpha = self.alpha_clause()
        self.expect("PUNCT", "[")
        coin = self.qvar_list()
        self.expect("PUNCT", "]")
        guards, subspaces, branches = [], [], []
        subspace_mode = None
        while self.at("PUNCT", "[]") or self.at("GUARD") or self.at("PUNCT", "{"):
            self.accept("PUNCT", "[]")
            if self.at("PUNCT", "{"):
                if subspace_mode is False:
                    self.error("cannot mix subspace and single-state guards")
                subspace_mode = True
                self.advance()
                sub = [self.guard(coin)]
                while self.accept("PUNCT", ","):
                    sub.append(self.guard(coin))
                self.expect("PUNCT", "}")
                subspaces.append(tuple(sub))
            else:
                if subspace_mode is True:
                    self.error("cannot mix subspace and single-state guards")
                subspace_mode = False
                guards.append(self.guard(coin))
            self.expect("PUNCT", "->")
            branches.append(self.branch_program())
        if not branches:
            self.error("alternation needs at least one branch")
        self.expect("KEYWORD", "fiq")
        if subspace_mode:
            if alpha is not None:
                self.error("subspace alternation takes no coefficient clause")
            return SubQIf(coin, tuple(subspaces), tuple(branches))
        return QIf(coin, tuple(guards), tuple(branches), alpha)

    def guard(self, coin_vars) -> Guard:
        tok = self.expect("GUARD")
        text = tok.value.strip()
        try:
            if text.startswith("("):
                if not text.endswith(")"):
                    raise ValueError("unterminated vector guard")
                comps = [parse_complex(t) for t in text[1:-1].split(",")]
                return Guard.vec(comps)
            parts = [t.strip() for t in text.split(",")]
            idxs = [int(t) for t in parts]
        except ValueError as exc:
            raise ParseError(f"bad guard |{text}>: {exc}", tok.line, tok.col) from None
        if len(idxs) == 1:
            return Guard.basis(idxs[0])
        if len(idxs) != len(coin_vars):
            raise ParseError(
                f"guard |{text}> has {len(idxs)} indices for {len(coin_vars)} "
                "coin variables", tok.line, tok.col)
        k = 0
        for nm, i in zip(coin_vars, idxs):
            d = self.registry.qdim(nm)
            if not 0 <= i < d:
                raise ParseError(f"guard index {i} out of range for {nm!r}",
                                 tok.line, tok.col)
            k = k * d + i
        return Guard.basis(k)

    def block_stmt(self) -> Program:
        self.expect("KEYWORD", "begin")
        self.expect("KEYWORD", "local")
        qvars = self.qvar_list()
        self.expect("PUNCT", ":=")
        if self.at("GUARD"):
            tok = self.advance()
            d = self.registry.dim_of(qvars)
            try:
                k = int(tok.value.strip())
            except ValueError:
                raise ParseError(f"bad initial state |{tok.value}>", tok.line, tok.col) from None
            if not 0 <= k < d:
                raise ParseError(f"initial state index {k} out of range", tok.line, tok.col)
            rho = np.zeros((d, d), dtype=complex)
            rho[k, k] = 1.0
        else:
            rho = self.matrix_literal()
        self.expect("PUNCT", ";")
        body = self.program()
        self.expect("KEYWORD", "end")
        return Block(qvars, rho, body)

    def pchoice_stmt(self) -> Program:
        self.expect("KEYWORD", "pchoice")
        branches = []
        while not self.at("KEYWORD", "end"):
            prog = self.branch_program()
            self.expect("PUNCT", "@")
            branches.append((prog, self.real_number()))
        self.expect("KEYWORD", "end")
        if not branches:
            self.error("probabilistic choice needs at least one branch")
        return ProbChoice(tuple(branches))

    def qchoice_stmt(self) -> Program:
        self.expect("PUNCT", "[")
        coin_prog = self.program()
        self.expect("PUNCT", "]")
        self.expect("PUNCT", "(+)")
        alpha = self.alpha_clause()
        from .ast import qvar_of

        coin = self.registry.varset(qvar_of(coin_prog))
        guards, branches = [], []
        while self.at("PUNCT", "[]") or self.at("GUARD"):
            self.accept("PUNCT", "[]")
            guards.append(self.guard(coin))
            self.expect("PUNCT", "->")
            branches.append(self.branch_program())
        if not branches:
            self.error("quantum choice needs at least one branch")
        return QChoice(coin_prog, tuple(guards), tuple(branches), alpha)


def parse(source: str) -> Module:
    """Parse a program file into a module (registry + program)."""
    return _Parser(source).module()


def parse_file(path) -> Module:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def module_to_source(mod: Module) -> str:
    """Concrete syntax of a module; ``parse`` of the result reproduces it."""
    lines = []
    for rec in mod.decls:
        if rec[0] == "qvar":
            lines.append(f"qvar {rec[1]} : {rec[2]};")
        elif rec[0] == "cvar":
            lines.append(f"cvar {rec[1]} : {{{', '.join(map(str, rec[2]))}}};")
        elif rec[0] == "gate":
            lines.append(f"gate {rec[1]} = {_ml(rec[2])};")
        else:
            pairs = ", ".join(f"{lbl}: {_ml(m)}" for lbl, m in rec[2])
            lines.append(f"meas {rec[1]} = {{{pairs}}};")
    lines.append(to_source(mod.program))
    return "\n".join(lines) + "\n"


def _ml(m: np.ndarray) -> str:
    rows = [", ".join(format_complex(z) for z in row) for row in np.atleast_2d(m)]
    return "[" + "; ".join(rows) + "]"
