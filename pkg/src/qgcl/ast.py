"""Program syntax trees, well-formedness checking, and desugaring.

The five core statement forms are abort, skip, unitary application,
measurement alternation, and quantum alternation, closed under sequential
composition.  Blocks with local quantum variables, probabilistic choice,
quantum choice (coin program + alternation), and subspace-guarded
alternation are the extended forms.

The checker enforces the formation rules:

* clause 3 (measurement): the outcome variable does not occur in any branch,
  and the measurement's outcomes fit the variable's declared domain;
* clause 4 (quantum alternation): coin variables are external to every
  branch, and the guards form a complete orthonormal family;
* clause 5 (sequencing): the classical variables of the two parts are
  disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import QgclError
from .gates import Measurement
from .linalg import TAU_EQ, dagger, format_complex, is_density, is_unitary
from .ovf import AlphaFamily
from .registry import Registry

__all__ = [
    "Program", "Abort", "Skip", "Unitary", "Measure", "QIf", "SubQIf", "Seq",
    "Block", "ProbChoice", "QChoice", "Guard", "Diagnostic",
    "var_of", "qvar_of", "cvar_of", "check", "desugar_qchoice", "to_source",
    "seq",
]


@dataclass(frozen=True)
class Guard:
    """A guard state of an alternation.

    Either a computational basis index into the coin space (product basis in
    the written variable order) or an explicit vector, also in written order.
    """

    index: Optional[int] = None
    vector: Optional[tuple] = None

    def __post_init__(self):
        if (self.index is None) == (self.vector is None):
            raise QgclError("guard needs exactly one of index or vector")

    @classmethod
    def basis(cls, k: int) -> "Guard":
        return cls(index=int(k))

    @classmethod
    def vec(cls, components: Iterable[complex]) -> "Guard":
        return cls(vector=tuple(complex(c) for c in components))

    def resolve(self, registry: Registry, written_vars: Sequence[str]) -> np.ndarray:
        """The guard as a vector on the coin space in canonical factor order."""
        d = registry.dim_of(written_vars)
        if self.index is not None:
            v = np.zeros(d, dtype=complex)
            v[self.index] = 1.0
        else:
            v = np.array(self.vector, dtype=complex)
        return registry.vector_to_canonical(v, written_vars)


class Program:
    """Base class of all statement nodes."""

    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Abort(Program):
    pass


@dataclass(frozen=True, eq=False)
class Skip(Program):
    pass


@dataclass(frozen=True, eq=False)
class Unitary(Program):
    gate: str
    qvars: tuple
    matrix: np.ndarray  # on the written variable order


@dataclass(frozen=True, eq=False)
class Measure(Program):
    meas: Measurement
    qvars: tuple
    x: str
    branches: tuple  # ((outcome label, Program), ...)


@dataclass(frozen=True, eq=False)
class QIf(Program):
    coin_vars: tuple
    guards: tuple  # of Guard
    branches: tuple  # of Program
    alpha: Union[None, tuple, AlphaFamily] = None  # phase tuple or full family


@dataclass(frozen=True, eq=False)
class SubQIf(Program):
    coin_vars: tuple
    subspaces: tuple  # of tuples of Guard (a chosen basis per subspace)
    branches: tuple


@dataclass(frozen=True, eq=False)
class Seq(Program):
    first: Program
    second: Program


@dataclass(frozen=True, eq=False)
class Block(Program):
    local_vars: tuple
    init: np.ndarray  # density operator on the written local variable order
    body: Program


@dataclass(frozen=True, eq=False)
class ProbChoice(Program):
    branches: tuple  # ((Program, weight), ...)


@dataclass(frozen=True, eq=False)
class QChoice(Program):
    coin_prog: Program
    guards: tuple
    branches: tuple
    alpha: Union[None, tuple, AlphaFamily] = None


def seq(*programs: Program) -> Program:
    """Left-folded sequential composition of one or more statements."""
    out = programs[0]
    for p in programs[1:]:
        out = Seq(out, p)
    return out


# ---------------------------------------------------------------------------
# Variable sets
# ---------------------------------------------------------------------------

def var_of(p: Program) -> frozenset:
    """Classical variables of a program."""
    if isinstance(p, (Abort, Skip, Unitary)):
        return frozenset()
    if isinstance(p, Measure):
        out = frozenset((p.x,))
        for _, b in p.branches:
            out |= var_of(b)
        return out
    if isinstance(p, (QIf, SubQIf)):
        return frozenset().union(*(var_of(b) for b in p.branches))
    if isinstance(p, Seq):
        return var_of(p.first) | var_of(p.second)
    if isinstance(p, Block):
        return var_of(p.body)
    if isinstance(p, ProbChoice):
        return frozenset().union(*(var_of(b) for b, _ in p.branches))
    if isinstance(p, QChoice):
        return var_of(p.coin_prog) | frozenset().union(*(var_of(b) for b in p.branches))
    raise TypeError(f"not a program: {p!r}")


def qvar_of(p: Program) -> frozenset:
    """Quantum variables of a program."""
    if isinstance(p, (Abort, Skip)):
        return frozenset()
    if isinstance(p, Unitary):
        return frozenset(p.qvars)
    if isinstance(p, Measure):
        return frozenset(p.qvars).union(*(qvar_of(b) for _, b in p.branches))
    if isinstance(p, (QIf, SubQIf)):
        return frozenset(p.coin_vars).union(*(qvar_of(b) for b in p.branches))
    if isinstance(p, Seq):
        return qvar_of(p.first) | qvar_of(p.second)
    if isinstance(p, Block):
        return qvar_of(p.body) - frozenset(p.local_vars)
    if isinstance(p, ProbChoice):
        return frozenset().union(*(qvar_of(b) for b, _ in p.branches))
    if isinstance(p, QChoice):
        return qvar_of(p.coin_prog).union(*(qvar_of(b) for b in p.branches))
    raise TypeError(f"not a program: {p!r}")


def cvar_of(p: Program) -> frozenset:
    """Coin variables: the quantum variables guarding alternations."""
    if isinstance(p, (Abort, Skip, Unitary)):
        return frozenset()
    if isinstance(p, Measure):
        return frozenset().union(*(cvar_of(b) for _, b in p.branches))
    if isinstance(p, (QIf, SubQIf)):
        return frozenset(p.coin_vars).union(*(cvar_of(b) for b in p.branches))
    if isinstance(p, Seq):
        return cvar_of(p.first) | cvar_of(p.second)
    if isinstance(p, Block):
        return cvar_of(p.body) - frozenset(p.local_vars)
    if isinstance(p, ProbChoice):
        return frozenset().union(*(cvar_of(b) for b, _ in p.branches))
    if isinstance(p, QChoice):
        return (frozenset(qvar_of(p.coin_prog)) | cvar_of(p.coin_prog)).union(
            *(cvar_of(b) for b in p.branches))
    raise TypeError(f"not a program: {p!r}")


# ---------------------------------------------------------------------------
# Static checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    clause: str
    message: str

    def __str__(self):
        return f"[{self.clause}] {self.message}"


def check(p: Program, registry: Registry) -> list:
    """All well-formedness violations of a program, empty when none."""
    out: list[Diagnostic] = []
    _check(p, registry, out, inside_branch=False)
    return out


def _bad(out, clause, msg):
    out.append(Diagnostic(clause, msg))


def _check_qvars(p, registry, names, out, what):
    for n in names:
        if not registry.has_q(n):
            _bad(out, "scope", f"{what}: unknown quantum variable {n!r}")
            return False
    if len(set(names)) != len(tuple(names)):
        _bad(out, "scope", f"{what}: repeated quantum variable in {tuple(names)!r}")
        return False
    return True


def _check_guards_static(registry, coin_vars, guards, out, clause):
    try:
        vecs = [g.resolve(registry, coin_vars) for g in guards]
    except Exception as exc:  # noqa: BLE001 - report, don't crash the checker
        _bad(out, clause, f"guard does not fit the coin space: {exc}")
        return
    d = registry.dim_of(coin_vars)
    if len(vecs) != d:
        _bad(out, clause,
             f"{len(vecs)} guards do not form a basis of the {d}-dimensional coin space")
        return
    g = np.column_stack(vecs)
    if np.abs(dagger(g) @ g - np.eye(d)).max() > TAU_EQ:
        _bad(out, clause, "guards are not an orthonormal family within tolerance")


def _check(p: Program, registry: Registry, out: list, inside_branch: bool) -> None:
    if isinstance(p, (Abort, Skip)):
        return
    if isinstance(p, Unitary):
        if not _check_qvars(p, registry, p.qvars, out, f"unitary {p.gate}"):
            return
        d = registry.dim_of(p.qvars)
        if p.matrix.shape != (d, d):
            _bad(out, "clause 2",
                 f"gate {p.gate!r} is {p.matrix.shape[0]}x{p.matrix.shape[1]}, "
                 f"variables {p.qvars!r} have dimension {d}")
        elif not is_unitary(p.matrix, TAU_EQ):
            _bad(out, "clause 2", f"gate {p.gate!r} is not unitary within tolerance")
        return
    if isinstance(p, Measure):
        if not _check_qvars(p, registry, p.qvars, out, f"measurement {p.meas.name}"):
            return
        d = registry.dim_of(p.qvars)
        if p.meas.dim != d:
            _bad(out, "clause 3",
                 f"measurement {p.meas.name!r} has dimension {p.meas.dim}, "
                 f"variables {p.qvars!r} have dimension {d}")
        if registry.has_c(p.x):
            missing = [m for m in p.meas.outcomes if m not in registry.cdomain(p.x)]
            if missing:
                _bad(out, "clause 3",
                     f"outcomes {missing!r} are outside the domain of {p.x!r}")
        else:
            _bad(out, "scope", f"unknown classical variable {p.x!r}")
        branch_labels = [m for m, _ in p.branches]
        if sorted(map(str, branch_labels)) != sorted(map(str, p.meas.outcomes)):
            _bad(out, "clause 3",
                 f"branches {branch_labels!r} do not cover the outcomes "
                 f"{tuple(p.meas.outcomes)!r} exactly")
        for m, b in p.branches:
            if p.x in var_of(b):
                _bad(out, "clause 3",
                     f"outcome variable {p.x!r} occurs inside the branch for {m!r}")
            _check(b, registry, out, inside_branch=True)
        return
    if isinstance(p, (QIf, SubQIf)):
        kind = "clause 4" if isinstance(p, QIf) else "subspace qif"
        if not _check_qvars(p, registry, p.coin_vars, out, "alternation coin"):
            return
        for i, b in enumerate(p.branches):
            overlap = frozenset(p.coin_vars) & qvar_of(b)
            if overlap:
                _bad(out, kind,
                     f"coin variables {sorted(overlap)} occur in branch {i}")
            _check(b, registry, out, inside_branch=True)
        if isinstance(p, QIf):
            if len(p.guards) != len(p.branches):
                _bad(out, kind, f"{len(p.guards)} guards for {len(p.branches)} branches")
            _check_guards_static(registry, p.coin_vars, p.guards, out, kind)
            if isinstance(p.alpha, tuple) and len(p.alpha) != len(p.branches):
                _bad(out, kind, "one coefficient phase per branch required")
        else:
            if len(p.subspaces) != len(p.branches):
                _bad(out, kind,
                     f"{len(p.subspaces)} subspaces for {len(p.branches)} branches")
            flat = [g for sub in p.subspaces for g in sub]
            _check_guards_static(registry, p.coin_vars, flat, out, kind)
        return
    if isinstance(p, Seq):
        shared = var_of(p.first) & var_of(p.second)
        if shared:
            _bad(out, "clause 5",
                 f"classical variables {sorted(shared)} are used on both sides of ';'")
        _check(p.first, registry, out, inside_branch)
        _check(p.second, registry, out, inside_branch)
        return
    if isinstance(p, Block):
        if inside_branch:
            _bad(out, "block",
                 "blocks are not allowed inside alternation or measurement branches")
        if not _check_qvars(p, registry, p.local_vars, out, "block locals"):
            return
        if not frozenset(p.local_vars) <= qvar_of(p.body):
            _bad(out, "block", "local variables must occur in the block body")
        d = registry.dim_of(p.local_vars)
        if p.init.shape != (d, d):
            _bad(out, "block", f"initial state shape {p.init.shape} does not match locals")
        elif not is_density(p.init, TAU_EQ):
            _bad(out, "block", "initial state is not a density operator")
        _check(p.body, registry, out, inside_branch)
        return
    if isinstance(p, ProbChoice):
        if inside_branch:
            _bad(out, "pchoice",
                 "probabilistic choice is not allowed inside alternation or "
                 "measurement branches")
        weights = [w for _, w in p.branches]
        if any(w <= 0 for w in weights) or sum(weights) > 1 + TAU_EQ:
            _bad(out, "pchoice",
                 f"weights {weights!r} are not a sub-probability distribution")
        for b, _ in p.branches:
            _check(b, registry, out, inside_branch)
        return
    if isinstance(p, QChoice):
        coin = qvar_of(p.coin_prog)
        for i, b in enumerate(p.branches):
            overlap = coin & qvar_of(b)
            if overlap:
                _bad(out, "quantum choice",
                     f"coin-program variables {sorted(overlap)} occur in branch {i}")
        _check(desugar_qchoice(p, registry), registry, out, inside_branch)
        return
    raise TypeError(f"not a program: {p!r}")


# ---------------------------------------------------------------------------
# Desugaring
# ---------------------------------------------------------------------------

def desugar_qchoice(p: Program, registry: Registry | None = None) -> Program:
    """Replace every quantum choice by coin program followed by alternation.

    Outer choices are rewritten first; the transformation is idempotent.
    The alternation's coin is the coin program's quantum variable set.
    """
    if isinstance(p, QChoice):
        coin = tuple(sorted(qvar_of(p.coin_prog)) if registry is None
                     else registry.varset(qvar_of(p.coin_prog)))
        inner = QIf(coin, p.guards,
                    tuple(desugar_qchoice(b, registry) for b in p.branches), p.alpha)
        return Seq(desugar_qchoice(p.coin_prog, registry), inner)
    if isinstance(p, Seq):
        return Seq(desugar_qchoice(p.first, registry), desugar_qchoice(p.second, registry))
    if isinstance(p, Measure):
        return Measure(p.meas, p.qvars, p.x,
                       tuple((m, desugar_qchoice(b, registry)) for m, b in p.branches))
    if isinstance(p, QIf):
        return QIf(p.coin_vars, p.guards,
                   tuple(desugar_qchoice(b, registry) for b in p.branches), p.alpha)
    if isinstance(p, SubQIf):
        return SubQIf(p.coin_vars, p.subspaces,
                      tuple(desugar_qchoice(b, registry) for b in p.branches))
    if isinstance(p, Block):
        return Block(p.local_vars, p.init, desugar_qchoice(p.body, registry))
    if isinstance(p, ProbChoice):
        return ProbChoice(tuple((desugar_qchoice(b, registry), w) for b, w in p.branches))
    return p


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def _guard_src(g: Guard) -> str:
    if g.index is not None:
        return f"|{g.index}>"
    return "|(" + ", ".join(format_complex(c) for c in g.vector) + ")>"


def _matrix_src(m: np.ndarray) -> str:
    rows = ["," .join(format_complex(z) for z in row) for row in np.atleast_2d(m)]
    return "[" + "; ".join(rows) + "]"


def to_source(p: Program) -> str:
    """Concrete syntax of a statement (declarations are printed separately)."""
    if isinstance(p, Abort):
        return "abort"
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Unitary):
        return f"{p.gate}[{', '.join(p.qvars)}]"
    if isinstance(p, Measure):
        body = " ".join(f"[] {m} -> {_branch_src(b)}" for m, b in p.branches)
        return f"measure {p.meas.name}[{', '.join(p.qvars)} : {p.x}] {body} end"
    if isinstance(p, QIf):
        alpha = ""
        if isinstance(p.alpha, tuple):
            alpha = " alpha(" + ", ".join(format_complex(z) for z in p.alpha) + ")"
        body = " ".join(f"[] {_guard_src(g)} -> {_branch_src(b)}"
                        for g, b in zip(p.guards, p.branches))
        return f"qif{alpha} [{', '.join(p.coin_vars)}] {body} fiq"
    if isinstance(p, SubQIf):
        body = " ".join(
            "[] {" + ", ".join(_guard_src(g) for g in sub) + "} -> " + _branch_src(b)
            for sub, b in zip(p.subspaces, p.branches))
        return f"qif [{', '.join(p.coin_vars)}] {body} fiq"
    if isinstance(p, Seq):
        return f"{to_source(p.first)}; {to_source(p.second)}"
    if isinstance(p, Block):
        return (f"begin local {', '.join(p.local_vars)} := {_matrix_src(p.init)}; "
                f"{to_source(p.body)} end")
    if isinstance(p, ProbChoice):
        body = " ".join(f"{_branch_src(b)} @ {format_complex(w)}" for b, w in p.branches)
        return f"pchoice {body} end"
    if isinstance(p, QChoice):
        alpha = ""
        if isinstance(p.alpha, tuple):
            alpha = " alpha(" + ", ".join(format_complex(z) for z in p.alpha) + ")"
        body = " ".join(f"[] {_guard_src(g)} -> {_branch_src(b)}"
                        for g, b in zip(p.guards, p.branches))
        return f"[{to_source(p.coin_prog)}] (+){alpha} {body}"
    raise TypeError(f"not a program: {p!r}")


def _branch_src(p: Program) -> str:
    src = to_source(p)
    if isinstance(p, (Seq, QChoice)):
        return f"({src})"
    return src
