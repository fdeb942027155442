"""Operator-valued functions and their guarded compositions.

An operator-valued function assigns to each classical state a matrix on the
joint space of its quantum variables, subject to the sub-normalization
condition ``sum_s F(s)^dag F(s) <= I`` (equality: the function is *full*).
Guarded composition combines branch functions along an orthonormal family of
coin guard states, weighting each branch term by the product of the other
branches' state weights; the generalized form takes an arbitrary normalized
coefficient family instead.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import cstate
from .cstate import ClassicalState
from .errors import (
    AlphaNormalizationError,
    DimensionError,
    GuardBasisError,
    ShapeError,
    VariableScopeError,
)
from .linalg import TAU_EQ, choi_of, dagger, is_psd, loewner_leq
from .registry import Registry, VarSet

__all__ = [
    "OpValuedFn",
    "AlphaFamily",
    "SuperOp",
    "lambda_coeff",
    "branch_weights",
    "guarded_compose",
    "alpha_guarded_compose",
    "to_super_op",
    "apply",
]


@dataclass(frozen=True)
class OpValuedFn:
    """A finite map from classical states to operators on ``H_vars``."""

    vars: VarSet
    states: tuple
    table: Mapping[ClassicalState, np.ndarray]

    def __post_init__(self):
        if set(self.states) != set(self.table):
            raise ShapeError("state list and table keys disagree")
        if len(set(self.states)) != len(self.states):
            raise ShapeError("duplicate classical states in domain")

    @classmethod
    def build(cls, registry: Registry, vars: Iterable[str], entries: Sequence[tuple],
              check: bool = True) -> "OpValuedFn":
        """Construct from ``(state, matrix)`` pairs and validate shape and
        sub-normalization."""
        vs = registry.varset(vars)
        d = registry.dim_of(vs)
        states = tuple(s for s, _ in entries)
        table = {}
        for s, m in entries:
            m = np.asarray(m, dtype=complex)
            if m.shape != (d, d):
                raise DimensionError(
                    f"operator for state {cstate.label(s)} has shape {m.shape}, expected {(d, d)}")
            table[s] = m
        f = cls(vs, states, table)
        if check and not f.is_subnormalized():
            raise ShapeError("sum F(s)^dag F(s) exceeds the identity")
        return f

    @property
    def dim(self) -> int:
        op = next(iter(self.table.values()))
        return op.shape[0]

    def op(self, s: ClassicalState) -> np.ndarray:
        return self.table[s]

    def gram(self) -> np.ndarray:
        """sum_s F(s)^dag F(s)."""
        d = self.dim
        g = np.zeros((d, d), dtype=complex)
        for m in self.table.values():
            g += dagger(m) @ m
        return g

    def is_subnormalized(self, tol: float = TAU_EQ) -> bool:
        return loewner_leq(self.gram(), np.eye(self.dim), tol)

    def is_full(self, tol: float = TAU_EQ) -> bool:
        return bool(np.abs(self.gram() - np.eye(self.dim)).max() <= tol)

    def extended(self, registry: Registry, to: Iterable[str]) -> "OpValuedFn":
        """Cylindrical extension of every table entry to a larger variable set."""
        to = registry.varset(to)
        if to == self.vars:
            return self
        table = {s: registry.embed(m, self.vars, to) for s, m in self.table.items()}
        return OpValuedFn(to, self.states, table)


def branch_weights(f: OpValuedFn) -> dict:
    """Per-state weights of one branch.

    weight(s) = sqrt( tr F(s)^dag F(s) / sum_t tr F(t)^dag F(t) ), with two
    boundary rules: a singleton domain always has weight 1 (covers the abort
    branch, where the quotient is 0/0), and an all-zero branch with several
    states gets the uniform weight 1/sqrt(|domain|).
    """
    if len(f.states) == 1:
        return {f.states[0]: 1.0}
    tr = {s: float(np.trace(dagger(m) @ m).real) for s, m in f.table.items()}
    total = sum(tr.values())
    if total <= 0.0:
        u = 1.0 / math.sqrt(len(f.states))
        return {s: u for s in f.states}
    return {s: math.sqrt(t / total) for s, t in tr.items()}


def lambda_coeff(f: OpValuedFn, s: ClassicalState) -> float:
    """Weight of one classical state of a branch; see :func:`branch_weights`."""
    if s not in f.table:
        raise KeyError(f"state {cstate.label(s)} not in domain")
    return branch_weights(f)[s]


class AlphaFamily:
    """Coefficient family for generalized guarded composition.

    For each branch ``i`` the family assigns a complex coefficient to every
    tuple of *other* branches' classical states; the coefficient never
    depends on branch ``i``'s own state.  Per branch, the squared moduli over
    all such tuples must sum to one.
    """

    def __init__(self, domains: Sequence[Sequence[ClassicalState]],
                 coeff: Callable[[int, tuple], complex]):
        self.domains = tuple(tuple(d) for d in domains)
        self._coeff = coeff

    def coeff(self, i: int, others: tuple) -> complex:
        """Coefficient of branch ``i`` given the other branches' states, in
        branch order with branch ``i`` omitted."""
        return complex(self._coeff(i, others))

    def _other_tuples(self, i: int):
        others = [d for k, d in enumerate(self.domains) if k != i]
        return itertools.product(*others)

    def validate(self, tol: float = TAU_EQ) -> None:
        for i in range(len(self.domains)):
            total = sum(abs(self.coeff(i, t)) ** 2 for t in self._other_tuples(i))
            if abs(total - 1.0) > tol * max(1, len(self.domains[i])):
                raise AlphaNormalizationError(
                    f"branch {i}: sum of squared coefficient moduli is {total!r}, not 1")

    # -- stock families -------------------------------------------------

    @classmethod
    def from_map(cls, domains: Sequence[Sequence[ClassicalState]],
                 mapping: Mapping) -> "AlphaFamily":
        """Family given explicitly as ``{(i, other_states_tuple): coefficient}``."""
        return cls(domains, lambda i, t: mapping[(i, t)])

    @classmethod
    def lambda_products(cls, branches: Sequence[OpValuedFn]) -> "AlphaFamily":
        """The default family: products of the other branches' weights."""
        weights = [branch_weights(f) for f in branches]

        def coeff(i, others):
            ks = [k for k in range(len(branches)) if k != i]
            return math.prod(weights[k][s] for k, s in zip(ks, others))

        return cls([f.states for f in branches], coeff)

    @classmethod
    def uniform(cls, branches: Sequence[OpValuedFn]) -> "AlphaFamily":
        """1/sqrt(prod of the other branches' domain sizes), everywhere."""
        sizes = [len(f.states) for f in branches]

        def coeff(i, others):
            return 1.0 / math.sqrt(math.prod(sz for k, sz in enumerate(sizes) if k != i))

        return cls([f.states for f in branches], coeff)

    @classmethod
    def phases(cls, branches: Sequence[OpValuedFn], phases: Sequence[complex]) -> "AlphaFamily":
        """Relative-phase family: unit-modulus factor times the default weights."""
        if len(phases) != len(branches):
            raise AlphaNormalizationError("one phase factor per branch required")
        base = cls.lambda_products(branches)
        ph = [complex(p) for p in phases]
        return cls(base.domains, lambda i, t: ph[i] * base.coeff(i, t))


def _check_guards(registry: Registry, guards: Sequence[np.ndarray], coin_vars: VarSet,
                  tol: float = TAU_EQ) -> list[np.ndarray]:
    dc = registry.dim_of(coin_vars)
    vecs = []
    for g in guards:
        v = np.asarray(g, dtype=complex).reshape(-1)
        if v.size != dc:
            raise GuardBasisError(
                f"guard vector has dimension {v.size}, coin space has {dc}")
        vecs.append(v)
    if len(vecs) != dc:
        raise GuardBasisError(f"{len(vecs)} guards cannot span a {dc}-dimensional coin space")
    gmat = np.column_stack(vecs)
    if np.abs(dagger(gmat) @ gmat - np.eye(dc)).max() > tol:
        raise GuardBasisError("guards are not orthonormal within tolerance")
    return vecs


def _compose(registry: Registry, branches: Sequence[tuple], coin_vars: Iterable[str],
             coeff_of) -> OpValuedFn:
    coin_vars = registry.varset(coin_vars)
    guards = _check_guards(registry, [g for g, _ in branches], coin_vars)
    fns = [f for _, f in branches]
    for f in fns:
        if set(f.vars) & set(coin_vars):
            raise VariableScopeError(
                f"coin variables {sorted(set(f.vars) & set(coin_vars))} occur in a branch")
    union = registry.varset(n for f in fns for n in f.vars)
    out_vars = registry.varset(tuple(coin_vars) + tuple(union))
    extended = [f.extended(registry, union) for f in fns]
    projs = [registry.embed(np.outer(v, np.conj(v)), coin_vars, out_vars) for v in guards]
    lifted = [
        {s: registry.embed(m, union, out_vars) for s, m in f.table.items()}
        for f in extended
    ]
    d = registry.dim_of(out_vars)
    entries = []
    for combo in itertools.product(*[f.states for f in fns]):
        op = np.zeros((d, d), dtype=complex)
        for i in range(len(fns)):
            others = tuple(s for k, s in enumerate(combo) if k != i)
            op += coeff_of(i, others) * (projs[i] @ lifted[i][combo[i]])
        entries.append((cstate.superpose(combo), op))
    return OpValuedFn.build(registry, out_vars, entries)


def guarded_compose(registry: Registry, branches: Sequence[tuple],
                    coin_vars: Iterable[str]) -> OpValuedFn:
    """Guarded composition of branch functions along coin guard states.

    ``branches`` is a sequence of ``(guard_vector, OpValuedFn)`` pairs; the
    guard vectors must form an orthonormal basis of the coin space, which
    must be disjoint from every branch's variables.  Branch functions are
    first cylindrically extended to the union of the branch variable sets
    (weights are computed on the original tables: the quotient is invariant
    under extension).  The composed function lives on coin + union and its
    domain is the set of per-branch state tuples, lexicographic in branch
    order.
    """
    weights = [branch_weights(f) for _, f in branches]

    def coeff(i, others):
        ks = [k for k in range(len(branches)) if k != i]
        return math.prod(weights[k][s] for k, s in zip(ks, others))

    return _compose(registry, branches, coin_vars, coeff)


def alpha_guarded_compose(registry: Registry, branches: Sequence[tuple],
                          coin_vars: Iterable[str], alpha: AlphaFamily) -> OpValuedFn:
    """Guarded composition with an explicit coefficient family.

    Reduces to :func:`guarded_compose` when ``alpha`` is the product-of-
    weights family.  The family is validated against the branch domains and
    the normalization condition before use.
    """
    domains = tuple(tuple(f.states) for _, f in branches)
    if tuple(map(tuple, alpha.domains)) != domains:
        raise AlphaNormalizationError("coefficient family domains do not match the branches")
    alpha.validate()
    return _compose(registry, branches, coin_vars, alpha.coeff)


class SuperOp:
    """A quantum operation as a Kraus list, with a cached canonical matrix.

    ``dim_in``/``dim_out`` may differ (trace-out maps, blocks).  Channels
    produced by program semantics are trace-nonincreasing; adjoint (weakest
    precondition) channels skip that check.
    """

    def __init__(self, kraus: Sequence[np.ndarray], dim_in: int | None = None,
                 dim_out: int | None = None, vars: VarSet | None = None,
                 check: bool = True):
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        if kraus:
            dim_out, dim_in = kraus[0].shape
            for k in kraus:
                if k.shape != (dim_out, dim_in):
                    raise DimensionError("Kraus operators have mixed shapes")
        elif dim_in is None:
            raise DimensionError("empty Kraus list needs explicit dimensions")
        if dim_out is None:
            dim_out = dim_in
        self.kraus = tuple(kraus)
        self.dim_in = int(dim_in)
        self.dim_out = int(dim_out)
        self.vars = vars
        self._choi = None
        if check and kraus:
            g = sum(dagger(k) @ k for k in kraus)
            if not loewner_leq(g, np.eye(self.dim_in), TAU_EQ):
                raise ShapeError("channel is not trace-nonincreasing")

    @property
    def choi(self) -> np.ndarray:
        if self._choi is None:
            self._choi = choi_of(self.kraus, self.dim_in, self.dim_out)
        return self._choi

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)

    def then(self, other: "SuperOp") -> "SuperOp":
        """Sequential composition: ``self`` first, then ``other``."""
        if other.dim_in != self.dim_out:
            raise DimensionError(
                f"cannot chain channels: {self.dim_out} -> {other.dim_in}")
        kraus = [b @ a for a in self.kraus for b in other.kraus]
        return SuperOp(kraus, self.dim_in, other.dim_out, check=False)

    def equals(self, other: "SuperOp", tol: float = TAU_EQ) -> bool:
        return self.distance(other) <= tol

    def distance(self, other: "SuperOp") -> float:
        """Max-abs entry of the Choi matrix difference."""
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            raise DimensionError("channels act between different spaces")
        from .linalg import choi_residual

        return choi_residual(self.kraus, other.kraus, self.dim_in, self.dim_out)

    def extended(self, registry: Registry, to: Iterable[str]) -> "SuperOp":
        """Cylindrical extension of a square channel to a larger variable set."""
        if self.vars is None:
            raise VariableScopeError("channel carries no variable set")
        if self.dim_in != self.dim_out:
            raise DimensionError("only square channels can be extended")
        to = registry.varset(to)
        if to == self.vars:
            return self
        kraus = [registry.embed(k, self.vars, to) for k in self.kraus]
        d = registry.dim_of(to)
        return SuperOp(kraus, d, d, vars=to, check=False)


def to_super_op(f: OpValuedFn) -> SuperOp:
    """The channel defined by an operator-valued function (table = Kraus list)."""
    return SuperOp([f.table[s] for s in f.states], f.dim, f.dim, vars=f.vars, check=False)


def apply(e: SuperOp, rho: np.ndarray) -> np.ndarray:
    """Apply a channel: ``sum_k K rho K^dag``.

    Non-state inputs are permitted (the map is linear); a warning is issued
    for inputs that are not density-like, since that usually signals a
    mixed-up argument rather than an intentional observable.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (e.dim_in, e.dim_in):
        raise DimensionError(f"state shape {rho.shape}, channel expects {(e.dim_in, e.dim_in)}")
    herm = np.abs(rho - dagger(rho)).max() <= TAU_EQ
    if not herm or not is_psd((rho + dagger(rho)) / 2, 1e-8):
        warnings.warn("channel applied to a non-PSD input", stacklevel=2)
    out = np.zeros((e.dim_out, e.dim_out), dtype=complex)
    for k in e.kraus:
        out += k @ rho @ dagger(k)
    return out
