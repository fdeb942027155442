"""Quantum/classical variable registry and cylindrical extension.

A :class:`Registry` records quantum variables with their dimensions and
classical variables with their outcome domains.  The canonical ordering of
tensor factors is declaration order; every operator handed between modules
lives on a :data:`VarSet` -- a tuple of quantum variable names sorted into
that canonical order.  The empty variable set has the one-dimensional space,
so scalars 0 and 1 double as operators on it.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, UnknownVariableError, VariableScopeError
from .linalg import permute_factors

VarSet = tuple  # tuple[str, ...] in canonical (declaration) order

__all__ = ["VarSet", "Registry"]


class Registry:
    """Declared variables and the canonical tensor-factor order."""

    def __init__(self):
        self._qdims: dict[str, int] = {}
        self._cdoms: dict[str, tuple] = {}
        self._implicit_c: set[str] = set()

    # -- declarations -------------------------------------------------

    def declare_q(self, name: str, dim: int) -> None:
        if name in self._qdims or name in self._cdoms:
            raise VariableScopeError(f"variable {name!r} declared twice")
        if dim < 1:
            raise DimensionError(f"quantum variable {name!r} needs dim >= 1, got {dim}")
        self._qdims[name] = int(dim)

    def declare_c(self, name: str, domain: Iterable) -> None:
        if name in self._qdims or name in self._cdoms:
            raise VariableScopeError(f"variable {name!r} declared twice")
        dom = tuple(domain)
        if not dom:
            raise DimensionError(f"classical variable {name!r} needs a nonempty domain")
        self._cdoms[name] = dom

    def ensure_c(self, name: str, labels: Iterable) -> None:
        """Declare a classical variable implicitly from the labels in use.

        An implicitly declared domain grows to the union of all labels seen
        (a variable may record outcomes of different measurements sitting in
        different alternation branches); explicit declarations are left
        alone and checked for coverage separately.
        """
        if name in self._cdoms:
            if name in self._implicit_c:
                known = self._cdoms[name]
                extra = tuple(l for l in labels if l not in known)
                if extra:
                    self._cdoms[name] = known + extra
            return
        self.declare_c(name, labels)
        self._implicit_c.add(name)

    # -- lookups ------------------------------------------------------

    @property
    def qnames(self) -> tuple:
        return tuple(self._qdims)

    def qdim(self, name: str) -> int:
        try:
            return self._qdims[name]
        except KeyError:
            raise UnknownVariableError(f"unknown quantum variable {name!r}") from None

    def cdomain(self, name: str) -> tuple:
        try:
            return self._cdoms[name]
        except KeyError:
            raise UnknownVariableError(f"unknown classical variable {name!r}") from None

    def has_q(self, name: str) -> bool:
        return name in self._qdims

    def has_c(self, name: str) -> bool:
        return name in self._cdoms

    # -- variable sets ------------------------------------------------

    def varset(self, names: Iterable[str]) -> VarSet:
        """Canonicalize a collection of quantum variable names."""
        seen = set()
        for n in names:
            self.qdim(n)
            seen.add(n)
        order = {n: k for k, n in enumerate(self._qdims)}
        return tuple(sorted(seen, key=order.__getitem__))

    def dims(self, vs: VarSet) -> list[int]:
        return [self.qdim(n) for n in vs]

    def dim_of(self, vs: Iterable[str]) -> int:
        """Dimension of the joint space; the empty set yields 1."""
        d = 1
        for n in vs:
            d *= self.qdim(n)
        return d

    # -- operator plumbing ---------------------------------------------

    def to_canonical(self, op: np.ndarray, written: Sequence[str]) -> tuple[np.ndarray, VarSet]:
        """Reorder an operator given on variables in written order.

        Gate and measurement matrices in programs are stated with respect to
        the sequence of variables as written (e.g. ``CNOT[b, a]``); this
        permutes the factors into canonical registry order.
        """
        written = list(written)
        if len(set(written)) != len(written):
            raise VariableScopeError(f"repeated variable in {written!r}")
        vs = self.varset(written)
        d = self.dim_of(written)
        if op.shape != (d, d):
            raise DimensionError(
                f"operator shape {op.shape} does not match variables {written!r} (dim {d})")
        order = [written.index(n) for n in vs]
        return permute_factors(op, [self.qdim(n) for n in written], order), vs

    def vector_to_canonical(self, vec: np.ndarray, written: Sequence[str]) -> np.ndarray:
        """Reorder a state vector's factors from written to canonical order."""
        written = list(written)
        vs = self.varset(written)
        dims = [self.qdim(n) for n in written]
        d = int(np.prod(dims))
        v = np.asarray(vec, dtype=complex).reshape(-1)
        if v.size != d:
            raise DimensionError(f"vector size {v.size} does not match variables {written!r}")
        order = [written.index(n) for n in vs]
        return v.reshape(dims).transpose(order).reshape(-1)

    def embed(self, op: np.ndarray, frm: Iterable[str], to: Iterable[str]) -> np.ndarray:
        """Cylindrical extension: act as ``op`` on ``frm``, identity elsewhere.

        ``frm`` must be a subset of ``to``; both are canonicalized first, and
        the result's factors follow canonical registry order.
        """
        frm = self.varset(frm)
        to = self.varset(to)
        if not set(frm) <= set(to):
            raise VariableScopeError(f"{frm!r} is not a subset of {to!r}")
        d_from = self.dim_of(frm)
        if op.shape != (d_from, d_from):
            raise DimensionError(
                f"operator shape {op.shape} does not match source variables (dim {d_from})")
        if frm == to:
            return op.copy()
        rest = tuple(n for n in to if n not in frm)
        big = np.kron(op, np.eye(self.dim_of(rest), dtype=complex))
        current = list(frm) + list(rest)
        order = [current.index(n) for n in to]
        return permute_factors(big, [self.qdim(n) for n in current], order)

    def tensor_state(self, parts: Sequence[tuple]) -> tuple[np.ndarray, VarSet]:
        """Tensor density operators on disjoint variable sets.

        ``parts`` is a sequence of ``(varset, matrix)`` pairs; the result is
        on the union, factors in canonical order.
        """
        all_vars: list[str] = []
        for vs, _ in parts:
            for n in vs:
                if n in all_vars:
                    raise VariableScopeError(f"variable {n!r} appears in two parts")
                all_vars.append(n)
        union = self.varset(all_vars)
        out = np.eye(1, dtype=complex)
        current: list[str] = []
        for vs, m in parts:
            vs = self.varset(vs)
            d = self.dim_of(vs)
            if m.shape != (d, d):
                raise DimensionError(f"state shape {m.shape} does not match {vs!r}")
            out = np.kron(out, m)
            current.extend(vs)
        order = [current.index(n) for n in union]
        return permute_factors(out, [self.qdim(n) for n in current], order), union
