"""Built-in gates and measurements, plus user-defined matrix literals.

Fixed-size gates: I, X, Y, Z, H, S, CNOT, SWAP.  Dimension-generic gates are
produced on demand: TL/TR (cyclic translations ``TL|n> = |n-1 mod N>``,
``TR|n> = |n+1 mod N>``) and PERM (permutation of basis states).  Built-in
measurements: MZ (computational basis, outcomes 0..d-1) and MX (the
Hadamard-basis qubit measurement, outcomes '+' and '-').
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, ShapeError
from .linalg import TAU_EQ, dagger, is_unitary

__all__ = ["Measurement", "GateLib", "MeasLib", "translation", "permutation_gate"]

_SQ2 = math.sqrt(2)

_FIXED = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def translation(n: int, step: int) -> np.ndarray:
    """Cyclic translation by ``step`` on an ``n``-dimensional space."""
    m = np.zeros((n, n), dtype=complex)
    for k in range(n):
        m[(k + step) % n, k] = 1.0
    return m


def permutation_gate(perm: Sequence[int]) -> np.ndarray:
    """Unitary mapping basis state ``|i>`` to ``|perm[i]>``."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ShapeError(f"not a permutation: {perm!r}")
    m = np.zeros((n, n), dtype=complex)
    for i, j in enumerate(perm):
        m[j, i] = 1.0
    return m


class GateLib:
    """Named unitaries: built-ins plus user declarations."""

    def __init__(self):
        self._custom: dict[str, np.ndarray] = {}

    def define(self, name: str, matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix, dtype=complex)
        if not is_unitary(matrix, TAU_EQ):
            raise ShapeError(f"gate {name!r} is not unitary within tolerance")
        self._custom[name] = matrix

    def known(self, name: str) -> bool:
        return name in self._custom or name in _FIXED or name in ("TL", "TR", "ID")

    def resolve(self, name: str, dim: int) -> np.ndarray:
        """Matrix for a gate applied to a space of total dimension ``dim``."""
        if name in self._custom:
            m = self._custom[name]
        elif name == "TL":
            m = translation(dim, -1)
        elif name == "TR":
            m = translation(dim, +1)
        elif name == "ID":
            m = np.eye(dim, dtype=complex)
        elif name in _FIXED:
            m = _FIXED[name]
        else:
            raise ShapeError(f"unknown gate {name!r}")
        if m.shape != (dim, dim):
            raise DimensionError(
                f"gate {name!r} is {m.shape[0]}x{m.shape[1]}, applied to dimension {dim}")
        return m


@dataclass(frozen=True)
class Measurement:
    """A named measurement: outcome labels and their operators."""

    name: str
    outcomes: tuple
    ops: Mapping[object, np.ndarray]

    def __post_init__(self):
        d = None
        for m in self.ops.values():
            if d is None:
                d = m.shape[0]
            if m.shape != (d, d):
                raise DimensionError(f"measurement {self.name!r} has mixed operator shapes")
        total = sum(dagger(m) @ m for m in self.ops.values())
        if np.abs(total - np.eye(d)).max() > TAU_EQ:
            raise ShapeError(f"measurement {self.name!r} is not complete (sum M^dag M != I)")

    @property
    def dim(self) -> int:
        return next(iter(self.ops.values())).shape[0]


def _mz(dim: int) -> Measurement:
    ops = {}
    for k in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[k, k] = 1.0
        ops[k] = m
    return Measurement("MZ", tuple(range(dim)), ops)


def _mx() -> Measurement:
    plus = np.array([1, 1], dtype=complex) / _SQ2
    minus = np.array([1, -1], dtype=complex) / _SQ2
    return Measurement("MX", ("+", "-"),
                       {"+": np.outer(plus, plus.conj()), "-": np.outer(minus, minus.conj())})


class MeasLib:
    """Named measurements: MZ/MX built-ins plus user declarations."""

    def __init__(self):
        self._custom: dict[str, Measurement] = {}

    def define(self, name: str, outcome_ops: Sequence[tuple]) -> Measurement:
        meas = Measurement(name, tuple(lbl for lbl, _ in outcome_ops),
                           {lbl: np.asarray(m, dtype=complex) for lbl, m in outcome_ops})
        self._custom[name] = meas
        return meas

    def known(self, name: str) -> bool:
        return name in self._custom or name in ("MZ", "MX")

    def resolve(self, name: str, dim: int) -> Measurement:
        if name in self._custom:
            meas = self._custom[name]
        elif name == "MZ":
            meas = _mz(dim)
        elif name == "MX":
            meas = _mx()
        else:
            raise ShapeError(f"unknown measurement {name!r}")
        if meas.dim != dim:
            raise DimensionError(
                f"measurement {name!r} is {meas.dim}-dimensional, applied to dimension {dim}")
        return meas
