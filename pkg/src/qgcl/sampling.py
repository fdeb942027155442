"""Seeded random generators for corpus-based testing.

Random unitaries are Haar-distributed (QR of a complex Gaussian with phase
fix); random programs draw from a stock of small shapes mixing unitaries,
measurements, and alternations over one coin and one principal qubit.
"""

from __future__ import annotations

import numpy as np

from .ast import Guard, Measure, Program, QChoice, QIf, Seq, Unitary
from .gates import MeasLib
from .linalg import dagger
from .registry import Registry

__all__ = [
    "random_unitary", "random_density", "random_psd", "random_state",
    "random_full_ovf_ops", "random_program",
]


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ dagger(a)
    return m / np.trace(m).real


def random_psd(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ dagger(a)
    return scale * m / np.abs(m).max()


def random_full_ovf_ops(rng: np.random.Generator, d: int, k: int) -> list:
    """k operators on dim d with sum of op^dag op equal to the identity."""
    z = rng.normal(size=(k * d, d)) + 1j * rng.normal(size=(k * d, d))
    q, _ = np.linalg.qr(z)
    return [np.ascontiguousarray(q[i * d:(i + 1) * d, :]) for i in range(k)]


def _mz(dim=2):
    return MeasLib().resolve("MZ", dim)


def _mx():
    return MeasLib().resolve("MX", 2)


class _Names:
    def __init__(self, tag: str = ""):
        self.tag = tag
        self.n = 0

    def fresh(self, stem: str) -> str:
        self.n += 1
        return f"{self.tag}{stem}{self.n}"


def random_program(rng: np.random.Generator, max_depth: int = 2,
                   registry: Registry | None = None, tag: str = ""):
    """A random well-formed program with its registry.

    Programs act on a coin qubit ``c`` and a principal qubit ``q``; shapes
    cover unitaries, measurements in two bases, alternations, quantum
    choice, and sequencing.  Pass an existing registry plus a fresh ``tag``
    to build several programs with disjoint classical variables.
    """
    if registry is None:
        registry = Registry()
        registry.declare_q("c", 2)
        registry.declare_q("q", 2)
    names = _Names(tag)
    prog = _random_stmt(rng, registry, names, "q", max_depth, coin="c")
    return registry, prog


def _unitary(rng, names, qvars, dims) -> Unitary:
    d = int(np.prod(dims))
    return Unitary(names.fresh("G"), qvars, random_unitary(rng, d))


def _random_measure(rng, registry, names, qv, depth) -> Program:
    meas = _mz() if rng.integers(2) else _mx()
    x = names.fresh("x")
    registry.ensure_c(x, meas.outcomes)
    branches = tuple(
        (m, _random_stmt(rng, registry, names, qv, depth - 1, coin=None))
        for m in meas.outcomes)
    return Measure(meas, (qv,), x, branches)


def _random_stmt(rng, registry, names, qv, depth, coin):
    kinds = ["unitary", "seq", "measure"]
    if coin is not None and depth > 0:
        kinds += ["qif", "choice"]
    kind = kinds[rng.integers(len(kinds))] if depth > 0 else "unitary"
    if kind == "unitary":
        return _unitary(rng, names, (qv,), [2])
    if kind == "seq":
        return Seq(_unitary(rng, names, (qv,), [2]),
                   _random_stmt(rng, registry, names, qv, depth - 1, coin))
    if kind == "measure":
        return _random_measure(rng, registry, names, qv, depth)
    branches = tuple(
        _random_stmt(rng, registry, names, qv, depth - 1, coin=None)
        for _ in range(2))
    guards = (Guard.basis(0), Guard.basis(1))
    if kind == "qif":
        return QIf((coin,), guards, branches, None)
    coin_prog = _unitary(rng, names, (coin,), [2])
    return QChoice(coin_prog, guards, branches, None)
