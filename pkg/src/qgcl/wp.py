"""Weakest preconditions, Hoare triples, equivalence, and refinement.

``wp(P)`` is the adjoint channel of ``P``'s operation: its Kraus list is the
daggered Kraus list, so ``tr(wp(P)(N) rho) = tr(N [[P]](rho))`` holds for
every observable N and state rho.  That duality makes the Hoare-triple check
exact: ``{N1} P {N2}`` holds iff ``N1`` is below ``wp(P)(N2)`` in the
Loewner order.

Program equivalence compares canonical channel matrices after extending both
programs to their joint variable set; coin-free equivalence first composes
with the trace over all coin variables.  Refinement has no finite
certificate in this representation and is checked by sampling observables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ast import Program, cvar_of, qvar_of
from .errors import DimensionError, ShapeError
from .linalg import TAU_EQ, dagger, factor_bra, is_hermitian, is_psd, loewner_leq
from .ovf import SuperOp, apply
from .registry import Registry, VarSet
from .semantics import channel_of

__all__ = [
    "Observable", "wp", "check_hoare", "HoareVerdict",
    "equivalent", "equivalence_residual",
    "coin_free_equivalent", "coin_free_residual",
    "refines", "RefinementVerdict",
]


@dataclass(frozen=True)
class Observable:
    """A bounded positive Hermitian operator on a set of variables."""

    vars: VarSet
    matrix: np.ndarray

    @classmethod
    def build(cls, registry: Registry, vars, matrix) -> "Observable":
        vs = registry.varset(vars)
        m = np.asarray(matrix, dtype=complex)
        d = registry.dim_of(vs)
        if m.shape != (d, d):
            raise DimensionError(f"observable shape {m.shape} does not match {vs!r}")
        if not is_hermitian(m, TAU_EQ):
            raise ShapeError("observable is not Hermitian within tolerance")
        if not is_psd(m, TAU_EQ):
            raise ShapeError("observable is not positive within tolerance")
        return cls(vs, m)


def wp(p: Program, registry: Registry) -> SuperOp:
    """The weakest-precondition transformer as an adjoint-Kraus channel."""
    chan = channel_of(p, registry)
    return SuperOp([dagger(k) for k in chan.kraus], chan.dim_out, chan.dim_in,
                   vars=chan.vars, check=False)


@dataclass(frozen=True)
class HoareVerdict:
    satisfied: bool
    certificate: np.ndarray  # wp(P)(N2), the weakest precondition of N2

    def __str__(self):
        return "SATISFIED" if self.satisfied else "VIOLATED"


def check_hoare(n1, p: Program, n2, registry: Registry, trials: int = 0,
                tol: float = TAU_EQ, seed: int = 0) -> HoareVerdict:
    """Decide the triple {n1} p {n2} through the wp certificate.

    The duality makes the Loewner comparison exact; ``trials`` optionally
    adds a direct trace-inequality spot check on random states.
    """
    m1 = n1.matrix if isinstance(n1, Observable) else np.asarray(n1, dtype=complex)
    m2 = n2.matrix if isinstance(n2, Observable) else np.asarray(n2, dtype=complex)
    pre = apply(wp(p, registry), m2)
    ok = loewner_leq(m1, pre, tol)
    if ok and trials > 0:
        chan = channel_of(p, registry)
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            rho = _random_density(rng, chan.dim_in)
            lhs = float(np.trace(m1 @ rho).real)
            rhs = float(np.trace(m2 @ apply(chan, rho)).real)
            if lhs > rhs + 1e-8:
                ok = False
                break
    return HoareVerdict(ok, pre)


def _joint_channels(p: Program, q: Program, registry: Registry):
    v = registry.varset(qvar_of(p) | qvar_of(q))
    cp = channel_of(p, registry).extended(registry, v)
    cq = channel_of(q, registry).extended(registry, v)
    return cp, cq, v


def equivalence_residual(p: Program, q: Program, registry: Registry) -> float:
    """Max-abs difference of the canonical channel matrices on the joint space."""
    cp, cq, _ = _joint_channels(p, q, registry)
    return cp.distance(cq)


def equivalent(p: Program, q: Program, registry: Registry, tol: float = TAU_EQ) -> bool:
    return equivalence_residual(p, q, registry) <= tol


def _traced_channel(chan: SuperOp, registry: Registry, traced: VarSet) -> SuperOp:
    """Compose a channel with the trace over the given variables."""
    dims = registry.dims(chan.vars)
    pos = [chan.vars.index(n) for n in traced]
    keep_dim = chan.dim_out // registry.dim_of(traced)
    kraus = []
    import itertools

    for j in itertools.product(*[range(dims[k]) for k in pos]):
        basis = []
        for p_, idx in zip(pos, j):
            e = np.zeros(dims[p_], dtype=complex)
            e[idx] = 1.0
            basis.append(e)
        bra = factor_bra(dims, pos, basis)
        kraus.extend(bra @ k for k in chan.kraus)
    return SuperOp(kraus, chan.dim_in, keep_dim, check=False)


def coin_free_residual(p: Program, q: Program, registry: Registry) -> float:
    """Residual of the trace-out-coins compositions of the two channels."""
    cp, cq, v = _joint_channels(p, q, registry)
    coins = registry.varset(cvar_of(p) | cvar_of(q))
    tp = _traced_channel(cp, registry, coins)
    tq = _traced_channel(cq, registry, coins)
    return tp.distance(tq)


def coin_free_equivalent(p: Program, q: Program, registry: Registry,
                         tol: float = TAU_EQ) -> bool:
    return coin_free_residual(p, q, registry) <= tol


@dataclass(frozen=True)
class RefinementVerdict:
    refuted: bool
    samples: int
    witness: Optional[np.ndarray] = None

    def __str__(self):
        return "REFUTED" if self.refuted else f"UNREFUTED({self.samples} samples)"


def _random_density(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ dagger(a)
    return m / np.trace(m).real


def _random_pure_projector(rng, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def refines(p: Program, q: Program, registry: Registry, sample_states: int = 20,
            seed: int = 0, tol: float = TAU_EQ) -> RefinementVerdict:
    """Property-based refinement check: wp(p)(N) below wp(q)(N) on sampled N.

    Observables tried: computational basis projectors, random pure-state
    projectors, and random PSD mixtures.  A counterexample yields REFUTED
    with the witness observable; otherwise UNREFUTED with the sample count.
    """
    v = registry.varset(qvar_of(p) | qvar_of(q))
    wp_p = wp(p, registry).extended(registry, v)
    wp_q = wp(q, registry).extended(registry, v)
    d = registry.dim_of(v)
    rng = np.random.default_rng(seed)
    tried = 0

    def trial(n):
        nonlocal tried
        tried += 1
        return loewner_leq(apply(wp_p, n), apply(wp_q, n), tol)

    if not trial(np.eye(d, dtype=complex)):
        return RefinementVerdict(True, tried, np.eye(d, dtype=complex))
    for k in range(d):
        n = np.zeros((d, d), dtype=complex)
        n[k, k] = 1.0
        if not trial(n):
            return RefinementVerdict(True, tried, n)
    for _ in range(sample_states):
        n = _random_pure_projector(rng, d)
        if not trial(n):
            return RefinementVerdict(True, tried, n)
        n = _random_density(rng, d) * d  # PSD mixture, not normalized
        if not trial(n):
            return RefinementVerdict(True, tried, n)
    return RefinementVerdict(False, tried)
