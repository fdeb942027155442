"""Executable validation of the algebraic laws of alternation and choice.

Each law is checked on generated instances: both sides are built as
programs, evaluated, and compared as channels (plain equivalence or
coin-free equivalence, exactly as the law states).  The flattening laws
need a synthesized coefficient family; the constructions here compute it
from the branch tables (products of inner weights times the other groups'
composed weights for associativity, weight products over the trailing
program's state count for distributivity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import cstate
from .ast import (
    Block, Guard, Measure, Program, ProbChoice, QChoice, QIf, Seq, Skip,
    Unitary, check, seq,
)
from .errors import QgclError
from .gates import MeasLib, permutation_gate
from .linalg import TAU_EQ, dagger
from .ovf import AlphaFamily, OpValuedFn, branch_weights
from .registry import Registry
from .sampling import random_density, random_unitary
from .semantics import channel_of, semi_classical
from .wp import coin_free_residual, equivalence_residual

__all__ = [
    "LAW_IDS", "LawInstance", "LawResult",
    "synth_alpha_assoc", "synth_alpha_dist",
    "check_law", "make_instances", "run_law_suite",
]

LAW_IDS = (
    "ALT_IDEM", "ALT_COMM", "ALT_ASSOC", "ALT_DIST",
    "CHOICE_IDEM", "CHOICE_COMM", "CHOICE_ASSOC", "CHOICE_DIST",
    "COIN_LOCALIZE", "PROB_IMPL",
)


@dataclass
class LawInstance:
    law_id: str
    lhs: Program
    rhs: Program
    relation: str  # "EQUIV" or "EQUIV_CF"
    registry: Registry
    description: str = ""
    alpha: Optional[AlphaFamily] = None


@dataclass
class LawResult:
    law_id: str
    description: str
    relation: str
    residual: float
    passed: bool


def check_law(instance: LawInstance, tol: float = TAU_EQ) -> LawResult:
    """Evaluate both sides and compare under the instance's relation."""
    for side, name in ((instance.lhs, "lhs"), (instance.rhs, "rhs")):
        diags = check(side, instance.registry)
        if diags:
            raise QgclError(
                f"{instance.law_id} {name} fails the static checks: {diags[0]}")
    if instance.relation == "EQUIV":
        residual = equivalence_residual(instance.lhs, instance.rhs, instance.registry)
    elif instance.relation == "EQUIV_CF":
        residual = coin_free_residual(instance.lhs, instance.rhs, instance.registry)
    else:
        raise QgclError(f"unknown relation {instance.relation!r}")
    return LawResult(instance.law_id, instance.description, instance.relation,
                     residual, residual <= tol)


# ---------------------------------------------------------------------------
# Coefficient synthesis
# ---------------------------------------------------------------------------

def synth_alpha_assoc(inner_branch_fns: Sequence[Sequence[OpValuedFn]],
                      composed_inner: Sequence[OpValuedFn]) -> AlphaFamily:
    """Coefficients flattening a two-level alternation nest.

    ``inner_branch_fns[i][l]`` is the table of branch ``l`` of inner
    alternation ``i``; ``composed_inner[i]`` is the table of the composed
    inner alternation itself.  The coefficient of flattened branch ``(i,l)``
    is the product of inner alternation ``i``'s other branch weights times
    the other groups' composed-state weights; zero-trace branches fall back
    to the singleton/uniform weight rules.  Valid whenever any coin programs
    in front of the inner alternations are measurement-free.
    """
    inner_w = [[branch_weights(f) for f in group] for group in inner_branch_fns]
    outer_w = [branch_weights(f) for f in composed_inner]
    group_sizes = [len(group) for group in inner_branch_fns]
    flat = [(i, l) for i, sz in enumerate(group_sizes) for l in range(sz)]
    domains = [inner_branch_fns[i][l].states for (i, l) in flat]

    def coeff(b: int, others: tuple) -> complex:
        i, l = flat[b]
        # reassemble the full flat assignment
        states: dict = {}
        pos = 0
        for bb, key in enumerate(flat):
            if bb == b:
                continue
            states[key] = others[pos]
            pos += 1
        lam = math.prod(inner_w[i][ll][states[(i, ll)]]
                        for ll in range(group_sizes[i]) if ll != l)
        gam = 1.0
        for h in range(len(group_sizes)):
            if h == i:
                continue
            bar = cstate.superpose([states[(h, ll)] for ll in range(group_sizes[h])])
            gam *= outer_w[h][bar]
        return lam * gam

    return AlphaFamily(domains, coeff)


def synth_alpha_dist(branch_fns: Sequence[OpValuedFn], trailer_fn: OpValuedFn) -> AlphaFamily:
    """Coefficients for distributing a trailing program into the branches.

    Branch ``k`` of the rewritten alternation runs ``P_k`` then the trailing
    program ``Q``; its states are the pairwise concatenations.  The
    coefficient of branch ``i`` is the product of the other branches'
    ``P_k``-state weights divided by ``sqrt(|states(Q)|^(n-1))`` (the printed
    two-branch rule, generalized so the per-branch normalization holds for
    any branch count).
    """
    n = len(branch_fns)
    weights = [branch_weights(f) for f in branch_fns]
    q_states = list(trailer_fn.states)
    domains = []
    part = []  # per branch: map concatenated state -> P_k state
    for f in branch_fns:
        dom, back = [], {}
        for s in f.states:
            for d in q_states:
                sd = cstate.concat(s, d)
                dom.append(sd)
                back[sd] = s
        domains.append(tuple(dom))
        part.append(back)
    scale = 1.0 / math.sqrt(len(q_states) ** (n - 1))

    def coeff(i: int, others: tuple) -> complex:
        ks = [k for k in range(n) if k != i]
        return scale * math.prod(weights[k][part[k][sd]] for k, sd in zip(ks, others))

    return AlphaFamily(domains, coeff)


# ---------------------------------------------------------------------------
# Instance generation
# ---------------------------------------------------------------------------

_MZ = MeasLib().resolve("MZ", 2)
_MX = MeasLib().resolve("MX", 2)


class _Gen:
    """Per-instance bookkeeping: registry plus fresh-name counters."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.registry = Registry()
        self.counter = 0

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    def unitary(self, qvars: tuple, dim: int) -> Unitary:
        return Unitary(self.fresh("G"), qvars, random_unitary(self.rng, dim))

    def branch_program(self, qv: str, measured: Optional[bool] = None) -> Program:
        """Random program on one qubit with at most one measurement."""
        if measured is None:
            measured = bool(self.rng.integers(2))
        u = self.unitary((qv,), 2)
        if not measured:
            return u if self.rng.integers(2) else Seq(u, self.unitary((qv,), 2))
        meas = _MX if self.rng.integers(2) else _MZ
        x = self.fresh("x")
        self.registry.ensure_c(x, meas.outcomes)
        branches = tuple((m, self.unitary((qv,), 2)) for m in meas.outcomes)
        return Seq(u, Measure(meas, (qv,), x, branches))

    def trace_preserving_coin_program(self, cv: str, dim: int) -> Program:
        """Unitary, or a measurement with skip branches (both preserve trace)."""
        if self.rng.integers(2):
            return self.unitary((cv,), dim)
        meas = MeasLib().resolve("MZ", dim)
        x = self.fresh("x")
        self.registry.ensure_c(x, meas.outcomes)
        return Measure(meas, (cv,), x, tuple((m, Skip()) for m in meas.outcomes))


def _basis_guards(n: int) -> tuple:
    return tuple(Guard.basis(k) for k in range(n))


def _make_alt_idem(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    p = gen.branch_program("q", measured=False)
    lhs = QIf(("c",), _basis_guards(n), (p,) * n, None)
    return LawInstance("ALT_IDEM", lhs, p, "EQUIV", gen.registry,
                       f"measurement-free branch, {n}-dim coin")


def _make_alt_comm(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    branches = tuple(gen.branch_program("q") for _ in range(n))
    tau = [int(t) for t in gen.rng.permutation(n)]
    inv = [tau.index(k) for k in range(n)]
    lhs = QIf(("c",), _basis_guards(n), tuple(branches[tau[i]] for i in range(n)), None)
    # coin rotated forward first, back afterwards (the proof's direction; the
    # other order only agrees for involutions)
    rhs = seq(Unitary("Utau", ("c",), permutation_gate(tau)),
              QIf(("c",), _basis_guards(n), branches, None),
              Unitary("Uinv", ("c",), permutation_gate(inv)))
    return LawInstance("ALT_COMM", lhs, rhs, "EQUIV", gen.registry,
                       f"permutation {tau} on {n} branches")


def _nest_parts(gen: _Gen, n_outer: int):
    gen.registry.declare_q("c", n_outer)
    gen.registry.declare_q("r", 2)
    gen.registry.declare_q("q", 2)
    inner = [tuple(gen.branch_program("q") for _ in range(2)) for _ in range(n_outer)]
    inner_qifs = tuple(QIf(("r",), _basis_guards(2), group, None) for group in inner)
    inner_fns = [[semi_classical(b, gen.registry).semi for b in group] for group in inner]
    composed = [semi_classical(x, gen.registry).semi for x in inner_qifs]
    alpha = synth_alpha_assoc(inner_fns, composed)
    flat_guards = _basis_guards(2 * n_outer)  # |i,l> over (c, r), row-major
    flat_branches = tuple(b for group in inner for b in group)
    return inner_qifs, alpha, flat_guards, flat_branches


def _make_alt_assoc(gen: _Gen) -> LawInstance:
    n_outer = int(gen.rng.integers(2, 4))
    inner_qifs, alpha, flat_guards, flat_branches = _nest_parts(gen, n_outer)
    lhs = QIf(("c",), _basis_guards(n_outer), inner_qifs, None)
    rhs = QIf(("c", "r"), flat_guards, flat_branches, alpha)
    return LawInstance("ALT_ASSOC", lhs, rhs, "EQUIV", gen.registry,
                       f"{n_outer}x2 nest flattened", alpha=alpha)


def _make_choice_assoc(gen: _Gen) -> LawInstance:
    n_outer = int(gen.rng.integers(2, 4))
    inner_qifs, alpha, flat_guards, flat_branches = _nest_parts(gen, n_outer)
    coin_progs = tuple(gen.unitary(("r",), 2) for _ in range(n_outer))
    outer_coin_prog = gen.unitary(("c",), n_outer)
    choices = tuple(QChoice(cp, _basis_guards(2), q.branches, None)
                    for cp, q in zip(coin_progs, inner_qifs))
    lhs = QChoice(outer_coin_prog, _basis_guards(n_outer), choices, None)
    t = QIf(("c",), _basis_guards(n_outer), coin_progs, None)
    rhs = QChoice(Seq(outer_coin_prog, t), flat_guards, flat_branches, alpha)
    return LawInstance("CHOICE_ASSOC", lhs, rhs, "EQUIV", gen.registry,
                       f"{n_outer}x2 choice nest flattened", alpha=alpha)


def _dist_parts(gen: _Gen, n: int, q_measured: bool):
    branches = tuple(gen.branch_program("q") for _ in range(n))
    if q_measured:
        y = gen.fresh("y")
        gen.registry.ensure_c(y, _MZ.outcomes)
        trailer = Measure(_MZ, ("q",), y,
                          tuple((m, gen.unitary(("q",), 2)) for m in _MZ.outcomes))
    else:
        trailer = gen.unitary(("q",), 2)
    branch_fns = [semi_classical(b, gen.registry).semi for b in branches]
    trailer_fn = semi_classical(trailer, gen.registry).semi
    alpha = synth_alpha_dist(branch_fns, trailer_fn) if q_measured else None
    seq_branches = tuple(Seq(b, trailer) for b in branches)
    return branches, trailer, seq_branches, alpha


def _make_alt_dist(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    q_measured = bool(gen.rng.integers(2))
    branches, trailer, seq_branches, alpha = _dist_parts(gen, n, q_measured)
    lhs = Seq(QIf(("c",), _basis_guards(n), branches, None), trailer)
    rhs = QIf(("c",), _basis_guards(n), seq_branches, alpha)
    relation = "EQUIV_CF" if q_measured else "EQUIV"
    return LawInstance("ALT_DIST", lhs, rhs, relation, gen.registry,
                       f"{n} branches, trailer {'measures' if q_measured else 'unitary'}",
                       alpha=alpha)


def _make_choice_dist(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    q_measured = bool(gen.rng.integers(2))
    branches, trailer, seq_branches, alpha = _dist_parts(gen, n, q_measured)
    coin_prog = gen.trace_preserving_coin_program("c", n)
    lhs = Seq(QChoice(coin_prog, _basis_guards(n), branches, None), trailer)
    rhs = QChoice(coin_prog, _basis_guards(n), seq_branches, alpha)
    relation = "EQUIV_CF" if q_measured else "EQUIV"
    return LawInstance("CHOICE_DIST", lhs, rhs, relation, gen.registry,
                       f"{n} branches, trailer {'measures' if q_measured else 'unitary'}",
                       alpha=alpha)


def _make_choice_idem(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    p = gen.branch_program("q")
    coin_prog = gen.trace_preserving_coin_program("c", n)
    rho = random_density(gen.rng, n)
    chan = channel_of(coin_prog, gen.registry)
    if abs(np.trace(chan(rho)).real - 1.0) > TAU_EQ:
        raise QgclError("idempotence instance violates the trace-one hypothesis")
    body = QChoice(coin_prog, _basis_guards(n), (p,) * n, None)
    lhs = Block(("c",), rho, body)
    return LawInstance("CHOICE_IDEM", lhs, p, "EQUIV", gen.registry,
                       f"{n}-dim coin, trace-preserving coin program")


def _make_choice_comm(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    branches = tuple(gen.branch_program("q") for _ in range(n))
    coin_prog = gen.unitary(("c",), n)
    tau = [int(t) for t in gen.rng.permutation(n)]
    inv = [tau.index(k) for k in range(n)]
    lhs = QChoice(coin_prog, _basis_guards(n),
                  tuple(branches[tau[i]] for i in range(n)), None)
    rhs = Seq(QChoice(Seq(coin_prog, Unitary("Utau", ("c",), permutation_gate(tau))),
                      _basis_guards(n), branches, None),
              Unitary("Uinv", ("c",), permutation_gate(inv)))
    return LawInstance("CHOICE_COMM", lhs, rhs, "EQUIV", gen.registry,
                       f"permutation {tau} on {n} branches")


def _make_coin_localize(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    u = random_unitary(gen.rng, n)
    branches = tuple(gen.branch_program("q") for _ in range(n))
    lhs = QChoice(Unitary("Uc", ("c",), u), _basis_guards(n), branches, None)
    vec_guards = tuple(Guard.vec(dagger(u)[:, i]) for i in range(n))
    rhs = Seq(QIf(("c",), vec_guards, branches, None), Unitary("Uc", ("c",), u))
    return LawInstance("COIN_LOCALIZE", lhs, rhs, "EQUIV", gen.registry,
                       f"{n}-dim coin rotated guards")


def _make_prob_impl(gen: _Gen) -> LawInstance:
    n = int(gen.rng.integers(2, 4))
    gen.registry.declare_q("c", n)
    gen.registry.declare_q("q", 2)
    coin_prog = gen.trace_preserving_coin_program("c", n)
    branches = tuple(gen.branch_program("q") for _ in range(n))
    rho = random_density(gen.rng, n)
    out = channel_of(coin_prog, gen.registry)(rho)
    weights = [float(out[i, i].real) for i in range(n)]
    lhs = Block(("c",), rho, QChoice(coin_prog, _basis_guards(n), branches, None))
    kept = tuple((b, w) for b, w in zip(branches, weights) if w > 1e-12)
    rhs = ProbChoice(kept)
    return LawInstance("PROB_IMPL", lhs, rhs, "EQUIV", gen.registry,
                       f"weights {[round(w, 4) for w in weights]}")


_MAKERS: dict = {
    "ALT_IDEM": _make_alt_idem,
    "ALT_COMM": _make_alt_comm,
    "ALT_ASSOC": _make_alt_assoc,
    "ALT_DIST": _make_alt_dist,
    "CHOICE_IDEM": _make_choice_idem,
    "CHOICE_COMM": _make_choice_comm,
    "CHOICE_ASSOC": _make_choice_assoc,
    "CHOICE_DIST": _make_choice_dist,
    "COIN_LOCALIZE": _make_coin_localize,
    "PROB_IMPL": _make_prob_impl,
}


def make_instances(law_id: str, count: int, seed: int = 0) -> list:
    """Deterministically generate ``count`` instances of one law."""
    rng = np.random.default_rng([seed, LAW_IDS.index(law_id)])
    out = []
    for k in range(count):
        gen = _Gen(rng)
        inst = _MAKERS[law_id](gen)
        inst.description = f"#{k}: {inst.description}"
        out.append(inst)
    return out


def run_law_suite(seed: int = 0, instances: int = 10, law_ids: Sequence[str] = LAW_IDS,
                  tol: float = TAU_EQ) -> list:
    """Check every law on a generated corpus; returns one result per instance."""
    results = []
    for law_id in law_ids:
        for inst in make_instances(law_id, instances, seed):
            results.append(check_law(inst, tol))
    return results
