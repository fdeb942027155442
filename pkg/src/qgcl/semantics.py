"""Program semantics: semi-classical tables and quantum channels.

The semi-classical table of a program maps each classical state (one per
possible pattern of measurement outcomes, with alternation branches combined
into formal superpositions) to the operator composed along that execution
path.  The channel of a program is the operation summing ``K rho K^dag``
over the table; blocks and probabilistic choices, which have no table of
their own, are handled directly at the channel level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import cstate
from .ast import (
    Abort, Block, Measure, ProbChoice, Program, QChoice, QIf, Seq, Skip,
    SubQIf, Unitary, desugar_qchoice, qvar_of,
)
from .cstate import EPS, ClassicalState
from .errors import ProbabilityError, SemanticsError, StateError
from .linalg import TAU_EQ, factor_bra, is_density, partial_trace
from .ovf import AlphaFamily, OpValuedFn, SuperOp, alpha_guarded_compose, apply, guarded_compose, to_super_op
from .registry import Registry

__all__ = ["SemResult", "semi_classical", "channel_of", "eval_block",
           "eval_prob_choice", "subspace_qif"]


@dataclass
class SemResult:
    """Classical states, semi-classical table, and the derived channel."""

    program: Program
    deltas: tuple
    semi: OpValuedFn

    @cached_property
    def channel(self) -> SuperOp:
        return to_super_op(self.semi)


def semi_classical(p: Program, registry: Registry) -> SemResult:
    """Structural-induction evaluation of the semi-classical table.

    Defined for the core language (plus quantum choice, which desugars, and
    subspace alternation, which expands); blocks and probabilistic choice
    have channel-level semantics only, see :func:`channel_of`.
    """
    core = desugar_qchoice(p, registry)
    semi = _semi(core, registry)
    return SemResult(p, semi.states, semi)


def _semi(p: Program, registry: Registry) -> OpValuedFn:
    if isinstance(p, Abort):
        return OpValuedFn.build(registry, (), [(EPS, np.zeros((1, 1), dtype=complex))])
    if isinstance(p, Skip):
        return OpValuedFn.build(registry, (), [(EPS, np.ones((1, 1), dtype=complex))])
    if isinstance(p, Unitary):
        u, vs = registry.to_canonical(p.matrix, p.qvars)
        return OpValuedFn.build(registry, vs, [(EPS, u)])
    if isinstance(p, Measure):
        return _semi_measure(p, registry)
    if isinstance(p, QIf):
        return _semi_qif(p, registry)
    if isinstance(p, SubQIf):
        return _semi_qif(_expand_subspaces(p), registry)
    if isinstance(p, Seq):
        return _semi_seq(p, registry)
    if isinstance(p, (Block, ProbChoice)):
        raise SemanticsError(
            f"{type(p).__name__} has no semi-classical table; use channel_of")
    raise TypeError(f"not a program: {p!r}")


def _semi_measure(p: Measure, registry: Registry) -> OpValuedFn:
    branch = dict(p.branches)
    sub = {m: _semi(branch[m], registry) for m in p.meas.outcomes}
    v = registry.varset(set(p.qvars) | set().union(*(set(f.vars) for f in sub.values())))
    entries = []
    for m in p.meas.outcomes:
        op_m, mvars = registry.to_canonical(p.meas.ops[m], p.qvars)
        lifted_m = registry.embed(op_m, mvars, v)
        f = sub[m]
        for s in f.states:
            lifted_b = registry.embed(f.op(s), f.vars, v)
            entries.append((cstate.concat(s, cstate.assign(p.x, m)), lifted_b @ lifted_m))
    return OpValuedFn.build(registry, v, entries)


def _semi_qif(p: QIf, registry: Registry) -> OpValuedFn:
    fns = [_semi(b, registry) for b in p.branches]
    coin = registry.varset(p.coin_vars)
    guards = [g.resolve(registry, p.coin_vars) for g in p.guards]
    pairs = list(zip(guards, fns))
    if p.alpha is None:
        return guarded_compose(registry, pairs, coin)
    if isinstance(p.alpha, AlphaFamily):
        return alpha_guarded_compose(registry, pairs, coin, p.alpha)
    return alpha_guarded_compose(registry, pairs, coin, AlphaFamily.phases(fns, p.alpha))


def _expand_subspaces(p: SubQIf) -> QIf:
    guards, branches = [], []
    for sub, b in zip(p.subspaces, p.branches):
        for g in sub:
            guards.append(g)
            branches.append(b)
    return QIf(p.coin_vars, tuple(guards), tuple(branches), None)


def _semi_seq(p: Seq, registry: Registry) -> OpValuedFn:
    f1 = _semi(p.first, registry)
    f2 = _semi(p.second, registry)
    v = registry.varset(set(f1.vars) | set(f2.vars))
    entries = []
    for s1 in f1.states:
        a = registry.embed(f1.op(s1), f1.vars, v)
        for s2 in f2.states:
            b = registry.embed(f2.op(s2), f2.vars, v)
            entries.append((cstate.concat(s1, s2), b @ a))
    return OpValuedFn.build(registry, v, entries)


# ---------------------------------------------------------------------------
# Channel-level semantics
# ---------------------------------------------------------------------------

def _is_core(p: Program) -> bool:
    if isinstance(p, (Block, ProbChoice)):
        return False
    if isinstance(p, Seq):
        return _is_core(p.first) and _is_core(p.second)
    if isinstance(p, Measure):
        return all(_is_core(b) for _, b in p.branches)
    if isinstance(p, (QIf, SubQIf)):
        return all(_is_core(b) for b in p.branches)
    if isinstance(p, QChoice):
        return _is_core(p.coin_prog) and all(_is_core(b) for b in p.branches)
    return True


def channel_of(p: Program, registry: Registry) -> SuperOp:
    """The quantum operation of a program, as a Kraus list on its variables."""
    p = desugar_qchoice(p, registry)
    if _is_core(p):
        return semi_classical(p, registry).channel
    if isinstance(p, Seq):
        a = channel_of(p.first, registry)
        b = channel_of(p.second, registry)
        v = registry.varset(set(a.vars) | set(b.vars))
        return a.extended(registry, v).then(b.extended(registry, v))
    if isinstance(p, Block):
        return _block_channel(p, registry)
    if isinstance(p, ProbChoice):
        return eval_prob_choice(p.branches, registry)
    raise SemanticsError(
        f"{type(p).__name__} containing blocks or probabilistic choice in a "
        "branch has no channel semantics")


def _block_channel(p: Block, registry: Registry) -> SuperOp:
    body = channel_of(p.body, registry)
    local = registry.varset(p.local_vars)
    rho, _ = registry.to_canonical(p.init, p.local_vars)
    if not is_density(rho, TAU_EQ):
        raise StateError("block initial state is not a density operator")
    if not set(local) <= set(body.vars):
        raise SemanticsError("block locals must occur in the block body")
    keep = tuple(n for n in body.vars if n not in local)
    dims = registry.dims(body.vars)
    loc_pos = [body.vars.index(n) for n in local]
    evals, evecs = np.linalg.eigh(rho)
    kraus = []
    for k in body.kraus:
        for j in itertools.product(*[range(dims[q]) for q in loc_pos]):
            basis = []
            for pos, idx in zip(loc_pos, j):
                e = np.zeros(dims[pos], dtype=complex)
                e[idx] = 1.0
                basis.append(e)
            bra = factor_bra(dims, loc_pos, basis)
            for l in range(evecs.shape[1]):
                if evals[l] <= TAU_EQ:
                    continue
                ket = _factor_ket(registry, body.vars, local, evecs[:, l])
                kraus.append(np.sqrt(evals[l]) * (bra @ k @ ket))
    d_keep = registry.dim_of(keep)
    return SuperOp(kraus, d_keep, d_keep, vars=keep, check=False)


def _factor_ket(registry: Registry, all_vars, local_vars, vec: np.ndarray) -> np.ndarray:
    """Matrix of ``|vec>_{local} ⊗ I_keep`` mapping the kept space into the full one.

    ``vec`` lives on the joint local space in canonical factor order.
    """
    dims = registry.dims(all_vars)
    loc_pos = [all_vars.index(n) for n in local_vars]
    keep_pos = [k for k in range(len(dims)) if k not in loc_pos]
    d_all = int(np.prod(dims)) if dims else 1
    d_keep = int(np.prod([dims[k] for k in keep_pos])) if keep_pos else 1
    m = np.kron(vec.reshape(-1, 1), np.eye(d_keep, dtype=complex))
    # rows are indexed by factors in order loc + keep; permute to canonical
    row_order = loc_pos + keep_pos
    inv = [row_order.index(k) for k in range(len(dims))]
    t = m.reshape([dims[k] for k in row_order] + [d_keep])
    t = t.transpose(inv + [len(dims)])
    return t.reshape(d_all, d_keep)


def eval_block(local_vars, rho: np.ndarray, body: Program, sigma: np.ndarray,
               registry: Registry) -> np.ndarray:
    """Run a block directly: extend the input with the initialized locals,
    apply the body's channel, and trace the locals back out."""
    local = registry.varset(local_vars)
    rho_c, _ = registry.to_canonical(np.asarray(rho, dtype=complex), local_vars)
    if not is_density(rho_c, TAU_EQ):
        raise StateError("block initial state is not a density operator")
    body_chan = channel_of(body, registry)
    if not set(local) <= set(body_chan.vars):
        raise StateError("local variables must occur in the block body")
    keep = tuple(n for n in body_chan.vars if n not in local)
    joint, union = registry.tensor_state([(keep, np.asarray(sigma, dtype=complex)),
                                          (local, rho_c)])
    out = apply(body_chan.extended(registry, union), joint)
    dims = registry.dims(union)
    return partial_trace(out, dims, [union.index(n) for n in local])


def eval_prob_choice(branches, registry: Registry) -> SuperOp:
    """Convex combination of branch channels on the union of their variables."""
    weights = [w for _, w in branches]
    if any(w <= 0 for w in weights):
        raise ProbabilityError(f"weights must be positive, got {weights!r}")
    if sum(weights) > 1 + TAU_EQ:
        raise ProbabilityError(f"weights sum to {sum(weights)!r} > 1")
    chans = [channel_of(b, registry) for b, _ in branches]
    union = registry.varset(set().union(*(set(c.vars) for c in chans)))
    kraus = []
    for c, w in zip(chans, weights):
        ext = c.extended(registry, union)
        kraus.extend(np.sqrt(w) * k for k in ext.kraus)
    d = registry.dim_of(union)
    return SuperOp(kraus, d, d, vars=union, check=False)


def subspace_qif(coin_vars, subspaces, branches, registry: Registry) -> SuperOp:
    """Channel of a subspace-guarded alternation for a chosen family of bases.

    ``subspaces`` is one basis (list of guards or vectors) per branch; the
    member of the semantics selected by those bases is the ordinary
    alternation over the union basis with each branch duplicated across its
    subspace's basis vectors.
    """
    from .ast import Guard

    subs = []
    for sub in subspaces:
        subs.append(tuple(g if isinstance(g, Guard) else Guard.vec(np.asarray(g).reshape(-1))
                          for g in sub))
    prog = SubQIf(tuple(coin_vars), tuple(subs), tuple(branches))
    return channel_of(prog, registry)
