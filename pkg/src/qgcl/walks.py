"""Coined-walk catalog on cyclic position spaces.

Each variant builds the walk step as a program (a quantum choice of
translations according to a coin-tossing program) and, independently, as a
directly-constructed step unitary used as an oracle.  Position spaces are
cycles Z_N with modular translations standing in for the infinite line; for
fewer than N/2 steps from the center the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .ast import Guard, Program, QChoice, QIf, Seq, Skip, Unitary, seq
from .errors import DimensionError, ShapeError
from .gates import translation
from .linalg import TAU_EQ, is_unitary, partial_trace, tensor
from .ovf import apply
from .registry import Registry
from .semantics import channel_of

__all__ = ["VARIANTS", "WalkSpec", "walk_registry", "step_program",
           "build_walk_program", "step_oracle", "full_step_oracle",
           "position_distribution", "oracle_function_program"]

VARIANTS = ("hadamard", "unidirectional", "position-time-coin", "three-state",
            "multi-coin", "two-walker")

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_THREE = np.array([[-1, 2, 2], [2, -1, 2], [2, 2, -1]], dtype=complex) / 3


def default_coin_fn(n: int, t: int):
    """Position/time coin hook: returns (c, s, theta); defaults to Hadamard."""
    return (1 / np.sqrt(2), 1 / np.sqrt(2), 0.0)


def _coin_matrix(fn: Callable, n: int, t: int) -> np.ndarray:
    c, s, theta = fn(n, t)
    m = np.array([[c, s], [np.conj(s), -np.exp(1j * theta) * c]], dtype=complex)
    if not is_unitary(m, TAU_EQ):
        raise ShapeError(f"coin hook returned a non-unitary matrix at (n={n}, t={t})")
    return m


@dataclass
class WalkSpec:
    """A walk instance: variant, cycle size, step count, initial state."""

    variant: str
    n: int
    steps: int = 0
    coins: int = 1  # multi-coin variant only
    shared_u: Optional[np.ndarray] = None  # two-walker coin-entangling unitary
    coin_fn: Callable = default_coin_fn  # position-time-coin hook
    initial_coin: tuple = ()  # per-coin basis indices, zeros if empty
    initial_pos: tuple = ()  # per-walker positions, zeros if empty

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ShapeError(f"unknown walk variant {self.variant!r}")
        if self.n < 2 or self.steps < 0:
            raise DimensionError("cycle size must be >= 2 and steps >= 0")
        if self.variant == "multi-coin" and self.coins < 1:
            raise DimensionError("multi-coin walk needs at least one coin")
        if self.variant == "two-walker" and self.shared_u is None:
            self.shared_u = tensor(np.eye(2, dtype=complex), np.eye(2, dtype=complex))

    @property
    def coin_names(self) -> tuple:
        if self.variant == "multi-coin":
            return tuple(f"c{m + 1}" for m in range(self.coins))
        if self.variant == "two-walker":
            return ("c1", "c2")
        return ("c",)

    @property
    def pos_names(self) -> tuple:
        return ("q1", "q2") if self.variant == "two-walker" else ("p",)


def walk_registry(spec: WalkSpec) -> Registry:
    """Coins are declared before positions; factor order is coin ⊗ position."""
    r = Registry()
    coin_dim = 3 if spec.variant == "three-state" else 2
    for c in spec.coin_names:
        r.declare_q(c, coin_dim)
    for p in spec.pos_names:
        r.declare_q(p, spec.n)
    return r


def _shift_choice(coin: str, pos: str, n: int, branches=None) -> QChoice:
    guards = (Guard.basis(0), Guard.basis(1))
    if branches is None:
        branches = (Unitary("TL", (pos,), translation(n, -1)),
                    Unitary("TR", (pos,), translation(n, +1)))
    return QChoice(Unitary("H", (coin,), _H), guards, branches, None)


def step_program(spec: WalkSpec, t: int = 1) -> Program:
    """The program for step ``t`` (1-based; only time-dependent variants care)."""
    n = spec.n
    if spec.variant == "hadamard":
        return _shift_choice("c", "p", n)
    if spec.variant == "unidirectional":
        return _shift_choice("c", "p", n,
                             (Skip(), Unitary("TR", ("p",), translation(n, +1))))
    if spec.variant == "three-state":
        guards = tuple(Guard.basis(k) for k in range(3))
        branches = (Unitary("TL", ("p",), translation(n, -1)), Skip(),
                    Unitary("TR", ("p",), translation(n, +1)))
        return QChoice(Unitary("U3", ("c",), _THREE), guards, branches, None)
    if spec.variant == "position-time-coin":
        toss = QIf(("p",), tuple(Guard.basis(k) for k in range(n)),
                   tuple(Unitary(f"C{k}_{t}", ("c",), _coin_matrix(spec.coin_fn, k, t))
                         for k in range(n)), None)
        shift = QIf(("c",), (Guard.basis(0), Guard.basis(1)),
                    (Unitary("TL", ("p",), translation(n, -1)),
                     Unitary("TR", ("p",), translation(n, +1))), None)
        return Seq(toss, shift)
    if spec.variant == "multi-coin":
        coin = spec.coin_names[(t - 1) % spec.coins]
        return _shift_choice(coin, "p", n)
    # two-walker
    u = np.asarray(spec.shared_u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u, TAU_EQ):
        raise ShapeError("two-walker coin unitary must be a 4x4 unitary")
    return seq(Unitary("Ucc", ("c1", "c2"), u),
               _shift_choice("c1", "q1", n),
               _shift_choice("c2", "q2", n))


def build_walk_program(spec: WalkSpec) -> tuple:
    """Registry plus the full walk program (steps composed in sequence)."""
    registry = walk_registry(spec)
    if spec.steps == 0:
        return registry, Skip()
    return registry, seq(*[step_program(spec, t) for t in range(1, spec.steps + 1)])


def step_oracle(spec: WalkSpec, t: int = 1) -> np.ndarray:
    """Direct construction of the step unitary, bypassing the evaluator.

    Acts on the step's own variables: coin ⊗ position (for multi-coin, the
    active coin only), or c1 ⊗ c2 ⊗ q1 ⊗ q2 for the two-walker variant.
    """
    n = spec.n
    tl, tr, i_n = translation(n, -1), translation(n, +1), np.eye(n, dtype=complex)
    e = [np.zeros((2, 2), dtype=complex) for _ in range(2)]
    e[0][0, 0] = 1.0
    e[1][1, 1] = 1.0
    if spec.variant in ("hadamard", "multi-coin"):
        return (tensor(e[0], tl) + tensor(e[1], tr)) @ tensor(_H, i_n)
    if spec.variant == "unidirectional":
        return (tensor(e[0], i_n) + tensor(e[1], tr)) @ tensor(_H, i_n)
    if spec.variant == "three-state":
        proj = [np.zeros((3, 3), dtype=complex) for _ in range(3)]
        for k in range(3):
            proj[k][k, k] = 1.0
        shift = tensor(proj[0], tl) + tensor(proj[1], i_n) + tensor(proj[2], tr)
        return shift @ tensor(_THREE, i_n)
    if spec.variant == "position-time-coin":
        toss = sum(tensor(_coin_matrix(spec.coin_fn, k, t), np.outer(i_n[k], i_n[k]))
                   for k in range(n))
        shift = tensor(e[0], tl) + tensor(e[1], tr)
        return shift @ toss
    # two-walker, factor order c1 c2 q1 q2
    i2 = np.eye(2, dtype=complex)
    u = tensor(tensor(np.asarray(spec.shared_u, dtype=complex), i_n), i_n)
    toss1 = tensor(tensor(tensor(_H, i2), i_n), i_n)
    shift1 = sum(tensor(tensor(tensor(e[s], i2), tt), i_n)
                 for s, tt in ((0, tl), (1, tr)))
    toss2 = tensor(tensor(tensor(i2, _H), i_n), i_n)
    shift2 = sum(tensor(tensor(tensor(i2, e[s]), i_n), tt)
                 for s, tt in ((0, tl), (1, tr)))
    return shift2 @ toss2 @ shift1 @ toss1 @ u


def full_step_oracle(spec: WalkSpec, t: int = 1) -> np.ndarray:
    """Step oracle on the walk's full space (identity on inactive coins)."""
    if spec.variant != "multi-coin":
        return step_oracle(spec, t)
    n, m_coins = spec.n, spec.coins
    active = (t - 1) % m_coins
    i_n = np.eye(n, dtype=complex)
    i2 = np.eye(2, dtype=complex)
    e = [np.zeros((2, 2), dtype=complex) for _ in range(2)]
    e[0][0, 0] = 1.0
    e[1][1, 1] = 1.0

    def on_active(op_c, op_p):
        out = np.eye(1, dtype=complex)
        for k in range(m_coins):
            out = tensor(out, op_c if k == active else i2)
        return tensor(out, op_p)

    shift = on_active(e[0], translation(n, -1)) + on_active(e[1], translation(n, +1))
    return shift @ on_active(_H, i_n)


def _initial_state(spec: WalkSpec, registry: Registry) -> np.ndarray:
    coin_dim = 3 if spec.variant == "three-state" else 2
    coins = spec.initial_coin or (0,) * len(spec.coin_names)
    poss = spec.initial_pos or (0,) * len(spec.pos_names)
    if len(coins) != len(spec.coin_names) or len(poss) != len(spec.pos_names):
        raise DimensionError("initial state has the wrong number of registers")
    idx = 0
    for c in coins:
        if not 0 <= c < coin_dim:
            raise DimensionError(f"coin index {c} out of range")
        idx = idx * coin_dim + c
    for p_ in poss:
        if not 0 <= p_ < spec.n:
            raise DimensionError(f"position {p_} out of range")
        idx = idx * spec.n + p_
    v = np.zeros(registry.dim_of(registry.qnames), dtype=complex)
    v[idx] = 1.0
    return v


def position_distribution(spec: WalkSpec) -> list:
    """Evolve the initial state for the requested steps, trace out the
    coins, and return the diagonal in the position basis.

    Labels are positions (ints) for single-walker variants and position
    pairs for the two-walker variant.  Probabilities sum to one within 1e-9.
    """
    registry = walk_registry(spec)
    all_vars = registry.varset(registry.qnames)
    v0 = _initial_state(spec, registry)
    rho = np.outer(v0, v0.conj())
    for t in range(1, spec.steps + 1):
        chan = channel_of(step_program(spec, t), registry).extended(registry, all_vars)
        rho = apply(chan, rho)
    dims = registry.dims(all_vars)
    coin_pos = [all_vars.index(c) for c in spec.coin_names]
    reduced = partial_trace(rho, dims, coin_pos)
    probs = np.real(np.diag(reduced))
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise ShapeError(f"walk distribution sums to {total!r}, not 1")
    if spec.variant == "two-walker":
        out = []
        for i in range(spec.n):
            for j in range(spec.n):
                out.append(((i, j), float(probs[i * spec.n + j])))
        return out
    return [(k, float(probs[k])) for k in range(spec.n)]


def oracle_function_program(f_table) -> tuple:
    """A boolean-function oracle as an alternation over the data register.

    ``f_table`` lists f(x) for x = 0..2^n-1; the program alternates over the
    data basis, applying X to the target exactly when f(x) = 1.  Returns
    (registry, program, oracle matrix |x, y> -> |x, y xor f(x)>).
    """
    size = len(f_table)
    n_bits = int(np.log2(size))
    if 2 ** n_bits != size:
        raise DimensionError("truth table length must be a power of two")
    registry = Registry()
    data = tuple(f"x{k + 1}" for k in range(n_bits))
    for d in data:
        registry.declare_q(d, 2)
    registry.declare_q("y", 2)
    x_gate = np.array([[0, 1], [1, 0]], dtype=complex)
    branches = tuple(
        Unitary("X", ("y",), x_gate) if f_table[x] else Skip()
        for x in range(size))
    prog = QIf(data, tuple(Guard.basis(x) for x in range(size)), branches, None)
    u = np.zeros((2 * size, 2 * size), dtype=complex)
    for x in range(size):
        for y in (0, 1):
            u[2 * x + (y ^ int(f_table[x])), 2 * x + y] = 1.0
    return registry, prog, u
