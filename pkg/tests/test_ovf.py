import math

import numpy as np
import pytest

from qgcl.cstate import EPS, assign
from qgcl.errors import (
    AlphaNormalizationError, DimensionError, GuardBasisError, VariableScopeError,
)
from qgcl.linalg import dagger, tensor
from qgcl.ovf import (
    AlphaFamily, OpValuedFn, SuperOp, alpha_guarded_compose, apply,
    branch_weights, guarded_compose, lambda_coeff, to_super_op,
)
from qgcl.registry import Registry
from qgcl.sampling import random_full_ovf_ops, random_state, random_unitary

SQ2 = math.sqrt(2)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / SQ2
S = np.array([[1, 0], [0, 1j]], dtype=complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
PLUS = np.array([[1, 1], [1, 1]], dtype=complex) / 2
MINUS = np.array([[1, -1], [-1, 1]], dtype=complex) / 2

rng = np.random.default_rng(11)


def regs(*dims):
    r = Registry()
    for k, d in enumerate(dims):
        r.declare_q(f"v{k}", d)
    return r


def single_var_ovf(registry, var, ops_by_state):
    return OpValuedFn.build(registry, (var,), list(ops_by_state))


def branch_p0(registry, var="v1"):
    # gate, then a computational measurement selecting X or Y
    return single_var_ovf(registry, var, [
        (assign("x", 0), X @ P0 @ H),
        (assign("x", 1), Y @ P1 @ H),
    ])


def branch_p1(registry, var="v1"):
    # phase gate, Hadamard-basis measurement, X, computational measurement
    table = {
        ("+", 0): Z @ P0 @ X @ Y @ PLUS @ S,
        ("+", 1): X @ P1 @ X @ Y @ PLUS @ S,
        ("-", 0): Z @ P0 @ X @ Z @ MINUS @ S,
        ("-", 1): X @ P1 @ X @ Z @ MINUS @ S,
    }
    entries = [(_pair(b, c), m) for (b, c), m in table.items()]
    return single_var_ovf(registry, var, entries)


def _pair(b, c):
    from qgcl.cstate import concat

    return concat(assign("x", b), assign("y", c))


class TestWeights:
    def test_singleton_domain_weight_one(self):
        r = regs(2)
        f = single_var_ovf(r, "v0", [(EPS, H)])
        assert lambda_coeff(f, EPS) == 1.0
        zero = OpValuedFn.build(Registry(), (), [(EPS, np.zeros((1, 1), complex))])
        assert lambda_coeff(zero, EPS) == 1.0  # abort: the 0/0 case

    def test_worked_example_weights(self):
        r = regs(2, 2)
        f0 = branch_p0(r)
        w = branch_weights(f0)
        for s in f0.states:
            assert abs(w[s] - 1 / SQ2) < 1e-12
        f1 = branch_p1(r)
        w1 = branch_weights(f1)
        for s in f1.states:
            assert abs(w1[s] - 0.5) < 1e-12

    def test_weights_square_to_one(self):
        r = regs(3)
        ops = random_full_ovf_ops(rng, 3, 3)
        f = single_var_ovf(r, "v0", [(assign("x", k), 0.7 * m) for k, m in enumerate(ops)])
        w = branch_weights(f)
        assert abs(sum(v * v for v in w.values()) - 1.0) < 1e-12

    def test_all_zero_multistate_uniform_rule(self):
        r = regs(2)
        z = np.zeros((2, 2), dtype=complex)
        f = single_var_ovf(r, "v0", [(assign("x", 0), z), (assign("x", 1), z)])
        w = branch_weights(f)
        assert all(abs(v - 1 / SQ2) < 1e-15 for v in w.values())


class TestGuardedCompose:
    def test_unitary_branches_give_multiplexor(self):
        r = regs(2, 2)
        u0, u1 = random_unitary(rng, 2), random_unitary(rng, 2)
        f0 = single_var_ovf(r, "v1", [(EPS, u0)])
        f1 = single_var_ovf(r, "v1", [(EPS, u1)])
        e0, e1 = np.array([1, 0], complex), np.array([0, 1], complex)
        out = guarded_compose(r, [(e0, f0), (e1, f1)], ("v0",))
        assert len(out.states) == 1
        got = out.op(out.states[0])
        want = np.block([[u0, np.zeros((2, 2))], [np.zeros((2, 2)), u1]])
        assert np.abs(got - want).max() < 1e-12
        assert np.abs(dagger(got) @ got - np.eye(4)).max() < 1e-12  # stays unitary

    def test_two_measurement_composition(self):
        # composing the computational and Hadamard-basis measurements
        r = regs(2, 2)
        m0 = single_var_ovf(r, "v1", [(assign("x", 0), P0), (assign("x", 1), P1)])
        m1 = single_var_ovf(r, "v1", [(assign("y", "+"), PLUS), (assign("y", "-"), MINUS)])
        e0, e1 = np.array([1, 0], complex), np.array([0, 1], complex)
        out = guarded_compose(r, [(e0, m0), (e1, m1)], ("v0",))
        psi0, psi1 = random_state(rng, 2), random_state(rng, 2)
        big = np.kron(e0, psi0) + np.kron(e1, psi1)
        ops = {(0, "+"): (P0, PLUS), (0, "-"): (P0, MINUS),
               (1, "+"): (P1, PLUS), (1, "-"): (P1, MINUS)}
        for s in out.states:
            i = s.children[0].value
            j = s.children[1].value
            got = out.op(s) @ big
            mi, mj = ops[(i, j)]
            want = (np.kron(e0, mi @ psi0) + np.kron(e1, mj @ psi1)) / SQ2
            assert np.abs(got - want).max() < 1e-12

    def test_worked_example_operators(self):
        r = regs(2, 2)
        f0, f1 = branch_p0(r), branch_p1(r)
        e0, e1 = np.array([1, 0], complex), np.array([0, 1], complex)
        out = guarded_compose(r, [(e0, f0), (e1, f1)], ("v0",))
        assert len(out.states) == 8
        got = out.op(out.states[0])  # x<-0 (+) (x<-+, y<-0)
        want = np.zeros((4, 4), dtype=complex)
        want[1, 0] = want[1, 1] = 1 / (2 * SQ2)
        want[2, 2] = 1j / (2 * SQ2)
        want[2, 3] = -1 / (2 * SQ2)
        assert np.abs(got - want).max() < 1e-12
        assert out.is_full(1e-12)

    def test_guard_errors(self):
        r = regs(2, 2)
        f = single_var_ovf(r, "v1", [(EPS, H)])
        e0 = np.array([1, 0], complex)
        with pytest.raises(GuardBasisError):
            guarded_compose(r, [(e0, f), (e0, f)], ("v0",))
        with pytest.raises(GuardBasisError):
            guarded_compose(r, [(e0, f)], ("v0",))

    def test_coin_overlap_rejected(self):
        r = regs(2, 2)
        f = single_var_ovf(r, "v0", [(EPS, H)])
        e0, e1 = np.array([1, 0], complex), np.array([0, 1], complex)
        with pytest.raises(VariableScopeError):
            guarded_compose(r, [(e0, f), (e1, f)], ("v0",))


def random_branches(registry, var, n, dim, rng, full=True, scale=1.0):
    out = []
    for _ in range(n):
        k = int(rng.integers(1, 4))
        ops = random_full_ovf_ops(rng, dim, k)
        entries = [(assign(f"x{rng.integers(1e9)}", j), scale * m)
                   for j, m in enumerate(ops)]
        out.append(OpValuedFn.build(registry, (var,), entries))
    return out


class TestCompositionProperties:
    def test_fullness_preserved(self):
        for trial in range(60):
            n = int(rng.integers(2, 4))
            dim = int(rng.integers(2, 4))
            r = regs(n, dim)
            fns = random_branches(r, "v1", n, dim, rng, full=True)
            guards = [np.eye(n, dtype=complex)[:, k] for k in range(n)]
            out = guarded_compose(r, list(zip(guards, fns)), ("v0",))
            assert out.is_full(1e-10)

    def test_subnormalized_stays_below_identity(self):
        for trial in range(20):
            n = 2
            dim = int(rng.integers(2, 4))
            r = regs(n, dim)
            fns = random_branches(r, "v1", n, dim, rng, scale=0.8)
            guards = [np.eye(n, dtype=complex)[:, k] for k in range(n)]
            out = guarded_compose(r, list(zip(guards, fns)), ("v0",))
            assert out.is_subnormalized(1e-10)
            assert not out.is_full(1e-6)

    def test_basis_change_covariance(self):
        for trial in range(25):
            n = int(rng.integers(2, 4))
            dim = 2
            r = regs(n, dim)
            fns = random_branches(r, "v1", n, dim, rng)
            uc = random_unitary(rng, n)
            std = [np.eye(n, dtype=complex)[:, k] for k in range(n)]
            rot = [uc @ g for g in std]
            f_std = guarded_compose(r, list(zip(std, fns)), ("v0",))
            f_rot = guarded_compose(r, list(zip(rot, fns)), ("v0",))
            conj = tensor(uc, np.eye(dim))
            for s in f_std.states:
                want = conj @ f_std.op(s) @ dagger(conj)
                assert np.abs(f_rot.op(s) - want).max() < 1e-10

    def test_degeneration_to_unitary(self):
        # singleton domains on unitary branches compose to a unitary
        n = 3
        r = regs(n, 2)
        fns = [OpValuedFn.build(r, ("v1",), [(EPS, random_unitary(rng, 2))])
               for _ in range(n)]
        guards = [np.eye(n, dtype=complex)[:, k] for k in range(n)]
        out = guarded_compose(r, list(zip(guards, fns)), ("v0",))
        u = out.op(out.states[0])
        assert np.abs(dagger(u) @ u - np.eye(2 * n)).max() < 1e-12


class TestAlphaFamilies:
    def setup_method(self):
        self.r = regs(2, 2)
        self.fns = random_branches(self.r, "v1", 2, 2, rng)
        self.guards = [np.array([1, 0], complex), np.array([0, 1], complex)]
        self.pairs = list(zip(self.guards, self.fns))

    def test_lambda_products_recover_default(self):
        default = guarded_compose(self.r, self.pairs, ("v0",))
        fam = AlphaFamily.lambda_products(self.fns)
        again = alpha_guarded_compose(self.r, self.pairs, ("v0",), fam)
        for s in default.states:
            assert np.abs(default.op(s) - again.op(s)).max() < 1e-12

    def test_uniform_family(self):
        r = regs(2, 2)
        fns = random_branches(r, "v1", 2, 2, rng)
        fam = AlphaFamily.uniform(fns)
        sizes = [len(f.states) for f in fns]
        out = alpha_guarded_compose(r, list(zip(self.guards, fns)), ("v0",), fam)
        # every branch-0 term carries 1/sqrt(|domain of branch 1|), and so on
        c0 = 1 / math.sqrt(sizes[1])
        s = out.states[0]
        proj0 = tensor(np.diag([1, 0]).astype(complex), np.eye(2))
        lifted = tensor(np.eye(2, dtype=complex), fns[0].op(s.children[0]))
        block0 = proj0 @ out.op(s)
        assert np.abs(block0 - c0 * proj0 @ lifted).max() < 1e-10

    def test_relative_phase_channel(self):
        # phases on unitary branches give the expected rotated multiplexor
        r = regs(2, 2)
        u0, u1 = random_unitary(rng, 2), random_unitary(rng, 2)
        f0 = OpValuedFn.build(r, ("v1",), [(EPS, u0)])
        f1 = OpValuedFn.build(r, ("v1",), [(EPS, u1)])
        theta = 1.234
        fam = AlphaFamily.phases([f0, f1], [1.0, np.exp(1j * theta)])
        out = alpha_guarded_compose(r, list(zip(self.guards, [f0, f1])), ("v0",), fam)
        u_theta = np.block([[u0, np.zeros((2, 2))],
                            [np.zeros((2, 2)), np.exp(1j * theta) * u1]])
        got = to_super_op(out)
        want = SuperOp([u_theta], check=False)
        assert got.distance(want) < 1e-12
        # and it differs from the unphased composition as an operator
        plain = guarded_compose(r, list(zip(self.guards, [f0, f1])), ("v0",))
        assert np.abs(out.op(out.states[0]) - plain.op(plain.states[0])).max() > 0.1

    def test_normalization_validated(self):
        fam = AlphaFamily([f.states for f in self.fns], lambda i, t: 0.5)
        with pytest.raises(AlphaNormalizationError):
            alpha_guarded_compose(self.r, self.pairs, ("v0",), fam)

    def test_domain_mismatch_rejected(self):
        fam = AlphaFamily([self.fns[0].states], lambda i, t: 1.0)
        with pytest.raises(AlphaNormalizationError):
            alpha_guarded_compose(self.r, self.pairs, ("v0",), fam)


class TestSuperOp:
    def test_skip_channel_is_scalar_identity(self):
        f = OpValuedFn.build(Registry(), (), [(EPS, np.ones((1, 1), complex))])
        e = to_super_op(f)
        rho = np.ones((1, 1), dtype=complex)
        assert np.abs(apply(e, rho) - rho).max() == 0

    @pytest.mark.filterwarnings("ignore:channel applied to a non-PSD input")
    def test_projective_measurement_channel(self):
        r = regs(2)
        f = single_var_ovf(r, "v0", [(assign("x", 0), P0), (assign("x", 1), P1)])
        e = to_super_op(f)
        basis = [P0, P1, X, Y]
        for b in basis:
            want = P0 @ b @ P0 + P1 @ b @ P1
            assert np.abs(apply(e, b) - want).max() < 1e-12

    def test_worked_example_channel_trace_preserving(self):
        r = regs(2, 2)
        out = guarded_compose(
            r, [(np.array([1, 0], complex), branch_p0(r)),
                (np.array([0, 1], complex), branch_p1(r))], ("v0",))
        e = to_super_op(out)
        assert len(e.kraus) == 8
        rho = np.eye(4, dtype=complex) / 4
        assert abs(np.trace(apply(e, rho)) - 1) < 1e-12

    def test_abort_channel(self):
        e = SuperOp([np.zeros((2, 2), dtype=complex)])
        rho = np.eye(2, dtype=complex) / 2
        assert np.abs(apply(e, rho)).max() == 0

    def test_measure_discard_on_plus(self):
        e = SuperOp([P0, P1])
        plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        assert np.abs(apply(e, plus) - I2 / 2).max() < 1e-12

    def test_dimension_mismatch(self):
        e = SuperOp([I2])
        with pytest.raises(DimensionError):
            apply(e, np.eye(3, dtype=complex))

    def test_choi_caching_and_equality(self):
        u = random_unitary(rng, 2)
        a = SuperOp([u], check=False)
        b = SuperOp([np.exp(0.4j) * u], check=False)
        assert a.equals(b)

    def test_non_state_input_warns(self):
        e = SuperOp([I2])
        with pytest.warns(UserWarning, match="non-PSD"):
            apply(e, np.array([[0, 1], [1j, 0]], dtype=complex))


class TestValidation:
    def test_overnormalized_table_rejected(self):
        r = regs(2)
        from qgcl.errors import ShapeError

        with pytest.raises(ShapeError, match="exceeds the identity"):
            OpValuedFn.build(r, ("v0",), [(assign("x", 0), I2),
                                          (assign("x", 1), I2)])

    def test_channel_trace_increase_rejected(self):
        from qgcl.errors import ShapeError

        with pytest.raises(ShapeError, match="trace-nonincreasing"):
            SuperOp([I2, I2])

    def test_choi_matrix_hermitian_psd(self):
        from qgcl.linalg import choi_of, is_hermitian, is_psd
        from qgcl.sampling import random_full_ovf_ops

        ops = random_full_ovf_ops(rng, 3, 2)
        j = choi_of(ops)
        assert is_hermitian(j, 1e-12)
        assert is_psd(j, 1e-12)
