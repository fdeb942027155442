import math

import numpy as np
import pytest

from qgcl import cstate
from qgcl.ast import (
    Abort, Block, Guard, Measure, QChoice, QIf, Seq, Skip, Unitary, check,
)
from qgcl.errors import ProbabilityError, SemanticsError, StateError
from qgcl.gates import MeasLib
from qgcl.linalg import dagger, tensor
from qgcl.ovf import SuperOp, apply, guarded_compose, to_super_op
from qgcl.parser import parse
from qgcl.registry import Registry
from qgcl.sampling import random_density, random_program, random_unitary
from qgcl.semantics import (
    channel_of, eval_block, eval_prob_choice, semi_classical, subspace_qif,
)

SQ2 = math.sqrt(2)
I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / SQ2
CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
MZ = MeasLib().resolve("MZ", 2)
MX = MeasLib().resolve("MX", 2)

rng = np.random.default_rng(5)

WORKED = """
qvar c : 2;
qvar q : 2;
qif [c]
   |0> -> H[q]; measure MZ[q : x] = 0 -> X[q] [] 1 -> Y[q] end
[] |1> -> S[q]; measure MX[q : x] = + -> Y[q] [] - -> Z[q] end;
          X[q]; measure MZ[q : y] = 0 -> Z[q] [] 1 -> X[q] end
fiq
"""


class TestAtomicClauses:
    def test_abort(self):
        res = semi_classical(Abort(), Registry())
        assert res.deltas == (cstate.EPS,)
        assert res.semi.op(cstate.EPS).shape == (1, 1)
        assert res.semi.op(cstate.EPS)[0, 0] == 0

    def test_skip(self):
        res = semi_classical(Skip(), Registry())
        assert res.semi.op(cstate.EPS)[0, 0] == 1

    def test_unitary(self):
        r = Registry()
        r.declare_q("q", 2)
        res = semi_classical(Unitary("H", ("q",), H), r)
        assert np.abs(res.semi.op(cstate.EPS) - H).max() == 0

    def test_block_has_no_table(self):
        r = Registry()
        r.declare_q("q", 2)
        prog = Block(("q",), np.diag([1.0, 0]).astype(complex),
                     Unitary("H", ("q",), H))
        with pytest.raises(SemanticsError):
            semi_classical(prog, r)


class TestWorkedExample:
    def setup_method(self):
        self.mod = parse(WORKED)
        self.res = semi_classical(self.mod.program, self.mod.registry)

    def test_branch_p0_table(self):
        inner = self.mod.program.branches[0]
        res = semi_classical(inner, self.mod.registry)
        want0 = np.array([[0, 0], [1, 1]], dtype=complex) / SQ2
        want1 = 1j * np.array([[-1, 1], [0, 0]], dtype=complex) / SQ2
        assert np.abs(res.semi.op(cstate.assign("x", 0)) - want0).max() < 1e-12
        assert np.abs(res.semi.op(cstate.assign("x", 1)) - want1).max() < 1e-12

    def test_branch_p1_table(self):
        inner = self.mod.program.branches[1]
        res = semi_classical(inner, self.mod.registry)
        half = 0.5
        want = {
            ("+", 0): half * np.array([[1j, -1], [0, 0]]),
            ("+", 1): half * np.array([[-1j, 1], [0, 0]]),
            ("-", 0): half * np.array([[1, -1j], [0, 0]]),
            ("-", 1): half * np.array([[1, -1j], [0, 0]]),
        }
        for (b, c), m in want.items():
            s = cstate.concat(cstate.assign("x", b), cstate.assign("y", c))
            assert np.abs(res.semi.op(s) - m).max() < 1e-12

    def test_state_count_and_order(self):
        labels = [cstate.label(s) for s in self.res.deltas]
        assert labels == [
            "(x<-0(+)(x<-+.y<-0))", "(x<-0(+)(x<-+.y<-1))",
            "(x<-0(+)(x<--.y<-0))", "(x<-0(+)(x<--.y<-1))",
            "(x<-1(+)(x<-+.y<-0))", "(x<-1(+)(x<-+.y<-1))",
            "(x<-1(+)(x<--.y<-0))", "(x<-1(+)(x<--.y<-1))",
        ]

    def test_all_eight_operators(self):
        c = 1 / (2 * SQ2)
        z = np.zeros((2, 2))
        b00 = np.array([[0, 0], [1, 1]])  # branch-0 block for outcome 0
        b01 = 1j * np.array([[-1, 1], [0, 0]])
        p1 = {
            ("+", 0): np.array([[1j, -1], [0, 0]]),
            ("+", 1): np.array([[-1j, 1], [0, 0]]),
            ("-", 0): np.array([[1, -1j], [0, 0]]),
            ("-", 1): np.array([[1, -1j], [0, 0]]),
        }
        for s in self.res.deltas:
            a = s.children[0].value
            b = cstate.eval_at(s.children[1], "x")
            cc = cstate.eval_at(s.children[1], "y")
            top = b00 if a == 0 else b01
            want = c * np.block([[top, z], [z, p1[(b, cc)]]])
            assert np.abs(self.res.semi.op(s) - want).max() < 1e-12

    def test_channel_has_eight_kraus(self):
        assert len(self.res.channel.kraus) == 8
        rho = random_density(rng, 4)
        out = apply(self.res.channel, rho)
        assert abs(np.trace(out).real - 1) < 1e-12


class TestCompositionalFacts:
    def test_unitary_channel(self):
        r = Registry()
        r.declare_q("q", 2)
        u = random_unitary(rng, 2)
        chan = channel_of(Unitary("U", ("q",), u), r)
        want = SuperOp([u], check=False)
        assert chan.distance(want) < 1e-14

    def test_measure_with_skip_branches_dephases(self):
        r = Registry()
        r.declare_q("q", 2)
        r.ensure_c("x", MZ.outcomes)
        prog = Measure(MZ, ("q",), "x", ((0, Skip()), (1, Skip())))
        chan = channel_of(prog, r)
        plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        assert np.abs(apply(chan, plus) - I2 / 2).max() < 1e-12

    def test_seq_channel_composes(self):
        for _ in range(20):
            reg, p1 = random_program(rng, tag="a")
            _, p2 = random_program(rng, registry=reg, tag="b")
            prog = Seq(p1, p2)
            assert check(prog, reg) == []
            chan_seq = channel_of(prog, reg)
            a = channel_of(p1, reg).extended(reg, chan_seq.vars)
            b = channel_of(p2, reg).extended(reg, chan_seq.vars)
            assert chan_seq.distance(a.then(b)) < 1e-10

    def test_measure_clause_channel_identity(self):
        # channel of a measurement equals sum_m [[P_m]] ( M_m . M_m^dag )
        r = Registry()
        r.declare_q("q", 2)
        r.ensure_c("x", MX.outcomes)
        branches = tuple((m, Unitary("U" + str(i), ("q",), random_unitary(rng, 2)))
                         for i, m in enumerate(MX.outcomes))
        prog = Measure(MX, ("q",), "x", branches)
        chan = channel_of(prog, r)
        rho = random_density(rng, 2)
        want = np.zeros((2, 2), dtype=complex)
        for m, b in branches:
            mm = MX.ops[m]
            want += apply(channel_of(b, r), mm @ rho @ dagger(mm))
        assert np.abs(apply(chan, rho) - want).max() < 1e-12

    def test_qif_channel_is_composed_semiclassical(self):
        # the alternation's channel is exactly the channel of the guarded
        # composition of the branch tables
        mod = parse(WORKED)
        res = semi_classical(mod.program, mod.registry)
        fns = [semi_classical(b, mod.registry).semi for b in mod.program.branches]
        guards = [g.resolve(mod.registry, ("c",)) for g in mod.program.guards]
        composed = guarded_compose(mod.registry, list(zip(guards, fns)), ("c",))
        assert res.channel.distance(to_super_op(composed)) < 1e-14

    def test_trace_preserving_for_full_programs(self):
        for _ in range(15):
            reg, prog = random_program(rng)
            chan = channel_of(prog, reg)
            rho = random_density(rng, chan.dim_in)
            assert abs(np.trace(apply(chan, rho)).real - 1) < 1e-10

    def test_seq_delta_labels(self):
        r = Registry()
        r.declare_q("q", 2)
        r.declare_q("p", 2)
        r.ensure_c("x", (0, 1))
        r.ensure_c("y", ("+", "-"))
        m1 = Measure(MZ, ("q",), "x", ((0, Skip()), (1, Skip())))
        m2 = Measure(MX, ("p",), "y", (("+", Skip()), ("-", Skip())))
        res = semi_classical(Seq(m1, m2), r)
        labels = {cstate.label(s) for s in res.deltas}
        assert labels == {"(x<-0.y<-+)", "(x<-0.y<--)", "(x<-1.y<-+)", "(x<-1.y<--)"}


class TestBlocks:
    def test_identity_body_returns_input(self):
        r = Registry()
        r.declare_q("a", 2)
        r.declare_q("b", 2)
        body = Seq(Unitary("I1", ("a",), I2), Unitary("I2", ("b",), I2))
        sigma = random_density(rng, 2)
        rho = random_density(rng, 2)
        out = eval_block(("a",), rho, body, sigma, r)
        assert np.abs(out - sigma).max() < 1e-12

    def test_cnot_with_local_control_zero(self):
        r = Registry()
        r.declare_q("ctl", 2)
        r.declare_q("tgt", 2)
        body = Unitary("CNOT", ("ctl", "tgt"), CNOT)
        sigma = random_density(rng, 2)
        out = eval_block(("ctl",), np.diag([1.0, 0]).astype(complex), body, sigma, r)
        assert np.abs(out - sigma).max() < 1e-12

    def test_measurement_mixture_example(self):
        # coin-rotated choice of two measure-and-discard branches mixes them
        p, r_ = 0.3, 0.7
        u = np.array([[math.sqrt(p), math.sqrt(r_)],
                      [math.sqrt(r_), -math.sqrt(p)]], dtype=complex)
        reg = Registry()
        reg.declare_q("qc", 2)
        reg.declare_q("q", 2)
        reg.ensure_c("x", (0, 1, "+", "-"))
        p0 = Measure(MZ, ("q",), "x", ((0, Skip()), (1, Skip())))
        p1 = Measure(MX, ("q",), "x", (("+", Skip()), ("-", Skip())))
        choice = QChoice(Unitary("U", ("qc",), u),
                         (Guard.basis(0), Guard.basis(1)), (p0, p1), None)
        block = Block(("qc",), np.diag([1.0, 0]).astype(complex), choice)
        psi = np.array([0.6, 0.8j], dtype=complex)
        rho_in = np.outer(psi, psi.conj())
        rho0 = sum(MZ.ops[m] @ rho_in @ dagger(MZ.ops[m]) for m in MZ.outcomes)
        rho1 = sum(MX.ops[m] @ rho_in @ dagger(MX.ops[m]) for m in MX.outcomes)
        out = apply(channel_of(block, reg), rho_in)
        assert np.abs(out - (p * rho0 + r_ * rho1)).max() < 1e-12

    def test_bad_initial_state_rejected(self):
        r = Registry()
        r.declare_q("a", 2)
        r.declare_q("b", 2)
        body = Unitary("CNOT", ("a", "b"), CNOT)
        sigma = random_density(rng, 2)
        with pytest.raises(StateError):
            eval_block(("a",), 2 * np.eye(2, dtype=complex), body, sigma, r)


class TestProbChoice:
    def test_single_branch_weight_one(self):
        r = Registry()
        r.declare_q("q", 2)
        u = Unitary("U", ("q",), random_unitary(rng, 2))
        chan = eval_prob_choice(((u, 1.0),), r)
        assert chan.distance(channel_of(u, r)) < 1e-14

    def test_even_mixture_of_flip_and_skip(self):
        r = Registry()
        r.declare_q("q", 2)
        branches = ((Unitary("X", ("q",), X), 0.5), (Skip(), 0.5))
        chan = eval_prob_choice(branches, r)
        zero = np.diag([1.0, 0]).astype(complex)
        assert np.abs(apply(chan.extended(r, ("q",)), zero) - I2 / 2).max() < 1e-12

    def test_weight_violations(self):
        r = Registry()
        r.declare_q("q", 2)
        u = Unitary("X", ("q",), X)
        with pytest.raises(ProbabilityError):
            eval_prob_choice(((u, 0.0),), r)
        with pytest.raises(ProbabilityError):
            eval_prob_choice(((u, 0.8), (Skip(), 0.3)), r)


class TestSubspaceAlternation:
    def _branches(self, reg, measured=False):
        if measured:
            reg.ensure_c("x", (0, 1))
            b1 = Measure(MZ, ("q",), "x",
                         ((0, Unitary("A", ("q",), random_unitary(rng, 2))),
                          (1, Unitary("B", ("q",), random_unitary(rng, 2)))))
        else:
            b1 = Unitary("U", ("q",), random_unitary(rng, 2))
        b2 = Unitary("V", ("q",), random_unitary(rng, 2))
        return b1, b2

    def test_one_dimensional_subspaces_equal_ordinary(self):
        reg = Registry()
        reg.declare_q("c", 2)
        reg.declare_q("q", 2)
        b1, b2 = self._branches(reg, measured=True)
        plain = QIf(("c",), (Guard.basis(0), Guard.basis(1)), (b1, b2), None)
        sub = subspace_qif(("c",), [[Guard.basis(0)], [Guard.basis(1)]], (b1, b2), reg)
        assert channel_of(plain, reg).distance(sub) < 1e-12

    def test_measurement_free_branches_basis_independent(self):
        for _ in range(5):
            reg = Registry()
            reg.declare_q("c", 3)
            reg.declare_q("q", 2)
            b1, b2 = self._branches(reg, measured=False)
            # split C^3 into a 2-dim subspace (two random bases) and its complement
            u = random_unitary(rng, 3)
            v = random_unitary(rng, 2)
            basis_a = [u[:, 0], u[:, 1]]
            basis_b = [v[0, 0] * u[:, 0] + v[1, 0] * u[:, 1],
                       v[0, 1] * u[:, 0] + v[1, 1] * u[:, 1]]
            rest = [u[:, 2]]
            ca = subspace_qif(("c",), [basis_a, rest], (b1, b2), reg)
            cb = subspace_qif(("c",), [basis_b, rest], (b1, b2), reg)
            assert ca.distance(cb) < 1e-10

    def test_non_orthogonal_subspaces_rejected(self):
        from qgcl.errors import GuardBasisError

        reg = Registry()
        reg.declare_q("c", 2)
        reg.declare_q("q", 2)
        b1, b2 = self._branches(reg)
        with pytest.raises(GuardBasisError):
            subspace_qif(("c",), [[Guard.basis(0)], [Guard.basis(0)]],
                         (b1, b2), reg)

    def test_unitary_branches_give_block_unitary(self):
        reg = Registry()
        reg.declare_q("c", 3)
        reg.declare_q("q", 2)
        u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
        b1 = Unitary("U1", ("q",), u1)
        b2 = Unitary("U2", ("q",), u2)
        u = random_unitary(rng, 3)
        sub1 = [u[:, 0], u[:, 1]]
        sub2 = [u[:, 2]]
        chan = subspace_qif(("c",), [sub1, sub2], (b1, b2), reg)
        proj1 = sum(np.outer(v, v.conj()) for v in sub1)
        proj2 = np.outer(u[:, 2], u[:, 2].conj())
        want = tensor(proj1, u1) + tensor(proj2, u2)
        assert chan.distance(SuperOp([want], check=False)) < 1e-10
