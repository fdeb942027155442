import numpy as np
import pytest

from qgcl.errors import DimensionError, ShapeError
from qgcl.linalg import (
    choi_of, choi_residual, dagger, factor_bra, format_complex, format_matrix,
    is_psd, loewner_leq, parse_complex, parse_matrix, partial_trace,
    permute_factors, tensor,
)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

rng = np.random.default_rng(42)


def rand_c(n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


class TestTensor:
    def test_identity(self):
        assert np.array_equal(tensor(I2, I2), np.eye(4))

    def test_hadamard_blocks(self):
        got = tensor(H, I2)
        want = np.block([[I2, I2], [I2, -I2]]) / np.sqrt(2)
        assert np.abs(got - want).max() == 0

    def test_matches_elementwise_kronecker(self):
        a, b = X, Z
        got = tensor(a, b)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        assert got[2 * i + k, 2 * j + l] == a[i, j] * b[k, l]

    def test_associative_exact_on_gates(self):
        cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
        for a, b, c in [(X, Z, H), (H, cnot, X), (Z, H, cnot)]:
            assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))

    def test_associative_random(self):
        a, b, c = rand_c(2), rand_c(3), rand_c(2)
        assert np.abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))).max() < 1e-14


class TestPartialTrace:
    def test_product_state(self):
        rho = rand_c(2)
        rho = rho @ dagger(rho)
        rho /= np.trace(rho)
        sigma = rand_c(3)
        sigma = sigma @ dagger(sigma)
        sigma /= np.trace(sigma)
        got = partial_trace(tensor(rho, sigma), [2, 3], [0])
        assert np.abs(got - sigma).max() < 1e-12

    def test_bell_state_marginal(self):
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / np.sqrt(2)
        rho = np.outer(psi, psi.conj())
        got = partial_trace(rho, [2, 2], [0])
        assert np.abs(got - I2 / 2).max() < 1e-12

    def test_matches_index_summation(self):
        rho = rand_c(6)
        rho = rho @ dagger(rho)
        rho /= np.trace(rho)
        got = partial_trace(rho, [2, 3], [1])
        want = np.zeros((2, 2), dtype=complex)
        t = rho.reshape(2, 3, 2, 3)
        for j in range(3):
            want += t[:, j, :, j]
        assert np.abs(got - want).max() < 1e-12

    def test_preserves_trace(self):
        rho = rand_c(12)
        rho = rho @ dagger(rho)
        for traced in ([0], [1], [0, 2], [1, 2]):
            out = partial_trace(rho, [2, 3, 2], traced)
            assert abs(np.trace(out) - np.trace(rho)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(5, dtype=complex), [2, 3], [0])


class TestChoi:
    def test_identity_channel(self):
        j = choi_of([I2])
        want = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for k in range(2):
                want[2 * i + i, 2 * k + k] = 1.0
        assert np.abs(j - want).max() == 0

    def test_global_phase_invariance(self):
        u = np.linalg.qr(rand_c(3))[0]
        for theta in (0.3, 1.2, 2.9):
            assert np.abs(choi_of([u]) - choi_of([np.exp(1j * theta) * u])).max() < 1e-12

    def test_measure_discard_is_dephasing(self):
        m0 = np.diag([1, 0]).astype(complex)
        m1 = np.diag([0, 1]).astype(complex)

        def dephase(rho):
            return np.diag(np.diag(rho))

        # apply-to-basis oracle: agree on a full Hermitian operator basis
        basis = [np.array(b, dtype=complex) for b in
                 ([[1, 0], [0, 0]], [[0, 0], [0, 1]], [[0, 1], [1, 0]],
                  [[0, -1j], [1j, 0]])]
        for b in basis:
            got = m0 @ b @ m0 + m1 @ b @ m1
            assert np.abs(got - dephase(b)).max() < 1e-12
        j_meas = choi_of([m0, m1])
        j_deph = choi_of([np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)])
        assert np.abs(j_meas - j_deph).max() < 1e-12

    def test_kraus_unitary_mixing_invariance(self):
        ops = [rand_c(3) for _ in range(2)]
        norm = sum(dagger(k) @ k for k in ops)
        scale = 1.1 * np.linalg.eigvalsh(norm).max()
        ops = [k / np.sqrt(scale) for k in ops]
        u = np.linalg.qr(rand_c(2))[0]
        mixed = [sum(u[i, j] * ops[j] for j in range(2)) for i in range(2)]
        assert np.abs(choi_of(ops) - choi_of(mixed)).max() < 1e-10

    def test_empty_list_is_abort(self):
        j = choi_of([], 2, 2)
        assert np.abs(j).max() == 0

    def test_residual_large_single_kraus(self):
        u = np.linalg.qr(rand_c(80))[0]
        assert choi_residual([u], [np.exp(0.7j) * u]) < 1e-12
        v = np.linalg.qr(rand_c(80))[0]
        assert choi_residual([u], [v]) > 1e-3


class TestPositivity:
    def test_zero_below_identity(self):
        assert loewner_leq(np.zeros((2, 2), dtype=complex), I2, 1e-12)

    def test_identity_not_below_contraction(self):
        assert not loewner_leq(I2, np.diag([1.0, 0.5]).astype(complex), 1e-12)

    def test_measurement_completeness_with_equality(self):
        m0 = np.diag([1, 0]).astype(complex)
        m1 = np.diag([0, 1]).astype(complex)
        total = dagger(m0) @ m0 + dagger(m1) @ m1
        assert loewner_leq(total, I2)
        assert loewner_leq(I2, total)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ShapeError):
            is_psd(np.array([[0, 1], [0, 0]], dtype=complex))


class TestFactorOps:
    def test_permute_swaps(self):
        m = tensor(X, Z)
        assert np.abs(permute_factors(m, [2, 2], [1, 0]) - tensor(Z, X)).max() == 0

    def test_permute_three_factors(self):
        a, b, c = rand_c(2), rand_c(3), rand_c(2)
        m = tensor(tensor(a, b), c)
        got = permute_factors(m, [2, 3, 2], [2, 0, 1])
        assert np.abs(got - tensor(tensor(c, a), b)).max() < 1e-12

    def test_factor_bra_basis(self):
        # <1| on the first qubit of a 2x3 system picks the lower block
        m = factor_bra([2, 3], [0], [np.array([0, 1])])
        v = rand_c(6, 1).reshape(6)
        assert np.abs(m @ v - v[3:]).max() < 1e-12

    def test_factor_bra_middle_position(self):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        m = factor_bra([2, 2, 2], [1], [v])
        state = rand_c(8, 1).reshape(8)
        t = state.reshape(2, 2, 2)
        want = np.einsum("j,ijk->ik", v.conj(), t).reshape(4)
        assert np.abs(m @ state - want).max() < 1e-12


class TestTextFormat:
    @pytest.mark.parametrize("text,value", [
        ("1", 1 + 0j),
        ("-i", -1j),
        ("i", 1j),
        ("0.5+0.5i", 0.5 + 0.5j),
        ("2e-3", 0.002),
        ("-1.5-2i", -1.5 - 2j),
        ("3i", 3j),
    ])
    def test_parse_complex(self, text, value):
        assert parse_complex(text) == value

    def test_parse_rejects_garbage(self):
        for bad in ("", "1+", "i2", "1+2"):
            with pytest.raises(ShapeError):
                parse_complex(bad)

    def test_round_trip(self):
        m = rand_c(3, 4)
        again = parse_matrix(format_matrix(m))
        assert np.abs(m - again).max() < 1e-10

    def test_format_complex_forms(self):
        assert format_complex(1.0) == "1"
        assert format_complex(-1j) == "-1i"
        assert format_complex(0.5 + 0.5j) == "0.5+0.5i"
        assert format_complex(0.0) == "0"

    def test_parse_matrix_header_mismatch(self):
        with pytest.raises(ShapeError):
            parse_matrix("2 2\n1 0\n0")
