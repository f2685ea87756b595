import numpy as np
import pytest

from fixednode import BitConfiguration, ground_energy
from fixednode import exact_oracle as ex
from fixednode.haldane_shastry import HSModel, HSOracle, half_filling_states


def bc(s):
    return BitConfiguration.from_string(s)


@pytest.fixture(scope="module")
def hs6_dense():
    model = HSModel(6)
    H = model.hamiltonian()
    oracle = HSOracle(model)
    basis = half_filling_states(6)
    lam = ground_energy(H, oracle, model.alternating_state())
    Hd = ex.dense_from_terms(H, basis)
    F = ex.dense_fixed_node(H, oracle, basis)
    G = ex.dense_generator(H, oracle, lam, basis)
    return model, basis, lam, Hd, F, G


class TestEigSym:
    def test_diagonal(self):
        w, v = ex.eig_sym(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(w, [1, 2, 3])
        assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])

    def test_two_by_two(self):
        w, _ = ex.eig_sym(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(w, [-1, 1])

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            ex.eig_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_hs4_ground_energy_cross_oracle(self):
        model = HSModel(4)
        H = model.hamiltonian()
        oracle = HSOracle(model)
        basis = half_filling_states(4)
        w, _ = ex.eig_sym(ex.dense_from_terms(H, basis))
        lam = ground_energy(H, oracle, model.alternating_state())
        assert lam == pytest.approx(w[0], abs=1e-9)

    def test_residual_contract(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(60, 60))
        A = (A + A.T) / 2
        w, v = ex.eig_sym(A)
        assert np.abs(A @ v - v * w).max() <= 1e-9 * max(1.0, np.abs(A).max()) * 60


class TestBuildDense:
    def test_l4_dimensions(self):
        model = HSModel(4)
        basis = half_filling_states(4)
        sec = ex.build_dense(model.hamiltonian().row, basis)
        assert sec.matrix.shape == (6, 6)

    def test_leak_detection(self):
        from fixednode import PauliTerm, SparseHamiltonian

        H = SparseHamiltonian(2, [PauliTerm(1.0, ((0, "X"),))])
        with pytest.raises(ValueError):
            ex.build_dense(H.row, [bc("00"), bc("11")])

    def test_fixed_node_sector_symmetric(self, hs6_dense):
        _, _, _, _, F, _ = hs6_dense
        assert np.abs(F.matrix - F.matrix.T).max() <= 1e-12


class TestExactEvolution:
    def test_t_zero_is_delta(self, hs6_dense):
        _, basis, _, _, _, G = hs6_dense
        pt = ex.exact_evolution(G, 3, 0.0)
        expect = np.zeros(len(basis))
        expect[3] = 1.0
        assert np.abs(pt - expect).max() <= 1e-12

    def test_long_time_reaches_pi(self, hs6_dense):
        _, _, _, _, _, G = hs6_dense
        pt = ex.exact_evolution(G, 0, 200.0)
        assert np.abs(pt - G.pi()).max() <= 1e-9

    def test_distribution_normalized_nonnegative(self, hs6_dense):
        _, _, _, _, _, G = hs6_dense
        ev = ex.ExactEvolution(G)
        for t in (0.1, 0.5, 1.0, 3.0):
            pt = ev.distribution(2, t)
            assert pt.min() >= 0.0
            assert pt.sum() == pytest.approx(1.0, abs=1e-9)

    def test_detailed_balance_of_propagator(self, hs6_dense):
        _, basis, lam, _, F, G = hs6_dense
        d = G.amplitudes
        M = lam * np.eye(len(basis)) - F.matrix
        w, v = ex.eig_sym((M + M.T) / 2)
        for t in (0.3, 1.7):
            expMt = v @ np.diag(np.exp(w * t)) @ v.T
            P = d[:, None] * expMt / d[None, :]  # e^{Gt}
            pi = G.pi()
            lhs = P * pi[None, :]
            assert np.abs(lhs - lhs.T).max() <= 1e-9

    def test_mixing_bound_theorem(self, hs6_dense):
        _, basis, _, Hd, _, G = hs6_dense
        gamma = ex.spectral_gaps(Hd, Hd)[0]
        ev = ex.ExactEvolution(G)
        pi = G.pi()
        for t in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
            for j in range(len(basis)):
                pt = ev.distribution(j, t)
                bound = np.exp(-gamma * t) / np.sqrt(pi[j])
                assert ex.tv_distance(pt, pi) <= bound + 1e-9


class TestExpectedFlipRate:
    def test_diagonal_operator(self):
        F = np.diag([1.0, -2.0])
        assert ex.expected_flip_rate(F, np.array([0.6, 0.8])) == 0.0

    def test_hs_bound(self, hs6_dense):
        model, _, _, _, F, _ = hs6_dense
        H = model.hamiltonian()
        rate = ex.expected_flip_rate(F.matrix, F.amplitudes)
        assert rate >= 0.0
        assert rate <= H.max_row_degree() * H.norm_bound()

    def test_hs4_known_value(self):
        model = HSModel(4)
        H = model.hamiltonian()
        oracle = HSOracle(model)
        basis = half_filling_states(4)
        F = ex.dense_fixed_node(H, oracle, basis)
        rate = ex.expected_flip_rate(F.matrix, F.amplitudes)
        assert rate == pytest.approx(np.pi**2 / 6, abs=1e-9)


class TestTvDistance:
    def test_equal(self):
        assert ex.tv_distance(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0

    def test_disjoint(self):
        assert ex.tv_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 2.0

    def test_half(self):
        assert ex.tv_distance(np.array([1.0, 0.0]), np.array([0.5, 0.5])) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ex.tv_distance(np.ones(2), np.ones(3))


def psi4_table(signs=None):
    """Normalized 4-qubit half-filling amplitudes with choosable signs."""
    model = HSModel(4)
    table = model.amplitude_table()
    if signs is not None:
        for bits, s in signs.items():
            table[bits] = abs(table[bits]) * s
        table /= np.linalg.norm(table)
    return table


class TestWickCheck:
    def test_basis_state(self):
        a = np.zeros(16)
        a[0b1100] = 1.0
        assert ex.wick_check(a) == 0.0

    def test_psi4_residual(self):
        assert ex.wick_check(psi4_table()) == pytest.approx(-1 / 6, abs=1e-12)

    def test_odd_weight_rejected(self):
        a = np.zeros(16)
        a[0b1000] = 1.0
        with pytest.raises(ValueError):
            ex.wick_check(a)

    def test_random_sign_flips_never_free(self):
        rng = np.random.default_rng(13)
        sector = [0b1100, 0b0011, 0b1010, 0b0101, 0b1001, 0b0110]
        for _ in range(20):
            signs = {b: int(rng.choice([-1, 1])) for b in sector}
            assert abs(ex.wick_check(psi4_table(signs))) >= 1 / 6 - 1e-9

    def test_product_state_is_free(self):
        # (cos a|00> + sin a|11>) (x) (cos b|00> + sin b|11>) satisfies the
        # Wick condition: the two nonzero products cancel
        a, b = 0.3, 1.1
        amp = np.zeros(16)
        amp[0b0000] = np.cos(a) * np.cos(b)
        amp[0b1100] = np.sin(a) * np.cos(b)
        amp[0b0011] = np.cos(a) * np.sin(b)
        amp[0b1111] = np.sin(a) * np.sin(b)
        assert abs(ex.wick_check(amp)) <= 1e-12
