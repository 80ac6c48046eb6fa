import numpy as np
import pytest

from helpers import K2, random_connected_graph
from waveplan.bounds import bound_general, bound_linear, count_exp_poly_zeros
from waveplan.errors import ContractError
from waveplan.graph import build_laplacian, spectral_decompose


@pytest.fixture(scope="module")
def k2_sd():
    return spectral_decompose(build_laplacian(K2))


class TestBoundGeneral:
    def test_uniform_gain_gives_zero(self, k2_sd):
        assert bound_general(k2_sd, np.array([1.0, 1.0])) == 0

    def test_single_agent_gain_gives_one(self, k2_sd):
        assert bound_general(k2_sd, np.array([1.0, 0.0])) == 1

    def test_zero_vector_gives_zero(self, k2_sd):
        assert bound_general(k2_sd, np.zeros(2)) == 0

    def test_never_exceeds_n_minus_1(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            sd = spectral_decompose(build_laplacian(random_connected_graph(rng, n)))
            assert bound_general(sd, rng.uniform(-1, 1, n)) <= n - 1


class TestBoundLinear:
    def test_k2_shifted_worked_example(self, k2_sd):
        # Coefficients (1/2, -1/2); partial sums minus 0.316 are (+0.184, -0.316).
        p = np.array([0.0, 1.0])
        b = np.array([1.0, 0.0])
        assert bound_linear(k2_sd, p, b, 0.316) == 1

    def test_k2_unshifted_is_zero(self, k2_sd):
        # Partial sums (1/2, 0): the trailing zero is skipped, no variation.
        assert bound_linear(k2_sd, np.array([0.0, 1.0]), np.array([1.0, 0.0]), 0.0) == 0

    def test_uniform_p_gives_zero(self):
        rng = np.random.default_rng(4)
        g = random_connected_graph(rng, 7)
        sd = spectral_decompose(build_laplacian(g))
        assert bound_linear(sd, np.ones(7), rng.uniform(-1, 1, 7), 0.0) == 0

    def test_sup_dominates_specific_shifts(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            n = int(rng.integers(2, 10))
            sd = spectral_decompose(build_laplacian(random_connected_graph(rng, n)))
            p = rng.uniform(0, 1, n)
            b = rng.uniform(-1, 1, n)
            sup = bound_linear(sd, p, b, "sup")
            for s in rng.uniform(0, 2, 8):
                assert bound_linear(sd, p, b, float(s)) <= sup
            assert sup <= n - 1

    def test_rejects_negative_shift(self, k2_sd):
        with pytest.raises(ContractError):
            bound_linear(k2_sd, np.array([0.0, 1.0]), np.array([1.0, 0.0]), -0.1)

    def test_rejects_unknown_mode(self, k2_sd):
        with pytest.raises(ContractError):
            bound_linear(k2_sd, np.array([0.0, 1.0]), np.array([1.0, 0.0]), "max")


class TestCountExpPolyZeros:
    def test_monotone_single_crossing(self):
        assert count_exp_poly_zeros([0.0, 2.0], [1.0, -1.0], (-10.0, 10.0)) == 1

    def test_constant_has_no_zeros(self):
        assert count_exp_poly_zeros([0.0], [1.0], (-10.0, 10.0)) == 0

    def test_all_zero_coefficients_rejected(self):
        with pytest.raises(ContractError, match="zero"):
            count_exp_poly_zeros([0.0, 1.0], [0.0, 0.0], (-1.0, 1.0))

    def test_tangential_zero_counted_twice(self):
        # f(t) = (1 - e^t)^2 = 1 - 2 e^t + e^{2t} touches zero at t = 0.
        assert count_exp_poly_zeros([0.0, 1.0, 2.0], [1.0, -2.0, 1.0], (-5.0, 5.0)) == 2

    def test_two_crossings(self):
        # f(t) = 1 - 3 e^t + e^{2t}: quadratic in e^t with two positive roots.
        assert count_exp_poly_zeros([0.0, 1.0, 2.0], [1.0, -3.0, 1.0], (-8.0, 8.0)) == 2

    def test_randomized_lemma_oracles(self):
        # Zeros of sum d_g e^{+rate t} on t < 0 are bounded by the sign
        # variations of the running coefficient sums (rates ascending) and by
        # the nonzero-rate count minus one.
        rng = np.random.default_rng(99)
        for _ in range(300):
            k = int(rng.integers(1, 7))
            rates = np.sort(rng.uniform(0.0, 5.0, size=k))
            while k > 1 and np.min(np.diff(rates)) < 1e-3:
                rates = np.sort(rng.uniform(0.0, 5.0, size=k))
            if rng.random() < 0.5:
                rates[0] = 0.0
            coeffs = rng.normal(size=k)
            zeros = count_exp_poly_zeros(rates, coeffs, (-12.0, 0.0), resolution=2048)
            partial = np.cumsum(coeffs)
            signs = [1 if v > 0 else -1 for v in partial if abs(v) > 1e-12]
            variation_bound = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
            assert zeros <= variation_bound
            assert zeros <= k - 1


class TestSwitchBoundReport:
    def test_report_with_and_without_level(self):
        from waveplan.bounds import switch_bound_report
        from waveplan.problem import Channel, CostModel

        sd = spectral_decompose(build_laplacian(K2))
        channels = (Channel(b=np.array([1.0, 0.0]), cost=CostModel("linear", 1.0), u_max=1.0),)
        p = np.array([0.0, 1.0])
        bare = switch_bound_report(sd, channels, p)
        assert bare.channels[0].linear_at_threshold is None
        assert bare.channels[0].general == 1
        solved = switch_bound_report(sd, channels, p, beta_star=0.316)
        assert solved.channels[0].threshold_shift == pytest.approx(0.316)
        assert solved.channels[0].linear_at_threshold == 1
