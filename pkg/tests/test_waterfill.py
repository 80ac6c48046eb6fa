import numpy as np
import pytest

from helpers import K2, k2_problem, random_linear_problem
from waveplan.costate import TerminalCostate, channel_profile, eval_h
from waveplan.errors import ContractError, NumericalError
from waveplan.graph import build_laplacian, spectral_decompose
from waveplan.problem import CampaignProblem, Channel, CostModel, Drift, Objective
from waveplan.waterfill import on_set, solve, spend_for_beta, threshold_profile

BETA_STAR_K2 = 0.5 - 0.5 * np.exp(-1.0)


def _k2_h_profile(T=1.0):
    sd = spectral_decompose(build_laplacian(K2))
    return channel_profile(
        sd, TerminalCostate(lam=np.array([0.0, 1.0])), np.array([1.0, 0.0]), horizon=T
    )


def _constant_profile(value, T=1.0):
    from waveplan.costate import ChannelProfile

    return ChannelProfile(horizon=T, rates=(0.0,), coeffs=(value,))


class TestThresholdProfile:
    def test_linear_cost_divides_by_v(self):
        ch = Channel(b=np.array([1.0, 0.0]), cost=CostModel("linear", 2.0), u_max=1.0)
        g = threshold_profile(_constant_profile(1.0), ch)
        assert eval_h(g, 0.3) == pytest.approx(0.5, abs=1e-15)

    def test_power_cost_scaling(self):
        ch = Channel(b=np.array([1.0, 0.0]), cost=CostModel("power", 1.0, 0.5), u_max=4.0)
        prof = _k2_h_profile()
        g = threshold_profile(prof, ch)
        # c(u_max) = 2, so g = (4/2) h = 2 h.
        ts = np.linspace(0, 1, 9)
        assert np.allclose(eval_h(g, ts), 2.0 * eval_h(prof, ts), atol=1e-15)

    def test_late_limit_is_targeting_over_cost(self):
        prof = _k2_h_profile()
        ch = Channel(b=np.array([1.0, 0.0]), cost=CostModel("linear", 1.0), u_max=1.0)
        g = threshold_profile(prof, ch)
        p = np.array([0.0, 1.0])
        b = np.array([1.0, 0.0])
        assert eval_h(g, 1.0) == pytest.approx(float(p @ b) / 1.0, abs=1e-12)


class TestOnSet:
    def test_constant_above(self):
        assert on_set(_constant_profile(1.0), 0.5, T=1.0) == ((0.0, 1.0),)

    def test_constant_below(self):
        assert on_set(_constant_profile(1.0), 2.0, T=1.0) == ()

    def test_k2_halfway_level(self):
        prof = _k2_h_profile()
        beta = eval_h(prof, 0.5)
        (interval,) = on_set(prof, beta, T=1.0)
        assert interval[0] == 0.0
        assert interval[1] == pytest.approx(0.5, abs=1e-9)

    def test_tie_break_excludes_boundary(self):
        # Constant signal exactly at the level: assigned off.
        assert on_set(_constant_profile(0.5), 0.5, T=1.0) == ()

    def test_rejects_negative_level(self):
        with pytest.raises(ContractError):
            on_set(_constant_profile(1.0), -0.1, T=1.0)


class TestSpendForBeta:
    def test_above_peak_spends_nothing(self):
        prob = k2_problem()
        assert spend_for_beta(prob, [_k2_h_profile()], 10.0) == 0.0

    def test_zero_level_spends_saturation(self):
        prob = CampaignProblem(
            graph=K2,
            channels=(Channel(b=np.array([1.0, 1.0]), cost=CostModel("linear", 2.0), u_max=1.0),),
            objective=Objective(kind="linear", p=np.array([0.5, 0.5])),
            T=1.0,
            r=0.5,
            x0=np.zeros(2),
        )
        sd = spectral_decompose(build_laplacian(K2))
        prof = channel_profile(sd, TerminalCostate(lam=prob.objective.p), np.array([1.0, 1.0]), 1.0)
        assert spend_for_beta(prob, [prof], 0.0) == pytest.approx(2.0, abs=1e-12)

    def test_k2_worked_level(self):
        prob = k2_problem()
        prof = _k2_h_profile()
        assert spend_for_beta(prob, [prof], BETA_STAR_K2) == pytest.approx(0.5, abs=1e-9)

    def test_monotone_in_beta(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            prob = random_linear_problem(rng, int(rng.integers(2, 7)))
            sd = spectral_decompose(build_laplacian(prob.graph))
            profiles = [
                channel_profile(sd, TerminalCostate(lam=prob.objective.p), ch.b, prob.T)
                for ch in prob.channels
            ]
            betas = np.sort(rng.uniform(0.0, 1.0, 5))
            spends = [spend_for_beta(prob, profiles, float(b), resolution=1024) for b in betas]
            for lo, hi in zip(spends, spends[1:]):
                assert lo >= hi - 1e-12


class TestSolve:
    def test_k2_worked_case(self):
        sol = solve(k2_problem())
        assert sol.beta_star == pytest.approx(BETA_STAR_K2, abs=1e-9)
        (interval,) = sol.schedule.channels[0].intervals
        assert interval[0] == 0.0
        assert interval[1] == pytest.approx(0.5, abs=1e-9)
        assert sol.binding
        assert sol.spend == pytest.approx(0.5, abs=1e-6 * 0.5)

    def test_slack_budget_short_circuits(self):
        prob = CampaignProblem(
            graph=K2,
            channels=(Channel(b=np.array([1.0, 1.0]), cost=CostModel("linear", 1.0), u_max=1.0),),
            objective=Objective(kind="linear", p=np.array([0.5, 0.5])),
            T=1.0,
            r=5.0,
            x0=np.zeros(2),
        )
        sol = solve(prob)
        assert sol.beta_star == 0.0
        assert not sol.binding
        assert sol.schedule.channels[0].intervals == ((0.0, 1.0),)
        assert len(sol.bisection_trace) == 1

    def test_binding_budget_complementary_slackness(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            prob = random_linear_problem(rng, int(rng.integers(2, 8)), budget_fraction=0.5)
            sol = solve(prob)
            assert sol.spend <= prob.r * (1 + 1e-6)
            assert sol.binding == (sol.beta_star > 0.0)
            if sol.binding:
                assert abs(sol.spend - prob.r) <= 1e-6 * prob.r

    def test_bang_bang_purity(self):
        sol = solve(k2_problem())
        for cs, ch in zip(sol.schedule.channels, k2_problem().channels):
            assert cs.u_max == ch.u_max

    def test_rejects_sigmoid_objective(self):
        prob = CampaignProblem(
            graph=K2,
            channels=k2_problem().channels,
            objective=Objective(
                kind="sigmoid",
                p=np.array([0.0, 1.0]),
                alpha=np.array([1.0, 1.0]),
                theta=np.zeros(2),
            ),
            T=1.0,
            r=0.5,
            x0=np.zeros(2),
        )
        with pytest.raises(ContractError, match="solve_sigmoid"):
            solve(prob)

    def test_rejects_invalid_problem(self):
        from waveplan.errors import ValidationError

        with pytest.raises(ValidationError, match="budget"):
            solve(k2_problem(r=0.0))

    def test_flat_signal_binding_budget_diverges(self):
        # Constant comparison signal with a binding budget: spend jumps at the
        # level, so the bisection reports non-convergence instead of guessing.
        prob = CampaignProblem(
            graph=K2,
            channels=(Channel(b=np.array([1.0, 1.0]), cost=CostModel("linear", 1.0), u_max=1.0),),
            objective=Objective(kind="linear", p=np.array([0.5, 0.5])),
            T=1.0,
            r=0.5,
            x0=np.zeros(2),
        )
        with pytest.raises(NumericalError, match="bisection"):
            solve(prob)

    def test_invariance_to_x0_and_drift(self):
        rng = np.random.default_rng(40)
        prob = random_linear_problem(rng, 6)
        base = solve(prob)
        perturbed = CampaignProblem(
            graph=prob.graph,
            channels=prob.channels,
            objective=prob.objective,
            T=prob.T,
            r=prob.r,
            x0=rng.normal(size=6),
            drift=Drift(
                breakpoints=np.array([0.0, 0.4]), values=rng.normal(size=(2, 6))
            ),
        )
        again = solve(perturbed)
        assert again.beta_star == base.beta_star
        for a, b in zip(again.schedule.channels, base.schedule.channels):
            assert a.intervals == b.intervals

    def test_switch_conformance_small_random(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            prob = random_linear_problem(rng, int(rng.integers(2, 9)))
            sol = solve(prob)
            for cert in sol.certificate:
                assert cert.realized_switches <= cert.bound_linear_shifted
                assert cert.bound_linear_shifted <= prob.n - 1

    def test_trace_records_bisection(self):
        sol = solve(k2_problem())
        assert sol.bisection_trace[0][0] == 0.0
        assert len(sol.bisection_trace) >= 2
        assert sol.bisection_trace[-1][0] == sol.beta_star


class TestOnSetEscalation:
    def test_escalation_keeps_result_stable(self):
        # A hint of zero forces both resolution escalations; the refined
        # interval must match the unescalated scan.
        prof = _k2_h_profile()
        beta = eval_h(prof, 0.5)
        plain = on_set(prof, beta, T=1.0)
        escalated = on_set(prof, beta, T=1.0, max_crossings=0)
        assert len(plain) == len(escalated) == 1
        assert escalated[0][0] == plain[0][0]
        assert escalated[0][1] == pytest.approx(plain[0][1], abs=1e-11)
