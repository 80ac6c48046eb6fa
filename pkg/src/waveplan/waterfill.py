"""Exact linear-objective allocation by bisection on the water level beta.

A channel runs flat out wherever its cost-normalized signal g_i(t) =
h_i(t) * u_max_i / c_i(u_max_i) sits above the water level, and is off
elsewhere. Total spend is monotone nonincreasing in the level, so the level
that meets the budget is found by bisection; a slack budget short-circuits
to level zero by complementary slackness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import bound_general, bound_linear
from .costate import ChannelProfile, TerminalCostate, channel_profile, eval_h
from .dynamics import closed_form_gain
from .errors import ContractError, NumericalError
from .graph import build_laplacian, spectral_decompose
from .problem import CampaignProblem, Channel, check_conditions, require_valid

BISECTION_MAX_ITERS = 200
SPEND_REL_TOL = 1e-9


@dataclass(frozen=True)
class ChannelSchedule:
    """On-intervals for one channel; the control equals u_max inside them and 0 outside.

    ``u_max`` is the level applied while on (the channel ceiling for
    bang-bang schedules; the enumeration oracle also emits interior levels).
    """

    u_max: float
    intervals: tuple[tuple[float, float], ...]

    @property
    def on_time(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))


@dataclass(frozen=True)
class BangBangSchedule:
    channels: tuple[ChannelSchedule, ...]

    def switch_counts(self, T: float) -> tuple[int, ...]:
        """Per-channel count of on/off transitions strictly inside (0, T)."""
        counts = []
        for cs in self.channels:
            k = 0
            for lo, hi in cs.intervals:
                k += int(lo > 0.0) + int(hi < T)
            counts.append(k)
        return tuple(counts)


@dataclass(frozen=True)
class ChannelCertificate:
    """Realized switch count of one channel next to its applicable bounds."""

    channel: int
    realized_switches: int
    bound_general: int
    bound_linear_shifted: int
    bound_linear_sup: int
    threshold_shift: float
    theorem_applicable: bool


@dataclass(frozen=True)
class WaterfillSolution:
    beta_star: float
    schedule: BangBangSchedule
    spend: float
    binding: bool
    objective_gain: float
    certificate: tuple[ChannelCertificate, ...]
    bisection_trace: tuple[tuple[float, float], ...] = field(default=())

    @property
    def structure_certified(self) -> bool:
        return all(c.theorem_applicable for c in self.certificate)


def threshold_profile(profile: ChannelProfile, ch: Channel) -> ChannelProfile:
    """Scale h into the comparison signal g(t) = h(t) * u_max / c(u_max).

    For linear cost this is h(t) / v. The result is a profile again, so it
    evaluates like any other scalar function of t.
    """
    kappa = ch.u_max / ch.max_cost_rate
    return ChannelProfile(
        horizon=profile.horizon,
        rates=profile.rates,
        coeffs=tuple(kappa * c for c in profile.coeffs),
        dropped=profile.dropped,
        channel=profile.channel,
    )


def _refine_crossing(g: ChannelProfile, beta: float, lo: float, hi: float, tol: float) -> float:
    above_lo = eval_h(g, lo) > beta
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if (eval_h(g, mid) > beta) == above_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _intervals_from_samples(
    g: ChannelProfile, beta: float, ts: np.ndarray, values: np.ndarray, T: float
) -> tuple[tuple[float, float], ...]:
    above = values > beta
    if not np.any(above):
        return ()
    tol = 1e-12 * T
    boundaries = np.flatnonzero(above[:-1] != above[1:])
    intervals: list[tuple[float, float]] = []
    start = 0.0 if above[0] else None
    for k in boundaries:
        c = _refine_crossing(g, beta, float(ts[k]), float(ts[k + 1]), tol)
        if above[k]:
            intervals.append((start, c))
            start = None
        else:
            start = c
    if start is not None:
        intervals.append((start, T))
    return tuple(iv for iv in intervals if iv[1] > iv[0])


def on_set(
    g: ChannelProfile,
    beta: float,
    T: float,
    resolution: int = 4096,
    times: np.ndarray | None = None,
    values: np.ndarray | None = None,
    max_crossings: int | None = None,
) -> tuple[tuple[float, float], ...]:
    """The region {t in [0, T] : g(t) > beta} as disjoint sorted intervals.

    Grid scan followed by bisection refinement of each crossing to 1e-12 * T.
    Points with g(t) = beta are assigned off (the boundary set has measure
    zero under the no-singular-arc conditions, and a deterministic tie-break
    keeps outputs reproducible). When ``max_crossings`` is given and the scan
    finds more boundaries than that, the resolution escalates fourfold, at
    most twice, to rule out grid chatter.
    """
    if beta < 0.0:
        raise ContractError(f"water level must be nonnegative, got {beta}")
    if times is None or values is None:
        times = np.linspace(0.0, T, resolution)
        values = eval_h(g, times)
    for _ in range(2):
        crossings = int(np.sum((values > beta)[:-1] != (values > beta)[1:]))
        if max_crossings is None or crossings <= max_crossings:
            break
        resolution *= 4
        times = np.linspace(0.0, T, resolution)
        values = eval_h(g, times)
    return _intervals_from_samples(g, beta, times, values, T)


def spend_for_beta(
    problem: CampaignProblem,
    profiles: list[ChannelProfile],
    beta: float,
    resolution: int | None = None,
) -> float:
    """Total budget burned at water level beta: sum of c_i(u_max_i) times on-time."""
    if resolution is None:
        resolution = max(4096, 64 * problem.n)
    total = 0.0
    for profile, ch in zip(profiles, problem.channels):
        g = threshold_profile(profile, ch)
        sets = on_set(g, beta, problem.T, resolution=resolution)
        total += ch.max_cost_rate * sum(hi - lo for lo, hi in sets)
    return float(total)


def solve_with_costate(
    problem: CampaignProblem, lam: np.ndarray, resolution: int | None = None
) -> WaterfillSolution:
    """Water-filling against an explicit terminal costate vector.

    This is the shared engine: the linear objective passes lam = p, the
    sigmoid loop passes its surrogate costates. Nothing here reads x0 or the
    drift, which is what makes linear-objective schedules invariant to both.
    """
    require_valid(problem)
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (problem.n,):
        raise ContractError(f"costate has shape {lam.shape}, expected ({problem.n},)")
    T, r = problem.T, problem.r
    sd = spectral_decompose(build_laplacian(problem.graph))
    lamT = TerminalCostate(lam=lam)
    profiles = [
        channel_profile(sd, lamT, ch.b, T, channel=k + 1)
        for k, ch in enumerate(problem.channels)
    ]
    gs = [threshold_profile(pr, ch) for pr, ch in zip(profiles, problem.channels)]
    resolution = resolution or max(4096, 64 * problem.n)
    ts = np.linspace(0.0, T, resolution)
    gvals = [eval_h(g, ts) for g in gs]
    hints = [bound_general(sd, ch.b) + 1 for ch in problem.channels]
    cost_rates = [ch.max_cost_rate for ch in problem.channels]

    def sets_at(beta: float) -> list[tuple[tuple[float, float], ...]]:
        return [
            on_set(g, beta, T, resolution=resolution, times=ts, values=v, max_crossings=h)
            for g, v, h in zip(gs, gvals, hints)
        ]

    def spend_of(sets) -> float:
        return float(
            sum(cr * sum(hi - lo for lo, hi in s) for cr, s in zip(cost_rates, sets))
        )

    trace: list[tuple[float, float]] = []
    sets0 = sets_at(0.0)
    spend0 = spend_of(sets0)
    trace.append((0.0, spend0))

    if spend0 <= r:
        beta_star, sets, spend = 0.0, sets0, spend0
    else:
        beta_hi = max(float(np.max(v)) for v in gvals)
        beta_hi += 1e-9 * max(1.0, abs(beta_hi))
        if beta_hi <= 0.0:
            raise NumericalError("all comparison signals are nonpositive yet spend exceeds budget")
        lo, hi = 0.0, beta_hi
        beta_star = None
        for _ in range(BISECTION_MAX_ITERS):
            mid = 0.5 * (lo + hi)
            sets = sets_at(mid)
            spend = spend_of(sets)
            trace.append((mid, spend))
            if abs(spend - r) <= SPEND_REL_TOL * r:
                beta_star = mid
                break
            if spend > r:
                lo = mid
            else:
                hi = mid
        if beta_star is None:
            raise NumericalError(
                "water-level bisection did not converge: bracket "
                f"[{lo:.17g}, {hi:.17g}], spend at last iterate {spend:.17g}, budget {r:.17g}; "
                "the spend curve may jump here (flat comparison signal at the level)"
            )

    schedule = BangBangSchedule(
        channels=tuple(
            ChannelSchedule(u_max=ch.u_max, intervals=s)
            for ch, s in zip(problem.channels, sets)
        )
    )
    gain = closed_form_gain(profiles, schedule)
    conditions = check_conditions(problem, sd)
    certificate = []
    ones_proj = sd.vectors[:, 0]
    switch_counts = schedule.switch_counts(T)
    for k, ch in enumerate(problem.channels):
        shift = beta_star * cost_rates[k] / ch.u_max
        realized = switch_counts[k]
        bg = bound_general(sd, ch.b)
        bl = bound_linear(sd, lam, ch.b, shift)
        blsup = bound_linear(sd, lam, ch.b, "sup")
        certificate.append(
            ChannelCertificate(
                channel=k + 1,
                realized_switches=realized,
                bound_general=bg,
                bound_linear_shifted=bl,
                bound_linear_sup=blsup,
                threshold_shift=shift,
                theorem_applicable=conditions.channels[k].theorem_applicable,
            )
        )
        # The shift-aware sign-variation bound holds unconditionally; the
        # spectral-support bound additionally needs the constant mode present
        # (a channel with zero total reach plus a positive level gains one
        # extra admissible crossing).
        assert realized <= bl, f"channel {k + 1}: {realized} switches exceed variation bound {bl}"
        if abs(float(ones_proj @ ch.b)) > 1e-10 * max(1.0, float(np.linalg.norm(ch.b))):
            assert realized <= bg, f"channel {k + 1}: {realized} switches exceed support bound {bg}"

    return WaterfillSolution(
        beta_star=float(beta_star),
        schedule=schedule,
        spend=float(spend),
        binding=beta_star > 0.0,
        objective_gain=float(gain),
        certificate=tuple(certificate),
        bisection_trace=tuple(trace),
    )


def solve(problem: CampaignProblem, resolution: int | None = None) -> WaterfillSolution:
    """Exact optimal schedule for the separable linear objective.

    Raises ContractError for other objective kinds; the sigmoid surrogate
    loop lives in the sigmoid module.
    """
    if problem.objective.kind != "linear":
        raise ContractError(
            "water-filling solve requires the linear objective; use solve_sigmoid "
            "for the sigmoid kind"
        )
    return solve_with_costate(problem, problem.objective.p, resolution=resolution)
