"""Forward opinion dynamics, objective evaluation, and the closed-form control gain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costate import ChannelProfile, _stable_sigmoid, integrate_h
from .errors import ContractError
from .graph import build_laplacian
from .problem import CampaignProblem, Objective


@dataclass(frozen=True)
class Trajectory:
    """Sampled state path with the running spend (stored sign-positive)."""

    times: np.ndarray
    states: np.ndarray
    spend_accum: np.ndarray

    def __post_init__(self) -> None:
        for name in ("times", "states", "spend_accum"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def terminal_state(self) -> np.ndarray:
        return self.states[-1]


def _grid_with_events(T: float, steps: int, events: np.ndarray) -> np.ndarray:
    base = np.linspace(0.0, T, steps + 1)
    events = events[(events > 0.0) & (events < T)]
    return np.unique(np.concatenate([base, events]))


def simulate(problem: CampaignProblem, schedule, steps: int = 4096) -> Trajectory:
    """Integrate dx/dt = -L x + B u + e under a bang-bang schedule.

    Classical 4th-order one-step method on a grid refined so that every
    schedule switch time and drift breakpoint is a node: the control and
    drift are constant inside each piece, so no discontinuity is straddled
    and the integrator keeps its order. The spend accumulator is exact
    interval arithmetic, not quadrature.
    """
    if steps < 64:
        raise ContractError(f"need at least 64 steps, got {steps}")
    if len(schedule.channels) != problem.m:
        raise ContractError(
            f"schedule has {len(schedule.channels)} channels, problem has {problem.m}"
        )
    T = problem.T
    lap = build_laplacian(problem.graph)
    a_mat = -lap.matrix
    b_mat = np.column_stack([ch.b for ch in problem.channels])

    events = [problem.drift.breakpoints]
    for cs in schedule.channels:
        for lo, hi in cs.intervals:
            if not (0.0 <= lo <= hi <= T):
                raise ContractError(f"schedule interval ({lo}, {hi}) outside [0, {T}]")
            events.append(np.array([lo, hi]))
    ts = _grid_with_events(T, steps, np.concatenate(events))

    mids = 0.5 * (ts[:-1] + ts[1:])
    n_pieces = mids.size

    # Piecewise-constant control levels and cost rates per integration piece.
    u = np.zeros((n_pieces, problem.m))
    cost_rate = np.zeros(n_pieces)
    for k, (cs, ch) in enumerate(zip(schedule.channels, problem.channels)):
        if not cs.intervals:
            continue
        ivs = sorted(cs.intervals)
        starts = np.array([iv[0] for iv in ivs])
        ends = np.array([iv[1] for iv in ivs])
        idx = np.searchsorted(starts, mids, side="right") - 1
        on = (idx >= 0) & (mids < ends[np.clip(idx, 0, None)])
        u[on, k] = cs.u_max
        cost_rate[on] += ch.cost(cs.u_max)

    drift_vals = np.stack([problem.drift.at(t) for t in mids])
    forcing = u @ b_mat.T + drift_vals

    states = np.empty((ts.size, problem.n))
    spend = np.empty(ts.size)
    states[0] = problem.x0
    spend[0] = 0.0
    x = np.array(problem.x0, dtype=np.float64)
    for k in range(n_pieces):
        h = ts[k + 1] - ts[k]
        c = forcing[k]
        k1 = a_mat @ x + c
        k2 = a_mat @ (x + 0.5 * h * k1) + c
        k3 = a_mat @ (x + 0.5 * h * k2) + c
        k4 = a_mat @ (x + h * k3) + c
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = x
        spend[k + 1] = spend[k] + cost_rate[k] * h
    return Trajectory(times=ts, states=states, spend_accum=spend)


def objective_value(obj: Objective, xT: np.ndarray) -> float:
    """J at the terminal state; sigmoid evaluation is overflow-safe."""
    x = np.asarray(xT, dtype=np.float64)
    if obj.kind == "linear":
        return float(obj.p @ x)
    if obj.kind == "sigmoid":
        return float(np.sum(obj.p * _stable_sigmoid(obj.alpha * (x - obj.theta))))
    raise ContractError(f"unknown objective kind {obj.kind!r}")


def closed_form_gain(profiles: list[ChannelProfile], schedule) -> float:
    """Exact control contribution to the linear objective, independent of x0 and drift.

    Each unit of effort on channel i at time t is worth h_i(t), so the gain
    is u_max_i times the integral of h_i over the on-intervals.
    """
    if len(profiles) != len(schedule.channels):
        raise ContractError("one profile per schedule channel is required")
    total = 0.0
    for profile, cs in zip(profiles, schedule.channels):
        for lo, hi in cs.intervals:
            total += cs.u_max * integrate_h(profile, lo, hi)
    return float(total)
