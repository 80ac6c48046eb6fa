"""Approximate allocation for the separable sigmoid objective via late deciders.

The sigmoid costate concentrates on agents whose terminal opinion lands near
their threshold. The loop alternates: simulate the candidate schedule,
reclassify the late deciders, rebuild the surrogate costate (alpha_j * p_j / 2
on the set, zero off it), and re-run the water-filling engine. The true
sigmoid objective arbitrates, so the approximation is never adopted blind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, objective_value, simulate
from .errors import ContractError
from .problem import CampaignProblem, Objective, require_valid
from .waterfill import WaterfillSolution, solve_with_costate


@dataclass(frozen=True)
class LateDeciderSet:
    """Agents (1-based) whose terminal opinion lies within epsilon of their threshold."""

    epsilon: float
    members: tuple[int, ...]


@dataclass(frozen=True)
class SurrogateCostate:
    """Costate supported on the late-decider set: alpha_j p_j / 2 there, 0 elsewhere."""

    lam_bar: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.lam_bar, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "lam_bar", arr)


@dataclass(frozen=True)
class IterationRecord:
    index: int
    members: tuple[int, ...]
    beta_star: float
    spend: float
    objective: float


@dataclass(frozen=True)
class SigmoidSolution:
    solution: WaterfillSolution
    objective: float
    chosen_iteration: int
    iterations: tuple[IterationRecord, ...]
    converged: bool
    no_late_deciders: bool


def late_deciders(traj: Trajectory, obj: Objective, epsilon: float) -> LateDeciderSet:
    """Classify by the strict inequality |x_j(T) - theta_j| < epsilon."""
    if obj.kind != "sigmoid":
        raise ContractError("late deciders are defined for the sigmoid objective")
    if not (epsilon > 0.0):
        raise ContractError(f"epsilon must be positive, got {epsilon}")
    gap = np.abs(traj.terminal_state - obj.theta)
    members = tuple(int(j + 1) for j in np.flatnonzero(gap < epsilon))
    return LateDeciderSet(epsilon=float(epsilon), members=members)


def surrogate_costate(obj: Objective, members: tuple[int, ...]) -> SurrogateCostate:
    lam = np.zeros_like(obj.p)
    idx = [j - 1 for j in members]
    lam[idx] = obj.alpha[idx] * obj.p[idx] / 2.0
    return SurrogateCostate(lam_bar=lam)


def default_epsilon(obj: Objective) -> float:
    """0.05 times the threshold scale, floored at 0.05 for all-zero thresholds."""
    return 0.05 * max(float(np.median(np.abs(obj.theta))), 1.0)


def solve_sigmoid(
    problem: CampaignProblem,
    epsilon: float | None = None,
    max_iters: int = 10,
    steps: int = 4096,
    resolution: int | None = None,
) -> SigmoidSolution:
    """Iterate the late-decider surrogate to consistency and keep the best iterate.

    Iteration 0 linearizes every sigmoid at its threshold (slope alpha_i
    p_i / 4); subsequent iterations use the surrogate supported on the
    current late-decider set (alpha_j p_j / 2, the factor-2 gap to the slope
    is deliberate). The loop stops when a late-decider set repeats or
    max_iters is reached, and the returned iterate is the one with the best
    true sigmoid objective. An empty late-decider set ends the loop with the
    ``no_late_deciders`` flag raised, since the surrogate is uninformative
    there.
    """
    if problem.objective.kind != "sigmoid":
        raise ContractError("solve_sigmoid requires the sigmoid objective")
    if max_iters < 1:
        raise ContractError(f"max_iters must be at least 1, got {max_iters}")
    require_valid(problem)
    obj = problem.objective
    eps = default_epsilon(obj) if epsilon is None else float(epsilon)
    if not (eps > 0.0):
        raise ContractError(f"epsilon must be positive, got {eps}")

    def evaluate(lam: np.ndarray, index: int):
        sol = solve_with_costate(problem, lam, resolution=resolution)
        traj = simulate(problem, sol.schedule, steps=steps)
        value = objective_value(obj, traj.terminal_state)
        members = late_deciders(traj, obj, eps).members
        record = IterationRecord(
            index=index,
            members=members,
            beta_star=sol.beta_star,
            spend=sol.spend,
            objective=value,
        )
        return sol, record

    solutions = []
    records: list[IterationRecord] = []
    seen: list[tuple[int, ...]] = []

    sol, rec = evaluate(obj.alpha * obj.p / 4.0, 0)
    solutions.append(sol)
    records.append(rec)
    seen.append(rec.members)

    converged = False
    no_late = len(rec.members) == 0
    for k in range(1, max_iters + 1):
        if no_late:
            break
        lam_bar = surrogate_costate(obj, records[-1].members).lam_bar
        sol, rec = evaluate(lam_bar, k)
        solutions.append(sol)
        records.append(rec)
        if len(rec.members) == 0:
            no_late = True
            break
        if rec.members in seen:
            converged = True
            break
        seen.append(rec.members)

    best = max(range(len(records)), key=lambda i: (records[i].objective, -i))
    return SigmoidSolution(
        solution=solutions[best],
        objective=records[best].objective,
        chosen_iteration=best,
        iterations=tuple(records),
        converged=converged,
        no_late_deciders=no_late,
    )
