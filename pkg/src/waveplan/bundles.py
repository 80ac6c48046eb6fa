"""Bundled example problems used by the CLI docs and the acceptance suite.

The 7-agent campaign uses the printed parameter values (voting weights,
channel gains, unit costs, T = 10, r = 11) on a documented connected
topology: agents 1-2-3-5 form the channel-1 neighborhood ring, agent 4
(the reliable voter) hangs off agent 2 and bridges to the 6-7 periphery.
Channel 1 has broad reach but misses the likely voter; channel 2 targets
the likely voter at the cost of reach.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .problem import CampaignProblem, Channel, CostModel, Objective, problem_to_dict
from .graph import WeightedGraph

SEVEN_AGENT_EDGES: tuple[tuple[int, int], ...] = (
    (1, 2),
    (2, 3),
    (3, 5),
    (1, 5),
    (2, 4),
    (4, 6),
    (6, 7),
    (5, 7),
)

_P = (0.03, 0.02, 0.10, 1.00, 0.06, 0.07, 0.01)
_B1 = (1.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0)
_B2 = (-1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0)


def _seven_agent_graph() -> WeightedGraph:
    return WeightedGraph(n=7, edges=tuple((i, j, 1.0) for i, j in SEVEN_AGENT_EDGES))


def _seven_agent_channels() -> tuple[Channel, Channel]:
    return (
        Channel(b=np.array(_B1), cost=CostModel("linear", 1.0), u_max=1.0),
        Channel(b=np.array(_B2), cost=CostModel("linear", 1.0), u_max=1.0),
    )


def seven_agent_problem() -> CampaignProblem:
    """Two equal-cost channels, linear objective, budget 11 over horizon 10."""
    return CampaignProblem(
        graph=_seven_agent_graph(),
        channels=_seven_agent_channels(),
        objective=Objective(kind="linear", p=np.array(_P)),
        T=10.0,
        r=11.0,
        x0=np.zeros(7),
    )


def seven_agent_sigmoid_problem() -> CampaignProblem:
    """Sigmoid variant calibrated so agent 3 is the lone late decider.

    Threshold 3.16 sits midway between agent 3's terminal opinion under the
    threshold-slope initializer and under the surrogate concentrated on
    agent 3, so the late-decider loop has a genuine fixed point. Agent 4 is
    already convincible (low threshold); the periphery is out of reach.
    """
    return CampaignProblem(
        graph=_seven_agent_graph(),
        channels=_seven_agent_channels(),
        objective=Objective(
            kind="sigmoid",
            p=np.array(_P),
            alpha=np.full(7, 2.0),
            theta=np.array([9.0, 9.0, 3.16, 1.8, 9.0, 9.0, 9.0]),
        ),
        T=10.0,
        r=11.0,
        x0=np.zeros(7),
    )


BUNDLED = {
    "seven_agents": seven_agent_problem,
    "seven_agents_sigmoid": seven_agent_sigmoid_problem,
}


def write_bundled_problems(directory: str | Path) -> list[Path]:
    """Write every bundled problem as JSON; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, factory in BUNDLED.items():
        path = directory / f"{name}.json"
        path.write_text(json.dumps(problem_to_dict(factory()), indent=2) + "\n")
        paths.append(path)
    return paths
