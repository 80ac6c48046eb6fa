"""Campaign problem definition, validation findings, and structure-theorem diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import (
    Laplacian,
    SpectralDecomposition,
    WeightedGraph,
    build_laplacian,
    graph_from_dict,
    graph_to_dict,
)


def _as_readonly(arr, dtype=np.float64) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CostModel:
    """Concave power-family cost c(u) = v * u**a with a in (0, 1]; kind 'linear' pins a = 1."""

    kind: str
    v: float
    a: float = 1.0

    def __call__(self, u: float) -> float:
        return self.v * float(u) ** self.a


@dataclass(frozen=True)
class Channel:
    """Influence channel: per-agent gain vector, cost model, and effort ceiling."""

    b: np.ndarray
    cost: CostModel
    u_max: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", _as_readonly(self.b))

    @property
    def max_cost_rate(self) -> float:
        """Cost per unit time while the channel runs flat out."""
        return self.cost(self.u_max)


@dataclass(frozen=True)
class Objective:
    """Terminal objective: linear sum(p * x) or per-agent sigmoids with sharpness alpha and threshold theta."""

    kind: str
    p: np.ndarray
    alpha: np.ndarray | None = None
    theta: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _as_readonly(self.p))
        if self.alpha is not None:
            object.__setattr__(self, "alpha", _as_readonly(self.alpha))
        if self.theta is not None:
            object.__setattr__(self, "theta", _as_readonly(self.theta))


@dataclass(frozen=True)
class Drift:
    """Piecewise-constant exogenous drift: values[k] applies on [breakpoints[k], breakpoints[k+1])."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", _as_readonly(self.breakpoints))
        object.__setattr__(self, "values", _as_readonly(np.atleast_2d(self.values)))

    @staticmethod
    def zero(n: int) -> "Drift":
        return Drift(breakpoints=np.array([0.0]), values=np.zeros((1, n)))

    def at(self, t: float) -> np.ndarray:
        k = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return self.values[max(k, 0)]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)


@dataclass(frozen=True)
class CampaignProblem:
    """Everything a solve needs: network, channels, objective, horizon T, budget r, start state, drift."""

    graph: WeightedGraph
    channels: tuple[Channel, ...]
    objective: Objective
    T: float
    r: float
    x0: np.ndarray
    drift: Drift | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "x0", _as_readonly(self.x0))
        if self.drift is None:
            object.__setattr__(self, "drift", Drift.zero(self.graph.n))

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return len(self.channels)


def validate_problem(p: CampaignProblem) -> list[str]:
    """Collect every violated invariant as a human-readable finding.

    Returns an empty list iff the problem is well-formed; never raises.
    """
    findings: list[str] = []
    n = p.n

    if p.m < 1:
        findings.append("problem needs at least one channel")
    for k, ch in enumerate(p.channels, start=1):
        if ch.b.shape != (n,):
            findings.append(f"channel {k}: gain vector has shape {ch.b.shape}, expected ({n},)")
        elif not np.any(ch.b):
            findings.append(f"channel {k} has empty reach")
        if not (ch.u_max > 0.0 and np.isfinite(ch.u_max)):
            findings.append(f"channel {k}: u_max must be finite and positive, got {ch.u_max}")
        if ch.cost.kind not in ("linear", "power"):
            findings.append(f"channel {k}: unknown cost kind {ch.cost.kind!r}")
        if not (ch.cost.v > 0.0):
            findings.append(f"channel {k}: cost rate v must be positive, got {ch.cost.v}")
        if ch.cost.kind == "linear" and ch.cost.a != 1.0:
            findings.append(f"channel {k}: linear cost requires a = 1, got {ch.cost.a}")
        if ch.cost.kind == "power" and not (0.0 < ch.cost.a <= 1.0):
            findings.append(f"channel {k}: power cost exponent must lie in (0, 1], got {ch.cost.a}")

    obj = p.objective
    if obj.kind not in ("linear", "sigmoid"):
        findings.append(f"unknown objective kind {obj.kind!r}")
    if obj.p.shape != (n,):
        findings.append(f"objective weights have shape {obj.p.shape}, expected ({n},)")
    else:
        if np.any(obj.p < 0.0):
            findings.append("objective weights must be nonnegative")
        if not np.any(obj.p > 0.0):
            findings.append("objective needs at least one positive weight")
    if obj.kind == "sigmoid":
        if obj.alpha is None or obj.theta is None:
            findings.append("sigmoid objective requires alpha and theta vectors")
        else:
            if obj.alpha.shape != (n,) or obj.theta.shape != (n,):
                findings.append("sigmoid alpha/theta must match the agent count")
            elif np.any(obj.alpha <= 0.0):
                findings.append("sigmoid sharpness alpha must be positive")

    if not (p.T > 0.0):
        findings.append(f"horizon T must be positive, got {p.T}")
    if not (p.r > 0.0):
        findings.append("budget must be positive")
    if p.x0.shape != (n,):
        findings.append(f"initial state has shape {p.x0.shape}, expected ({n},)")

    d = p.drift
    if d.values.shape[0] != d.breakpoints.shape[0]:
        findings.append("drift needs one value row per breakpoint")
    elif d.values.shape[1] != n:
        findings.append(f"drift values have width {d.values.shape[1]}, expected {n}")
    if d.breakpoints.size:
        if d.breakpoints[0] != 0.0:
            findings.append("drift breakpoints must start at 0")
        if np.any(np.diff(d.breakpoints) <= 0.0):
            findings.append("drift breakpoints must be strictly increasing")
        if p.T > 0.0 and np.any(d.breakpoints >= p.T) and d.breakpoints.size > 1:
            findings.append("drift breakpoints must lie within [0, T)")
    else:
        findings.append("drift needs at least one breakpoint at 0")

    return findings


def require_valid(p: CampaignProblem) -> None:
    findings = validate_problem(p)
    if findings:
        raise ValidationError("; ".join(findings))


@dataclass(frozen=True)
class ChannelConditions:
    """Diagnostics for one channel against the structure theorem's hypotheses."""

    channel: int
    total_reach: float
    reach_nonzero: bool
    controllability_rank: int
    controllable: bool
    theorem_applicable: bool


@dataclass(frozen=True)
class ConditionReport:
    channels: tuple[ChannelConditions, ...]

    @property
    def all_applicable(self) -> bool:
        return all(c.theorem_applicable for c in self.channels)


def controllability_rank(lap: Laplacian, b: np.ndarray) -> int:
    """Numerical rank of [L b | L^2 b | ... | L^n b] via singular values.

    The relative threshold is 1e-9 times the largest singular value; exact
    rank is ill-posed in floating point. Note that every column is
    orthogonal to the all-ones vector, so the rank never reaches n; the
    controllability flag is a diagnostic, not a gate.
    """
    cols = []
    w = np.asarray(b, dtype=np.float64)
    for _ in range(lap.n):
        w = lap.matrix @ w
        cols.append(w)
    k = np.column_stack(cols)
    sigma = np.linalg.svd(k, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > 1e-9 * sigma[0]))


def check_conditions(p: CampaignProblem, sd: SpectralDecomposition) -> ConditionReport:
    """Evaluate, per channel, whether the bang-bang structure theorem certifies it.

    Strictly concave (power) costs need nonzero total reach; linear costs
    need the controllability diagnostic. When a flag is false the solver
    still runs but tags its output as not structure-certified.
    """
    lap = build_laplacian(p.graph)
    out = []
    for k, ch in enumerate(p.channels, start=1):
        reach = float(np.sum(ch.b))
        reach_nonzero = abs(reach) > 1e-12 * max(1.0, float(np.sum(np.abs(ch.b))))
        rank = controllability_rank(lap, ch.b)
        controllable = rank == p.n
        applicable = reach_nonzero if ch.cost.kind == "power" else controllable
        out.append(
            ChannelConditions(
                channel=k,
                total_reach=reach,
                reach_nonzero=reach_nonzero,
                controllability_rank=rank,
                controllable=controllable,
                theorem_applicable=applicable,
            )
        )
    return ConditionReport(channels=tuple(out))


# --- JSON problem format -----------------------------------------------------


def problem_to_dict(p: CampaignProblem) -> dict:
    obj: dict = {"kind": p.objective.kind, "p": p.objective.p.tolist()}
    if p.objective.kind == "sigmoid":
        obj["alpha"] = p.objective.alpha.tolist()
        obj["theta"] = p.objective.theta.tolist()
    return {
        "graph": graph_to_dict(p.graph),
        "channels": [
            {
                "b": ch.b.tolist(),
                "cost": {"kind": ch.cost.kind, "v": ch.cost.v, "a": ch.cost.a},
                "u_max": ch.u_max,
            }
            for ch in p.channels
        ],
        "objective": obj,
        "T": p.T,
        "r": p.r,
        "x0": p.x0.tolist(),
        "drift": {
            "breakpoints": p.drift.breakpoints.tolist(),
            "values": p.drift.values.tolist(),
        },
    }


def problem_from_dict(d: dict) -> CampaignProblem:
    try:
        graph = graph_from_dict(d["graph"])
        channels = tuple(
            Channel(
                b=np.array(c["b"], dtype=np.float64),
                cost=CostModel(
                    kind=str(c["cost"]["kind"]),
                    v=float(c["cost"]["v"]),
                    a=float(c["cost"].get("a", 1.0)),
                ),
                u_max=float(c["u_max"]),
            )
            for c in d["channels"]
        )
        o = d["objective"]
        objective = Objective(
            kind=str(o["kind"]),
            p=np.array(o["p"], dtype=np.float64),
            alpha=np.array(o["alpha"], dtype=np.float64) if "alpha" in o else None,
            theta=np.array(o["theta"], dtype=np.float64) if "theta" in o else None,
        )
        drift = None
        if "drift" in d:
            drift = Drift(
                breakpoints=np.array(d["drift"]["breakpoints"], dtype=np.float64),
                values=np.array(d["drift"]["values"], dtype=np.float64),
            )
        return CampaignProblem(
            graph=graph,
            channels=channels,
            objective=objective,
            T=float(d["T"]),
            r=float(d["r"]),
            x0=np.array(d["x0"], dtype=np.float64),
            drift=drift,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed problem object: missing or bad field {exc}") from exc
