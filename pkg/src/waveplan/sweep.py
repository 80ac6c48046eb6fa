"""Bound sweep over random geometric graphs: how the switch bounds scale with n.

Each instance draws a seeded geometric graph and a uniformly random positive
objective weight vector; the channel reaches only the first agent. Per
instance the sweep records the spectral-support bound, the sign-variation
bound at level zero and its sup over levels, and the algebraic connectivity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import bound_general, bound_linear
from .graph import build_laplacian, random_geometric_graph, spectral_decompose


@dataclass(frozen=True)
class SweepRow:
    n: int
    instance: int
    seed: int
    bound_general: int
    bound_linear_zero: int
    bound_linear_sup: int
    eigenvalue_gap: float


@dataclass(frozen=True)
class SweepAggregate:
    n: int
    instances: int
    mean_bound_general: float
    std_bound_general: float
    mean_bound_linear_zero: float
    std_bound_linear_zero: float
    mean_bound_linear_sup: float
    std_bound_linear_sup: float
    mean_eigenvalue_gap: float


def default_radius(n: int) -> float:
    """Connectivity-comfortable geometric radius, shrinking like sqrt(log n / n)."""
    return min(1.0, 1.7 * math.sqrt(math.log(n) / (math.pi * n)))


def sweep_instance(n: int, instance: int, base_seed: int, radius: float | None = None) -> SweepRow:
    """One (n, instance) cell: seeded graph, seeded random p, b = first basis vector."""
    if radius is None:
        radius = default_radius(n)
    graph_seed = base_seed * 1_000_003 + n * 1_009 + instance
    graph, used_seed = random_geometric_graph(n, radius, graph_seed)
    sd = spectral_decompose(build_laplacian(graph))
    rng = np.random.default_rng([base_seed, n, instance])
    p = rng.random(n)
    b = np.zeros(n)
    b[0] = 1.0
    xi = sd.eigenvalues
    return SweepRow(
        n=n,
        instance=instance,
        seed=used_seed,
        bound_general=bound_general(sd, b),
        bound_linear_zero=bound_linear(sd, p, b, 0.0),
        bound_linear_sup=bound_linear(sd, p, b, "sup"),
        eigenvalue_gap=float(xi[1]),
    )


def run_sweep(
    ns: list[int], instances: int, base_seed: int, radius: float | None = None
) -> tuple[list[SweepRow], list[SweepAggregate]]:
    """All rows plus per-n aggregates. Instances are independent, so order never matters."""
    rows = [
        sweep_instance(n, i, base_seed, radius=radius) for n in ns for i in range(instances)
    ]
    aggregates = []
    for n in ns:
        sub = [r for r in rows if r.n == n]
        bg = np.array([r.bound_general for r in sub], dtype=np.float64)
        b0 = np.array([r.bound_linear_zero for r in sub], dtype=np.float64)
        bs = np.array([r.bound_linear_sup for r in sub], dtype=np.float64)
        gap = np.array([r.eigenvalue_gap for r in sub], dtype=np.float64)
        aggregates.append(
            SweepAggregate(
                n=n,
                instances=len(sub),
                mean_bound_general=float(bg.mean()),
                std_bound_general=float(bg.std()),
                mean_bound_linear_zero=float(b0.mean()),
                std_bound_linear_zero=float(b0.std()),
                mean_bound_linear_sup=float(bs.mean()),
                std_bound_linear_sup=float(bs.std()),
                mean_eigenvalue_gap=float(gap.mean()),
            )
        )
    return rows, aggregates
