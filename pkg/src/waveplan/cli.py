"""Command-line front end: problem ingestion, solves, sweeps, and CSV/JSON artifacts.

Exit status: 0 on success, 2 on validation findings or malformed input,
3 on numerical failure. All randomness flows from the --seed flag; no
command reads ambient entropy or the clock, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import switch_bound_report
from .costate import TerminalCostate, channel_profile, eval_h
from .dynamics import objective_value, simulate
from .errors import ContractError, NumericalError, ValidationError
from .graph import build_laplacian, spectral_decompose
from .oracle import EnumerationSpec, enumerate_best, grid_slack
from .problem import CampaignProblem, problem_from_dict, validate_problem
from .sigmoid import solve_sigmoid
from .sweep import run_sweep
from .waterfill import BangBangSchedule, ChannelSchedule, WaterfillSolution, solve, threshold_profile


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def _load_problem(path: str) -> CampaignProblem:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"problem file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    problem = problem_from_dict(payload)
    findings = validate_problem(problem)
    if findings:
        raise ValidationError("problem failed validation: " + "; ".join(findings))
    return problem


def schedule_to_dict(schedule: BangBangSchedule, T: float) -> dict:
    return {
        "T": T,
        "channels": [
            {"u_max": cs.u_max, "on_intervals": [[lo, hi] for lo, hi in cs.intervals]}
            for cs in schedule.channels
        ],
    }


def schedule_from_dict(d: dict) -> BangBangSchedule:
    try:
        channels = tuple(
            ChannelSchedule(
                u_max=float(c["u_max"]),
                intervals=tuple((float(lo), float(hi)) for lo, hi in c["on_intervals"]),
            )
            for c in d["channels"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed schedule object: {exc}") from exc
    return BangBangSchedule(channels=channels)


def _summary_dict(problem: CampaignProblem, sol: WaterfillSolution) -> dict:
    return {
        "beta_star": sol.beta_star,
        "spend": sol.spend,
        "budget": problem.r,
        "binding": sol.binding,
        "objective_gain": sol.objective_gain,
        "structure_certified": sol.structure_certified,
        "certificate": [
            {
                "channel": c.channel,
                "realized_switches": c.realized_switches,
                "bound_general": c.bound_general,
                "bound_linear_shifted": c.bound_linear_shifted,
                "bound_linear_sup": c.bound_linear_sup,
                "threshold_shift": c.threshold_shift,
                "theorem_applicable": c.theorem_applicable,
            }
            for c in sol.certificate
        ],
    }


def _cmd_solve(args) -> int:
    problem = _load_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sol = solve(problem, resolution=args.resolution)
    _write_json(out / "schedule.json", schedule_to_dict(sol.schedule, problem.T))
    _write_json(out / "summary.json", _summary_dict(problem, sol))
    if args.emit_plot_data:
        sd = spectral_decompose(build_laplacian(problem.graph))
        lamT = TerminalCostate(lam=problem.objective.p)
        ts = np.linspace(0.0, problem.T, args.plot_points)
        hs = [channel_profile(sd, lamT, ch.b, problem.T) for ch in problem.channels]
        gs = [threshold_profile(h, ch) for h, ch in zip(hs, problem.channels)]
        hcols = [eval_h(h, ts) for h in hs]
        _write_csv(
            out / "profiles.csv",
            ["t"] + [f"h_{k + 1}" for k in range(problem.m)],
            ([float(t)] + [float(c[i]) for c in hcols] for i, t in enumerate(ts)),
        )
        cols = [eval_h(g, ts) for g in gs]
        header = ["t"] + [f"g_{k + 1}" for k in range(problem.m)] + ["beta"]
        rows = (
            [float(t)] + [float(c[i]) for c in cols] + [sol.beta_star]
            for i, t in enumerate(ts)
        )
        _write_csv(out / "waterline.csv", header, rows)
        _write_csv(
            out / "bisection.csv",
            ["beta", "spend"],
            ([float(b), float(s)] for b, s in sol.bisection_trace),
        )
    print(f"beta_star={_fmt(sol.beta_star)} spend={_fmt(sol.spend)} binding={sol.binding}")
    return 0


def _cmd_simulate(args) -> int:
    problem = _load_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.schedule:
        with open(args.schedule) as fh:
            schedule = schedule_from_dict(json.load(fh))
    else:
        schedule = BangBangSchedule(
            channels=tuple(ChannelSchedule(u_max=ch.u_max, intervals=()) for ch in problem.channels)
        )
    traj = simulate(problem, schedule, steps=args.steps)
    header = ["t"] + [f"x_{k + 1}" for k in range(problem.n)] + ["spend"]
    rows = (
        [float(traj.times[i])] + [float(v) for v in traj.states[i]] + [float(traj.spend_accum[i])]
        for i in range(traj.times.size)
    )
    _write_csv(out / "trajectory.csv", header, rows)
    value = objective_value(problem.objective, traj.terminal_state)
    print(f"terminal objective={_fmt(value)} spend={_fmt(float(traj.spend_accum[-1]))}")
    return 0


def _cmd_bounds(args) -> int:
    problem = _load_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sd = spectral_decompose(build_laplacian(problem.graph))
    beta_star = None
    if problem.objective.kind == "linear":
        beta_star = solve(problem, resolution=args.resolution).beta_star
    report = switch_bound_report(sd, problem.channels, problem.objective.p, beta_star=beta_star)
    _write_json(
        out / "bounds.json",
        {
            "beta_star": beta_star,
            "channels": [
                {
                    "channel": c.channel,
                    "bound_general": c.general,
                    "bound_linear_at_threshold": c.linear_at_threshold,
                    "bound_linear_sup": c.linear_sup,
                    "threshold_shift": c.threshold_shift,
                }
                for c in report.channels
            ],
        },
    )
    print(f"wrote bounds for {problem.m} channels")
    return 0


def _cmd_oracle(args) -> int:
    problem = _load_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = EnumerationSpec(
        switch_grid=args.grid,
        max_switches_per_channel=args.cap,
        include_interior_levels=args.interior,
    )
    result = enumerate_best(problem, spec)
    payload = {
        "oracle_value": result.value,
        "oracle_spend": result.spend,
        "feasible_candidates": result.feasible_count,
        "candidate_count": result.candidate_count,
        "best_extreme_value": result.best_extreme_value,
        "best_interior_value": result.best_interior_value,
        "oracle_schedule": schedule_to_dict(result.schedule, problem.T),
    }
    if problem.objective.kind == "linear":
        sol = solve(problem)
        slack = grid_slack(problem, args.grid)
        payload.update(
            {
                "waterfill_gain": sol.objective_gain,
                "difference": sol.objective_gain - result.value,
                "grid_slack": slack,
            }
        )
    _write_json(out / "oracle.json", payload)
    print(f"oracle value={_fmt(result.value)} over {result.feasible_count} feasible candidates")
    return 0


def _parse_range(text: str) -> list[int]:
    if ":" in text:
        parts = [int(v) for v in text.split(":")]
        if len(parts) != 3:
            raise ValidationError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = parts
        return list(range(start, stop + 1, step))
    return [int(v) for v in text.split(",")]


def _cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ns = _parse_range(args.n)
    rows, aggregates = run_sweep(ns, args.instances, args.seed, radius=args.radius)
    _write_csv(
        out / "sweep_instances.csv",
        ["n", "instance", "seed", "bound_general", "bound_linear_zero", "bound_linear_sup", "eigenvalue_gap"],
        (
            [r.n, r.instance, r.seed, r.bound_general, r.bound_linear_zero, r.bound_linear_sup, r.eigenvalue_gap]
            for r in rows
        ),
    )
    _write_csv(
        out / "sweep_aggregate.csv",
        [
            "n",
            "instances",
            "mean_bound_general",
            "std_bound_general",
            "mean_bound_linear_zero",
            "std_bound_linear_zero",
            "mean_bound_linear_sup",
            "std_bound_linear_sup",
            "mean_eigenvalue_gap",
        ],
        (
            [
                a.n,
                a.instances,
                a.mean_bound_general,
                a.std_bound_general,
                a.mean_bound_linear_zero,
                a.std_bound_linear_zero,
                a.mean_bound_linear_sup,
                a.std_bound_linear_sup,
                a.mean_eigenvalue_gap,
            ]
            for a in aggregates
        ),
    )
    print(f"swept n={ns} with {args.instances} instances each")
    return 0


def _cmd_sigmoid(args) -> int:
    problem = _load_problem(args.problem)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = solve_sigmoid(
        problem, epsilon=args.epsilon, max_iters=args.max_iters, steps=args.steps
    )
    _write_json(out / "schedule.json", schedule_to_dict(result.solution.schedule, problem.T))
    _write_json(
        out / "iterations.json",
        {
            "chosen_iteration": result.chosen_iteration,
            "objective": result.objective,
            "converged": result.converged,
            "no_late_deciders": result.no_late_deciders,
            "iterations": [
                {
                    "index": rec.index,
                    "late_deciders": list(rec.members),
                    "beta_star": rec.beta_star,
                    "spend": rec.spend,
                    "objective": rec.objective,
                }
                for rec in result.iterations
            ],
        },
    )
    flag = " [no late deciders — surrogate uninformative]" if result.no_late_deciders else ""
    print(f"objective={_fmt(result.objective)} at iteration {result.chosen_iteration}{flag}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waveplan",
        description="Optimal influence-budget schedules over consensus networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="water-filling solve of a linear-objective problem")
    sp.add_argument("problem")
    sp.add_argument("--out", required=True)
    sp.add_argument("--resolution", type=int, default=None)
    sp.add_argument("--emit-plot-data", action="store_true")
    sp.add_argument("--plot-points", type=int, default=1024)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("simulate", help="integrate the dynamics under a schedule")
    sp.add_argument("problem")
    sp.add_argument("--out", required=True)
    sp.add_argument("--schedule", default=None)
    sp.add_argument("--steps", type=int, default=4096)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("bounds", help="switch-count bound report per channel")
    sp.add_argument("problem")
    sp.add_argument("--out", required=True)
    sp.add_argument("--resolution", type=int, default=None)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("oracle", help="brute-force enumeration versus the solver")
    sp.add_argument("problem")
    sp.add_argument("--out", required=True)
    sp.add_argument("--grid", type=int, default=12)
    sp.add_argument("--cap", type=int, default=None)
    sp.add_argument("--interior", action="store_true")
    sp.set_defaults(func=_cmd_oracle)

    sp = sub.add_parser("sweep", help="switch-bound sweep over random geometric graphs")
    sp.add_argument("--n", required=True, help="sizes as start:stop:step or comma list")
    sp.add_argument("--instances", type=int, default=50)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--radius", type=float, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("sigmoid", help="late-decider surrogate loop for sigmoid objectives")
    sp.add_argument("problem")
    sp.add_argument("--out", required=True)
    sp.add_argument("--epsilon", type=float, default=None)
    sp.add_argument("--max-iters", type=int, default=10)
    sp.add_argument("--steps", type=int, default=4096)
    sp.set_defaults(func=_cmd_sigmoid)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
