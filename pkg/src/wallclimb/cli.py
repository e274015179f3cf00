"""Command-line surface: plan, sweep, check, report, scenario.

Exit code 0 only when every acceptance floor passes; failures print
where and why (stage, round/instant, constraint family) and exit 1.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .checker import check_trajectory_file
from .errors import WallclimbError
from .pipeline import feasibility_sweep, plan_pipeline
from .scenarios import (
    BUILTIN_SCENARIOS,
    load_scenario,
    save_scenario,
    scenario_angled,
)
from .trajectory import emit_force_report, emit_trajectory, load_trajectory


def _parse_grid(spec: str, scale=1.0):
    """start:stop:count -> inclusive linear grid."""
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {spec!r}") from exc
    if n < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    return [v * scale for v in np.linspace(lo, hi, n)]


def _load_or_build(spec: str):
    if spec in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[spec]()
    return load_scenario(spec)


def cmd_scenario(args) -> int:
    if args.name == "angled":
        scn = scenario_angled(np.deg2rad(args.alpha), args.mu, rounds=args.rounds)
    elif args.name in BUILTIN_SCENARIOS:
        scn = BUILTIN_SCENARIOS[args.name]()
    else:
        print(f"unknown scenario {args.name!r}; choose from {sorted(BUILTIN_SCENARIOS)}")
        return 2
    save_scenario(scn, args.output)
    print(f"wrote scenario '{scn.name}' to {args.output}")
    return 0


def cmd_plan(args) -> int:
    scenario = _load_or_build(args.scenario)
    try:
        record = plan_pipeline(scenario)
    except WallclimbError as exc:
        print(f"plan failed: {exc}")
        return 1
    if args.trajectory:
        emit_trajectory(record, args.trajectory)
        print(f"wrote trajectory to {args.trajectory}")
    if args.report:
        emit_force_report(record, args.report)
        print(f"wrote force report to {args.report}")
    worst_mu = min(r.safety.s_mu for r in record.rounds)
    worst_tau = min(r.safety.s_tau for r in record.rounds)
    print(
        f"planned {len(record.rounds)} rounds, {record.num_instants} instants; "
        f"worst S_mu {worst_mu:.3f}, worst S_tau {worst_tau:.3f}"
    )
    return 0


def cmd_sweep(args) -> int:
    if args.template != "angled":
        print("only the built-in 'angled' template supports sweeping")
        return 2
    alphas = _parse_grid(args.alpha, scale=np.pi / 180.0)
    mus = _parse_grid(args.mu)
    cells = feasibility_sweep(alphas, mus, full=args.full, workers=args.workers)
    lines = ["alpha_deg,mu,label"]
    for c in cells:
        lines.append(f"{np.rad2deg(c.alpha):.6g},{c.mu:.6g},{c.label}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {len(cells)} cells to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    report = check_trajectory_file(args.trajectory)
    print(
        f"checked {len(report.instants)} instants: "
        f"worst force residual {report.worst_force_residual:.3g}, "
        f"worst moment residual {report.worst_moment_residual:.3g}"
    )
    if report.ok:
        print("all instants satisfy equilibrium, cones, torque bounds, and floors")
        return 0
    for c in report.failures()[:10]:
        print(
            f"  FAIL round {c.round_index} instant {c.instant_index}: "
            f"force {c.force_residual:.3g}, moment {c.moment_residual:.3g}, "
            f"cone {c.cone_violation:.3g}, torque {c.torque_violation:.3g}, "
            f"S_mu {c.s_mu:.3f}, S_tau {c.s_tau:.3f}"
        )
    return 1


def cmd_report(args) -> int:
    record = load_trajectory(args.trajectory)
    emit_force_report(record, args.output)
    print(f"wrote force report to {args.output}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="wallclimb",
        description="Two-stage motion planner for climbing between two walls",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="reserved; the pipeline is deterministic and ignores it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="emit a built-in scenario file")
    p.add_argument("name", choices=sorted(BUILTIN_SCENARIOS))
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--alpha", type=float, default=20.0, help="wall angle [deg] (angled only)")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--rounds", type=int, default=4)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("plan", help="run the full pipeline on a scenario")
    p.add_argument("scenario", help="scenario file or built-in name (steps, obstacle, angled)")
    p.add_argument("-t", "--trajectory", help="trajectory output file (YAML)")
    p.add_argument("-r", "--report", help="force report output file (CSV)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="feasibility sweep over (alpha, mu)")
    p.add_argument("template", help="sweep template (built-in: angled)")
    p.add_argument("--alpha", required=True, help="deg grid start:stop:count")
    p.add_argument("--mu", required=True, help="mu grid start:stop:count")
    p.add_argument("-o", "--output", help="CSV output path (stdout otherwise)")
    p.add_argument("--full", action="store_true", help="full multi-round plan per cell")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="independently verify a trajectory file")
    p.add_argument("trajectory")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("report", help="regenerate the force report from a trajectory")
    p.add_argument("trajectory")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
