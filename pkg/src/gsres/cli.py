"""Command line interface.

Subcommands:
    optimize    run the splitting optimizer and write run artifacts
    score       estimate the detection probability of a solution file
    simulate    dump sample trajectories generated against a solution
    analyze     spiral fits, track spacing and detection attribution
    gridsearch  exhaustive (x, y, t) search for 1-sensor instances
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from gsres import analysis, backend, oracle, trace
from gsres.config import ConfigError, PROFILES, load_config, resolved_document
from gsres.dynamics import generate_trajectory
from gsres.estimator import detection_attribution, estimate_score
from gsres.optimizer import run as run_optimizer
from gsres.rng import RngStream, mix_seed
from gsres.trace import (
    RunTrace,
    TraceWriter,
    build_density,
    emit_trace,
    load_solution,
    save_solution,
    save_trajectories,
)


def _add_common(p):
    p.add_argument("--config", help="JSON config merged over the profile")
    p.add_argument("--profile", default="desk", choices=sorted(PROFILES))
    p.add_argument("--seed", type=int, help="override splitting.seed")
    p.add_argument("--threads", type=int, help="override splitting.threads")


def _load(args):
    config, scenario = load_config(args.config, args.profile)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config, scenario


def _cmd_optimize(args) -> int:
    config, scenario = _load(args)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    run_trace = RunTrace(run_seed=config.seed)
    writer = TraceWriter(os.path.join(out_dir, "trace.csv"), config.seed)

    def on_row(row):
        run_trace.rows.append(row)
        writer.write_row(row)

    def on_snapshot(iteration, solutions):
        if run_trace.densities and run_trace.densities[-1].iteration == iteration:
            return
        run_trace.densities.append(
            build_density(
                solutions, scenario.constraints.p_max, scenario.constraints.theater,
                config.density_grid, config.density_time_bins, iteration,
            )
        )

    try:
        best, best_score, _rows, _state = run_optimizer(
            config, scenario, on_row=on_row, on_snapshot=on_snapshot
        )
    finally:
        writer.close()
    run_trace.best_solution = best
    run_trace.best_score = best_score
    run_trace.attribution = detection_attribution(
        best, scenario.constraints, scenario.dynamics, scenario.criteria,
        config.trajectories_per_score, mix_seed(config.seed, 101),
    )
    run_trace.attribution_n = config.trajectories_per_score
    emit_trace(run_trace, out_dir, resolved_document(config, scenario))
    print(f"backend={backend.name()} iterations={run_trace.rows[-1]['iteration']} "
          f"best_score={best_score!r} out={out_dir}")
    return 0


def _cmd_score(args) -> int:
    config, scenario = _load(args)
    solution = load_solution(args.solution)
    n = args.trajectories or config.trajectories_per_score
    est = estimate_score(
        solution, scenario.constraints, scenario.dynamics, scenario.criteria,
        n, mix_seed(config.seed, 7), threads=config.threads,
    )
    re = "undefined" if est.relative_error is None else repr(est.relative_error)
    print(f"score={est.value!r} trajectories={est.n_trajectories} relative_error={re}")
    return 0


def _cmd_simulate(args) -> int:
    config, scenario = _load(args)
    solution = load_solution(args.solution) if args.solution else None
    if solution is None:
        from gsres.scenario import Solution

        solution = Solution(())
    rng = RngStream(mix_seed(config.seed, 13))
    trajectories = [
        generate_trajectory(solution, scenario.constraints, scenario.dynamics, rng)
        for _ in range(args.count)
    ]
    save_trajectories(args.out, trajectories, config.seed)
    n_events = sum(len(t.events) for t in trajectories)
    print(f"wrote {len(trajectories)} trajectories ({n_events} contact events) to {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    config, scenario = _load(args)
    solution = load_solution(args.solution)
    points = analysis.activation_ordered_positions(solution)
    center = scenario.dynamics.initial_position_center or scenario.carrier_entry
    lines = [f"# run_seed={config.seed}"]
    fits = {}
    for kind in (analysis.ARCHIMEDEAN, analysis.LOGARITHMIC):
        try:
            fit = analysis.fit_spiral(points, kind, center_mode="given", center=center)
            fits[kind] = fit
            lines.append(
                f"spiral,{kind},a={fit.a!r},b={fit.b!r},residual={fit.residual!r}"
            )
        except ValueError as e:
            lines.append(f"spiral,{kind},error={e}")
    if len(fits) == 2:
        better = min(fits.values(), key=lambda f: f.residual)
        lines.append(f"spiral_preferred,{better.kind}")
    r = scenario.constraints.spec.detection_radius
    ts = analysis.track_spacing(
        analysis.TrackSpacingInputs(
            r,
            args.ts_ray if args.ts_ray is not None else 4.0 * r,
            args.ts_star if args.ts_star is not None else 3.0 * r,
            args.alpha_son, args.beta_son,
        )
    )
    lines.append(f"track_spacing,{ts!r}")
    counts = detection_attribution(
        solution, scenario.constraints, scenario.dynamics, scenario.criteria,
        args.trajectories or config.trajectories_per_score, mix_seed(config.seed, 101),
    )
    total = int(np.sum(counts))
    lines.append(f"attribution_total,{total}")
    for i, c in enumerate(counts):
        lines.append(f"attribution,{i + 1},{int(c)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _cmd_gridsearch(args) -> int:
    config, scenario = _load(args)
    eval_seed = config.eval_seed if config.eval_seed is not None else config.seed
    x, y, t, score = oracle.grid_search(
        scenario.constraints, scenario.dynamics, args.trajectories, eval_seed, args.grid
    )
    result = {"x": x, "y": y, "t": t, "score": score,
              "grid": args.grid, "trajectories": args.trajectories, "eval_seed": eval_seed}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
            fh.write("\n")
    print(f"gridsearch optimum: score={score!r} x={x!r} y={y!r} t={t!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsres", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run the splitting optimizer")
    _add_common(p)
    p.add_argument("--out", required=True, help="artifact directory")
    p.set_defaults(fn=_cmd_optimize)

    p = sub.add_parser("score", help="estimate a solution file's detection probability")
    _add_common(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--trajectories", type=int, help="override trajectories per score")
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("simulate", help="dump sample trajectories for a solution")
    _add_common(p)
    p.add_argument("--solution", help="solution file (omit for a sensor-free rollout)")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--out", required=True, help="output JSON file")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("analyze", help="spiral fit, track spacing, attribution")
    _add_common(p)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", help="also write the report to this file")
    p.add_argument("--trajectories", type=int)
    p.add_argument("--ts-ray", type=float, default=None,
                   help="random-tour track spacing (default 4R)")
    p.add_argument("--ts-star", type=float, default=None,
                   help="furthest-on-disk track spacing (default 3R)")
    p.add_argument("--alpha-son", type=float, default=1.0)
    p.add_argument("--beta-son", type=float, default=0.0)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("gridsearch", help="exhaustive search for 1-sensor instances")
    _add_common(p)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--trajectories", type=int, default=64)
    p.add_argument("--out", help="write the optimum as JSON")
    p.set_defaults(fn=_cmd_gridsearch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
