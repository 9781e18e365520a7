"""Command-line interface: run one scenario, sweep a grid, plot a run.

Exit codes: 0 success, 2 configuration error, 3 output/IO error,
4 internal invariant violation.  The --threads flag parallelizes sweep
cells across processes and never changes results; per-run seeds are
derived from the master seed alone.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys

from .config import (
    ConfigError,
    SweepConfig,
    apply_parameter,
    cell_spec,
    load_sweep_config,
    save_config,
    scenario_from_dict,
)
from .planner import InternalInvariantError
from .reporting import (
    OutputError,
    fmt,
    opinions_csv_lines,
    read_trajectories_csv,
    render_svg,
    sweep_csv_lines,
    write_outputs,
    write_svg,
    SvgStyle,
)
from .simulator import ScenarioSpec, make_world, run_batch, run_episode

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avocado",
        description="Adaptive collision-avoidance benchmark simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and write its outputs")
    run_p.add_argument("--config", help="scenario config JSON (defaults apply if omitted)")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.add_argument("--variant", help="override the planner variant")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--threads", type=int, default=1,
                       help="worker count; must not change results")

    sweep_p = sub.add_parser("sweep", help="run a scenario grid or parameter study")
    sweep_p.add_argument("--config", required=True, help="sweep config JSON")
    sweep_p.add_argument("--seed", type=int, help="override the master seed")
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--threads", type=int, default=1,
                         help="parallel sweep cells; must not change results")

    plot_p = sub.add_parser("plot", help="render trajectories.csv from a run to SVG")
    plot_p.add_argument("--out", required=True,
                        help="directory holding trajectories.csv and config.json")
    plot_p.add_argument("--sample-every", type=int, default=5,
                        help="plot every k-th tick")
    return parser


def _load_run_spec(args) -> ScenarioSpec:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OutputError(f"cannot read {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    if args.variant is not None:
        data["variant"] = args.variant
    return scenario_from_dict(data)


def _cmd_run(args) -> int:
    if args.threads < 1:
        raise ConfigError("threads", f"must be >= 1, got {args.threads}")
    spec = _load_run_spec(args)
    result = run_episode(spec)
    write_outputs(result.trajectory, result.opinions, result.metrics, args.out)
    save_config(spec, os.path.join(args.out, "config.json"))
    m = result.metrics
    rate = "n/a" if m.success_rate is None else fmt(m.success_rate)
    print(f"run complete: success_rate={rate} collisions={m.collisions} "
          f"ticks={result.world.tick}")
    return EXIT_OK


def _grid_cells(sweep: SweepConfig) -> list[ScenarioSpec]:
    cells = []
    for family in sweep.families:
        for variant in sweep.variants:
            for n in sweep.n_values:
                for p in sweep.p_values:
                    cells.append(cell_spec(sweep, family, variant, n, p))
    return cells


def _run_grid_cell(payload: tuple[ScenarioSpec, int]) -> dict:
    spec, runs = payload
    try:
        row = run_batch(spec, runs)
        return {
            "family": row.family, "variant": row.variant, "n": row.n, "p": row.p,
            "runs": row.runs, "success_rate": row.success_rate,
            "mean_time_to_goal_s": row.mean_time_to_goal,
            "mean_plan_ms": row.mean_plan_ms, "collisions": row.collisions,
            "status": "ok",
        }
    except Exception as exc:    # failed cells are recorded, the sweep continues
        return {
            "family": spec.family, "variant": spec.variant, "n": spec.n,
            "p": spec.p, "runs": runs, "status": f"error: {exc}",
        }


def _run_param_cell(payload: tuple[ScenarioSpec, str, float, int]) -> tuple[dict, list]:
    base, parameter, value, runs = payload
    try:
        spec = apply_parameter(base, parameter, value)
        row = run_batch(spec, runs)
        trace = run_episode(spec, record_trajectory=False)
        return ({
            "family": spec.family, "variant": spec.variant, "n": spec.n, "p": spec.p,
            "parameter": parameter, "value": value, "runs": row.runs,
            "success_rate": row.success_rate,
            "mean_time_to_goal_s": row.mean_time_to_goal,
            "mean_plan_ms": row.mean_plan_ms, "collisions": row.collisions,
            "status": "ok",
        }, trace.opinions)
    except Exception as exc:
        return ({
            "family": base.family, "variant": base.variant, "n": base.n,
            "p": base.p, "parameter": parameter, "value": value, "runs": runs,
            "status": f"error: {exc}",
        }, [])


def _map_jobs(fn, payloads, threads: int):
    if threads <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, payloads))


def _cmd_sweep(args) -> int:
    if args.threads < 1:
        raise ConfigError("threads", f"must be >= 1, got {args.threads}")
    sweep = load_sweep_config(args.config)
    if args.seed is not None:
        sweep.seed = args.seed
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {args.out}: {exc}") from exc

    rows: list[dict] = []
    if sweep.mode == "grid":
        cells = _grid_cells(sweep)
        results = _map_jobs(_run_grid_cell, [(c, sweep.runs) for c in cells],
                            args.threads)
        rows.extend(results)
    else:
        base_data = dict(sweep.base)
        base_data.setdefault("family", "headon")
        base_data["seed"] = sweep.seed
        base = scenario_from_dict(base_data)
        payloads = [(base, sweep.parameter, v, sweep.runs) for v in sweep.values]
        for row, trace in _map_jobs(_run_param_cell, payloads, args.threads):
            rows.append(row)
            if row["status"] == "ok":
                name = f"opinions_{sweep.parameter}_{fmt(row['value'])}.csv"
                path = os.path.join(args.out, name)
                with open(path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write("\n".join(opinions_csv_lines(trace)) + "\n")

    all_ok = all(r["status"] == "ok" for r in rows)
    csv_path = os.path.join(args.out, "sweep.csv")
    try:
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(sweep_csv_lines(rows)) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {csv_path}: {exc}") from exc
    print(f"sweep complete: {len(rows)} cells -> {csv_path}")
    return EXIT_OK if all_ok else EXIT_INTERNAL


def _cmd_plot(args) -> int:
    traj_path = os.path.join(args.out, "trajectories.csv")
    config_path = os.path.join(args.out, "config.json")
    try:
        rows = read_trajectories_csv(traj_path)
    except OSError as exc:
        raise OutputError(f"cannot read {traj_path}: {exc}") from exc
    goals: dict[int, tuple[float, float]] = {}
    radius = 0.2
    if os.path.exists(config_path):
        with open(config_path, encoding="utf-8") as fh:
            spec = scenario_from_dict(json.load(fh))
        radius = spec.radius
        world = make_world(spec)
        goals = {a.id: (a.goal.x, a.goal.y) for a in world.agents}
    if not rows:
        raise ConfigError("trajectories", "no rows to plot")
    style = SvgStyle(sample_every=max(1, args.sample_every), agent_radius=radius)
    svg = render_svg(rows, goals, style)
    svg_path = os.path.join(args.out, "trajectories.svg")
    write_svg(svg, svg_path)
    print(f"wrote {svg_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_plot(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
