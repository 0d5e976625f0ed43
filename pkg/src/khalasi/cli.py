"""Command-line entry point: field, gpr-bench, plan, simulate, eval, plot,
calibrate.

Exit codes: 0 success, 1 runtime failure (single `error: ...` line on
stderr), 2 usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import KhalasiError


def _parse_xy(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected x,y got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _parse_set(values) -> dict:
    out = {}
    for item in values or []:
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"expected key=value got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _load_preset(args):
    from .presets import EnvPreset, apply_overrides, get_preset, preset_from_json

    if getattr(args, "config", None):
        preset = preset_from_json(Path(args.config).read_text())
    else:
        preset = get_preset(args.env)
    overrides = _parse_set(getattr(args, "set", None))
    if overrides:
        preset = EnvPreset.from_dict(apply_overrides(preset.to_dict(), overrides))
    return preset


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="khalasi",
                                description="Vortical-flow navigation benchmark simulator")
    p.add_argument("--version", action="version", version=f"khalasi {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    fld = sub.add_parser("field", help="inspect, sample, refine, or synthesize UVGRID files")
    fsub = fld.add_subparsers(dest="field_command", required=True)
    f_info = fsub.add_parser("info", help="print header and stats as JSON")
    f_info.add_argument("path")
    f_sample = fsub.add_parser("sample", help="interpolate the field at a point")
    f_sample.add_argument("path")
    f_sample.add_argument("--pos", type=_parse_xy, required=True)
    f_sample.add_argument("--time", type=float, default=0.0)
    f_refine = fsub.add_parser("refine", help="refine spatially and temporally by a factor")
    f_refine.add_argument("path")
    f_refine.add_argument("--factor", type=int, default=2)
    f_refine.add_argument("--out", required=True)
    f_synth = fsub.add_parser("synth", help="sample an analytic preset onto a UVGRID file")
    f_synth.add_argument("--env", default="gyre2")
    f_synth.add_argument("--out", required=True)
    f_synth.add_argument("--nx", type=int, default=50)
    f_synth.add_argument("--ny", type=int, default=50)
    f_synth.add_argument("--nt", type=int, default=64)
    f_synth.add_argument("--dt", type=float, default=10.0)

    g = sub.add_parser("gpr-bench", help="window-size sweep of reconstruction MAE")
    g.add_argument("--env", default="gyre2")
    g.add_argument("--windows", default="5..75..10",
                   help="lo..hi[..step] or comma list, e.g. 5..75..10 or 10,55,95")
    g.add_argument("--evals", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="gpr_bench.csv")

    pl = sub.add_parser("plan", help="lattice search between two points")
    pl.add_argument("--algo", choices=("astar", "dijkstra"), default="astar")
    pl.add_argument("--env", default="cyl-static")
    pl.add_argument("--config")
    pl.add_argument("--set", action="append", metavar="KEY=VALUE")
    pl.add_argument("--start", type=_parse_xy, required=True)
    pl.add_argument("--goal", type=_parse_xy, required=True)
    pl.add_argument("--t0", type=float, default=0.0)
    pl.add_argument("--resolution", type=float)
    pl.add_argument("--format", choices=("csv", "json"), default="csv")
    pl.add_argument("--out", help="write here instead of stdout")

    sim = sub.add_parser("simulate", help="run one or more episodes")
    sim.add_argument("--env", default="cyl-static")
    sim.add_argument("--config")
    sim.add_argument("--set", action="append", metavar="KEY=VALUE")
    sim.add_argument("--policy", default="builtin:greedy",
                     help="builtin:<drift|greedy|plan-dijkstra|plan-astar>, exec:<cmd>, or stdio")
    sim.add_argument("--layout", default="vertical")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--episodes", type=int, default=1)
    sim.add_argument("--steps", type=int, default=1500)
    sim.add_argument("--start", type=_parse_xy)
    sim.add_argument("--goal", type=_parse_xy)
    sim.add_argument("--timeout", type=float, default=10.0)
    sim.add_argument("--out", default="out")
    sim.add_argument("--quiet", action="store_true")
    sim.add_argument("--no-record", action="store_true",
                     help="skip per-episode CSV/JSON artifacts (protocol-driven training)")

    ev = sub.add_parser("eval", help="run a batch experiment spec")
    ev.add_argument("--spec", required=True)
    ev.add_argument("--out")
    ev.add_argument("--workers", type=int)

    plo = sub.add_parser("plot", help="render SVG figures from CSV artifacts")
    psub = plo.add_subparsers(dest="plot_command", required=True)
    p_heat = psub.add_parser("heatmap")
    p_heat.add_argument("csv")
    p_heat.add_argument("--out", default="heatmap.svg")
    p_heat.add_argument("--value", default="success_rate")
    p_traj = psub.add_parser("trajectory")
    p_traj.add_argument("csv")
    p_traj.add_argument("--out", default="trajectory.svg")
    p_traj.add_argument("--env")

    cal = sub.add_parser("calibrate", help="re-derive tuned constants")
    cal.add_argument("--env", default="cyl-static")
    cal.add_argument("--what", choices=("drift", "speed", "gyre", "all"), default="all")
    cal.add_argument("--releases", type=int, default=10)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except KhalasiError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


def _dispatch(args) -> int:
    return {
        "field": _cmd_field,
        "gpr-bench": _cmd_gpr_bench,
        "plan": _cmd_plan,
        "simulate": _cmd_simulate,
        "eval": _cmd_eval,
        "plot": _cmd_plot,
        "calibrate": _cmd_calibrate,
    }[args.command](args)


def _cmd_field(args) -> int:
    from .flows import GriddedField, load_uvgrid, refine_grid, sample_grid, save_uvgrid

    if args.field_command == "info":
        s = load_uvgrid(args.path)
        ext = s.extent()
        print(json.dumps({
            "nx": s.nx, "ny": s.ny, "nt": s.nt,
            "x0": s.x0, "y0": s.y0, "dx": s.dx, "dy": s.dy, "dt": s.dt,
            "extent": ext.to_dict(), "duration": s.duration,
            "max_speed": GriddedField(s).max_speed(),
        }, indent=2, sort_keys=True))
        return 0
    if args.field_command == "sample":
        s = load_uvgrid(args.path)
        v = sample_grid(s, args.pos, args.time)
        print(json.dumps({"pos": list(args.pos), "time": args.time,
                          "u": float(v[0]), "v": float(v[1])}))
        return 0
    if args.field_command == "refine":
        s = load_uvgrid(args.path)
        save_uvgrid(refine_grid(s, args.factor), args.out)
        print(f"wrote {args.out}")
        return 0
    if args.field_command == "synth":
        _synth_uvgrid(args)
        return 0
    raise KhalasiError(f"unknown field subcommand {args.field_command!r}")


def _synth_uvgrid(args) -> None:
    from .flows import GridFieldSeries, save_uvgrid
    from .presets import get_preset

    preset = get_preset(args.env)
    field = preset.make_field()
    b = field.bounds()
    xs = np.linspace(b.x0, b.x1, args.nx)
    ys = np.linspace(b.y0, b.y1, args.ny)
    grid = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    u = np.empty((args.nt, args.ny, args.nx), np.float32)
    v = np.empty_like(u)
    for k in range(args.nt):
        vel = field.velocity(grid, k * args.dt).reshape(args.ny, args.nx, 2)
        u[k] = vel[..., 0]
        v[k] = vel[..., 1]
    series = GridFieldSeries(b.x0, b.y0, xs[1] - xs[0], ys[1] - ys[0], args.dt, u, v)
    save_uvgrid(series, args.out)
    print(f"wrote {args.out}")


def _parse_windows(text: str) -> tuple[int, ...]:
    if "," in text:
        return tuple(int(x) for x in text.split(","))
    parts = [int(x) for x in text.split("..")]
    if len(parts) == 2:
        lo, hi, step = parts[0], parts[1], 10
    elif len(parts) == 3:
        lo, hi, step = parts
    else:
        return (int(text),)
    return tuple(range(lo, hi + 1, step))


def _cmd_gpr_bench(args) -> int:
    from .gprbench import window_sweep_mae, write_sweep_csv

    result = window_sweep_mae(args.env, windows=_parse_windows(args.windows),
                              n_eval=args.evals, seed=args.seed)
    write_sweep_csv(args.out, result)
    for w in sorted(result):
        mean, std = result[w]
        print(f"window {w:3d}: mae {mean:.6g} +- {std:.6g}")
    print(f"wrote {args.out}")
    return 0


def _cmd_plan(args) -> int:
    from .planning import PlanGrid, astar_dynamic, dijkstra_oracle

    preset = _load_preset(args)
    field = preset.make_field()
    resolution = args.resolution or preset.plan_resolution
    grid = PlanGrid.for_field(field, resolution)
    start = grid.snap(args.start)
    goal = grid.snap(args.goal)
    if args.algo == "dijkstra":
        result = dijkstra_oracle(grid, start, goal, field, preset.vehicle, t0=args.t0)
    else:
        result = astar_dynamic(grid, start, goal, field, preset.vehicle, t0=args.t0)
    if not result.reached:
        raise KhalasiError("no path found within the step cap")

    if args.format == "json":
        text = json.dumps({
            "algo": args.algo, "env": preset.name, "resolution": resolution,
            "total_energy": result.total_energy, "steps": result.steps,
            "expanded": result.expanded,
            "waypoints": [[float(p[0]), float(p[1])] for p in result.waypoints],
        }, indent=2)
    else:
        lines = ["x,y"] + [f"{float(p[0])!r},{float(p[1])!r}" for p in result.waypoints]
        text = "\n".join(lines)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out} (energy {result.total_energy:.4g}, {result.steps} edges, "
              f"{result.expanded} expansions)")
    else:
        print(text)
    return 0


def _cmd_simulate(args) -> int:
    from .episodes import EpisodeConfig, derive_seed, run_episode

    preset = _load_preset(args)
    out_dir = Path(args.out)
    if not args.no_record:
        out_dir.mkdir(parents=True, exist_ok=True)
    # in stdio mode stdout carries the wire protocol; logs go to stderr
    log_stream = sys.stderr if args.policy == "stdio" else sys.stdout
    failures = 0
    for ep in range(args.episodes):
        seed = args.seed if args.episodes == 1 else derive_seed(args.seed, "simulate", ep)
        cfg = EpisodeConfig(env=preset, layout=args.layout, seed=seed,
                            step_limit=args.steps, start=args.start, goal=args.goal)
        policy = _build_cli_policy(args, preset)
        try:
            record = run_episode(cfg, policy)
        finally:
            policy.close()
        where = ""
        if not args.no_record:
            stem = f"{preset.name.replace(':', '-').replace('/', '-')}_seed{seed}"
            record.write_csv(out_dir / f"{stem}.csv")
            record.write_summary(out_dir / f"{stem}.json")
            where = f" -> {out_dir / (stem + '.csv')}"
        if not args.quiet:
            print(f"episode seed={seed}: {record.outcome} in {record.steps} steps, "
                  f"energy {record.total_energy:.3f}{where}", file=log_stream)
        if record.outcome == "aborted":
            failures += 1
    return 0 if failures == 0 else 1


def _build_cli_policy(args, preset):
    from .bridge import ExternalPolicy, stdio_policy
    from .policies import make_builtin_policy

    spec = args.policy
    if spec == "stdio":
        return stdio_policy(timeout=args.timeout)
    if spec.startswith("builtin:"):
        return make_builtin_policy(spec[len("builtin:"):], preset)
    if spec.startswith("exec:"):
        return ExternalPolicy(command=spec[len("exec:"):], timeout=args.timeout)
    raise KhalasiError(f"unknown policy {spec!r}")


def _cmd_eval(args) -> int:
    from .harness import ExperimentSpec, run_experiment

    spec_data = json.loads(Path(args.spec).read_text())
    spec = ExperimentSpec.from_dict(spec_data)
    if args.out:
        spec.out_dir = args.out
    if args.workers:
        spec.workers = args.workers
    stats = run_experiment(spec)
    for key in sorted(stats):
        s = stats[key]
        print(f"{key}: success {s.successes}/{s.counted} "
              f"energy {s.energy_mean:.2f} +- {s.energy_std:.2f} "
              f"(aborted {s.aborted})")
    print(f"artifacts in {spec.out_dir}")
    return 0


def _cmd_plot(args) -> int:
    from .plotting import plot_heatmap, plot_trajectory

    if args.plot_command == "heatmap":
        out = plot_heatmap(args.csv, args.out, value=args.value)
    else:
        out = plot_trajectory(args.csv, args.out, env=args.env)
    print(f"wrote {out}")
    return 0


def _cmd_calibrate(args) -> int:
    from .calibrate import calibration_report

    report = calibration_report(args.env, what=args.what, releases=args.releases)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    entry()
