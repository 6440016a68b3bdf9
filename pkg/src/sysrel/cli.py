"""Command-line front end.

Subcommands: ``simulate`` (draw datasets from a scenario config),
``estimate`` (fit a system curve from a dataset file), ``cstar`` (select
the shrinkage coefficient and dump its risk profile), and ``bench`` (run
a scenario or sweep and write the results table).  Report-style commands
also render a matplotlib figure next to each CSV unless ``--no-plot`` is
given.  Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cstar import cstar_analytic, cstar_bootstrap, grid_values
from .datagen import CensoringSpec, TrueSystemCurve, generate
from .errors import DataError, NumericError, UsageError
from .estimators import (
    PLUGIN,
    SYSTEM_PLE,
    fit_component_curves,
    plugin_curve,
    system_ple,
)
from .experiments import (
    SHRINK_ANALYTIC,
    SHRINK_BOOTSTRAP,
    run_scenario,
    run_sweep,
    substream,
)
from .io import (
    atomic_write_text,
    config_to_dict,
    fmt,
    load_config,
    read_autopsy_csv,
    read_system_csv,
    write_autopsy_csv,
    write_bench_csv,
    write_curve_csv,
    write_profile_csv,
    write_system_csv,
    write_truth_csv,
)

_CSTAR_SEED_PURPOSE = 707


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sysrel", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a dataset pair from a scenario config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("estimate", help="estimate the system reliability curve")
    p.add_argument("--data", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument(
        "--method",
        required=True,
        choices=[SYSTEM_PLE, PLUGIN, SHRINK_ANALYTIC, SHRINK_BOOTSTRAP],
    )
    p.add_argument("--c", type=float, default=None, help="plug-in exponent")
    p.add_argument("--boot-reps", type=int, default=200)
    p.add_argument("--grid", default=None, help="LO:HI:STEP bootstrap grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("cstar", help="select the shrinkage coefficient")
    p.add_argument("--data", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--method", required=True, choices=["analytic", "bootstrap"])
    p.add_argument("--boot-reps", type=int, default=200)
    p.add_argument("--grid", default=None, help="LO:HI:STEP grid of c values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("bench", help="run a scenario or sweep config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-plot", action="store_true")
    return parser


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--grid must be LO:HI:STEP, got {text!r}") from exc
    return grid_values(lo, hi, step)


def _parse_tree(expr: str):
    from .structure import parse_structure

    return parse_structure(expr)


def cmd_simulate(args) -> int:
    cfg, _ = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tree = cfg.tree()
    rng = substream(cfg.seed, 0, 0)
    autopsy, system, _ = generate(
        tree, cfg.components, CensoringSpec(cfg.eta), cfg.n_systems, rng
    )
    truth = TrueSystemCurve(tree, cfg.components)
    t_grid = np.linspace(0.0, truth.quantile(0.999), 200)
    write_autopsy_csv(out / "autopsy.csv", autopsy)
    write_system_csv(out / "system.csv", system)
    write_truth_csv(out / "truth.csv", truth, t_grid)
    manifest = {
        "version": __version__,
        "config": config_to_dict(cfg),
        "seed": cfg.seed,
        "files": ["autopsy.csv", "system.csv", "truth.csv"],
    }
    atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {cfg.n_systems} systems ({tree.k} components) to {out}")
    return 0


def cmd_estimate(args) -> int:
    tree = _parse_tree(args.structure)
    comments = [f"method = {args.method}"]
    c_star = None
    if args.method == SYSTEM_PLE:
        if args.c is not None:
            raise UsageError("--c does not apply to the system PLE")
        estimate = system_ple(read_system_csv(args.data))
    else:
        data = read_autopsy_csv(args.data)
        if data.k != tree.k:
            raise DataError(
                f"data has {data.k} components but structure needs {tree.k}"
            )
        curves = fit_component_curves(data)
        if args.method == PLUGIN:
            c = 1.0 if args.c is None else args.c
            estimate = plugin_curve(tree, curves, c)
            comments.append(f"c = {fmt(c)}")
        else:
            if args.c is not None:
                raise UsageError(f"--c conflicts with {args.method}, which selects it")
            if args.method == SHRINK_ANALYTIC:
                result = cstar_analytic(data, tree)
            else:
                result = cstar_bootstrap(
                    data,
                    tree,
                    resamples=args.boot_reps,
                    grid=_parse_grid(args.grid) if args.grid else None,
                    rng=substream(args.seed, _CSTAR_SEED_PURPOSE),
                )
            c_star = result.c_star
            estimate = plugin_curve(tree, curves, c_star)
            comments.append(f"c_star = {fmt(c_star)}")
            print(f"c_star = {fmt(c_star)} ({result.method})")
    write_curve_csv(args.out, estimate, comments)
    if not args.no_plot:
        from .plots import plot_curves

        title = args.method if c_star is None else f"{args.method}, c* = {c_star:.4f}"
        plot_curves(
            Path(args.out).with_suffix(".png"),
            [(args.method, estimate.times, estimate.values)],
            title=title,
        )
    print(f"wrote {args.out}")
    return 0


def cmd_cstar(args) -> int:
    tree = _parse_tree(args.structure)
    data = read_autopsy_csv(args.data)
    if data.k != tree.k:
        raise DataError(f"data has {data.k} components but structure needs {tree.k}")
    if args.method == "analytic":
        result = cstar_analytic(data, tree)
    else:
        result = cstar_bootstrap(
            data,
            tree,
            resamples=args.boot_reps,
            grid=_parse_grid(args.grid) if args.grid else None,
            rng=substream(args.seed, _CSTAR_SEED_PURPOSE),
        )
    comments = [f"method = {result.method}", f"c_star = {fmt(result.c_star)}"]
    if result.coefficients is not None:
        q = result.coefficients
        comments.append(f"A = {fmt(q.a)}; B = {fmt(q.b)}; D = {fmt(q.d)}")
    if result.skipped_resamples:
        comments.append(f"skipped_resamples = {result.skipped_resamples}")
    write_profile_csv(args.out, result.profile_c, result.profile_risk, comments)
    if not args.no_plot:
        from .plots import plot_risk_profile

        plot_risk_profile(
            Path(args.out).with_suffix(".png"),
            result.profile_c,
            result.profile_risk,
            result.c_star,
            result.method,
        )
    print(f"c_star = {fmt(result.c_star)} ({result.method})")
    print(f"wrote {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg, sweep = load_config(args.config)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if sweep is None:
        results = [run_scenario(cfg, threads=args.threads)]
    else:
        results = run_sweep(cfg, sweep["axis"], sweep["values"], threads=args.threads)
    write_bench_csv(args.out, results)
    if not args.no_plot:
        png = Path(args.out).with_suffix(".png")
        if sweep is None:
            from .plots import plot_scenario

            plot_scenario(png, results[0])
        else:
            shrink = next(
                (m for m in (SHRINK_ANALYTIC, SHRINK_BOOTSTRAP) if m in cfg.methods),
                None,
            )
            if shrink is not None:
                from .plots import plot_sweep

                plot_sweep(png, sweep["axis"], results, shrink)
    for result in results:
        for method, stats in result.methods.items():
            extra = (
                f"  mean_cstar={stats.mean_cstar:.4f}"
                if stats.mean_cstar is not None
                else ""
            )
            print(
                f"{result.label:>12}  {method:<16} mean_risk={stats.mean_risk:.6f}"
                f"{extra}"
            )
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "cstar": cmd_cstar,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
