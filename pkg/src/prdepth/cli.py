"""Command-line driver.

Subcommands: fit, depth, simulate, breakdown, influence, mb, demo.  Every
command honors --seed and produces byte-identical machine-readable reports
for identical invocations (wall time is printed to stderr only, never
embedded in reports).  Exit codes: 0 success, 2 I/O, 3 parse/validation,
4 numerical degeneracy, 5 internal.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import load_dataset_csv
from .depthcore import Dataset, InnerEstimator, prd as depth_prd
from .errors import (
    AllDirectionsDegenerate,
    DegenerateScale,
    MissingDataset,
    NoNonsingularSubset,
    ParseError,
    PrdError,
    RankDeficient,
    ZeroWeightSum,
)
from .estimators import (
    FitConfig,
    Objective,
    default_fit_config,
    fit_ls,
    fit_prd,
    fit_rd_simple,
    generate_directions,
    rdepth_simple,
)
from .oracle import cauchy, mb_bounds, normal
from .roblab import (
    demo_contamination,
    empirical_if,
    empirical_mb,
    leverage_grid,
    rbp_experiment,
)
from .simharness import SimConfig, efficiency_orderings, relative_efficiency

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4
EXIT_INTERNAL = 5

_NUMERIC_ERRORS = (DegenerateScale, AllDirectionsDegenerate, ZeroWeightSum,
                   NoNonsingularSubset, RankDeficient)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.ravel()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


_NON_CONFIG_ARGS = ("func", "out", "plot_data", "config_file", "threads")


def _manifest(command: str, args: argparse.Namespace, extra: dict | None = None):
    # delivery knobs (output paths, thread hint) never enter the manifest:
    # reports must be byte-identical across thread counts and destinations
    config = {k: _jsonable(v) for k, v in sorted(vars(args).items())
              if k not in _NON_CONFIG_ARGS}
    man = {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        # timing goes to stderr so reports stay byte-identical across runs
        "wall_time_s": None,
    }
    if extra:
        man.update(extra)
    return man


def _emit(args, manifest: dict, estimates: dict, diagnostics: dict,
          table: str) -> None:
    sys.stdout.write(table if table.endswith("\n") else table + "\n")
    if getattr(args, "out", None):
        report = {
            "manifest": manifest,
            "estimates": _jsonable(estimates),
            "diagnostics": _jsonable(diagnostics),
        }
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
        Path(args.out).write_text(text, encoding="utf-8")


def _emit_plot_data(args, points: dict[str, np.ndarray],
                    lines: list[tuple[float, float, str]]) -> None:
    plot_dir = getattr(args, "plot_data", None)
    if not plot_dir:
        return
    d = Path(plot_dir)
    d.mkdir(parents=True, exist_ok=True)
    rows = ["x,y,label"]
    for label, pts in points.items():
        for xv, yv in pts:
            rows.append(f"{xv!r},{yv!r},{label}")
    (d / "points.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    rows = ["slope,intercept,label"]
    for slope, intercept, label in lines:
        rows.append(f"{slope!r},{intercept!r},{label}")
    (d / "lines.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Shared argument plumbing
# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--seed", type=int, default=0, help="master RNG seed")
    sp.add_argument("--out", help="write machine-readable JSON report here")
    sp.add_argument("--plot-data", dest="plot_data",
                    help="directory for plot-ready points.csv / lines.csv")
    sp.add_argument("--config", dest="config_file",
                    help="key=value config file; flags override it")
    sp.add_argument("--threads", type=int, default=1,
                    help="parallelism hint; never changes results")


def _add_fit_tuning(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--n-beta", type=int, default=None,
                    help="candidate count (default grows with n)")
    sp.add_argument("--n-dir", type=int, default=None,
                    help="direction count (default 100 + 2n)")
    sp.add_argument("--replications", type=int, default=2)
    sp.add_argument("--refine-max-iter", type=int, default=200)
    sp.add_argument("--refine-tol", type=float, default=1e-8)
    sp.add_argument("--inner", choices=("median", "pwm"), default="median")
    sp.add_argument("--pwm-k", type=float, default=3.0)
    sp.add_argument("--pwm-c", type=float, default=3.5)
    sp.add_argument("--objective",
                    choices=("abs_of_median", "median_of_abs",
                             "hth_order_abs", "sum_smallest_abs"),
                    default="abs_of_median")
    sp.add_argument("--objective-h", type=int, default=None)


def _build_fit_config(args, n: int, p: int) -> FitConfig:
    inner = (InnerEstimator.pwm(args.pwm_k, args.pwm_c)
             if args.inner == "pwm" else InnerEstimator.median())
    objective = Objective(args.objective, h=args.objective_h)
    base = default_fit_config(n, p, seed=args.seed, inner=inner,
                              objective=objective,
                              replications=args.replications,
                              refine_max_iter=args.refine_max_iter,
                              refine_tol=args.refine_tol)
    n_beta = args.n_beta if args.n_beta is not None else base.n_beta
    n_dir = args.n_dir if args.n_dir is not None else base.n_dir
    return FitConfig(n_beta=n_beta, n_dir=n_dir,
                     replications=args.replications, seed=args.seed,
                     refine_max_iter=args.refine_max_iter,
                     refine_tol=args.refine_tol, inner=inner,
                     objective=objective)


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]):
    """Pre-scan --config and install its key=value pairs as defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", dest="config_file")
    known, _ = pre.parse_known_args(argv)
    if not known.config_file:
        return
    path = Path(known.config_file)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    overrides = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        overrides[key.strip().replace("-", "_")] = value.strip()
    if overrides:
        parser.set_defaults(**overrides)


def _coerce_numeric_args(args: argparse.Namespace) -> None:
    """Config-file values arrive as strings; coerce them like flag values."""
    casts = {
        "seed": int, "threads": int, "n_beta": int, "n_dir": int,
        "replications": int, "refine_max_iter": int, "objective_h": int,
        "n": int, "p": int, "n_rep": int, "grid_points": int,
        "refine_tol": float, "pwm_k": float, "pwm_c": float,
        "epsilon": float, "error_sigma": float, "escape_threshold": float,
        "grid_max": float,
    }
    for key, cast in casts.items():
        val = getattr(args, key, None)
        if isinstance(val, str):
            try:
                setattr(args, key, cast(val))
            except ValueError as exc:
                raise ParseError(f"bad config value for {key}: {exc}") from None


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"bad {what}: {exc}") from None


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"bad {what}: {exc}") from None


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    data = load_dataset_csv(args.dataset, with_intercept=not args.no_intercept)
    estimators = (["prd", "rd", "ls"] if args.estimator == "all"
                  else [args.estimator])
    estimates: dict = {}
    lines = []
    rows = [f"{'estimator':10s} {'coefficients':30s} {'uf':>12s} {'prd':>8s}"]
    cfg = _build_fit_config(args, data.n, data.p)
    for name in estimators:
        if name == "prd":
            res = fit_prd(data, cfg, threads=args.threads)
            beta, uf_val, prd_val = res.beta, res.uf, res.prd
            extra = {"replicate_best": res.replicate_best,
                     "candidates_evaluated": res.candidates_evaluated}
        elif name == "ls":
            beta = fit_ls(data)
            uf_val, prd_val = _depth_of(beta, data, cfg, args.seed)
            extra = {}
        elif name == "rd":
            beta = fit_rd_simple(data)
            uf_val, prd_val = _depth_of(beta, data, cfg, args.seed)
            extra = dict(depth=rdepth_simple(beta, data))
        coeff = ",".join(repr(float(b)) for b in beta)
        estimates[name] = {"beta": beta, "uf": uf_val, "prd": prd_val, **extra}
        rows.append(f"{name:10s} {coeff:30s} {uf_val:12.6g} {prd_val:8.4f}")
        if data.p == 2 and data.with_intercept:
            lines.append((float(beta[1]), float(beta[0]), name))
    points = {}
    if data.p == 2 and data.with_intercept:
        points["data"] = np.column_stack([data.x[:, 0], data.y])
    _emit(args, _manifest("fit", args, {"n": data.n, "p": data.p}),
          estimates, {"n": data.n, "p": data.p}, "\n".join(rows))
    _emit_plot_data(args, points, lines)
    return EXIT_OK


def _depth_of(beta, data: Dataset, cfg: FitConfig, seed: int):
    rng = np.random.default_rng((seed, 0))
    dirs = generate_directions(data, cfg.n_dir, rng)
    rep = depth_prd(beta, data, dirs, cfg.inner)
    return rep.uf, rep.prd


def cmd_depth(args) -> int:
    data = load_dataset_csv(args.dataset, with_intercept=not args.no_intercept)
    beta = np.array(_parse_floats(args.beta, "--beta"))
    if beta.shape[0] != data.p:
        raise ParseError(
            f"--beta has {beta.shape[0]} entries, dataset needs p={data.p}")
    cfg = _build_fit_config(args, data.n, data.p)
    uf_val, prd_val = _depth_of(beta, data, cfg, args.seed)
    table = f"uf  {uf_val!r}\nprd {prd_val!r}"
    _emit(args, _manifest("depth", args, {"n": data.n, "p": data.p}),
          {"beta": beta, "uf": uf_val, "prd": prd_val},
          {"n": data.n, "p": data.p}, table)
    return EXIT_OK


def cmd_simulate(args) -> int:
    sim = SimConfig(
        n_values=tuple(_parse_ints(args.n_list, "--n")),
        n_rep=args.n_rep,
        x_dist=args.x_dist,
        error_sigma=args.error_sigma,
        inner=(InnerEstimator.pwm(args.pwm_k, args.pwm_c)
               if args.inner == "pwm" else InnerEstimator.median()),
        seed=args.seed,
        fit_replications=args.replications,
    )
    report = relative_efficiency(sim, threads=args.threads)
    orderings = efficiency_orderings(report)
    rows = [f"{'n':>5s} {'x_dist':8s} {'est':5s} {'re_slope':>9s} "
            f"{'re_int':>9s} {'redraws':>8s}"]
    for r in report.rows:
        rows.append(f"{r.n:5d} {r.x_dist:8s} {r.estimator:5s} "
                    f"{r.re_slope:9.4f} {r.re_intercept:9.4f} {r.redraws:8d}")
    rows.append(f"slope ordering prd>rd uniform: {orderings.slope_uniform}")
    rows.append(f"both-coef prd>=rd uniform:     {orderings.all_columns_uniform}")
    estimates = {
        "rows": [dict(vars(r)) for r in report.rows],
        "orderings": {
            "defined": orderings.defined,
            "slope_uniform": orderings.slope_uniform,
            "all_columns_uniform": orderings.all_columns_uniform,
            "entries": [dict(vars(e)) for e in orderings.entries],
        },
    }
    _emit(args, _manifest("simulate", args), estimates, report.meta,
          "\n".join(rows))
    return EXIT_OK


def cmd_breakdown(args) -> int:
    rng = np.random.default_rng((args.seed, 1))
    x = rng.standard_normal((args.n, args.p - 1))
    y = rng.standard_normal(args.n)
    data = Dataset(y, x, with_intercept=True)
    cfg = _build_fit_config(args, args.n, args.p)
    result = rbp_experiment(data, cfg, escape_threshold=args.escape_threshold)
    table = "\n".join([
        f"n={result.n} p={result.p}",
        f"empirical breakdown m = {result.m_break_empirical} "
        f"(fraction {result.rbp_empirical})",
        f"formula breakdown     = {result.rbp_formula}",
        f"match: {result.rbp_empirical == result.rbp_formula}",
        f"m-1 bounded: {result.below_break_bounded} "
        f"(max norm {result.below_break_max_norm!r}, "
        f"threshold {result.escape_threshold!r})",
    ])
    estimates = {
        "m_break_empirical": result.m_break_empirical,
        "rbp_empirical": [result.rbp_empirical.numerator,
                          result.rbp_empirical.denominator],
        "rbp_formula": [result.rbp_formula.numerator,
                        result.rbp_formula.denominator],
        "match": result.rbp_empirical == result.rbp_formula,
        "below_break_bounded": result.below_break_bounded,
        "escalation_curve": [[t, v] for t, v in result.escalation_curve],
    }
    _emit(args, _manifest("breakdown", args), estimates,
          {"escape_threshold": result.escape_threshold,
           "below_break_max_norm": result.below_break_max_norm}, table)
    return EXIT_OK


def cmd_influence(args) -> int:
    z_vals = _parse_floats(args.z, "--z")
    if len(z_vals) < 2:
        raise ParseError("--z needs y0 and at least one x coordinate")
    y0, x0 = z_vals[0], np.array(z_vals[1:])
    eps_schedule = _parse_floats(args.eps, "--eps")
    cfg = _build_fit_config(args, args.n, x0.shape[0])
    result = empirical_if((y0, x0), args.n, eps_schedule, cfg,
                          p=x0.shape[0], threads=args.threads)
    from .oracle import influence_function
    z0 = y0 / x0[0] if x0[0] != 0 else float("inf")
    oracle_first = None
    if np.isfinite(z0):
        oracle_first = influence_function(
            z0, normal(), normal(), p=x0.shape[0]).vector[0]
    rows = [f"quotient: {','.join(repr(float(v)) for v in result.quotient)}"]
    for eps, q in result.per_eps:
        rows.append(f"eps={eps!r}: {','.join(repr(float(v)) for v in q)}")
    if oracle_first is not None:
        rows.append(f"oracle first coordinate at z0={z0!r}: {oracle_first!r}")
    estimates = {
        "quotient": result.quotient,
        "per_eps": [[eps, q] for eps, q in result.per_eps],
        "clean_beta": result.clean_beta,
        "oracle_first_coord": oracle_first,
    }
    _emit(args, _manifest("influence", args), estimates,
          {"z0": z0}, "\n".join(rows))
    return EXIT_OK


def cmd_mb(args) -> int:
    grid = leverage_grid(p=args.p, max_magnitude=args.grid_max)
    cfg = _build_fit_config(args, args.n, args.p)
    result = empirical_mb(args.n, args.epsilon, grid, cfg, p=args.p,
                          threads=args.threads)
    oracle = (mb_bounds(cauchy(), args.epsilon, y_dist=normal())
              if args.epsilon > 0 else None)
    rows = [
        f"epsilon={args.epsilon!r} n={args.n} grid size {len(result.grid)}",
        f"empirical max bias: {result.max_bias!r}",
        f"oracle interval: [{result.oracle_lower!r}, {result.oracle_upper!r}]",
    ]
    estimates = {
        "max_bias": result.max_bias,
        "oracle_lower": result.oracle_lower,
        "oracle_upper": result.oracle_upper,
        "argmax_point": [result.argmax_point[0],
                         list(map(float, result.argmax_point[1]))],
        "biases": result.biases,
    }
    diag = {"q_eps": oracle.q_eps} if oracle else {}
    _emit(args, _manifest("mb", args), estimates, diag, "\n".join(rows))
    return EXIT_OK


def cmd_demo(args) -> int:
    report = demo_contamination(args.scenario, seed=args.seed,
                                data_path=args.data)
    rows = [f"{'variant':14s} {'estimator':10s} {'slope':>12s} {'intercept':>12s}"]
    lines = []
    for f in report.fits:
        rows.append(f"{f.variant:14s} {f.estimator:10s} "
                    f"{f.slope:12.6f} {f.intercept:12.6f}")
        lines.append((f.slope, f.intercept, f"{f.variant}:{f.estimator}"))
    estimates = {
        f"{f.variant}:{f.estimator}": {"slope": f.slope,
                                       "intercept": f.intercept}
        for f in report.fits
    }
    _emit(args, _manifest("demo", args), estimates,
          {"scenario": report.scenario}, "\n".join(rows))
    _emit_plot_data(args, report.points, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prdepth",
        description="Projection-depth robust regression toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fit", help="fit estimators to a dataset CSV")
    sp.add_argument("dataset")
    sp.add_argument("--estimator", choices=("prd", "rd", "ls", "all"),
                    default="prd")
    sp.add_argument("--no-intercept", action="store_true")
    _add_fit_tuning(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("depth", help="depth of a supplied coefficient vector")
    sp.add_argument("dataset")
    sp.add_argument("--beta", required=True,
                    help="comma-separated coefficients")
    sp.add_argument("--no-intercept", action="store_true")
    _add_fit_tuning(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_depth)

    sp = sub.add_parser("simulate", help="relative-efficiency study")
    sp.add_argument("--n", dest="n_list", default="10,20,40,100",
                    help="comma-separated sample sizes")
    sp.add_argument("--n-rep", type=int, default=500)
    sp.add_argument("--x-dist", choices=("normal", "t2"), default="normal")
    sp.add_argument("--error-sigma", type=float, default=1.0)
    _add_fit_tuning(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("breakdown", help="replacement breakdown experiment")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--escape-threshold", type=float, default=None)
    _add_fit_tuning(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_breakdown)

    sp = sub.add_parser("influence", help="empirical influence quotients")
    sp.add_argument("--z", required=True,
                    help="contamination atom y0,x01[,x02,...]")
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--eps", default="0.1,0.05",
                    help="decreasing comma-separated contamination levels")
    _add_fit_tuning(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_influence)

    sp = sub.add_parser("mb", help="empirical maximum bias over a grid")
    sp.add_argument("--epsilon", type=float, default=1.0 / 3.0)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--grid-max", type=float, default=1000.0)
    _add_fit_tuning(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_mb)

    sp = sub.add_parser("demo", help="contamination demonstrations")
    sp.add_argument("--scenario",
                    choices=("eight_point", "bivariate_normal_34"),
                    default="bivariate_normal_34")
    sp.add_argument("--data", default=None,
                    help="dataset CSV (required for eight_point)")
    _add_common(sp)
    sp.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    t0 = time.perf_counter()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        _coerce_numeric_args(args)
        code = args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MissingDataset as exc:
        print(f"error: missing dataset: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _NUMERIC_ERRORS as exc:
        print(f"error: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PrdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(f"wall time: {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
