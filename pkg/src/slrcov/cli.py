"""Command-line front end.

Subcommands: ``gen`` (population covariance files), ``fit`` (solve one sample
covariance), ``eval`` (score an estimate against a truth), ``experiment``
(seeded replication study with CSV summaries), ``rate`` (error-decay study
over a grid of sample sizes).

Exit codes: 0 success, 1 usage/validation, 2 I/O, 3 numerical failure.
A JSON config file passed via ``--config`` supplies defaults for any flag
(keys are flag names without the leading dashes); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .datagen import (
    BandedModelSpec,
    BlockModelSpec,
    gen_banded_cov,
    gen_block_cov,
    sample_gaussian,
)
from .experiments import ExperimentSpec, run_experiment, run_rate_study
from .io import (
    MatrixParseError,
    format_float,
    read_matrix_csv,
    result_record,
    write_json,
    write_matrix_csv,
    write_metrics_csv,
    write_samples_csv,
    write_summary_csv,
    write_trace_csv,
)
from .linalg import approximate_rank, symmetrize
from .metrics import RecoveryMetrics, confusion_rates, frobenius_error, sparsity
from .solver import SolverConfig, solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3

_SOLVER_DEFAULTS = {"mu": 1.0, "tol": 5e-4, "max_iter": 1000, "init": "zero"}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_solver_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="elementwise l1 penalty weight")
    sub.add_argument("--tau", type=float, default=None,
                     help="nuclear-norm penalty weight")
    sub.add_argument("--mu", type=float, default=None,
                     help="augmented-Lagrangian penalty parameter (default 1.0)")
    sub.add_argument("--tol", type=float, default=None,
                     help="stopping threshold on iterate changes (default 5e-4)")
    sub.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                     help="iteration cap (default 1000)")
    sub.add_argument("--init", choices=("zero", "soft"), default=None,
                     help="initial sigma iterate (default zero)")


def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--model", choices=("block", "banded"), default=None)
    sub.add_argument("--p", type=int, default=None, help="matrix dimension")
    sub.add_argument("--k", type=int, default=None, help="number of blocks (block model)")


def build_parser() -> _Parser:
    parser = _Parser(prog="slrcov",
                     description="Sparse and low-rank PSD covariance estimation via ADMM")
    parser.add_argument("--config", default=None,
                        help="JSON file of default flag values; explicit flags override")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a population covariance (and samples)")
    _add_model_flags(gen)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--n", type=int, default=None, help="also draw n Gaussian samples")
    gen.add_argument("--out", default=None, help="output CSV for the covariance")
    gen.add_argument("--samples-out", dest="samples_out", default=None,
                     help="output CSV for the samples (requires --n)")
    gen.set_defaults(handler=_cmd_gen)

    fit = subs.add_parser("fit", help="solve for one sample covariance CSV")
    fit.add_argument("input", help="sample covariance CSV (headerless, square)")
    _add_solver_flags(fit)
    fit.add_argument("--out", default=None, help="output CSV for the estimate")
    fit.add_argument("--json", dest="json_out", default=None,
                     help="result record path (default: --out with .json suffix)")
    fit.add_argument("--trace", default=None, help="optional iteration-trace CSV")
    fit.set_defaults(handler=_cmd_fit)

    ev = subs.add_parser("eval", help="score an estimate CSV against a truth CSV")
    ev.add_argument("truth")
    ev.add_argument("estimate")
    ev.add_argument("--zero-tol", dest="zero_tol", type=float, default=None)
    ev.add_argument("--out", default=None, help="optional one-row metrics CSV")
    ev.set_defaults(handler=_cmd_eval)

    ex = subs.add_parser("experiment", help="seeded replication study")
    _add_model_flags(ex)
    ex.add_argument("--n", type=int, default=None, help="samples per replication")
    _add_solver_flags(ex)
    ex.add_argument("--reps", type=int, default=None, help="replications (default 100)")
    ex.add_argument("--seed", type=int, default=None)
    ex.add_argument("--jobs", type=int, default=None, help="worker processes (default 1)")
    ex.add_argument("--out", default=None,
                    help="summary CSV; per-run rows land next to it as *_runs.csv")
    ex.set_defaults(handler=_cmd_experiment)

    rate = subs.add_parser("rate", help="error decay over a grid of sample sizes")
    _add_model_flags(rate)
    rate.add_argument("--n-grid", dest="n_grid", default=None,
                      help="comma-separated sample sizes, at least 3 (e.g. 25,50,100,200)")
    _add_solver_flags(rate)
    rate.add_argument("--reps", type=int, default=None, help="replications per n (default 50)")
    rate.add_argument("--seed", type=int, default=None)
    rate.add_argument("--jobs", type=int, default=None)
    rate.add_argument("--out", default=None, help="CSV of (n, mean_frob_error) rows")
    rate.add_argument("--inject-slope", dest="inject_slope", type=float, default=None,
                      help="test hook: report exact n**slope errors, skipping the pipeline")
    rate.set_defaults(handler=_cmd_rate)
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    """Fill flags still at None from the JSON config file."""
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        loaded = json.load(fh)
    if not isinstance(loaded, dict):
        raise ValueError(f"config file {args.config} must hold a JSON object")
    rename = {"lambda": "lam"}
    for key, value in loaded.items():
        dest = rename.get(key, key.replace("-", "_"))
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, value)


def _resolved(args, name: str, default=None, required: bool = False):
    value = getattr(args, name, None)
    if value is None:
        value = default
    if value is None and required:
        flag = {"lam": "--lambda"}.get(name, "--" + name.replace("_", "-"))
        raise ValueError(f"missing required flag {flag}")
    return value


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        lam=float(_resolved(args, "lam", required=True)),
        tau=float(_resolved(args, "tau", required=True)),
        mu=float(_resolved(args, "mu", _SOLVER_DEFAULTS["mu"])),
        tol=float(_resolved(args, "tol", _SOLVER_DEFAULTS["tol"])),
        max_iter=int(_resolved(args, "max_iter", _SOLVER_DEFAULTS["max_iter"])),
        init=str(_resolved(args, "init", _SOLVER_DEFAULTS["init"])),
    )


def _cmd_gen(args) -> None:
    model = _resolved(args, "model", required=True)
    p = int(_resolved(args, "p", required=True))
    seed = int(_resolved(args, "seed", 0))
    out = _resolved(args, "out", required=True)
    n = _resolved(args, "n")
    samples_out = _resolved(args, "samples_out")
    if samples_out is not None and n is None:
        raise ValueError("--samples-out requires --n")
    if model == "block":
        k = _resolved(args, "k")
        if k is None:
            raise ValueError("block model requires --k")
        cov = gen_block_cov(BlockModelSpec(p=p, k=int(k), seed=seed))
    else:
        cov = gen_banded_cov(BandedModelSpec(p=p))
    write_matrix_csv(out, cov)
    if samples_out is not None:
        write_samples_csv(samples_out, sample_gaussian(cov, int(n), seed))
    print(f"sp={format_float(sparsity(cov))} ar={approximate_rank(cov)}")


def _cmd_fit(args) -> None:
    out = _resolved(args, "out", required=True)
    config = _solver_config(args)
    raw = read_matrix_csv(args.input)
    if raw.shape[0] != raw.shape[1]:
        raise ValueError(
            f"input {args.input} is not square: {raw.shape[0]} rows x {raw.shape[1]} columns"
        )
    cov = symmetrize(raw, "input covariance")
    start = time.perf_counter()
    result = solve(cov, config, record_trace=args.trace is not None)
    wall = time.perf_counter() - start
    write_matrix_csv(out, result.estimate)
    json_out = args.json_out or str(Path(out).with_suffix(".json"))
    write_json(json_out, _finite_record(result_record(result, wall_seconds=wall)))
    if args.trace is not None:
        write_trace_csv(args.trace, result.trace)
    print(
        f"iterations={result.iterations} converged={str(result.converged).lower()} "
        f"objective={format_float(result.objective)}"
    )


def _finite_record(obj):
    """Replace non-finite floats with None for strict-JSON friendliness."""
    if isinstance(obj, dict):
        return {k: _finite_record(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _cmd_eval(args) -> None:
    zero_tol = float(_resolved(args, "zero_tol", 0.0))
    truth = read_matrix_csv(args.truth)
    estimate = read_matrix_csv(args.estimate)
    rates = confusion_rates(truth, estimate, zero_tol=zero_tol)
    row = RecoveryMetrics(
        p=truth.shape[0],
        frob_error=frobenius_error(truth, estimate),
        sp_true=sparsity(truth, zero_tol),
        sp_est=sparsity(estimate, zero_tol),
        ar_true=approximate_rank(symmetrize(truth)),
        ar_est=approximate_rank(symmetrize(estimate)),
        fpr=rates.fpr,
        tpr=rates.tpr,
        iterations=0,
        wall_seconds=0.0,
        fpr_defined=rates.fpr_defined,
        tpr_defined=rates.tpr_defined,
        fpr_conventional=rates.fpr_conventional,
        tpr_conventional=rates.tpr_conventional,
    )
    if args.out:
        write_metrics_csv(args.out, [row])
    print(
        f"frob_error={format_float(row.frob_error)} sp_true={format_float(row.sp_true)} "
        f"sp_est={format_float(row.sp_est)} ar_true={row.ar_true} ar_est={row.ar_est} "
        f"fpr={format_float(row.fpr)} tpr={format_float(row.tpr)}"
    )


def _experiment_spec(args, default_reps: int) -> ExperimentSpec:
    model = _resolved(args, "model", required=True)
    k = _resolved(args, "k")
    return ExperimentSpec(
        model=model,
        p=int(_resolved(args, "p", required=True)),
        n=int(_resolved(args, "n", 50)),
        lam=float(_resolved(args, "lam", required=True)),
        tau=float(_resolved(args, "tau", required=True)),
        k=int(k) if k is not None else None,
        mu=float(_resolved(args, "mu", _SOLVER_DEFAULTS["mu"])),
        tol=float(_resolved(args, "tol", _SOLVER_DEFAULTS["tol"])),
        max_iter=int(_resolved(args, "max_iter", _SOLVER_DEFAULTS["max_iter"])),
        init=str(_resolved(args, "init", _SOLVER_DEFAULTS["init"])),
        replications=int(_resolved(args, "reps", default_reps)),
        base_seed=int(_resolved(args, "seed", 0)),
    )


def _cmd_experiment(args) -> None:
    out = _resolved(args, "out", required=True)
    spec = _experiment_spec(args, default_reps=100)
    jobs = int(_resolved(args, "jobs", 1))
    result = run_experiment(spec, jobs=jobs)
    runs_path = Path(out).with_name(Path(out).stem + "_runs.csv")
    write_metrics_csv(runs_path, result.runs)
    write_summary_csv(out, result.summary)
    summary = result.summary
    print(
        f"p={summary['p']:g} ar_est={summary['ar_est']:.4g} sp_true={summary['sp_true']:.4g} "
        f"sp_est={summary['sp_est']:.4g} fpr={summary['fpr']:.4g} tpr={summary['tpr']:.4g} "
        f"time_s={summary['time_s']:.4g} converged={summary['converged']:.4g}"
    )


def _cmd_rate(args) -> None:
    out = _resolved(args, "out", required=True)
    grid_raw = _resolved(args, "n_grid", required=True)
    try:
        n_values = [int(tok) for tok in str(grid_raw).split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"--n-grid must be comma-separated integers, got {grid_raw!r}") from None
    spec = _experiment_spec(args, default_reps=50)
    jobs = int(_resolved(args, "jobs", 1))
    inject = _resolved(args, "inject_slope")
    hook = None
    if inject is not None:
        exponent = float(inject)
        hook = lambda n, run: float(n) ** exponent  # noqa: E731
    study = run_rate_study(spec, n_values, jobs=jobs, error_for_run=hook)
    with open(out, "w", encoding="ascii") as fh:
        fh.write("n,mean_frob_error\n")
        for n, err in study.points:
            fh.write(f"{n},{format_float(err)}\n")
    write_json(
        str(Path(out).with_suffix(".json")),
        {
            "slope": study.slope,
            "intercept": study.intercept,
            "points": [[n, err] for n, err in study.points],
        },
    )
    print(f"slope={format_float(study.slope)} intercept={format_float(study.intercept)}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args)
        args.handler(args)
    except MatrixParseError as exc:
        print(f"slrcov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"slrcov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        path = getattr(exc, "filename", None)
        where = f" ({path})" if path else ""
        print(f"slrcov: i/o error: {exc}{where}", file=sys.stderr)
        return EXIT_IO
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"slrcov: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
