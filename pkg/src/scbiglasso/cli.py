"""Command-line entry point: simulate, fit, eval and sweep.

Exit codes: 0 success, 2 usage error, 3 data or format error, 4 numerical
failure.  No environment variables are read; every setting is a flag or a
field of the simulation spec file.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import io
from .covariance import CovEstimatorKind, estimate_cov_pair
from .data import DataStack
from .errors import DataFormatError, DimensionError, EigenConvergenceError, NotPositiveDefiniteError
from .evaluate import beta_sweep, bic, binarize, parse_grid, recovery_metrics
from .linalg import KsModel
from .simulate import CountParams, SimSpec, simulate
from .solver import SolverConfig, fit

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("scbiglasso")


class UsageError(Exception):
    pass


_SPEC_TYPES = {
    "n": int, "p": int, "m": int, "seed": int, "theta_blocks": int,
    "sparsity": float, "offdiag_mean": float, "offdiag_sd": float,
    "block_value": float, "block_noise_sd": float,
    "truth": str, "center": bool,
}


def load_sim_spec(path) -> tuple[SimSpec, str]:
    """Read a JSON simulation spec.  Returns the spec and its data mode."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"spec file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("spec: top level must be an object")
    raw = dict(raw)
    mode = raw.pop("mode", "gaussian")
    if mode not in ("gaussian", "counts"):
        raise UsageError(f"spec.mode: expected 'gaussian' or 'counts', got {mode!r}")
    counts_raw = raw.pop("count_params", None)
    kwargs = {}
    for key, value in raw.items():
        if key not in _SPEC_TYPES:
            raise UsageError(f"spec.{key}: unknown field")
        want = _SPEC_TYPES[key]
        ok = isinstance(value, bool) if want is bool else (
            isinstance(value, (int, float)) and not isinstance(value, bool) if want is float
            else isinstance(value, want) and not isinstance(value, bool))
        if not ok:
            raise UsageError(f"spec.{key}: expected {want.__name__}, got {value!r}")
        kwargs[key] = want(value)
    for required in ("n", "p"):
        if required not in kwargs:
            raise UsageError(f"spec.{required}: required field missing")
    if mode == "counts":
        counts_raw = counts_raw or {}
        if not isinstance(counts_raw, dict):
            raise UsageError("spec.count_params: expected an object")
        extra = set(counts_raw) - {"r", "prob"}
        if extra:
            raise UsageError(f"spec.count_params.{sorted(extra)[0]}: unknown field")
        try:
            kwargs["count_params"] = CountParams(int(counts_raw.get("r", 2)),
                                                 float(counts_raw.get("prob", 0.5)))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"spec.count_params: {exc}") from exc
    elif counts_raw is not None:
        raise UsageError("spec.count_params: only valid with mode 'counts'")
    try:
        return SimSpec(**kwargs), mode
    except ValueError as exc:
        raise UsageError(f"spec: {exc}") from exc


def _spec_config(spec: SimSpec, mode: str) -> dict:
    cfg = dataclasses.asdict(spec)
    cfg["mode"] = mode
    return cfg


def cmd_simulate(args) -> int:
    started = io.utc_now()
    spec, mode = load_sim_spec(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sim = simulate(spec)
    files = [io.write_matrix(out / "truth_psi.csv", sim.truth.psi, symmetric=True),
             io.write_matrix(out / "truth_theta.csv", sim.truth.theta, symmetric=True)]
    width = max(3, len(str(spec.m - 1)))
    for k, y in enumerate(sim.data):
        files.append(io.write_matrix(out / f"data_{k:0{width}d}.csv", y, kind=sim.data.kind))
    io.write_manifest(out / "manifest.json", "simulate", _spec_config(spec, mode), started,
                      inputs=[args.spec], outputs=files, seed=spec.seed,
                      extra={"conventions": sim.metadata})
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def _load_stack(paths) -> DataStack:
    mats, kinds = [], set()
    for p in paths:
        arr, meta = io.read_matrix_with_meta(p)
        mats.append(arr)
        kinds.add(meta["kind"] or "gaussian")
    kind = "counts" if kinds == {"counts"} else "gaussian"
    return DataStack.from_matrices(mats, kind)


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            beta1=getattr(args, "beta1", 0.01), beta2=getattr(args, "beta2", 0.01),
            max_iter=args.max_iter, tol=args.tol, lasso_max_iter=args.lasso_max_iter,
            lasso_tol=args.lasso_tol, zero_threshold=args.zero_threshold,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_fit(args) -> int:
    started = io.utc_now()
    cfg = _solver_config(args)
    data = _load_stack(args.data)
    init = None
    if args.init:
        init = KsModel(io.read_matrix(args.init[0]), io.read_matrix(args.init[1]))
    cov = estimate_cov_pair(data, args.estimator)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = fit(cov, cfg, init)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [io.write_matrix(out / "psi.csv", res.model.psi, symmetric=True),
             io.write_matrix(out / "theta.csv", res.model.theta, symmetric=True),
             io.write_table(out / "delta_history.csv",
                            [{"iteration": k + 1, "delta_psi": a, "delta_theta": b}
                             for k, (a, b) in enumerate(res.delta_history)])]
    bic_psi, bic_theta = bic(res.model, cov, (data.m * data.n, data.m * data.p), cfg.zero_threshold)
    config = dataclasses.asdict(cfg) | {"estimator": args.estimator, "data_kind": data.kind,
                                        "m": data.m, "n": data.n, "p": data.p,
                                        "init": list(args.init) if args.init else "identity"}
    io.write_manifest(out / "manifest.json", "fit", config, started,
                      inputs=list(args.data) + (list(args.init) if args.init else []),
                      outputs=files,
                      convergence={"converged": res.converged, "iterations": res.iterations_run,
                                   "objective": res.objective, "bic_psi": bic_psi,
                                   "bic_theta": bic_theta, "lasso_failures": res.lasso_failures},
                      warnings=[str(w.message) for w in caught])
    print(f"converged={res.converged} iterations={res.iterations_run} objective={res.objective:.6g}")
    return EXIT_OK


def cmd_eval(args) -> int:
    started = io.utc_now()
    est_psi, est_theta = io.read_matrix(args.est_psi), io.read_matrix(args.est_theta)
    tru_psi, tru_theta = io.read_matrix(args.truth_psi), io.read_matrix(args.truth_theta)
    if est_psi.shape != tru_psi.shape or est_theta.shape != tru_theta.shape:
        raise DimensionError("estimated and true matrices have different shapes")
    # truth support always uses the any-nonzero rule; the mode applies to estimates
    reports = {
        "psi": recovery_metrics(binarize(est_psi, args.zero_threshold, args.mode),
                                binarize(tru_psi), "psi").to_dict(),
        "theta": recovery_metrics(binarize(est_theta, args.zero_threshold, args.mode),
                                  binarize(tru_theta), "theta").to_dict(),
        "mode": args.mode,
        "zero_threshold": args.zero_threshold,
        "conventions": "pairs are unordered off-diagonal; precision=1 with no predicted edges, "
                       "recall=1 with no true edges, fpr=0 with no true non-edges",
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = out / "report.json"
    report.write_text(json.dumps(reports, indent=2) + "\n")
    io.write_manifest(out / "manifest.json", "eval",
                      {"mode": args.mode, "zero_threshold": args.zero_threshold}, started,
                      inputs=[args.est_psi, args.est_theta, args.truth_psi, args.truth_theta],
                      outputs=[report])
    for side in ("psi", "theta"):
        r = reports[side]
        print(f"{side}: accuracy={r['accuracy']:.4f} precision={r['precision']:.4f} "
              f"recall={r['recall']:.4f} fpr={r['fpr']:.4f}")
    return EXIT_OK


def _argmin_interval(rows, key, beta_key):
    vals = [(getattr(r, beta_key), getattr(r, key)) for r in rows if not r.error]
    if not vals:
        return None
    best = min(v for _, v in vals)
    betas = sorted({b for b, v in vals if v == best})
    return [betas[0], betas[-1]]


def cmd_sweep(args) -> int:
    started = io.utc_now()
    try:
        grid1, grid2 = parse_grid(args.beta1_grid), parse_grid(args.beta2_grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if bool(args.truth_psi) != bool(args.truth_theta):
        raise UsageError("--truth-psi and --truth-theta must be given together")
    cfg = _solver_config(args)
    data = _load_stack(args.data)
    truth = None
    if args.truth_psi:
        truth = KsModel(io.read_matrix(args.truth_psi), io.read_matrix(args.truth_theta))
    cov = estimate_cov_pair(data, args.estimator)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = beta_sweep(cov, grid1, grid2, cfg, truth=truth, warm_start=args.warm_start,
                          mode=args.mode, n_eff=(data.m * data.n, data.m * data.p))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = io.write_table(out / "sweep.csv", [r.to_record() for r in rows])
    config = dataclasses.asdict(cfg) | {"estimator": args.estimator, "beta1_grid": grid1,
                                        "beta2_grid": grid2, "warm_start": args.warm_start,
                                        "mode": args.mode}
    inputs = list(args.data) + ([args.truth_psi, args.truth_theta] if truth is not None else [])
    io.write_manifest(out / "manifest.json", "sweep", config, started, inputs=inputs,
                      outputs=[table],
                      convergence={"rows": len(rows), "failed": sum(bool(r.error) for r in rows),
                                   "converged": sum(r.converged for r in rows)},
                      warnings=sorted({str(w.message) for w in caught}),
                      extra={"bic_psi_min_beta1": _argmin_interval(rows, "bic_psi", "beta1"),
                             "bic_theta_min_beta2": _argmin_interval(rows, "bic_theta", "beta2"),
                             "bic_convention": "shared joint log-likelihood, per-side parameter "
                                               "count, N_eff = m*n (psi) and m*p (theta)"})
    print(f"wrote {len(rows)} rows to {table}")
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--estimator", choices=[k.value for k in CovEstimatorKind], default="empirical")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--lasso-max-iter", type=int, default=200)
    p.add_argument("--lasso-tol", type=float, default=1e-8)
    p.add_argument("--zero-threshold", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scbiglasso",
                                     description="Scalable Bigraphical Lasso for two-way networks")
    parser.add_argument("--threads", type=int, default=1,
                        help="cap on BLAS threads (default 1 for bit-reproducibility)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate truth matrices and data replicates")
    p.add_argument("spec", help="JSON simulation spec")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="estimate psi and theta from data replicates")
    p.add_argument("data", nargs="+", help="p x n data matrix CSVs, one per replicate")
    p.add_argument("--beta1", type=float, default=0.01)
    p.add_argument("--beta2", type=float, default=0.01)
    p.add_argument("--init", nargs=2, metavar=("PSI", "THETA"))
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="support-recovery metrics against known truth")
    p.add_argument("est_psi")
    p.add_argument("est_theta")
    p.add_argument("truth_psi")
    p.add_argument("truth_theta")
    p.add_argument("--mode", choices=["any_nonzero", "negative_only"], default="any_nonzero")
    p.add_argument("--zero-threshold", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="fit over a (beta1, beta2) grid")
    p.add_argument("data", nargs="+")
    p.add_argument("--beta1-grid", required=True, help="start:step:stop or comma list")
    p.add_argument("--beta2-grid", required=True)
    p.add_argument("--truth-psi")
    p.add_argument("--truth-theta")
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--mode", choices=["any_nonzero", "negative_only"], default="any_nonzero")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        with threadpool_limits(limits=args.threads):
            return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotPositiveDefiniteError, EigenConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataFormatError, DimensionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
