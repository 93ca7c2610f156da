"""Command-line interface: sample | predict | compare | oracle.

Exit codes: 0 on success, 1 when a comparison threshold is violated or an
oracle check fails, 2 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import runner
from .errors import EigenringError
from .runner import load_config, model_from_dict
from .stats import RadialGrid


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenring",
        description="Monte Carlo eigenvector-overlap statistics for "
        "biunitarily invariant random matrix ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run a sampling experiment from a JSON config")
    p.add_argument("--config", required=True, help="path to the experiment JSON")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--workers", type=int, help="override the worker count")
    p.add_argument("--out-dir", help="override the output directory")
    p.add_argument("--bins", type=int, help="override the bin count of a uniform grid")
    p.add_argument("--c-edge", type=float, help="override the edge-exclusion constant")
    p.add_argument("--dump-samples", action="store_true",
                   help="also write per-eigenvalue rows to samples.csv")

    p = sub.add_parser("predict", help="emit an analytic table (r, F, rho, O, c)")
    p.add_argument("--family", required=True,
                   choices=["ginibre_product", "truncated_haar_product",
                            "spherical", "haar_sum"])
    p.add_argument("--factors", type=int, default=1,
                   help="number of factors (products) or terms (sums)")
    p.add_argument("--kappa", type=float, help="truncation ratio L/N")
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=1.5)
    p.add_argument("--points", type=int, default=151)
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")

    p = sub.add_parser("compare", help="compare a stored report CSV against a model")
    p.add_argument("--report", help="report CSV written by the sample subcommand")
    p.add_argument("--summary", help="summary JSON written alongside the report")
    p.add_argument("--config", help="alternatively: run this config, then compare")
    p.add_argument("--family", required=True,
                   choices=["ginibre_product", "truncated_haar_product",
                            "spherical", "haar_sum"])
    p.add_argument("--factors", type=int, default=1)
    p.add_argument("--kappa", type=float)
    p.add_argument("--c-edge", type=float, default=3.0)
    p.add_argument("--max-o-err", type=float, default=0.05,
                   help="sup-error threshold on the overlap correlator")
    p.add_argument("--max-rho-err", type=float, default=0.05,
                   help="sup-error threshold on the radial density")

    p = sub.add_parser("oracle", help="run the deterministic invariant suite")
    p.add_argument("--seed", type=int, default=20260808)
    p.add_argument("--fast", action="store_true",
                   help="skip the ensemble-averaged resolvent check")
    return parser


def _model_from_args(args):
    data = {"family": args.family}
    if args.family in ("ginibre_product", "truncated_haar_product"):
        data["n"] = args.factors
    else:
        data["k"] = args.factors
    if args.kappa is not None:
        data["kappa"] = args.kappa
    return model_from_dict(data)


def _cmd_sample(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.c_edge is not None:
        overrides["c_edge"] = args.c_edge
    if args.dump_samples:
        overrides["dump_samples"] = True
    if args.bins is not None:
        model, grid = runner._resolve(config)
        lo, hi = float(grid.edges[0]), float(grid.edges[-1])
        ratios = grid.edges[1:] / grid.edges[:-1] if lo > 0 else None
        if ratios is not None and np.allclose(ratios, ratios[0]):
            overrides["grid"] = RadialGrid.log_spaced(lo, hi, args.bins)
        else:
            overrides["grid"] = RadialGrid.uniform(lo, hi, args.bins)
    if overrides:
        config = replace(config, **overrides)
    result = runner.run_sample(config)
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    return 0 if result.summary["status"] == "pass" else 1


def _cmd_predict(args) -> int:
    model = _model_from_args(args)
    radii = np.linspace(args.r_min, args.r_max, args.points)
    rows = runner.predict_rows(model, radii)
    if args.out == "-":
        runner.write_predict_csv(sys.stdout, rows)
    else:
        runner.write_predict_csv(args.out, rows)
    return 0


def _cmd_compare(args) -> int:
    model = _model_from_args(args)
    if args.config:
        config = load_config(args.config)
        config = replace(config, model=model, c_edge=args.c_edge,
                         max_overlap_error=args.max_o_err,
                         max_rho_error=args.max_rho_err)
        result = runner.run_sample(config)
        summary = result.summary
    else:
        if not args.report or not args.summary:
            raise EigenringError("compare needs either --config or --report with --summary")
        rows = runner.load_report_csv(args.report)
        with open(args.summary) as fh:
            stored = json.load(fh)
        summary = runner.compare_table(rows, int(stored["N"]), model, args.c_edge)
        summary["status"] = (
            "pass"
            if summary["bulk_sup_err_O"] <= args.max_o_err
            and summary["bulk_sup_err_rho"] <= args.max_rho_err
            else "fail"
        )
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0 if summary["status"] == "pass" else 1


def _cmd_oracle(args) -> int:
    checks = runner.run_oracle(args.seed, heavy=not args.fast)
    failed = 0
    for check in checks:
        tag = "PASS" if check.passed else "FAIL"
        print(f"[{tag}] {check.name}: {check.detail}")
        failed += not check.passed
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "sample": _cmd_sample,
        "predict": _cmd_predict,
        "compare": _cmd_compare,
        "oracle": _cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except EigenringError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
