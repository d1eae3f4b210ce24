"""Command-line front end: run simulations, execute verification suites, and
fit recorded spectra.

    landau-hermite run    --config cfg.txt --out results/
    landau-hermite verify --suite all [--out results/]
    landau-hermite fit    --input results/spectra.csv --out results/

`run` writes ledger.csv, spectra.csv and LNSP snapshots; with the picard
scheme it also writes picard_report.json.  `verify` prints one JSON record
per check and exits nonzero if any fails.  `fit` turns a spectra CSV into a
fitted-rates CSV.  Identical config and seed give byte-identical outputs.
The LANDAU_THREADS environment variable caps suite parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import solver as sv
from . import diagnostics as dg
from .verify import run_suite


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_run(config_path: str, out_dir: str) -> int:
    cfg = sv.load_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    if cfg.scheme == "picard":
        g0 = sv.build_initial_state(cfg)
        trajectory, report = sv.picard_solve(g0)
        ledger = sv.EnergyLedger()
        dissipation = 0.0
        tn_prev = None
        snapshots = []
        for k, state in enumerate(trajectory):
            tn = sv.triple_norm(state)
            if tn_prev is not None:
                dissipation += cfg.dt * tn_prev**2
            ledger.append(state.time, sv.h_r_norm(state), tn, dissipation)
            tn_prev = tn
            if cfg.record_every and (
                k % cfg.record_every == 0 or k == len(trajectory) - 1
            ):
                snapshots.append((state.time, state))
        rep = {
            "converged": report.converged,
            "non_contraction": report.non_contraction,
            "failed_iterate": report.failed_iterate,
            "reason": report.reason,
            "iterations": report.iterations,
            "distances": report.distances,
            "lambdas": [x if math.isfinite(x) else "inf" for x in report.lambdas],
            "contraction_factor": (
                report.contraction_factor
                if math.isfinite(report.contraction_factor)
                else "inf"
            ),
            "c0_estimate": report.c0_estimate,
            "smallness_product": report.smallness_product,
        }
        _write(
            os.path.join(out_dir, "picard_report.json"),
            json.dumps(rep, indent=2, sort_keys=True) + "\n",
        )
    else:
        result = sv.run(cfg)
        ledger = result.ledger
        snapshots = result.snapshots
    _write(os.path.join(out_dir, "ledger.csv"), ledger.to_csv())
    series = dg.series_from_snapshots(snapshots)
    _write(os.path.join(out_dir, "spectra.csv"), dg.write_spectra_csv(series))
    for t, state in snapshots:
        step = int(round((t - snapshots[0][0]) / cfg.dt))
        final = t == snapshots[-1][0]
        wanted = cfg.snapshot_every and step % cfg.snapshot_every == 0
        if wanted or final:
            name = "final.lnsp" if final else f"snapshot_{step:06d}.lnsp"
            sv.write_snapshot(os.path.join(out_dir, name), state)
    return 0


def cmd_verify(suite: str, out_dir: str | None) -> int:
    records = run_suite(suite)
    lines = [json.dumps(r, sort_keys=True) for r in records]
    for line in lines:
        print(line)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write(os.path.join(out_dir, "verify.jsonl"), "\n".join(lines) + "\n")
    return 0 if all(r["status"] == "pass" for r in records) else 1


def cmd_fit(input_path: str, out_dir: str) -> int:
    with open(input_path, "r", encoding="utf-8") as fh:
        series = dg.read_spectra_csv(fh.read())
    points = series.rate_points()
    os.makedirs(out_dir, exist_ok=True)
    _write(os.path.join(out_dir, "fitted_rates.csv"), dg.write_rates_csv(points))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landau-hermite",
        description="Hermite-Fourier spectral simulator and verification suite",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="march a configured simulation")
    p_run.add_argument("--config", required=True, help="key=value config file")
    p_run.add_argument("--out", required=True, help="output directory")

    p_verify = sub.add_parser("verify", help="execute a verification suite")
    p_verify.add_argument(
        "--suite",
        default="all",
        help="ladder | linear_op | gamma_oracle | weights | kolmogorov | all",
    )
    p_verify.add_argument("--out", default=None, help="optional report directory")

    p_fit = sub.add_parser("fit", help="fit decay rates from a spectra CSV")
    p_fit.add_argument("--input", required=True, help="spectra CSV path")
    p_fit.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "verify":
        return cmd_verify(args.suite, args.out)
    if args.command == "fit":
        return cmd_fit(args.input, args.out)
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
