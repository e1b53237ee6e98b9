"""Command-line front end.

    subcomp <command> --config PATH [--output PATH] [--format csv|json]
                      [--seed U64] [--workers N]

Exit codes: 0 success / pass, 1 verification or check failure,
2 usage error (including a missing config file), 3 runtime error (a JSON
error object is written to stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .compensator import skew_gamma_closed_form, skew_ts_closed_form, theorem_density_quadrature
from .config import ConfigError, RunConfig, load_config
from .markov import SkewParams
from .mc_verify import _tables, block_layout, block_rng, run_verification, simulate_block
from .selftest import run_selftest
from .specfun import bessel_k

SEED_ENV = "SUBCOMP_SEED"

DENSITY_COLUMNS = ("x", "y", "closed_form", "gamma_closed_form", "quadrature",
                   "abs_diff", "tolerance")
SIMULATE_COLUMNS = ("path", "time", "size", "in_window")
REPORT_COLUMNS = ("empirical_mean_count", "empirical_se", "predicted", "predicted_se",
                  "z_score", "truncation_bias_bound", "pass", "seed", "n_paths", "eps",
                  "runtime_seconds", "schema_version")

EPILOG = f"""\
density CSV columns: {", ".join(DENSITY_COLUMNS)}
  (gamma_closed_form is empty unless alpha = 0; tolerance = 1e-6 * (1 + |closed_form|))
simulate CSV columns: {", ".join(SIMULATE_COLUMNS)}
verify JSON keys: {", ".join(REPORT_COLUMNS)}
numbers are written with 17 significant digits.
seed precedence: --seed > ${SEED_ENV} > scenario.seed in the config file.
exit codes: 0 ok, 1 failed check, 2 usage, 3 runtime error.
"""


def _num(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, ".17g")
    return str(v)


def _write(rows, columns, cfg: RunConfig, out_stream):
    if cfg.output_format == "json":
        text = json.dumps(rows if isinstance(rows, dict) else list(rows), indent=2,
                          default=float) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in ([rows] if isinstance(rows, dict) else rows):
            w.writerow([_num(row[c]) for c in columns])
        text = buf.getvalue()
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (out_stream or sys.stdout).write(text)


def density_rows(cfg: RunConfig):
    spec = cfg.subordinator()
    skew = SkewParams(cfg.beta)
    kernel = cfg.make_kernel()
    if cfg.kernel != "skew":
        raise ConfigError("the density table is defined for the skew kernel")
    rows = []
    for x in cfg.x_values:
        for y in cfg.y_grid():
            y = float(y)
            cf = skew_ts_closed_form(x, y, skew, spec.params)
            gc = (skew_gamma_closed_form(x, y, skew, cfg.c, cfg.lam)
                  if cfg.alpha == 0.0 else math.nan)
            q = theorem_density_quadrature(x, y, kernel, spec)
            rows.append({"x": float(x), "y": y, "closed_form": cf, "gamma_closed_form": gc,
                         "quadrature": q, "abs_diff": abs(cf - q),
                         "tolerance": 1e-6 * (1.0 + abs(cf))})
    return rows


def cmd_density(cfg: RunConfig, out=None) -> int:
    rows = density_rows(cfg)
    _write(rows, DENSITY_COLUMNS, cfg, out)
    return 0 if all(r["abs_diff"] <= r["tolerance"] for r in rows) else 1


def cmd_simulate(cfg: RunConfig, out=None) -> int:
    scenario = cfg.scenario()
    table, _ = _tables(scenario, False)
    rows = []
    for block, start, n in block_layout(scenario):
        res = simulate_block(scenario, n, block_rng(scenario.master_seed, 0, block), table)
        hit = scenario.in_window(res["size"])
        for p, t, s, h in zip(res["path"], res["time"], res["size"], hit):
            rows.append({"path": int(p) + start, "time": float(t), "size": float(s),
                         "in_window": bool(h)})
    _write(rows, SIMULATE_COLUMNS, cfg, out)
    return 0


def cmd_verify(cfg: RunConfig, workers: int = 1, corrupt: float = 1.0, out=None) -> int:
    report = run_verification(cfg.scenario(), workers=workers, predicted_scale=corrupt)
    _write(report.to_dict(), REPORT_COLUMNS, cfg, out)
    return 0 if report.passed else 1


def cmd_selftest(perturb: float = 0.0, out=None) -> int:
    if perturb:
        def bessel(v, x):
            return bessel_k(v, x) + perturb
    else:
        bessel = bessel_k
    rows = run_selftest(bessel)
    out = out or sys.stdout
    width = max(len(r[0]) for r in rows)
    for name, ok, detail, secs in rows:
        out.write(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {secs:7.2f}s  {detail}\n")
    failed = sum(not r[1] for r in rows)
    out.write(f"{len(rows) - failed}/{len(rows)} checks passed\n")
    return 0 if failed == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subcomp",
        description="Compensators of time-changed Markov processes: tabulate and verify.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=("simulate", "density", "verify", "selftest"))
    parser.add_argument("--config", help="scenario file (flat key = value)")
    parser.add_argument("--output", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes; results do not depend on it")
    parser.add_argument("--corrupt-predicted", type=float, default=1.0,
                        help=argparse.SUPPRESS)
    parser.add_argument("--perturb-bessel", type=float, default=0.0,
                        help=argparse.SUPPRESS)
    return parser


def _resolve_seed(flag, config_seed):
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return config_seed


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        return cmd_selftest(args.perturb_bessel)
    if not args.config:
        parser.error(f"{args.command} requires --config")
    if not os.path.isfile(args.config):
        parser.error(f"config file not found: {args.config}")
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(command=args.command, output_path=args.output,
                                 output_format=args.format,
                                 seed=_resolve_seed(args.seed, cfg.seed))
        if args.command == "density":
            return cmd_density(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        return cmd_verify(cfg, workers=max(1, args.workers), corrupt=args.corrupt_predicted)
    except Exception as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc),
                         "command": args.command}}
        sys.stderr.write(json.dumps(err) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
