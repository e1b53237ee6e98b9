"""Run every verify scenario in scenarios/ and print one summary row each.

    python3 scripts/run_scenarios.py [--paths N] [--workers W] [--json out.json]
"""
import argparse
import json
from pathlib import Path

from subcomp.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, help="override scenario.paths")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", help="also write the reports here")
    args = ap.parse_args()

    from subcomp.mc_verify import run_verification

    reports = {}
    print(f"{'scenario':<14}{'empirical':>12}{'predicted':>12}{'z':>8}{'bias':>10}  pass  secs")
    for path in sorted((ROOT / "scenarios").glob("*.cfg")):
        cfg = load_config(path)
        if cfg.command != "verify":
            continue
        if args.paths:
            cfg = cfg.with_overrides(n_paths=args.paths)
        rep = run_verification(cfg.scenario(), workers=args.workers)
        reports[path.stem] = rep.to_dict()
        print(f"{path.stem:<14}{rep.empirical_mean_count:>12.5f}{rep.predicted:>12.5f}"
              f"{rep.z_score:>8.2f}{rep.truncation_bias_bound:>10.1e}  "
              f"{'yes' if rep.passed else 'NO ':<4}  {rep.runtime_seconds:.1f}")
    if args.json:
        Path(args.json).write_text(json.dumps(reports, indent=2) + "\n")


if __name__ == "__main__":
    main()
