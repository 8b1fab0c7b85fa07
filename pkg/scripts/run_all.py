"""Run every config in configs/ and print one verdict line per experiment."""

import argparse
import sys
from pathlib import Path

from pcrlab.lab import load_config, run

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(ROOT / "configs"))
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--skip", nargs="*", default=[], help="config stems to skip, e.g. positivity_sweep")
    args = ap.parse_args()

    failed = 0
    for path in sorted(Path(args.configs).glob("*.yaml")):
        if path.stem in args.skip:
            continue
        cfg = load_config(path)
        report = run(cfg)
        report.write(Path(args.out) / path.stem)
        failed += not report.verdict
        print(f"{cfg.experiment:22s} {'pass' if report.verdict else 'FAIL'}  ({len(report.rows)} rows)")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
