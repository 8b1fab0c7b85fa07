"""Defects and halving ratios for each identity check, as a plain table."""

import argparse

from pcrlab.lab import identity_cases, refinement_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    for name, (base, fn) in identity_cases().items():
        hs, defects = refinement_study(base, fn, args.levels)
        print(name)
        prev = None
        for h, d in zip(hs, defects):
            ratio = f"{prev / d:7.3f}" if prev else "      -"
            print(f"  h_s={h:.5f}  defect={d:.4e}  ratio={ratio}")
            prev = d


if __name__ == "__main__":
    main()
