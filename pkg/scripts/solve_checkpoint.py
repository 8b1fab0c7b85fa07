"""Continue a bump-perturbed family from lambda=0 to 1 and save the final map.

Prints the area at each stage; the saved checkpoint can be reloaded with
pcrlab.io.load_map_sample.
"""

import argparse

from pcrlab.families import SolutionFamily
from pcrlab.grid import CylinderGrid
from pcrlab.hamiltonian import Bump, PerturbationSpec
from pcrlab.io import save_map_sample
from pcrlab.solver import homotopy_continue


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--mass", type=float, default=1.0)
    ap.add_argument("--half-length", type=float, default=6.0)
    ap.add_argument("--grid", nargs=2, type=int, default=[400, 64], metavar=("N_S", "N_T"))
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--out", default="solution.txt")
    args = ap.parse_args()

    grid = CylinderGrid.symmetric(args.half_length, *args.grid)
    fam = SolutionFamily(args.k, PerturbationSpec(Bump(-1.0, 1.0, args.mass), 1.0))
    schedule = [i / args.steps for i in range(args.steps + 1)]
    res = homotopy_continue(fam.with_lambda(0.0).sample(grid), fam, schedule)
    for st in res.stages:
        print(f"lam={st.lam:.3f}  area={st.area:.8f}  iterations={st.report.iterations}  "
              f"residual={st.report.final_residual:.2e}")
    if not res.ok:
        print(f"stage {res.failed_index} failed")
        raise SystemExit(1)
    save_map_sample(res.stages[-1].sample, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
