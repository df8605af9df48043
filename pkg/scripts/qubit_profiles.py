"""Tabulate the qubit monotone against the off-diagonal modulus |b|.

Prints, for each built-in functional, the closed-form value, the brute-force
oracle on a coarse grid, and the minimum second difference of the profile.
"""

import argparse

import numpy as np

from coherence_monotone.measures import BUILTINS
from coherence_monotone.solver import GridSpec, brute_force_cm, qubit_cm, qubit_convexity_probe
from coherence_monotone.states import validate_density


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=11)
    ap.add_argument("--angles", type=int, default=180)
    ap.add_argument("--diag", type=float, default=0.5, help="sigma_00 of the probed states")
    args = ap.parse_args()

    a = args.diag
    b_max = np.sqrt(a * (1 - a))
    grid = GridSpec(n_angles=args.angles, n_samples=200)
    names = list(BUILTINS)
    print("|b|      " + "  ".join(f"{n:>10} {'oracle':>10}" for n in names))
    for b in np.linspace(0.0, b_max, args.points):
        sigma = validate_density(np.array([[a, b], [b, 1 - a]]))
        cells = []
        for f in BUILTINS.values():
            cells.append(f"{qubit_cm(sigma, f):10.6f} {brute_force_cm(sigma, f, grid):10.6f}")
        print(f"{b:.4f}   " + "  ".join(cells))
    print()
    for n, f in BUILTINS.items():
        print(f"min second difference of {n:>9}: {qubit_convexity_probe(f):+.3e}")


if __name__ == "__main__":
    main()
