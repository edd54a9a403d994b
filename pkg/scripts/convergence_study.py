"""Grid refinement study of the implicit scheme.

Scalar advection with sinusoidal data, and the modified-t0 bump against its
characteristic solution.  Prints a table of sup-norm errors and observed orders.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import modified_t0_exact  # noqa: E402

from hkhydro.grid import Grid, gaussian_bump
from hkhydro.pde import make_modified_t0
from hkhydro.scheme import ScalarAdvection, SolverConfig, advance_three_layer, advance_two_layer, \
    reference_explicit_solve, run


def scalar_error(n, gamma):
    grid = Grid.from_gamma(0.0, 1.0, n, gamma)
    q, cfg, sys_ = grid.nodes(), SolverConfig(), ScalarAdvection(1.0)
    steps = round(1.0 / grid.tau)
    y0 = np.sin(2 * np.pi * q)[None, :]
    prev, curr = y0, advance_two_layer(sys_, grid, 0.0, y0, cfg)[0]
    for k in range(2, steps + 1):
        prev, curr = curr, advance_three_layer(sys_, grid, k * grid.tau, prev, curr, cfg)[0]
    return np.max(np.abs(curr[0] - np.sin(2 * np.pi * (q - steps * grid.tau))))


def bump_errors(n, t_end, sigma):
    grid = Grid.from_gamma(-50.0, 50.0, n)
    init = gaussian_bump(grid, epsilon=0.05, sigma=sigma)
    implicit = run(make_modified_t0(), init, SolverConfig(), [t_end]).snapshot_at(t_end).u
    explicit = reference_explicit_solve(make_modified_t0(), init, t_end).u
    exact, _ = modified_t0_exact(grid.nodes(), t_end, 0.5, 0.0, 0.05, sigma)
    return np.max(np.abs(implicit - exact)), np.max(np.abs(explicit - exact))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    args = ap.parse_args()

    print(f"scalar advection, gamma = {args.gamma}")
    prev = None
    for n in args.sizes:
        e = scalar_error(n, args.gamma)
        print(f"  n={n:5d}  err={e:.3e}" + (f"  order={np.log2(prev / e):.2f}" if prev else ""))
        prev = e

    t_end = 2.0
    print(f"modified-t0 bump, eps = 0.05, sigma = {args.sigma}, t = {t_end}")
    for n in args.sizes:
        ei, ee = bump_errors(n, t_end, args.sigma)
        print(f"  n={n:5d}  implicit={ei:.3e}  explicit reference={ee:.3e}")


if __name__ == "__main__":
    main()
