"""Locate wall positions where the interface determinant vanishes and check
the rank-3 construction there."""

import argparse
import dataclasses

import numpy as np

from floquet_bilayer.assembler import determinant_bracket, find_degenerate_b, interface_rhs_matrix
from floquet_bilayer.field import solve
from floquet_bilayer.model import reference_params
from floquet_bilayer.verify import incident_wave_feasibility, matching_report, residual_algebraic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b-max", type=float, default=20.0)
    ap.add_argument("--samples", type=int, default=4000)
    ap.add_argument("--n-len", type=int, default=1)
    args = ap.parse_args()
    base = reference_params(n_len=args.n_len, Omega=1.0 + args.n_len)
    grid = np.linspace(args.b_max / args.samples, args.b_max, args.samples)
    vals = np.array([determinant_bracket(base, base.m_base + 1, b) for b in grid])
    roots = [find_degenerate_b(base, grid[i], grid[i + 1])
             for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)]
    print(f"{len(roots)} zeros of the determinant bracket in (0, {args.b_max}]")
    print(f"{'b':>16} {'sv4/sv1':>10} {'algebraic':>10} {'matching':>10} {'nullspace':>9}")
    for b in roots:
        params = dataclasses.replace(base, b=b)
        s = np.linalg.svd(interface_rhs_matrix(params, base.m_base + 1), compute_uv=False)
        sol = solve(params, [1.0] + [0.0] * (2 * args.n_len - 1))
        rep = matching_report(sol)
        worst = max(rep.continuity_value, rep.continuity_deriv, rep.boundary_value)
        null = incident_wave_feasibility(params, restrict=False).nullspace_dimension
        print(f"{b:16.12f} {s[3] / s[0]:10.2e} {residual_algebraic(sol):10.2e} "
              f"{worst:10.2e} {null:9d}")


if __name__ == "__main__":
    main()
