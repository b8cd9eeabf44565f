"""Finite-difference residual against step size for a reference solution."""

import argparse

import numpy as np

from floquet_bilayer.field import solve
from floquet_bilayer.model import reference_params
from floquet_bilayer.verify import FDGrid, residual_fd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h0", type=float, default=1e-2)
    ap.add_argument("--levels", type=int, default=6)
    ap.add_argument("--n-len", type=int, default=1)
    ap.add_argument("--omega-cap", type=float, default=None, help="override Omega")
    args = ap.parse_args()
    overrides = {"Omega": args.omega_cap} if args.omega_cap else {}
    if args.n_len > 1 and not overrides:
        overrides["Omega"] = 1.0 + args.n_len
    params = reference_params(n_len=args.n_len, **overrides)
    sol = solve(params, [1.0] + [0.0] * (2 * args.n_len - 1))
    rep = residual_fd(sol, FDGrid(h=args.h0, tau=args.h0, levels=args.levels))
    print(f"{'h':>10} {'residual':>12} {'local order':>12}")
    prev = None
    for i, r in enumerate(rep.fd_levels):
        h = args.h0 / 2 ** i
        order = "" if prev is None else f"{np.log2(prev / r):12.3f}"
        print(f"{h:10.3e} {r:12.4e} {order}")
        prev = r
    print(f"fitted order {rep.convergence_order:.4f}; extrapolated {rep.extrapolated_residual:.3e}")


if __name__ == "__main__":
    main()
