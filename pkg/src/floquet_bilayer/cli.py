"""
Command line entry point.

    floquet solve|verify|sample|sweep --config run.json [--out PATH]
                                     [--param NAME --range lo:hi:steps]

Exit codes: 0 success/pass, 1 usage or config error, 2 admissibility
rejection, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .assembler import (DegenerateDeterminantError, determinant_bracket, interface_det,
                        minimal_closed_form)
from .config import ConfigError, RunConfig, load_config, table_to_json
from .dispersion import build_mode_table, spectral_constants
from .field import FloquetSolution, left_field, right_field, solve
from .model import validate_config
from .verify import (incident_wave_feasibility, matching_report, oracle_compare,
                     residual_algebraic, residual_fd)

EXIT_OK, EXIT_USAGE, EXIT_REJECTED, EXIT_FAILED = 0, 1, 2, 3
SWEEPABLE = ("omega", "J1", "U0", "b", "Omega", "alpha_kx", "beta_ky")
CSV_HEADER = ["z", "t", "re_up", "im_up", "re_down", "im_down", "layer"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="floquet", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("command", choices=["solve", "verify", "sample", "sweep"])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output path (default: config 'out' or stdout)")
    parser.add_argument("--param", help="sweep parameter name")
    parser.add_argument("--range", dest="range_", metavar="lo:hi:steps", help="sweep range")
    parser.add_argument("--workers", type=int, default=4, help="sweep worker threads")
    # test hook: scale c1 of the lowest block by 1.1 before verification
    parser.add_argument("--inject-corruption", action="store_true", help=argparse.SUPPRESS)
    return parser


def fmt(x: float) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _reject(cfg: RunConfig) -> bool:
    report = validate_config(cfg.params)
    if not report.accepted:
        print(f"rejected: {report.message()}", file=sys.stderr)
        return True
    return False


def cmd_solve(cfg: RunConfig, out: str | None) -> int:
    if _reject(cfg):
        return EXIT_REJECTED
    sol = solve(cfg.params, cfg.free_coeffs, cfg.options)
    doc = table_to_json(cfg.params, sol.coeffs)
    _emit(json.dumps(doc, indent=1) + "\n", out)
    summary = (f"solved: c-indices {sol.coeffs.c_indices} g-indices {sol.coeffs.g_indices} "
               f"scale {sol.scale():.6g} free constants {len(cfg.free_coeffs)}")
    print(summary, file=sys.stdout if out else sys.stderr)
    return EXIT_OK


def verification_report(cfg: RunConfig, sol: FloquetSolution) -> dict:
    tol = cfg.tolerances
    alg = residual_algebraic(sol)
    fd = residual_fd(sol, cfg.fd, tol)
    match = matching_report(sol, cfg.t_samples, tol)
    oracle = None
    if cfg.params.n_len == 1:
        c = sol.coeffs.c[cfg.params.m_base]
        try:
            closed = minimal_closed_form(cfg.params, c[0], c[1], sol.eig, sol.modes)
            oracle = oracle_compare(sol.coeffs, closed)
        except DegenerateDeterminantError:
            oracle = None
    restricted = incident_wave_feasibility(cfg.params, True, rtol=tol.rank)
    free = incident_wave_feasibility(cfg.params, False, rtol=tol.rank)
    verdicts = {
        "residual_algebraic": alg <= tol.algebraic,
        "residual_fd": fd.verdicts["fd"],
        **match.verdicts,
        "oracle": oracle is None or oracle <= tol.oracle,
        "free_constant_count": free.nullspace_dimension == 2 * cfg.params.n_len,
        "incident_wave_infeasible": not restricted.feasible,
    }
    notes = list(sol.coeffs.notes)
    if sol.coeffs.degenerate_steps:
        notes.append("rank-3 path taken at steps " + ", ".join(map(str, sol.coeffs.degenerate_steps)))
    return {
        "residual_algebraic": alg,
        "residual_fd": {"max": fd.fd_levels[-1], "order": fd.convergence_order,
                        "levels": fd.fd_levels, "extrapolated": fd.extrapolated_residual},
        "continuity": {"value": match.continuity_value, "deriv": match.continuity_deriv,
                       "harmonics": match.harmonic_residuals},
        "boundary": match.boundary_value,
        "oracle_delta": oracle,
        "feasibility": {"restricted": restricted.to_dict(), "unrestricted": free.to_dict()},
        "verdicts": {k: bool(v) for k, v in verdicts.items()},
        "notes": notes,
    }


def cmd_verify(cfg: RunConfig, out: str | None, corrupt: bool = False) -> int:
    if _reject(cfg):
        return EXIT_REJECTED
    sol = solve(cfg.params, cfg.free_coeffs, cfg.options)
    if corrupt:
        table = sol.coeffs.copy()
        table.c[cfg.params.m_base][0] *= 1.1
        sol = sol.with_coeffs(table)
    report = verification_report(cfg, sol)
    _emit(json.dumps(report, indent=1) + "\n", out)
    return EXIT_OK if all(report["verdicts"].values()) else EXIT_FAILED


def sample_rows(cfg: RunConfig, sol: FloquetSolution):
    P = cfg.params
    zs = np.linspace(-cfg.Z, P.b, cfg.z_count)
    t_max = cfg.t_max if cfg.t_max is not None else 4 * math.pi / P.omega
    ts = np.linspace(0.0, t_max, cfg.t_count)
    for z in zs:
        left = z <= 0
        up, down = (left_field if left else right_field)(sol, np.full_like(ts, z), ts)
        for t, u, d in zip(ts, up, down):
            yield [fmt(z), fmt(t), fmt(u.real), fmt(u.imag), fmt(d.real), fmt(d.imag),
                   "L" if left else "R"]


def cmd_sample(cfg: RunConfig, out: str | None) -> int:
    if _reject(cfg):
        return EXIT_REJECTED
    sol = solve(cfg.params, cfg.free_coeffs, cfg.options)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(sample_rows(cfg, sol))
    _emit(buf.getvalue(), out)
    return EXIT_OK


def parse_range(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except (AttributeError, ValueError):
        raise UsageError(f"--range: expected lo:hi:steps, got {text!r}")
    if steps < 1:
        raise UsageError("--range: steps must be >= 1")
    return lo, hi, steps


SWEEP_HEADER = ["value", "admissible", "status", "residual_algebraic", "continuity_value",
                "continuity_deriv", "boundary", "det_bracket", "det_abs_min", "rank3", "feasible"]


def sweep_point(cfg: RunConfig, name: str, value: float) -> list[str]:
    try:
        params = dataclasses.replace(cfg.params, **{name: value})
    except ValueError as exc:
        return [fmt(value), "false", f"invalid: {exc}"] + [""] * (len(SWEEP_HEADER) - 3)
    report = validate_config(params)
    if not report.accepted:
        return [fmt(value), "false", "rejected"] + [""] * (len(SWEEP_HEADER) - 3)
    try:
        eig = spectral_constants(params)
        modes = build_mode_table(params)
        bracket = determinant_bracket(params, params.m_base + 1, modes=modes)
        det_min = min(abs(interface_det(params, k, "eq22", eig, modes)) for k in params.g_indices)
        sol = solve(params, cfg.free_coeffs, cfg.options)
        match = matching_report(sol, cfg.t_samples, cfg.tolerances)
        feas = incident_wave_feasibility(params, True, rtol=cfg.tolerances.rank)
        return [fmt(value), "true", "ok", fmt(residual_algebraic(sol)),
                fmt(match.continuity_value), fmt(match.continuity_deriv),
                fmt(match.boundary_value), fmt(bracket), fmt(det_min),
                "true" if sol.coeffs.degenerate_steps else "false",
                "true" if feas.feasible else "false"]
    except Exception as exc:  # a failing point must not abort the sweep
        return [fmt(value), "true", f"error: {exc}"] + [""] * (len(SWEEP_HEADER) - 3)


def cmd_sweep(cfg: RunConfig, out: str | None, name: str | None, range_: str | None,
              workers: int = 4) -> int:
    if name is None or range_ is None:
        raise UsageError("sweep needs --param and --range")
    if name not in SWEEPABLE:
        raise UsageError(f"--param: unknown parameter {name!r}; choose from {', '.join(SWEEPABLE)}")
    lo, hi, steps = parse_range(range_)
    values = np.linspace(lo, hi, steps)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(lambda v: sweep_point(cfg, name, float(v)), values))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([name] + SWEEP_HEADER[1:])
    writer.writerows(rows)
    _emit(buf.getvalue(), out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = args.out or cfg.out
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.inject_corruption)
        if args.command == "sample":
            return cmd_sample(cfg, out)
        return cmd_sweep(cfg, out, args.param, args.range_, args.workers)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
