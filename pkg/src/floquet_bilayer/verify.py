"""
Independent checks of a constructed solution.

None of these reuse the construction path: the finite-difference residual only
samples the field, the matching report only samples the field at z=0 and z=b,
and the feasibility test assembles the full constraint system from scratch.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .assembler import CoefficientTable
from .dispersion import dispersion_residual, spectral_constants, build_mode_table
from .field import FloquetSolution, left_field, right_field
from .model import DimensionlessParams

CONSTRAINT_GROUPS = ("seed", "continuity", "boundary", "terminal")


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = 1e-12
    matching: float = 1e-10
    fd_order_lo: float = 1.8
    fd_order_hi: float = 2.2
    oracle: float = 1e-9
    rank: float = 1e-9


@dataclass(frozen=True)
class FDGrid:
    h: float = 1e-3
    tau: float = 1e-3
    levels: int = 3
    window: float = 1.0
    z_points: int = 7
    t_points: int = 7

    def __post_init__(self):
        if not (self.h > 0 and self.tau > 0 and self.window > 0):
            raise ValueError("degenerate grid: steps and window must be positive")
        if self.levels < 2 or self.z_points < 1 or self.t_points < 1:
            raise ValueError("degenerate grid: need >= 2 levels and >= 1 sample point")


@dataclass
class ResidualReport:
    max_residual_left: float | None = None
    max_residual_right: float | None = None
    fd_levels: list[float] = field(default_factory=list)
    convergence_order: float | None = None
    extrapolated_residual: float | None = None
    continuity_value: float | None = None
    continuity_deriv: float | None = None
    boundary_value: float | None = None
    harmonic_residuals: dict[str, float] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FeasibilityReport:
    constraint_matrix_rank: int
    unknown_count: int
    nullspace_dimension: int
    feasible: bool
    restricted: bool
    incident_choice: str | None = None
    per_choice: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        assert self.nullspace_dimension == self.unknown_count - self.constraint_matrix_rank >= 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = ("infeasible for tested parameters" if not self.feasible
                          else "nontrivial solution exists")
        return out


# -- algebraic residual ------------------------------------------------------

def residual_algebraic(sol: FloquetSolution) -> float:
    """Largest dispersion + eigenvector residual over all modes with a nonzero
    coefficient, using the wavenumbers actually stored in the solution."""
    worst = 0.0
    for k, c in sol.coeffs.c.items():
        q, qt = sol.modes.q[k]
        for branch, kv, amp in (("q", q, c[:2]), ("q-tilde", qt, c[2:])):
            if np.any(amp != 0):
                worst = max(worst, dispersion_residual(sol.params, k, branch, kv, sol.eig))
    for k, g in sol.coeffs.g.items():
        p, pt = sol.modes.p[k]
        for branch, kv, amp in (("p", p, g[:2]), ("p-tilde", pt, g[2:])):
            if np.any(amp != 0):
                worst = max(worst, dispersion_residual(sol.params, k, branch, kv, sol.eig))
    return worst


# -- finite differences ------------------------------------------------------

def _pde_residual(sol: FloquetSolution, side: str, z, t, h: float, tau: float) -> float:
    P = sol.params
    fieldf = left_field if side == "left" else right_field
    z, t = np.meshgrid(z, t, indexing="ij")
    u0, d0 = fieldf(sol, z, t)
    uzp, dzp = fieldf(sol, z + h, t)
    uzm, dzm = fieldf(sol, z - h, t)
    utp, dtp = fieldf(sol, z, t + tau)
    utm, dtm = fieldf(sol, z, t - tau)
    dt_u, dt_d = (utp - utm) / (2 * tau), (dtp - dtm) / (2 * tau)
    dzz_u, dzz_d = (uzp - 2 * u0 + uzm) / h ** 2, (dzp - 2 * d0 + dzm) / h ** 2
    if side == "left":
        r1 = (-1j * dt_u - 0.5 * dzz_u + (P.eps_xy + 0.5) * u0
              + P.J1 * np.exp(-1j * P.omega * t) * d0)
        r2 = (-1j * dt_d - 0.5 * dzz_d + (P.eps_xy - 0.5) * d0
              + P.J1 * np.exp(1j * P.omega * t) * u0)
    else:
        r1 = -1j * dt_u - 0.5 * dzz_u + (P.eps_xy - P.U0 + P.alpha_kx) * u0 - 1j * P.beta_ky * d0
        r2 = -1j * dt_d - 0.5 * dzz_d + (P.eps_xy - P.U0 - P.alpha_kx) * d0 + 1j * P.beta_ky * u0
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def residual_fd(sol: FloquetSolution, grid: FDGrid = FDGrid(),
                tol: Tolerances = Tolerances()) -> ResidualReport:
    """Second-order central-difference residual of both layers' equations.

    Sample points keep a margin of the coarsest step from z=0 and z=b so each
    stencil stays inside one layer. The order is the least-squares slope of
    log(residual) against log(step) over the refinement levels.
    """
    P = sol.params
    margin = 2 * max(grid.h, 1e-12)
    if margin >= min(grid.window, P.b) / 4:
        raise ValueError("degenerate grid: step too large for the sampling window")
    zl = np.linspace(-grid.window, -margin, grid.z_points)
    zr = np.linspace(margin, P.b - margin, grid.z_points)
    t = np.linspace(0.0, 4 * math.pi / P.omega, grid.t_points, endpoint=False) + 0.137
    scale = sol.scale()
    report = ResidualReport()
    if scale == 0.0:
        report.max_residual_left = report.max_residual_right = 0.0
        report.fd_levels = [0.0] * grid.levels
        report.extrapolated_residual = 0.0
        report.verdicts["fd"] = True
        report.notes.append("zero solution: residual identically zero")
        return report
    steps, levels, left_r, right_r = [], [], [], []
    for i in range(grid.levels):
        h, tau = grid.h / 2 ** i, grid.tau / 2 ** i
        rl = _pde_residual(sol, "left", zl, t, h, tau) / scale
        rr = _pde_residual(sol, "right", zr, t, h, tau) / scale
        steps.append(h)
        left_r.append(rl)
        right_r.append(rr)
        levels.append(max(rl, rr))
    report.max_residual_left = left_r[-1]
    report.max_residual_right = right_r[-1]
    report.fd_levels = levels
    slope = float(np.polyfit(np.log(steps), np.log(np.maximum(levels, 1e-300)), 1)[0])
    report.convergence_order = slope
    report.extrapolated_residual = abs(levels[-1] - (levels[-2] - levels[-1]) / 3.0)
    monotone = all(b < a for a, b in zip(levels, levels[1:]))
    report.verdicts["fd"] = bool(monotone and tol.fd_order_lo <= slope <= tol.fd_order_hi)
    return report


# -- matching at z = 0 and z = b ---------------------------------------------

def _harmonic_amplitudes(sol: FloquetSolution, t: np.ndarray, signal: np.ndarray,
                         harmonics: list[int]) -> np.ndarray:
    """Least-squares fit of signal(t) onto exp(-i Omega t + i h omega t / 2)."""
    P = sol.params
    V = np.exp(1j * t[:, None] * (np.array(harmonics)[None, :] * P.omega / 2 - P.Omega))
    amps, *_ = np.linalg.lstsq(V, signal, rcond=None)
    return amps


def _harmonic_label(params: DimensionlessParams, h: int, component: str, kind: str) -> str:
    m, n = params.m_base, params.n_len
    if kind == "wall":
        return f"wall[{h}]"
    if component == "up" and h == m - 1:
        return f"seed[{h}]"
    if component == "down" and h == m + 2 * n + 1:
        return f"terminal[{h}]"
    return f"{kind}-{component}[{h}]"


def matching_report(sol: FloquetSolution, t_sample_count: int = 64,
                    tol: Tolerances = Tolerances()) -> ResidualReport:
    if t_sample_count < 2:
        raise ValueError("t_sample_count must be >= 2")
    P = sol.params
    t = 4 * math.pi / P.omega * np.arange(t_sample_count) / t_sample_count
    zero = np.zeros_like(t)
    scale = sol.scale() or 1.0
    lu, ld = left_field(sol, zero, t)
    ru, rd = right_field(sol, zero, t)
    lu1, ld1 = left_field(sol, zero, t, deriv=1)
    ru1, rd1 = right_field(sol, zero, t, deriv=1)
    wu, wd = right_field(sol, zero + P.b, t)
    report = ResidualReport()
    report.continuity_value = float(max(np.max(np.abs(lu - ru)), np.max(np.abs(ld - rd)))) / scale
    report.continuity_deriv = float(max(np.max(np.abs(lu1 - ru1)), np.max(np.abs(ld1 - rd1)))) / scale
    report.boundary_value = float(max(np.max(np.abs(wu)), np.max(np.abs(wd)))) / scale

    harmonics = sorted({k - 1 for k in sol.coeffs.c} | {k + 1 for k in sol.coeffs.c}
                       | set(sol.coeffs.g))
    signals = {
        ("up", "value"): lu - ru, ("down", "value"): ld - rd,
        ("up", "slope"): lu1 - ru1, ("down", "slope"): ld1 - rd1,
        ("up", "wall"): wu, ("down", "wall"): wd,
    }
    per: dict[str, float] = {}
    for (component, kind), sig in signals.items():
        amps = _harmonic_amplitudes(sol, t, sig, harmonics)
        for h, a in zip(harmonics, amps):
            label = _harmonic_label(P, h, component, kind)
            per[label] = max(per.get(label, 0.0), float(abs(a)) / scale)
    report.harmonic_residuals = per
    report.verdicts["continuity"] = report.continuity_value <= tol.matching
    report.verdicts["continuity_deriv"] = report.continuity_deriv <= tol.matching
    report.verdicts["boundary"] = report.boundary_value <= tol.matching
    report.verdicts["harmonics"] = max(per.values(), default=0.0) <= tol.matching
    return report


# -- full constraint system ---------------------------------------------------

def assemble_constraints(params: DimensionlessParams,
                         include: Iterable[str] = CONSTRAINT_GROUPS) -> np.ndarray:
    """Homogeneous constraint matrix on (c-blocks ascending, g-blocks ascending).

    Built directly from the field structure: per harmonic at z=0, value and
    slope of each spin component must agree; at z=b the right field vanishes.
    """
    include = set(include)
    unknown = set(include) - set(CONSTRAINT_GROUPS)
    if unknown:
        raise ValueError(f"unknown constraint groups: {sorted(unknown)}")
    eig = spectral_constants(params)
    modes = build_mode_table(params)
    cidx, gidx = params.c_indices, params.g_indices
    N = 4 * (len(cidx) + len(gidx))
    col = {("c", k): 4 * i for i, k in enumerate(cidx)}
    col.update({("g", k): 4 * (len(cidx) + i) for i, k in enumerate(gidx)})
    Kw = np.array([eig.K_minus, eig.K_minus, eig.K_plus, eig.K_plus])
    Lw = np.array([eig.L_minus, eig.L_minus, eig.L_plus, eig.L_plus])
    sgn = np.array([1, -1, 1, -1])

    def c_rows(k, weights):
        q, qt = modes.q[k]
        kv = np.array([q, q, qt, qt])
        return weights.astype(complex), 1j * kv * sgn * weights

    def g_rows(k, weights):
        p, pt = modes.p[k]
        kv = np.array([p, p, pt, pt])
        return weights.astype(complex), 1j * kv * sgn * weights

    rows = []

    def add(pairs):
        for entries in zip(*[r for _, r in pairs]):
            row = np.zeros(N, complex)
            for (key, _), vals in zip(pairs, entries):
                row[col[key]:col[key] + 4] += vals
            rows.append(row)

    ones = np.ones(4)
    if "seed" in include:
        add([(("c", cidx[0]), c_rows(cidx[0], Kw))])
    if "continuity" in include:
        for j, kg in enumerate(gidx):
            kc, kc2 = cidx[j], cidx[j + 1]
            gv, gd = g_rows(kg, ones)
            add([(("c", kc), c_rows(kc, ones)), (("g", kg), (-gv, -gd))])
            gv, gd = g_rows(kg, Lw)
            add([(("c", kc2), c_rows(kc2, Kw)), (("g", kg), (-gv, -gd))])
    if "boundary" in include:
        for kg in gidx:
            p, pt = modes.p[kg]
            phase = np.exp(1j * params.b * np.array([p, -p, pt, -pt]))
            add([(("g", kg), (Lw * phase, phase))])
    if "terminal" in include:
        add([(("c", cidx[-1]), c_rows(cidx[-1], ones))])
    return np.array(rows).reshape(-1, N)


def numerical_rank(A: np.ndarray, rtol: float = 1e-9) -> int:
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def incident_columns(params: DimensionlessParams) -> list[tuple[int, str]]:
    """Columns carrying exp(+i q z) / exp(+i qt z): entries 1 and 3 of each c-block."""
    out = []
    for i, k in enumerate(params.c_indices):
        out += [(4 * i, f"c1^{k}"), (4 * i + 2, f"c3^{k}")]
    return out


def incident_wave_feasibility(params: DimensionlessParams, restrict: bool = True,
                              include: Iterable[str] = CONSTRAINT_GROUPS,
                              rtol: float = 1e-9) -> FeasibilityReport:
    """Rank test of the full homogeneous system.

    With ``restrict`` every choice of a single surviving incident exponential is
    tried (all other incident amplitudes pinned to zero); the report keeps the
    choice with the largest nullspace.
    """
    A = assemble_constraints(params, include)
    N = A.shape[1]
    if not restrict:
        r = numerical_rank(A, rtol)
        return FeasibilityReport(r, N, N - r, N - r > 0, False)
    per = {}
    best = None
    inc = incident_columns(params)
    for keep_col, name in inc:
        pins = []
        for c, _ in inc:
            if c != keep_col:
                row = np.zeros(N, complex)
                row[c] = 1.0
                pins.append(row)
        r = numerical_rank(np.vstack([A] + pins), rtol)
        per[name] = N - r
        if best is None or N - r > best[1]:
            best = (name, N - r, r)
    name, null, r = best
    return FeasibilityReport(r, N, null, null > 0, True, name, per)


# -- table comparison ---------------------------------------------------------

def oracle_compare(a: CoefficientTable, b: CoefficientTable) -> float:
    """max |a - b| over all entries, relative to the largest entry of a."""
    if not a.same_indices(b):
        raise ValueError("coefficient tables have different index sets")
    diff = np.max(np.abs(a.to_vector() - b.to_vector()))
    ref = a.scale() or b.scale()
    if ref == 0.0:
        return 0.0
    return float(diff / ref)

