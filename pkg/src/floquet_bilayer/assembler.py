"""
Interface-matching and hard-wall systems, and the chained coefficient construction.

Unknowns per left-layer sideband k (c-block) are the amplitudes of
exp(+i q z), exp(-i q z), exp(+i qt z), exp(-i qt z); per right-layer sideband
(g-block) the same with p, pt. The construction runs

    seed (c^m from c1, c2)  ->  g^{m+1}  ->  c^{m+2}  ->  ...  ->  g^{m+2n-1}  ->  c^{m+2n}

where each intermediate c-block gets two free entries and the final one is
fixed by four conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .dispersion import (EigenStructure, ModeTable, build_mode_table, spectral_constants)
from .model import DimensionlessParams


class SingularSeedError(ValueError):
    pass


class DegenerateTerminalError(ValueError):
    pass


class DegenerateDeterminantError(ValueError):
    pass


class InternalContradictionError(RuntimeError):
    """Interface matrix of rank < 3; cannot happen for valid parameters."""


class InconsistentStepError(ValueError):
    """Rank-3 interface system whose right-hand side is outside the column space."""


class StepError(RuntimeError):
    def __init__(self, j: int, cause: Exception):
        self.j = j
        self.cause = cause
        super().__init__(f"step j={j}: {cause}")


@dataclass(frozen=True)
class SolverOptions:
    degeneracy_threshold: float = 1e-8
    rank3_free_value: complex = 0.0
    free_positions: tuple[int, int] = (0, 1)
    consistency_tol: float = 1e-9


@dataclass
class CoefficientTable:
    c: dict[int, np.ndarray]
    g: dict[int, np.ndarray]
    notes: list[str] = field(default_factory=list)
    free: list[tuple[str, int, int]] = field(default_factory=list)
    degenerate_steps: list[int] = field(default_factory=list)

    @property
    def c_indices(self) -> list[int]:
        return sorted(self.c)

    @property
    def g_indices(self) -> list[int]:
        return sorted(self.g)

    def scale(self) -> float:
        vals = [np.max(np.abs(v)) for v in list(self.c.values()) + list(self.g.values())]
        return float(max(vals)) if vals else 0.0

    def to_vector(self) -> np.ndarray:
        parts = [self.c[k] for k in self.c_indices] + [self.g[k] for k in self.g_indices]
        return np.concatenate(parts)

    def same_indices(self, other: "CoefficientTable") -> bool:
        return self.c_indices == other.c_indices and self.g_indices == other.g_indices

    def _combine(self, other, op):
        if not self.same_indices(other):
            raise ValueError("coefficient tables have different index sets")
        return CoefficientTable({k: op(self.c[k], other.c[k]) for k in self.c},
                                {k: op(self.g[k], other.g[k]) for k in self.g})

    def __add__(self, other: "CoefficientTable") -> "CoefficientTable":
        return self._combine(other, np.add)

    def __sub__(self, other: "CoefficientTable") -> "CoefficientTable":
        return self._combine(other, np.subtract)

    def scaled(self, factor: complex) -> "CoefficientTable":
        return CoefficientTable({k: factor * v for k, v in self.c.items()},
                                {k: factor * v for k, v in self.g.items()}, list(self.notes))

    def copy(self) -> "CoefficientTable":
        return CoefficientTable({k: v.copy() for k, v in self.c.items()},
                                {k: v.copy() for k, v in self.g.items()},
                                list(self.notes), list(self.free), list(self.degenerate_steps))

    @classmethod
    def zeros(cls, params: DimensionlessParams) -> "CoefficientTable":
        return cls({k: np.zeros(4, complex) for k in params.c_indices},
                   {k: np.zeros(4, complex) for k in params.g_indices})


# -- row builders ------------------------------------------------------------

def _value_row(weights=(1, 1, 1, 1)) -> np.ndarray:
    return np.array(weights, dtype=complex)


def _deriv_row(k1: float, k2: float, weights=(1, 1, 1, 1)) -> np.ndarray:
    return 1j * np.array([k1, -k1, k2, -k2], dtype=complex) * np.asarray(weights, complex)


def _c_weights(eig: EigenStructure):
    return (eig.K_minus, eig.K_minus, eig.K_plus, eig.K_plus)


def _g_weights(eig: EigenStructure):
    return (eig.L_minus, eig.L_minus, eig.L_plus, eig.L_plus)


def _boundary_rows(params, p, pt, eig) -> np.ndarray:
    phase = np.exp(1j * params.b * np.array([p, -p, pt, -pt]))
    return np.array([np.asarray(_g_weights(eig)) * phase, phase], dtype=complex)


def _context(params, eig=None, modes=None):
    return eig or spectral_constants(params), modes or build_mode_table(params)


def _p_pair(params, modes, k_g):
    if k_g in modes.p:
        return modes.p[k_g]
    from .dispersion import soc_wavenumbers
    return soc_wavenumbers(params, k_g)


def _q_pair(params, modes, k):
    if k in modes.q:
        return modes.q[k]
    from .dispersion import magnetic_wavenumbers
    return magnetic_wavenumbers(params, k)


# -- interface systems -------------------------------------------------------

def interface_rhs_matrix(params: DimensionlessParams, k_g: int, which: str = "eq22",
                         eig: EigenStructure | None = None,
                         modes: ModeTable | None = None) -> np.ndarray:
    """g-side matrix of the interface/wall system at right-layer index k_g.

    ``eq22``: rows 1-2 match the spin-down value and slope at z=0.
    ``eq23``: rows 1-2 match the spin-up value and slope (L-weighted).
    Rows 3-4 are the hard wall at z=b and are the same object in both.
    """
    eig, modes = _context(params, eig, modes)
    p, pt = _p_pair(params, modes, k_g)
    wall = _boundary_rows(params, p, pt, eig)
    if which == "eq22":
        top = [_value_row(), _deriv_row(p, pt)]
    elif which == "eq23":
        w = _g_weights(eig)
        top = [_value_row(w), _deriv_row(p, pt, w)]
    else:
        raise ValueError(f"which must be 'eq22' or 'eq23', got {which!r}")
    return np.vstack([np.array(top), wall])


def interface_lhs_matrix(params: DimensionlessParams, k: int, which: str = "eq22",
                         eig: EigenStructure | None = None,
                         modes: ModeTable | None = None) -> np.ndarray:
    """c-side matrix (rows 3-4 zero) for left-layer index k."""
    eig, modes = _context(params, eig, modes)
    q, qt = _q_pair(params, modes, k)
    out = np.zeros((4, 4), complex)
    if which == "eq22":
        out[0], out[1] = _value_row(), _deriv_row(q, qt)
    elif which == "eq23":
        w = _c_weights(eig)
        out[0], out[1] = _value_row(w), _deriv_row(q, qt, w)
    else:
        raise ValueError(f"which must be 'eq22' or 'eq23', got {which!r}")
    return out


@dataclass
class InterfaceSystem:
    k_g: int
    lhs22: np.ndarray
    lhs23: np.ndarray
    rhs22: np.ndarray
    rhs23: np.ndarray


def assemble_interface(params: DimensionlessParams, j: int, eig=None, modes=None) -> InterfaceSystem:
    eig, modes = _context(params, eig, modes)
    k = params.m_base + 2 * j
    rhs22 = interface_rhs_matrix(params, k + 1, "eq22", eig, modes)
    rhs23 = rhs22.copy()
    rhs23[:2] = interface_rhs_matrix(params, k + 1, "eq23", eig, modes)[:2]
    return InterfaceSystem(k + 1,
                           interface_lhs_matrix(params, k, "eq22", eig, modes),
                           interface_lhs_matrix(params, k + 2, "eq23", eig, modes),
                           rhs22, rhs23)


def determinant_bracket(params: DimensionlessParams, k_g: int, b: float | None = None,
                        modes: ModeTable | None = None) -> float:
    """pt*cos(b*pt)*sin(b*p) - p*cos(b*p)*sin(b*pt); the real factor of the
    interface determinant. Sign changes bracket the degenerate thicknesses."""
    modes = modes or build_mode_table(params)
    p, pt = _p_pair(params, modes, k_g)
    b = params.b if b is None else b
    return pt * math.cos(b * pt) * math.sin(b * p) - p * math.cos(b * p) * math.sin(b * pt)


def interface_det(params: DimensionlessParams, k_g: int, which: str = "eq22",
                  eig: EigenStructure | None = None, modes: ModeTable | None = None) -> complex:
    eig, modes = _context(params, eig, modes)
    val = 4.0 * (eig.L_plus - eig.L_minus) * determinant_bracket(params, k_g, modes=modes)
    if which == "eq23":
        val *= eig.L_plus * eig.L_minus
    elif which != "eq22":
        raise ValueError(f"which must be 'eq22' or 'eq23', got {which!r}")
    return complex(val)


def is_degenerate(A: np.ndarray, threshold: float) -> bool:
    scale = np.max(np.abs(A))
    return abs(np.linalg.det(A)) < threshold * scale ** 4


def find_degenerate_b(params: DimensionlessParams, lo: float, hi: float, k_g: int | None = None,
                      xtol: float = 1e-12) -> float:
    """Bisect the determinant bracket for a wall position b in [lo, hi]."""
    k_g = params.m_base + 1 if k_g is None else k_g
    modes = build_mode_table(params)
    f = lambda b: determinant_bracket(params, k_g, b, modes)  # noqa: E731
    return bisect(f, lo, hi, xtol=xtol, maxiter=200)


def bracket_degenerate_b(params: DimensionlessParams, b_max: float = 40.0, k_g: int | None = None,
                         samples: int = 4000) -> tuple[float, float] | None:
    """First sign change of the determinant bracket in (0, b_max]."""
    k_g = params.m_base + 1 if k_g is None else k_g
    modes = build_mode_table(params)
    grid = np.linspace(b_max / samples, b_max, samples)
    vals = [determinant_bracket(params, k_g, b, modes) for b in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return grid[i], grid[i]
        if vals[i] * vals[i + 1] < 0:
            return grid[i], grid[i + 1]
    return None


# -- elementary solves -------------------------------------------------------

def seed_solve(params: DimensionlessParams, c1: complex, c2: complex,
               eig: EigenStructure | None = None, modes: ModeTable | None = None):
    """c3, c4 of the lowest block, from the two conditions that kill its
    unmatched spin-up harmonic at z=0."""
    eig, modes = _context(params, eig, modes)
    q, qt = _q_pair(params, modes, params.m_base)
    if qt == 0.0 or eig.K_plus == 0.0:
        raise SingularSeedError(f"q-tilde_{params.m_base} = {qt}, K_plus = {eig.K_plus}")
    A = np.array([[eig.K_plus, eig.K_plus], [1j * qt * eig.K_plus, -1j * qt * eig.K_plus]])
    rhs = -np.array([eig.K_minus * (c1 + c2), 1j * q * eig.K_minus * (c1 - c2)])
    c3, c4 = np.linalg.solve(A, rhs)
    return complex(c3), complex(c4)


def _c_rhs_down(params, k, c, modes):
    q, qt = _q_pair(params, modes, k)
    return np.array([np.sum(c), _deriv_row(q, qt) @ c, 0.0, 0.0], dtype=complex)


def solve_g(params: DimensionlessParams, j: int, c_prev: np.ndarray,
            options: SolverOptions = SolverOptions(), eig=None, modes=None):
    """g-block at index m+2j+1 from the spin-down matching with c_prev and the wall.

    Returns ``(g, degenerate)``. In the rank-3 case the entry with the largest
    null-vector component is set to ``options.rank3_free_value`` and the other
    three come from a least-squares solve, which must be exact.
    """
    eig, modes = _context(params, eig, modes)
    k = params.m_base + 2 * j
    A = interface_rhs_matrix(params, k + 1, "eq22", eig, modes)
    rhs = _c_rhs_down(params, k, np.asarray(c_prev, complex), modes)
    if not is_degenerate(A, options.degeneracy_threshold):
        return np.linalg.solve(A, rhs), False
    _, s, vh = np.linalg.svd(A)
    if s[2] < options.degeneracy_threshold * s[0]:
        raise InternalContradictionError(
            f"interface matrix at index {k + 1} has rank < 3 (singular values {s})")
    null = vh[-1].conj()
    free = int(np.argmax(np.abs(null)))
    keep = [i for i in range(4) if i != free]
    g = np.zeros(4, complex)
    g[free] = options.rank3_free_value
    sol, *_ = np.linalg.lstsq(A[:, keep], rhs - A[:, free] * g[free], rcond=None)
    g[keep] = sol
    resid = np.max(np.abs(A @ g - rhs))
    ref = max(np.max(np.abs(rhs)), np.max(np.abs(g)), 1e-300)
    if resid > options.consistency_tol * ref:
        raise InconsistentStepError(
            f"rank-3 interface at index {k + 1}: previous block violates the "
            f"solvability condition (residual {resid:.3g})")
    return g, True


def solve_c_next(params: DimensionlessParams, j: int, g: np.ndarray, free_pair: Sequence[complex],
                 options: SolverOptions = SolverOptions(), eig=None, modes=None) -> np.ndarray:
    """c-block at m+2j+2: two entries fixed by spin-up matching with g, two free."""
    eig, modes = _context(params, eig, modes)
    k = params.m_base + 2 * j
    lhs = interface_lhs_matrix(params, k + 2, "eq23", eig, modes)[:2]
    rhs23 = interface_rhs_matrix(params, k + 1, "eq23", eig, modes)[:2]
    target = rhs23 @ np.asarray(g, complex)
    fp = list(options.free_positions)
    solved = [i for i in range(4) if i not in fp]
    c = np.zeros(4, complex)
    c[fp] = np.asarray(free_pair, complex)
    c[solved] = np.linalg.solve(lhs[:, solved], target - lhs[:, fp] @ c[fp])
    return c


def step_solve(params: DimensionlessParams, j: int, c_prev: np.ndarray,
               free_pair: Sequence[complex], options: SolverOptions = SolverOptions(),
               eig=None, modes=None):
    """One link of the chain: g^{m+2j+1} from c_prev, then c^{m+2j+2}."""
    eig, modes = _context(params, eig, modes)
    g, _ = solve_g(params, j, c_prev, options, eig, modes)
    c_next = solve_c_next(params, j, g, free_pair, options, eig, modes)
    # wall rows are shared between the two systems; check they hold for g
    wall = interface_rhs_matrix(params, params.m_base + 2 * j + 1, "eq23", eig, modes)[2:]
    scale = max(np.max(np.abs(g)), 1.0)
    assert np.max(np.abs(wall @ g)) <= 1e-9 * scale, "wall rows not satisfied"
    return g, c_next


def terminal_matrix(params: DimensionlessParams, eig=None, modes=None) -> np.ndarray:
    eig, modes = _context(params, eig, modes)
    k = params.m_base + 2 * params.n_len
    q, qt = _q_pair(params, modes, k)
    w = _c_weights(eig)
    return np.array([_value_row(), _deriv_row(q, qt), _value_row(w), _deriv_row(q, qt, w)])


def solve_terminal_system(A: np.ndarray, rhs: np.ndarray, threshold: float = 1e-8) -> np.ndarray:
    if is_degenerate(A, threshold):
        raise DegenerateTerminalError("terminal 4x4 system is singular")
    return np.linalg.solve(A, rhs)


def terminal_solve(params: DimensionlessParams, g_last: np.ndarray,
                   options: SolverOptions = SolverOptions(), eig=None, modes=None) -> np.ndarray:
    """Top c-block: its spin-down harmonic has no partner, so value and slope
    vanish; its spin-up harmonic matches the last g-block."""
    eig, modes = _context(params, eig, modes)
    A = terminal_matrix(params, eig, modes)
    k_g = params.m_base + 2 * params.n_len - 1
    up = interface_rhs_matrix(params, k_g, "eq23", eig, modes)[:2] @ np.asarray(g_last, complex)
    rhs = np.array([0.0, 0.0, up[0], up[1]], dtype=complex)
    return solve_terminal_system(A, rhs, options.degeneracy_threshold)


# -- full construction -------------------------------------------------------

def construct(params: DimensionlessParams, free: Sequence[complex],
              options: SolverOptions = SolverOptions(),
              eig: EigenStructure | None = None, modes: ModeTable | None = None) -> CoefficientTable:
    """Build a length-n solution from 2n free complex constants.

    ``free[0:2]`` seed the lowest block, ``free[2j:2j+2]`` the free entries of
    block m+2j for 1 <= j < n. If an interface system is rank 3, the second
    free constant feeding it is replaced by the value that makes the step
    solvable, and the rank-3 free g value takes over its role.
    """
    free = [complex(x) for x in free]
    n = params.n_len
    if len(free) != 2 * n:
        raise ValueError(f"free_coeffs: expected 2·n = {2 * n} entries, got {len(free)}")
    eig, modes = _context(params, eig, modes)
    table = CoefficientTable({}, {})
    table.notes.extend(eig.notes)
    consumed = 0

    def block(j, pair, g_prev):
        if j == 0:
            c3, c4 = seed_solve(params, pair[0], pair[1], eig, modes)
            return np.array([pair[0], pair[1], c3, c4], complex)
        return solve_c_next(params, j - 1, g_prev, pair, options, eig, modes)

    g_prev = None
    pair = free[0:2]
    for j in range(n):
        k = params.m_base + 2 * j
        fpos = (0, 1) if j == 0 else options.free_positions
        c_cur = block(j, pair, g_prev)
        A = interface_rhs_matrix(params, k + 1, "eq22", eig, modes)
        if is_degenerate(A, options.degeneracy_threshold):
            pair, c_cur = _restore_solvability(params, j, pair, g_prev, block, A, modes)
            table.degenerate_steps.append(j)
            table.notes.append(f"rank-3 path at index {k + 1}: free constant {2 * j + 2} "
                               f"replaced by the solvability value, extra g entry set to "
                               f"{options.rank3_free_value}")
        consumed += 2
        table.free += [("c", k, fpos[0] + 1), ("c", k, fpos[1] + 1)]
        table.c[k] = c_cur
        try:
            g, _ = solve_g(params, j, c_cur, options, eig, modes)
        except Exception as exc:
            raise StepError(j, exc) from exc
        table.g[k + 1] = g
        g_prev = g
        if j < n - 1:
            pair = free[2 * j + 2: 2 * j + 4]
    try:
        table.c[params.m_base + 2 * n] = terminal_solve(params, g_prev, options, eig, modes)
    except Exception as exc:
        raise StepError(n - 1, exc) from exc
    assert consumed == 2 * n, f"consumed {consumed} free constants, expected {2 * n}"
    return table


def _restore_solvability(params, j, pair, g_prev, block, A, modes):
    """Pick a replacement for one free constant so that the current block
    satisfies the left-null condition of the rank-3 interface matrix."""
    u, s, vh = np.linalg.svd(A)
    y = u[:, -1].conj()
    k = params.m_base + 2 * j

    def phi(pr):
        return y @ _c_rhs_down(params, k, block(j, pr, g_prev), modes)

    for slot in (1, 0):
        trial0, trial1 = list(pair), list(pair)
        trial0[slot], trial1[slot] = 0.0, 1.0
        f0, f1 = phi(trial0), phi(trial1)
        if abs(f1 - f0) > 1e-12 * max(abs(f0), abs(f1), 1.0):
            fixed = list(pair)
            fixed[slot] = -f0 / (f1 - f0)
            return fixed, block(j, fixed, g_prev)
    raise InconsistentStepError(f"cannot satisfy the rank-3 solvability condition at index {k + 1}")


# -- closed-form minimal solution --------------------------------------------

def minimal_closed_form(params: DimensionlessParams, c1: complex, c2: complex,
                        eig: EigenStructure | None = None,
                        modes: ModeTable | None = None,
                        tol: float = 1e-8) -> CoefficientTable:
    """Length-1 table from explicit formulas only (no linear solves)."""
    if params.n_len != 1:
        raise ValueError("minimal_closed_form requires n_len = 1")
    eig, modes = _context(params, eig, modes)
    m, b = params.m_base, params.b
    Km, Kp, Lm, Lp = eig.K_minus, eig.K_plus, eig.L_minus, eig.L_plus
    q, qt = modes.q[m]
    q2, qt2 = modes.q[m + 2]
    p, pt = modes.p[m + 1]

    pref = -Km / (2 * Kp * qt)
    c3 = pref * (c1 * (qt + q) + c2 * (qt - q))
    c4 = pref * (c1 * (qt - q) + c2 * (qt + q))

    bracket = pt * math.cos(b * pt) * math.sin(b * p) - p * math.cos(b * p) * math.sin(b * pt)
    if abs(bracket) <= tol * max(p, pt, 1.0):
        raise DegenerateDeterminantError(f"interface determinant vanishes (bracket {bracket:.3g})")
    den = 2 * Kp * bracket
    KK = Km - Kp
    s, d = c1 + c2, c1 - c2
    g1 = np.exp(-1j * b * p) * KK * (-1j * s * pt * math.cos(b * pt) + d * q * math.sin(b * pt)) / den
    g2 = np.exp(1j * b * p) * KK * (1j * s * pt * math.cos(b * pt) - d * q * math.sin(b * pt)) / den
    g3 = np.exp(-1j * b * pt) * KK * (-1j * s * p * math.cos(b * p) + d * q * math.sin(b * p)) / (-den)
    g4 = np.exp(1j * b * pt) * KK * (1j * s * p * math.cos(b * p) - d * q * math.sin(b * p)) / (-den)

    slope = p * Lm * (g1 - g2) + pt * Lp * (g3 - g4)
    value = Lm * (g1 + g2) + Lp * (g3 + g4)
    n1 = slope + q2 * value
    n2 = pt * Lp * (g4 - g3) + q2 * Lp * (g3 + g4) + Lm * g1 * (q2 - p) + Lm * g2 * (p + q2)
    n3 = -(slope + qt2 * value)
    n4 = pt * Lp * (g3 - g4) - qt2 * Lp * (g3 + g4) + Lm * g1 * (p - qt2) - Lm * g2 * (p + qt2)
    d1, d3 = 2 * KK * q2, 2 * KK * qt2
    table = CoefficientTable(
        {m: np.array([c1, c2, c3, c4], complex),
         m + 2: np.array([n1 / d1, n2 / d1, n3 / d3, n4 / d3], complex)},
        {m + 1: np.array([g1, g2, g3, g4], complex)},
    )
    table.notes.append("closed-form minimal solution")
    return table
