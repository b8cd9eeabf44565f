"""
Spectral constants and sideband wavenumbers.

Left layer (rotating exchange field), harmonic index k:

    q_k^2  = 2*Omega - 2*eps_xy + s_mag - omega*k
    qt_k^2 = 2*Omega - 2*eps_xy - s_mag - omega*k,   s_mag = sqrt((1-omega)^2 + 4 J1^2)

Right layer (Rashba/Dresselhaus), harmonic index k:

    p_k^2  = 2*Omega + 2*U0 - 2*eps_xy + 2*s_soc - omega*k
    pt_k^2 = 2*Omega + 2*U0 - 2*eps_xy - 2*s_soc - omega*k,   s_soc = sqrt(a^2 + beta^2)

The right-layer relation is the one that actually annihilates the 2x2
eigenproblem of the right-layer equations; :func:`shorthand_soc_squared` keeps
the commonly quoted shorthand (``+-s_soc`` and no ``eps_xy``) around for
comparison only.

Amplitude ratios: ``K_minus`` weights the q family (c1, c2), ``K_plus`` the
q-tilde family (c3, c4), ``L_minus`` the p family (g1, g2) and ``L_plus`` the
p-tilde family (g3, g4). Their values are chosen so that each (ratio, branch)
pair has zero eigen-residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import DimensionlessParams


class DegenerateCouplingError(ValueError):
    pass


class EvanescentModeError(ValueError):
    def __init__(self, index: int, branch: str, squared: float):
        self.index = index
        self.branch = branch
        self.squared = squared
        super().__init__(
            f"evanescent mode at index {index} branch {branch}: squared wavenumber {squared:.6g} < 0")


@dataclass(frozen=True)
class EigenStructure:
    s_mag: float
    s_soc: float
    K_plus: float
    K_minus: float
    L_plus: complex
    L_minus: complex
    notes: tuple[str, ...] = field(default_factory=tuple)


def _typeset_ratios(params: DimensionlessParams):
    """K+-, L+- exactly as the textbook closed forms are usually typeset."""
    w, J1 = params.omega, params.J1
    a, be = params.alpha_kx, params.beta_ky
    s_mag = math.sqrt((1.0 - w) ** 2 + 4.0 * J1 * J1)
    s_soc = math.sqrt(a * a + be * be)
    K_plus = -2.0 * J1 / (1.0 - w + s_mag)
    K_minus = -2.0 * J1 / (1.0 - w - s_mag)
    L_plus = 1j * be / (a + s_soc)
    L_minus = 1j * be / (a - s_soc)
    return s_mag, s_soc, K_plus, K_minus, L_plus, L_minus


def left_matrix(params: DimensionlessParams, k: int, q: float) -> np.ndarray:
    """2x2 operator of the left-layer equations acting on (up, down) amplitudes of
    the mode exp(i q z) with up harmonic (k-1)/2 and down harmonic (k+1)/2."""
    x = k * params.omega / 2.0 - params.Omega + q * q / 2.0 + params.eps_xy
    d = (1.0 - params.omega) / 2.0
    return np.array([[x + d, params.J1], [params.J1, x - d]], dtype=complex)


def right_matrix(params: DimensionlessParams, k: int, p: float) -> np.ndarray:
    """2x2 operator of the right-layer equations for exp(i p z), both spin
    components at harmonic k/2."""
    y = k * params.omega / 2.0 - params.Omega + p * p / 2.0 + params.eps_xy - params.U0
    a, be = params.alpha_kx, params.beta_ky
    return np.array([[y + a, -1j * be], [1j * be, y - a]], dtype=complex)


def spectral_constants(params: DimensionlessParams) -> EigenStructure:
    if params.J1 == 0:
        raise DegenerateCouplingError("J1 = 0: exchange eigenvector ratios degenerate")
    if params.beta_ky == 0:
        raise DegenerateCouplingError("beta_ky = 0: spin-orbit eigenvector ratios degenerate")
    s_mag, s_soc, Kp, Km, Lp, Lm = _typeset_ratios(params)
    notes = ["discriminant of the spin-orbit ratios uses alpha_kx^2 + beta_ky^2"]

    # Arbitrate the labels: the q family sits on the +s_mag/2 root of the
    # left operator, the p family on the +s_soc root of the right one.
    d = (1.0 - params.omega) / 2.0
    a, be = params.alpha_kx, params.beta_ky
    Ml = np.array([[s_mag / 2 + d, params.J1], [params.J1, s_mag / 2 - d]], dtype=complex)
    Mr = np.array([[s_soc + a, -1j * be], [1j * be, s_soc - a]], dtype=complex)

    def res(M, r):
        return np.linalg.norm(M @ np.array([r, 1.0]))

    if res(Ml, Kp) < res(Ml, Km):
        K_minus, K_plus = Kp, Km
        notes.append("K labels swapped: the q family pairs with -2J1/(1-omega+s_mag)")
    else:
        K_minus, K_plus = Km, Kp
    if res(Mr, Lp) < res(Mr, Lm):
        L_minus, L_plus = Lp, Lm
        notes.append("L labels swapped: the p family pairs with i*beta/(alpha+s_soc)")
    else:
        L_minus, L_plus = Lm, Lp
    return EigenStructure(s_mag, s_soc, K_plus, K_minus, complex(L_plus), complex(L_minus),
                          tuple(notes))


def squared_wavenumbers(params: DimensionlessParams, k: int) -> dict[str, float]:
    w = params.omega
    s_mag = math.sqrt((1.0 - w) ** 2 + 4.0 * params.J1 ** 2)
    s_soc = math.sqrt(params.alpha_kx ** 2 + params.beta_ky ** 2)
    left = 2 * params.Omega - 2 * params.eps_xy - w * k
    right = 2 * params.Omega + 2 * params.U0 - 2 * params.eps_xy - w * k
    return {
        "q": left + s_mag,
        "q-tilde": left - s_mag,
        "p": right + 2 * s_soc,
        "p-tilde": right - 2 * s_soc,
    }


def shorthand_soc_squared(params: DimensionlessParams, k: int) -> tuple[float, float]:
    """Shorthand right-layer relation with a single s_soc and no eps_xy shift.

    Not used for construction; kept so reports can show how far it is from the
    eigenproblem.
    """
    s_soc = math.sqrt(params.alpha_kx ** 2 + params.beta_ky ** 2)
    base = 2 * params.Omega + 2 * params.U0 - params.omega * k
    return base + s_soc, base - s_soc


def _roots(params: DimensionlessParams, k: int, branches: tuple[str, str]) -> tuple[float, float]:
    sq = squared_wavenumbers(params, k)
    out = []
    for br in branches:
        if sq[br] < 0:
            raise EvanescentModeError(k, br, sq[br])
        out.append(math.sqrt(sq[br]))
    return out[0], out[1]


def magnetic_wavenumbers(params: DimensionlessParams, k: int) -> tuple[float, float]:
    return _roots(params, k, ("q", "q-tilde"))


def soc_wavenumbers(params: DimensionlessParams, k: int) -> tuple[float, float]:
    return _roots(params, k, ("p", "p-tilde"))


@dataclass
class ModeTable:
    """Non-negative wavenumbers per sideband index.

    ``q[k] = (q_k, qt_k)`` for left-layer indices, ``p[k] = (p_k, pt_k)`` for
    right-layer indices.
    """

    q: dict[int, tuple[float, float]]
    p: dict[int, tuple[float, float]]
    marginal: tuple[tuple[int, str], ...] = ()

    def wavenumber(self, k: int, branch: str) -> float:
        if branch in ("q", "q-tilde"):
            return self.q[k][branch == "q-tilde"]
        return self.p[k][branch == "p-tilde"]


def build_mode_table(params: DimensionlessParams) -> ModeTable:
    q = {k: magnetic_wavenumbers(params, k) for k in params.c_indices}
    p = {k: soc_wavenumbers(params, k) for k in params.g_indices}
    marginal = tuple(
        (k, br) for k, pair, names in
        [(k, q[k], ("q", "q-tilde")) for k in q] + [(k, p[k], ("p", "p-tilde")) for k in p]
        for val, br in zip(pair, names) if val == 0.0)
    return ModeTable(q, p, marginal)


def dispersion_residual(params: DimensionlessParams, k: int, branch: str,
                        wavenumber: float | None = None,
                        eig: EigenStructure | None = None) -> float:
    """|characteristic polynomial| + ||M v|| for one (index, branch) mode.

    The characteristic polynomial is det(M) of the 2x2 operator evaluated at
    the mode's wavenumber and harmonic; v is the (ratio, 1) amplitude vector
    used by the field. Zero for a consistent construction.
    """
    eig = eig or spectral_constants(params)
    if wavenumber is None:
        wavenumber = math.sqrt(squared_wavenumbers(params, k)[branch])
    if branch in ("q", "q-tilde"):
        M = left_matrix(params, k, wavenumber)
        ratio = eig.K_minus if branch == "q" else eig.K_plus
    elif branch in ("p", "p-tilde"):
        M = right_matrix(params, k, wavenumber)
        ratio = eig.L_minus if branch == "p" else eig.L_plus
    else:
        raise ValueError(f"unknown branch {branch!r}")
    poly = abs(np.linalg.det(M))
    vec = np.linalg.norm(M @ np.array([ratio, 1.0]))
    return float(poly + vec)
