"""
Evaluation of the spinor fields of a constructed solution.

Left layer (z <= 0), c-index k:
    up   ~ exp(i (k-1) w t / 2) [K-(c1 e^{iqz} + c2 e^{-iqz}) + K+(c3 e^{iq~z} + c4 e^{-iq~z})]
    down ~ exp(i (k+1) w t / 2) [c1 e^{iqz} + c2 e^{-iqz} + c3 e^{iq~z} + c4 e^{-iq~z}]
Right layer (0 <= z <= b), g-index k: both components at exp(i k w t / 2), up
weighted by L-, L+. Everything carries the global factor exp(-i Omega t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .assembler import CoefficientTable, SolverOptions, construct
from .dispersion import EigenStructure, ModeTable, build_mode_table, spectral_constants
from .model import DimensionlessParams


class DomainError(ValueError):
    pass


class SpinorValue(NamedTuple):
    up: complex
    down: complex


@dataclass(frozen=True)
class FloquetSolution:
    params: DimensionlessParams
    eig: EigenStructure
    modes: ModeTable
    coeffs: CoefficientTable

    def scale(self) -> float:
        return self.coeffs.scale()

    def with_coeffs(self, coeffs: CoefficientTable) -> "FloquetSolution":
        return FloquetSolution(self.params, self.eig, self.modes, coeffs)


def solve(params: DimensionlessParams, free: Sequence[complex],
          options: SolverOptions = SolverOptions()) -> FloquetSolution:
    eig = spectral_constants(params)
    modes = build_mode_table(params)
    return FloquetSolution(params, eig, modes, construct(params, free, options, eig, modes))


def from_table(params: DimensionlessParams, coeffs: CoefficientTable) -> FloquetSolution:
    eig = spectral_constants(params)
    modes = build_mode_table(params)
    missing = [k for k in coeffs.c if k not in modes.q] + [k for k in coeffs.g if k not in modes.p]
    if missing:
        raise ValueError(f"coefficient indices without admissible modes: {missing}")
    return FloquetSolution(params, eig, modes, coeffs)


def _plane_waves(kv: float, kt: float, z, deriv: int):
    """exp(+-i k z) for both branches, differentiated `deriv` times."""
    ks = np.array([kv, -kv, kt, -kt])
    zz = np.asarray(z, dtype=float)[..., None]
    return (1j * ks) ** deriv * np.exp(1j * ks * zz)


def left_harmonics(sol: FloquetSolution, z, deriv: int = 0):
    """Spatial amplitudes of the left field: {harmonic h: (up, down)} with h in
    units of omega/2 (global exp(-i Omega t) stripped)."""
    out: dict[int, list] = {}
    w = np.array([sol.eig.K_minus, sol.eig.K_minus, sol.eig.K_plus, sol.eig.K_plus])
    zero = np.zeros(np.shape(z), complex)
    for k, c in sol.coeffs.c.items():
        q, qt = sol.modes.q[k]
        waves = _plane_waves(q, qt, z, deriv) * c
        up = out.setdefault(k - 1, [zero, zero])
        up[0] = up[0] + waves @ w
        down = out.setdefault(k + 1, [zero, zero])
        down[1] = down[1] + waves.sum(axis=-1)
    return {h: tuple(v) for h, v in out.items()}


def right_harmonics(sol: FloquetSolution, z, deriv: int = 0):
    out = {}
    w = np.array([sol.eig.L_minus, sol.eig.L_minus, sol.eig.L_plus, sol.eig.L_plus])
    for k, g in sol.coeffs.g.items():
        p, pt = sol.modes.p[k]
        waves = _plane_waves(p, pt, z, deriv) * g
        out[k] = (waves @ w, waves.sum(axis=-1))
    return out


def _assemble(sol, harmonics, t):
    t = np.asarray(t, dtype=float)
    phase0 = np.exp(-1j * sol.params.Omega * t)
    up = down = 0j
    for h, (u, d) in harmonics.items():
        ph = np.exp(0.5j * h * sol.params.omega * t) * phase0
        up = up + u * ph
        down = down + d * ph
    return up, down


def left_field(sol: FloquetSolution, z, t, deriv: int = 0):
    """(up, down) arrays of the left field, z and t broadcast against each other."""
    z = np.asarray(z, dtype=float)
    if np.any(z > 0):
        raise DomainError("left layer requires z <= 0")
    z, t = np.broadcast_arrays(z, np.asarray(t, dtype=float))
    return _assemble(sol, left_harmonics(sol, z, deriv), t)


def right_field(sol: FloquetSolution, z, t, deriv: int = 0):
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > sol.params.b):
        raise DomainError(f"right layer requires 0 <= z <= b = {sol.params.b}")
    z, t = np.broadcast_arrays(z, np.asarray(t, dtype=float))
    return _assemble(sol, right_harmonics(sol, z, deriv), t)


def _scalar(pair) -> SpinorValue:
    up, down = pair
    return SpinorValue(complex(up), complex(down))


def eval_left(sol: FloquetSolution, z: float, t: float) -> SpinorValue:
    return _scalar(left_field(sol, z, t))


def eval_right(sol: FloquetSolution, z: float, t: float) -> SpinorValue:
    return _scalar(right_field(sol, z, t))


def eval_dz(sol: FloquetSolution, z: float, t: float, side: str) -> SpinorValue:
    """Exact z-derivative. At z = 0 the side argument picks the one-sided limit."""
    if side == "left":
        return _scalar(left_field(sol, z, t, deriv=1))
    if side == "right":
        return _scalar(right_field(sol, z, t, deriv=1))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
