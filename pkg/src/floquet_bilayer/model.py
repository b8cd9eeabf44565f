"""
Model parameters for the driven magnetic / spin-orbit bilayer.

Physical parameters are only a convenience: everything downstream works with
the dimensionless constants produced by :func:`normalize_params`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

BRANCHES = ("q", "q-tilde", "p", "p-tilde")


class InvalidParameterError(ValueError):
    """Raised when a parameter violates its domain; the message names the field."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class PhysicalParams:
    J0: float
    J1_phys: float = 0.0
    omega_phys: float = 1.0
    Omega_phys: float = 0.0
    U0_phys: float = 0.0
    eps_xy_phys: float = 0.0
    alpha_kx_phys: float = 0.0
    beta_ky_phys: float = 0.0
    b_phys: float = 1.0
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        for name in ("J0", "mass", "hbar", "b_phys"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidParameterError(name, f"must be positive, got {value!r}")


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless model constants plus the sideband window (m_base, n_len).

    The left (magnetic) layer carries sideband indices m_base, m_base+2, ...,
    m_base+2*n_len; the right (spin-orbit) layer carries the odd offsets in
    between.
    """

    omega: float
    J1: float
    eps_xy: float
    Omega: float
    U0: float
    alpha_kx: float
    beta_ky: float
    b: float
    m_base: int = 0
    n_len: int = 1

    def __post_init__(self):
        for name in ("omega", "J1", "eps_xy", "Omega", "U0", "alpha_kx", "beta_ky", "b"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidParameterError(name, f"must be a finite real, got {value!r}")
        if self.omega <= 0:
            raise InvalidParameterError("omega", "must be positive")
        if self.b <= 0:
            raise InvalidParameterError("b", "must be positive")
        if int(self.m_base) != self.m_base:
            raise InvalidParameterError("m_base", "must be an integer")
        if int(self.n_len) != self.n_len or self.n_len < 1:
            raise InvalidParameterError("n_len", "must be an integer >= 1")
        # J1 = 0 and beta_ky = 0 are representable but degenerate; the
        # dispersion module refuses them with a dedicated error.

    @property
    def c_indices(self) -> list[int]:
        return [self.m_base + 2 * j for j in range(self.n_len + 1)]

    @property
    def g_indices(self) -> list[int]:
        return [self.m_base + 2 * j + 1 for j in range(self.n_len)]

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "J1": self.J1,
            "eps_xy": self.eps_xy,
            "Omega": self.Omega,
            "U0": self.U0,
            "alpha_kx": self.alpha_kx,
            "beta_ky": self.beta_ky,
            "b": self.b,
            "m_base": int(self.m_base),
            "n_len": int(self.n_len),
        }


def reference_params(m_base: int = 0, n_len: int = 1, **overrides) -> DimensionlessParams:
    """The reference configuration used throughout the tests and docs."""
    values = dict(omega=1.0, J1=0.5, eps_xy=0.0, Omega=2.0, U0=1.0,
                  alpha_kx=0.3, beta_ky=0.4, b=1.0, m_base=m_base, n_len=n_len)
    values.update(overrides)
    return DimensionlessParams(**values)


def normalize_params(p: PhysicalParams, m_base: int, n_len: int) -> DimensionlessParams:
    """Express all constants in units of J0 (energies), hbar/J0 (time) and
    hbar/sqrt(2 m J0) (length)."""
    # PhysicalParams validates itself, but frozen instances can be built with
    # object.__new__ tricks; re-check the units we divide by.
    for name in ("J0", "mass", "hbar", "b_phys"):
        if not getattr(p, name) > 0:
            raise InvalidParameterError(name, "must be positive")
    J0 = p.J0
    length_unit = p.hbar / math.sqrt(2.0 * p.mass * J0)
    return DimensionlessParams(
        omega=p.hbar * p.omega_phys / J0,
        J1=p.J1_phys / J0,
        eps_xy=p.eps_xy_phys / J0,
        Omega=p.hbar * p.Omega_phys / J0,
        U0=p.U0_phys / J0,
        alpha_kx=p.alpha_kx_phys / J0,
        beta_ky=p.beta_ky_phys / J0,
        b=p.b_phys / length_unit,
        m_base=m_base,
        n_len=n_len,
    )


@dataclass(frozen=True)
class ModeCheck:
    index: int
    branch: str
    squared: float

    @property
    def real(self) -> bool:
        return self.squared >= 0.0

    @property
    def marginal(self) -> bool:
        return self.squared == 0.0


@dataclass(frozen=True)
class AdmissibilityReport:
    checks: tuple[ModeCheck, ...]
    accepted: bool
    first_offending: tuple[int, str] | None = None
    marginal: tuple[tuple[int, str], ...] = field(default_factory=tuple)

    def message(self) -> str:
        if self.accepted:
            text = "admissible"
            if self.marginal:
                text += " (marginal zero wavenumber at " + ", ".join(
                    f"index {k} branch {br}" for k, br in self.marginal) + ")"
            return text
        k, br = self.first_offending
        sq = next(c.squared for c in self.checks if (c.index, c.branch) == (k, br))
        return f"evanescent mode at index {k} branch {br}: squared wavenumber {sq:.6g} < 0"


def validate_config(params: DimensionlessParams) -> AdmissibilityReport:
    """Check that every sideband in the window has real wavenumbers.

    Zero squared wavenumbers are accepted but listed as marginal.
    """
    from .dispersion import squared_wavenumbers

    checks = []
    for k in params.c_indices:
        sq = squared_wavenumbers(params, k)
        checks += [ModeCheck(k, "q", sq["q"]), ModeCheck(k, "q-tilde", sq["q-tilde"])]
    for k in params.g_indices:
        sq = squared_wavenumbers(params, k)
        checks += [ModeCheck(k, "p", sq["p"]), ModeCheck(k, "p-tilde", sq["p-tilde"])]
    checks.sort(key=lambda c: (c.index, BRANCHES.index(c.branch)))
    offending = next(((c.index, c.branch) for c in checks if not c.real), None)
    marginal = tuple((c.index, c.branch) for c in checks if c.marginal)
    return AdmissibilityReport(tuple(checks), offending is None, offending, marginal)
