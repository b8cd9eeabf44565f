"""Random admissible parameter draws for property runs and experiments."""

from __future__ import annotations

import os

import numpy as np

from .assembler import determinant_bracket
from .dispersion import build_mode_table
from .model import DimensionlessParams, validate_config

SEED_ENV = "FLOQUET_SEED"
DEFAULT_SEED = 20240611


def rng_from_env(default: int = DEFAULT_SEED) -> np.random.Generator:
    """Generator seeded from $FLOQUET_SEED when set."""
    raw = os.environ.get(SEED_ENV)
    return np.random.default_rng(int(raw) if raw else default)


def draw_params(rng: np.random.Generator, n_len: int | None = None, m_base: int = 0,
                det_guard: float = 1e-6, max_tries: int = 10_000) -> DimensionlessParams:
    """Rejection-sample an admissible, non-degenerate parameter set.

    Ranges: omega in [0.5, 2], J1 in [0.1, 1], Omega in [1, 4], U0 in [0, 2],
    alpha_kx, beta_ky in [0.1, 0.5], b in [0.5, 2], eps_xy = 0.
    """
    for _ in range(max_tries):
        n = int(rng.integers(1, 4)) if n_len is None else n_len
        params = DimensionlessParams(
            omega=rng.uniform(0.5, 2.0), J1=rng.uniform(0.1, 1.0), eps_xy=0.0,
            Omega=rng.uniform(1.0, 4.0), U0=rng.uniform(0.0, 2.0),
            alpha_kx=rng.uniform(0.1, 0.5), beta_ky=rng.uniform(0.1, 0.5),
            b=rng.uniform(0.5, 2.0), m_base=m_base, n_len=n)
        report = validate_config(params)
        if not report.accepted or report.marginal:
            continue
        modes = build_mode_table(params)
        if any(min(pair) < 1e-3 for pair in list(modes.q.values()) + list(modes.p.values())):
            continue
        if min(abs(determinant_bracket(params, k, modes=modes)) for k in params.g_indices) < det_guard:
            continue
        return params
    raise RuntimeError("no admissible parameter set found")


def draw_free(rng: np.random.Generator, n_len: int) -> list[complex]:
    return list(rng.normal(size=2 * n_len) + 1j * rng.normal(size=2 * n_len))
