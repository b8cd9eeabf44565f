"""Run configuration: one flat JSON object per run."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .assembler import CoefficientTable, SolverOptions
from .model import (DimensionlessParams, InvalidParameterError, PhysicalParams,
                    normalize_params)
from .verify import FDGrid, Tolerances

PARAM_KEYS = ("omega", "J1", "eps_xy", "Omega", "U0", "alpha_kx", "beta_ky", "b")
PHYSICAL_KEYS = tuple(f.name for f in fields(PhysicalParams))
TOLERANCE_KEYS = tuple(f.name for f in fields(Tolerances))
FD_KEYS = ("h", "tau", "levels")
OTHER_KEYS = ("m_base", "n_len", "physical", "normalize", "free_coeffs", "Z", "z_count",
              "t_count", "t_max", "t_samples", "tolerances", "fd", "degeneracy_threshold",
              "rank3_free_value", "out")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str, line: int | None = None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line else ""
        super().__init__(f"{key}: {message}{where}")


@dataclass
class RunConfig:
    params: DimensionlessParams
    free_coeffs: list[complex]
    Z: float = 1.0
    z_count: int = 11
    t_count: int = 5
    t_max: float | None = None
    t_samples: int = 64
    tolerances: Tolerances = field(default_factory=Tolerances)
    fd: FDGrid = field(default_factory=FDGrid)
    options: SolverOptions = field(default_factory=SolverOptions)
    out: str | None = None


def _key_line(text: str, key: str) -> int | None:
    needle = json.dumps(key)
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def _complex(value, key: str, line) -> complex:
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        return complex(value[0], value[1])
    raise ConfigError(key, "complex values are written as [re, im]", line)


def _number(raw: dict, key: str, text: str, kind=float):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}", _key_line(text, key))
    if kind is int:
        if int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}", _key_line(text, key))
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite", _key_line(text, key))
    return float(value)


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg, exc.lineno) from exc
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object", 1)
    for key in raw:
        if key not in PARAM_KEYS + OTHER_KEYS:
            raise ConfigError(key, "unknown key", _key_line(text, key))

    m_base = _number(raw, "m_base", text, int) if "m_base" in raw else 0
    n_len = _number(raw, "n_len", text, int) if "n_len" in raw else 1

    try:
        if raw.get("normalize") or "physical" in raw:
            phys = raw.get("physical")
            if not isinstance(phys, dict):
                raise ConfigError("physical", "expected an object of physical parameters",
                                  _key_line(text, "physical"))
            for key in phys:
                if key not in PHYSICAL_KEYS:
                    raise ConfigError(f"physical.{key}", "unknown key", _key_line(text, key))
            extra = [k for k in PARAM_KEYS if k in raw]
            if extra:
                raise ConfigError(extra[0], "give either dimensionless keys or a physical block",
                                  _key_line(text, extra[0]))
            params = normalize_params(
                PhysicalParams(**{k: _number(phys, k, text) for k in phys}), m_base, n_len)
        else:
            missing = [k for k in PARAM_KEYS if k not in raw]
            if missing:
                raise ConfigError(missing[0], "missing required parameter")
            params = DimensionlessParams(**{k: _number(raw, k, text) for k in PARAM_KEYS},
                                         m_base=m_base, n_len=n_len)
    except InvalidParameterError as exc:
        raise ConfigError(exc.field, str(exc), _key_line(text, exc.field)) from exc
    except TypeError as exc:
        raise ConfigError("physical", str(exc), _key_line(text, "physical")) from exc

    if "free_coeffs" in raw:
        fc = raw["free_coeffs"]
        line = _key_line(text, "free_coeffs")
        if not isinstance(fc, list):
            raise ConfigError("free_coeffs", "expected a list of [re, im] pairs", line)
        if len(fc) != 2 * n_len:
            raise ConfigError("free_coeffs", f"expected 2·n entries ({2 * n_len}), got {len(fc)}",
                              line)
        free = [_complex(v, "free_coeffs", line) for v in fc]
    else:
        free = [1.0 + 0j] + [0j] * (2 * n_len - 1)

    cfg = RunConfig(params, free)
    for key, kind in (("Z", float), ("t_max", float)):
        if key in raw:
            setattr(cfg, key, _number(raw, key, text, kind))
    for key in ("z_count", "t_count", "t_samples"):
        if key in raw:
            value = _number(raw, key, text, int)
            if value < 2:
                raise ConfigError(key, "must be >= 2", _key_line(text, key))
            setattr(cfg, key, value)
    if cfg.Z <= 0:
        raise ConfigError("Z", "must be positive", _key_line(text, "Z"))

    if "tolerances" in raw:
        tol = raw["tolerances"]
        if not isinstance(tol, dict):
            raise ConfigError("tolerances", "expected an object", _key_line(text, "tolerances"))
        for key in tol:
            if key not in TOLERANCE_KEYS:
                raise ConfigError(f"tolerances.{key}", "unknown key", _key_line(text, key))
        cfg.tolerances = Tolerances(**{k: _number(tol, k, text) for k in tol})
    if "fd" in raw:
        fd = raw["fd"]
        if not isinstance(fd, dict) or any(k not in FD_KEYS for k in fd):
            raise ConfigError("fd", f"expected an object with keys {FD_KEYS}", _key_line(text, "fd"))
        try:
            cfg.fd = FDGrid(window=cfg.Z, **{k: _number(fd, k, text, int if k == "levels" else float)
                                            for k in fd})
        except ValueError as exc:
            raise ConfigError("fd", str(exc), _key_line(text, "fd")) from exc
    else:
        cfg.fd = FDGrid(window=cfg.Z)

    opts = {}
    if "degeneracy_threshold" in raw:
        opts["degeneracy_threshold"] = _number(raw, "degeneracy_threshold", text)
    if "rank3_free_value" in raw:
        opts["rank3_free_value"] = _complex(raw["rank3_free_value"], "rank3_free_value",
                                            _key_line(text, "rank3_free_value"))
    cfg.options = SolverOptions(**opts)
    if "out" in raw:
        if not isinstance(raw["out"], str):
            raise ConfigError("out", "expected a path string", _key_line(text, "out"))
        cfg.out = raw["out"]
    return cfg


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text())


# -- coefficient files --------------------------------------------------------

def _pairs(vec) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in vec]


def table_to_json(params: DimensionlessParams, table: CoefficientTable) -> dict:
    return {
        "params": params.as_dict(),
        "c": {str(k): _pairs(table.c[k]) for k in table.c_indices},
        "g": {str(k): _pairs(table.g[k]) for k in table.g_indices},
        "notes": list(table.notes),
    }


def table_from_json(doc: dict) -> tuple[DimensionlessParams, CoefficientTable]:
    params = DimensionlessParams(**doc["params"])

    def block(pairs):
        return np.array([complex(re, im) for re, im in pairs], dtype=complex)

    table = CoefficientTable({int(k): block(v) for k, v in doc["c"].items()},
                             {int(k): block(v) for k, v in doc["g"].items()},
                             list(doc.get("notes", [])))
    return params, table


def load_coefficients(path: str | Path) -> tuple[DimensionlessParams, CoefficientTable]:
    return table_from_json(json.loads(Path(path).read_text()))
