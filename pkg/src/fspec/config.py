"""Run configuration and scan records.

Settings come from four layers, later ones winning: built-in defaults, a
JSON config file, ``FSPEC_<FIELD>`` environment variables, command-line
flags.  Sequences in the environment are comma-separated.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Mapping, Optional

from .errors import InvalidArgument

ENV_PREFIX = "FSPEC_"


@dataclass(frozen=True)
class RunConfig:
    quad_tol: float = 1e-9
    root_tol: float = 1e-7
    virtual_tol: float = 1e-6
    sweep_grid: int = 11
    sweep_z: tuple = (-1.0, -1e-2, 18.01, 19.0, 23.0)
    sweep_mu_factor: float = 1.0
    regime_gammas: tuple = (-1.0, 0.0, 3.0, 6.0, 9.0, 12.0, 13.0)
    regime_factors: tuple = (0.5, 1.0, 1.5)
    symmetry_samples: int = 20
    z_probes: tuple = (-1e-3, -1e-4, -1e-5, -1e-6)
    k_probes: tuple = (1e-3, 3e-3, 1e-2, 3e-2)
    delta_list: tuple = tuple(2.0**-j for j in range(3, 10))
    seed: int = 20240917
    workers: Optional[int] = None
    report_path: Optional[str] = None
    scan_path: Optional[str] = None

    def __post_init__(self):
        for name in ("quad_tol", "root_tol", "virtual_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.sweep_grid < 2:
            raise InvalidArgument("sweep_grid must be at least 2")
        if self.symmetry_samples < 1:
            raise InvalidArgument("symmetry_samples must be at least 1")
        if self.workers is not None and self.workers < 1:
            raise InvalidArgument("workers must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_DEFAULTS = RunConfig()


def _coerce(name: str, value):
    default = getattr(_DEFAULTS, name)
    try:
        if isinstance(default, tuple):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return tuple(float(v) for v in value)
        if name in ("workers", "report_path", "scan_path") and value in (None, "", "none"):
            return None
        if name in ("sweep_grid", "symmetry_samples", "seed", "workers"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if name.endswith("_path"):
            return str(value)
        return float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"bad value for {name}: {value!r}") from exc


def _apply(config: RunConfig, updates: Mapping) -> RunConfig:
    unknown = set(updates) - set(_FIELDS)
    if unknown:
        raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
    return replace(config, **{k: _coerce(k, v) for k, v in updates.items()})


def load_config(
    path: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping] = None,
) -> RunConfig:
    """Merge defaults, the JSON file at ``path``, environment and ``overrides``."""
    config = RunConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidArgument(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidArgument("config file must hold a JSON object")
        config = _apply(config, data)
    env = os.environ if env is None else env
    from_env = {
        key[len(ENV_PREFIX):].lower(): value
        for key, value in env.items()
        if key.startswith(ENV_PREFIX) and key[len(ENV_PREFIX):].lower() in _FIELDS
    }
    config = _apply(config, from_env)
    if overrides:
        config = _apply(config, {k: v for k, v in overrides.items() if v is not None})
    return config


@dataclass(frozen=True)
class ScanRecord:
    """One (gamma, mu) point of a regime scan."""

    gamma: float
    mu: float
    regime_lower: str
    regime_upper: str
    z_below: Optional[float] = None
    z_above: Optional[float] = None
    res_below: Optional[float] = None
    res_above: Optional[float] = None

    HEADER = ("gamma", "mu", "regime_lower", "regime_upper",
              "z_below", "z_above", "res_below", "res_above")

    def row(self) -> list[str]:
        return [format_number(getattr(self, name)) if name not in ("regime_lower", "regime_upper")
                else getattr(self, name) for name in self.HEADER]


def format_number(x: Optional[float]) -> str:
    """17 significant digits, empty for missing values."""
    return "" if x is None else f"{x:.17g}"
