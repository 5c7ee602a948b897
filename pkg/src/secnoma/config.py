"""Experiment configuration: flat key = value files with Table-style defaults.

Unknown keys are errors, every value is validated through the model types,
and powers are accepted in dB at this boundary only (internally everything
is linear with unit noise power).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace

from .geometry import (ANALYTIC_MATCHED, PAPER_GEOMETRY, NetworkGeometry,
                       PairConfig, SamplingMode)


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Generic one-parameter sweep descriptor."""

    param: str
    values: tuple[float, ...]
    db_scale: bool = False

    def __post_init__(self):
        if not self.values:
            raise ConfigError("sweep value list must be nonempty")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment parameters (simulation-table defaults)."""

    # geometry
    r_p: float = 5.0
    r_l: float = 10.0
    r_e: float = 100.0
    alpha: float = 4.0
    lambda_e: float = 1e-3
    # pair
    n_l: int = 2
    n: int = 1
    m: int = 2
    a_m_sq: float = 0.4
    a_n_sq: float = 0.6
    r_m: float = 0.1
    r_n: float = 0.1
    beta: float = 0.7
    lambda_mn: float = 1.0
    # powers (dB at this boundary, sigma^2 = 1)
    p_bs_db: float = 60.0
    p_c_db: float = 20.0
    # sampling / engine
    mode: str = ANALYTIC_MATCHED
    r_max: float | None = None
    n_trials: int = 100_000
    master_seed: int = 42
    quadrature_n: int = 20
    abs_tol: float = 1e-8
    workers: int = 1
    # generic sweep descriptor
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()
    sweep_db: bool = False
    # figure-reproduction grids (density configurable; coarser than the
    # source figures to keep desk-scale runtime low)
    fig2_r_p_values: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0,
                                          4.5, 5.0)
    fig2_lambda_e_values: tuple[float, ...] = (1e-3, 1e-4)
    fig3_p_bs_db_values: tuple[float, ...] = (20, 25, 30, 35, 40, 45, 50, 55,
                                              60, 65, 70)
    fig4_p_c_db_values: tuple[float, ...] = (0, 5, 10, 15, 20, 25, 30, 35, 40,
                                             45, 50, 55, 60, 65, 70)
    fig4_beta_values: tuple[float, ...] = (0.4, 0.7, 1.0)

    def __post_init__(self):
        self.geometry()
        self.pair()
        self.sampling_mode()
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.quadrature_n < 1:
            raise ConfigError("quadrature_n must be >= 1")
        if self.abs_tol <= 0:
            raise ConfigError("abs_tol must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.sweep_param is not None:
            self.sweep()

    # --- model-object views -------------------------------------------------

    def geometry(self) -> NetworkGeometry:
        try:
            return NetworkGeometry(r_p=self.r_p, r_l=self.r_l, r_e=self.r_e,
                                   alpha=self.alpha, lambda_e=self.lambda_e)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def pair(self) -> PairConfig:
        try:
            return PairConfig(
                n_l=self.n_l, m=self.m, n=self.n,
                a_m=math.sqrt(self.a_m_sq), a_n=math.sqrt(self.a_n_sq),
                p_bs=db_to_linear(self.p_bs_db), p_c=db_to_linear(self.p_c_db),
                rate_m=self.r_m, rate_n=self.r_n, beta=self.beta,
                lambda_mn=self.lambda_mn)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sampling_mode(self) -> SamplingMode:
        if self.mode not in (PAPER_GEOMETRY, ANALYTIC_MATCHED):
            raise ConfigError(
                f"mode must be '{PAPER_GEOMETRY}' or '{ANALYTIC_MATCHED}', "
                f"got {self.mode!r}")
        try:
            m = SamplingMode(kind=self.mode, truncation_radius=self.r_max)
            m.r_max(self.geometry())
            return m
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep(self) -> SweepSpec:
        if self.sweep_param is None:
            raise ConfigError("no sweep_param configured")
        if self.sweep_param not in _FIELD_PARSERS or \
                _FIELD_PARSERS[self.sweep_param] is not float:
            raise ConfigError(
                f"sweep parameter must name a real-valued config field, "
                f"got {self.sweep_param!r}")
        return SweepSpec(param=self.sweep_param, values=self.sweep_values,
                         db_scale=self.sweep_db)

    def with_values(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)

    def config_hash(self) -> str:
        text = "\n".join(f"{f.name}={getattr(self, f.name)!r}"
                         for f in fields(self))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _parser_for(f) -> object:
    t = f.type
    if "tuple" in t:
        return _parse_float_list
    if t.startswith("int"):
        return int
    if t.startswith("bool"):
        return _parse_bool
    if t.startswith("float"):
        return float
    return str


_FIELD_PARSERS = {f.name: (float if f.name in ("r_max",) else _parser_for(f))
                  for f in fields(ExperimentConfig)}


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat key = value file; omitted keys fall back to defaults.

    Lines are `key = value` with `#` comments; unknown or duplicate keys are
    reported with their line number.
    """
    values: dict[str, object] = {}
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', "
                                  f"got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _FIELD_PARSERS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} "
                                  f"(first set on line {seen[key]})")
            seen[key] = lineno
            try:
                values[key] = _FIELD_PARSERS[key](val)
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    try:
        return ExperimentConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
