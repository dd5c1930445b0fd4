"""Scenario configuration: defaults, TOML loading, validation.

Keys mirror the system-parameter names used throughout the package
(f_c, delta_f, n_sc, m, n_b, t_cg, t_fg, ...). Powers are configured in
dBm and converted to linear watts internally. Every run embeds the fully
resolved configuration in its output for provenance.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import toml

from .channel import C, ArrayConfig, PathModel
from .ofdm import WaveformConfig


class ConfigError(ValueError):
    """Invalid scenario configuration (CLI exit code 2)."""


def dbm_to_watt(x: float) -> float:
    return 10.0 ** ((x - 30.0) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    # waveform
    f_c: float = 28.5e9
    delta_f: float = 120e3
    n_sc: int = 833
    t_cp: float = 0.58e-6
    t_cg: int = 24
    t_fg: int = 42
    tx_power_dbm: float = 25.0       # total, split uniformly across subcarriers
    noise_power_dbm: float = -123.2
    # arrays and geometry
    m: int = 64
    n_b: int = 64
    q_b: tuple[float, float, float] = (35.0, -20.0, 10.0)
    q_irs: tuple[float, float, float] = (0.0, 0.0, 10.0)
    # path loss
    eps_b2r: float = 2.1
    eps_r2g: float = 2.2
    pl_d0_db: float | None = None    # None: free-space loss at d_0 = 1 m
    # target
    target_range: float = 10.0
    target_u: float | None = None    # None: drawn per trial from target_bounds
    target_v: float | None = None
    target_bounds: tuple[float, float] = (-0.5, 0.5)
    target_velocity: float = 20.0
    rcs_variance: float = 1.0
    target_absent: bool = False
    # detector and search grids
    far_target: float = 0.01
    n_q: int = 833
    n_r: int = 100
    t_v: int = 100
    iters: int = 10
    # experiment control
    trials: int = 100
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.m < 2 or (self.m & (self.m - 1)) != 0:
            raise ConfigError(f"m must be a power of two >= 2, got {self.m}")
        if self.n_b < 1 or self.n_sc < 1:
            raise ConfigError("n_b and n_sc must be positive")
        if not 0.0 < self.far_target < 1.0:
            raise ConfigError("far_target must lie in (0, 1)")
        if self.target_range <= 0.0:
            raise ConfigError("target_range must be positive")
        if min(self.n_q, self.n_r, self.t_v, self.iters, self.t_fg, self.t_cg) < 1:
            raise ConfigError("grid sizes and symbol counts must be positive")
        tau = 2.0 * self.target_range / C
        tau_max = 0.5 / self.delta_f
        if tau >= tau_max:
            raise ConfigError(
                f"target delay {tau:.3e} s reaches the unambiguous limit {tau_max:.3e} s")
        budget = 2 + 4 * int(math.log2(self.m))
        if budget > self.t_cg:
            warnings.warn(
                f"beam training needs {budget} symbols but t_cg is {self.t_cg}; "
                "the schedule will overrun the coarse-grained period",
                stacklevel=2)

    # -- derived objects -------------------------------------------------
    @property
    def power_per_sc(self) -> float:
        return dbm_to_watt(self.tx_power_dbm) / self.n_sc

    @property
    def noise_power(self) -> float:
        return dbm_to_watt(self.noise_power_dbm)

    @property
    def wavelength(self) -> float:
        return C / self.f_c

    def waveform(self) -> WaveformConfig:
        return WaveformConfig(self.f_c, self.delta_f, self.n_sc, self.t_cp,
                              self.t_cg, self.t_fg, self.noise_power,
                              self.power_per_sc)

    def array(self) -> ArrayConfig:
        return ArrayConfig(self.n_b, self.m)

    def path_model(self) -> PathModel:
        if self.pl_d0_db is None:
            return PathModel.free_space(self.f_c, eps_b2r=self.eps_b2r,
                                        eps_r2g=self.eps_r2g)
        return PathModel(self.pl_d0_db, 1.0, self.eps_b2r, self.eps_r2g)

    def resolved(self) -> dict:
        """Plain dict of every field, for provenance output."""
        d = dataclasses.asdict(self)
        d["q_b"] = list(self.q_b)
        d["q_irs"] = list(self.q_irs)
        d["target_bounds"] = list(self.target_bounds)
        return d

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


_TUPLE_FIELDS = {"q_b", "q_irs", "target_bounds"}


def config_from_dict(data: dict) -> ScenarioConfig:
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    clean = {}
    for key, val in data.items():
        clean[key] = tuple(val) if key in _TUPLE_FIELDS else val
    try:
        return ScenarioConfig(**clean)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | None) -> ScenarioConfig:
    """Read a TOML scenario file; None gives the built-in defaults."""
    if path is None:
        return ScenarioConfig()
    try:
        data = toml.load(path)
    except (OSError, toml.TomlDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(data)
