"""Scenario configuration and its TOML loader.

All physical quantities are stored in the units users normally quote
(dBm, dB, Hz, metres). Conversion to linear scale happens once, in
:mod:`hmasim.channel`.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid scenario or run configuration."""


class _CaselessEnum(str, Enum):
    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            return cls.__members__.get(value.upper())
        return None


class TopologyKind(_CaselessEnum):
    OMA = "OMA"
    NOMA = "NOMA"
    THR = "THR"
    TWR_DF = "TWR_DF"
    TWR_PLNC = "TWR_PLNC"


# Canonical order, used for tensor axes and CSV columns.
ALL_TOPOLOGIES: tuple[TopologyKind, ...] = tuple(TopologyKind)


class Duplex(_CaselessEnum):
    HD = "HD"
    FD = "FD"


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance law ``PL(d) = intercept_db + slope_db * log10(d_km)``."""

    model: str = "log-distance"
    intercept_db: float = 128.1
    slope_db: float = 37.6

    def loss_db(self, d_m):
        import numpy as np

        return self.intercept_db + self.slope_db * np.log10(np.asarray(d_m, dtype=float) / 1000.0)


def _default_ue_pathloss() -> PathLossModel:
    return PathLossModel(intercept_db=127.0, slope_db=45.0)


@dataclass(frozen=True)
class ScenarioConfig:
    cell_radius_m: float = 3500.0
    min_bs_distance_m: float = 10.0
    num_ues: int = 10
    num_channels: int = 10
    total_bandwidth_hz: float = 10e6
    ue_tx_power_dbm: float = 20.0
    bs_total_power_dbm: float = 52.0
    noise_psd_dbm_hz: float = -174.0
    pathloss_bs: PathLossModel = field(default_factory=PathLossModel)
    pathloss_ue: PathLossModel = field(default_factory=_default_ue_pathloss)
    fading: str = "rayleigh"
    si_cancellation_db: float = 180.0
    topology_set: tuple[TopologyKind, ...] = ALL_TOPOLOGIES
    duplex: Duplex = Duplex.HD
    scalar_opt_tol: float = 1e-9
    rng_seed: int = 42

    def __post_init__(self):
        # normalise enum-ish fields so string input is accepted
        topo = tuple(sorted({TopologyKind(t) for t in self.topology_set}, key=ALL_TOPOLOGIES.index))
        object.__setattr__(self, "topology_set", topo)
        object.__setattr__(self, "duplex", Duplex(self.duplex))
        self.validate()

    @property
    def num_rbs(self) -> int:
        """One UL and one DL resource block per channel."""
        return 2 * self.num_ues

    @property
    def rb_bandwidth_hz(self) -> float:
        return self.total_bandwidth_hz / self.num_rbs

    def validate(self) -> None:
        def bad(name, msg):
            raise ConfigError(f"{name}: {msg}")

        if int(self.num_ues) != self.num_ues or self.num_ues < 1:
            bad("num_ues", f"must be an integer >= 1, got {self.num_ues!r}")
        if self.num_channels != self.num_ues:
            bad("num_channels", f"must equal num_ues ({self.num_ues}), got {self.num_channels}")
        if not (self.min_bs_distance_m > 0):
            bad("min_bs_distance_m", "must be > 0")
        if not (self.cell_radius_m > self.min_bs_distance_m):
            bad("cell_radius_m", "must exceed min_bs_distance_m")
        if not (self.total_bandwidth_hz > 0 and math.isfinite(self.total_bandwidth_hz)):
            bad("total_bandwidth_hz", "must be finite and > 0")
        for name in ("ue_tx_power_dbm", "bs_total_power_dbm", "noise_psd_dbm_hz"):
            if not math.isfinite(getattr(self, name)):
                bad(name, "must be finite")
        if self.fading not in ("none", "rayleigh"):
            bad("fading", f"expected 'none' or 'rayleigh', got {self.fading!r}")
        if math.isnan(self.si_cancellation_db) or self.si_cancellation_db < 0:
            bad("si_cancellation_db", "must be >= 0 (inf allowed)")
        if TopologyKind.OMA not in self.topology_set:
            bad("topology_set", "must contain OMA")
        if not (self.scalar_opt_tol > 0):
            bad("scalar_opt_tol", "must be > 0")
        if not (0 <= int(self.rng_seed) < 2**64):
            bad("rng_seed", "must be a 64-bit unsigned integer")
        for name in ("pathloss_bs", "pathloss_ue"):
            pl = getattr(self, name)
            if pl.model != "log-distance":
                bad(name, f"unknown path-loss model {pl.model!r}")

    def with_ues(self, m: int) -> "ScenarioConfig":
        return replace(self, num_ues=m, num_channels=m)


# TOML layout: section -> {toml key: dataclass field}
_LAYOUT: dict[str, dict[str, str]] = {
    "cell": {
        "radius_m": "cell_radius_m",
        "min_bs_distance_m": "min_bs_distance_m",
        "num_ues": "num_ues",
        "num_channels": "num_channels",
    },
    "radio": {
        "total_bandwidth_hz": "total_bandwidth_hz",
        "ue_tx_power_dbm": "ue_tx_power_dbm",
        "bs_total_power_dbm": "bs_total_power_dbm",
        "noise_psd_dbm_hz": "noise_psd_dbm_hz",
        "fading": "fading",
        "si_cancellation_db": "si_cancellation_db",
    },
    "hma": {
        "topologies": "topology_set",
        "duplex": "duplex",
        "scalar_opt_tol": "scalar_opt_tol",
        "seed": "rng_seed",
    },
}
_PATHLOSS_KEYS = {f.name for f in fields(PathLossModel)}


def config_from_mapping(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build a config from nested sections; unknown keys raise ConfigError."""
    kwargs: dict[str, Any] = {}
    for section, body in data.items():
        if section == "pathloss":
            if not isinstance(body, Mapping):
                raise ConfigError("pathloss: expected a table")
            for link, params in body.items():
                if link not in ("bs", "ue"):
                    raise ConfigError(f"pathloss.{link}: unknown link (expected 'bs' or 'ue')")
                unknown = set(params) - _PATHLOSS_KEYS
                if unknown:
                    raise ConfigError(f"pathloss.{link}: unknown keys {sorted(unknown)}")
                base = PathLossModel() if link == "bs" else _default_ue_pathloss()
                kwargs[f"pathloss_{link}"] = replace(base, **params)
            continue
        if section not in _LAYOUT:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, Mapping):
            raise ConfigError(f"{section}: expected a table")
        for key, value in body.items():
            if key not in _LAYOUT[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            kwargs[_LAYOUT[section][key]] = value
    if "topology_set" in kwargs:
        try:
            kwargs["topology_set"] = tuple(TopologyKind(str(t).upper()) for t in kwargs["topology_set"])
        except ValueError as exc:
            raise ConfigError(f"hma.topologies: {exc}") from None
    if "duplex" in kwargs:
        kwargs["duplex"] = str(kwargs["duplex"]).upper()
    if "num_ues" in kwargs and "num_channels" not in kwargs:
        kwargs["num_channels"] = kwargs["num_ues"]
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data)
