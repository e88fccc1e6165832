"""Single-cell deployment and link-gain generation.

Every dB quantity is converted to linear scale here; nothing downstream
touches dB.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig


def db2lin(x):
    return np.power(10.0, np.asarray(x, dtype=float) / 10.0)


def dbm2watt(x):
    return db2lin(x) * 1e-3


@dataclass(frozen=True)
class Deployment:
    bs_position: np.ndarray
    ue_positions: np.ndarray  # (M, 2)
    seed_used: int

    @property
    def bs_distances(self) -> np.ndarray:
        return np.hypot(*(self.ue_positions - self.bs_position).T)


@dataclass(frozen=True)
class ChannelState:
    """Linear link gains and SNRs of one cell realisation.

    ``g_ue`` and ``snr_d2d`` are symmetric with an unused (zero) diagonal.
    ``si_snr`` is the residual self-interference-to-noise ratio seen by a
    full-duplex receiver; it is 0 when cancellation is infinite.
    """

    g_bs: np.ndarray
    g_ue: np.ndarray
    noise_per_rb_w: float
    ue_tx_power_w: float
    bs_power_per_ue_w: float
    snr_ul: np.ndarray
    snr_dl: np.ndarray
    snr_d2d: np.ndarray
    si_snr: float

    @property
    def num_ues(self) -> int:
        return self.g_bs.shape[0]

    def digest(self) -> str:
        """SHA-256 over the raw gain arrays (paired-seed bookkeeping)."""
        h = hashlib.sha256()
        for arr in (self.g_bs, self.g_ue):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        h.update(np.float64(self.noise_per_rb_w).tobytes())
        return h.hexdigest()


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def generate_deployment(config: ScenarioConfig, seed: int | None = None) -> Deployment:
    """Drop ``num_ues`` UEs uniformly (by area) in the annulus around the BS."""
    config.validate()
    seed = config.rng_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    m = config.num_ues
    r0, r1 = config.min_bs_distance_m, config.cell_radius_m
    # inverse-CDF of the area-uniform radius on [r0, r1]
    radius = np.sqrt(r0**2 + rng.random(m) * (r1**2 - r0**2))
    radius = np.clip(radius, r0, r1)
    theta = rng.random(m) * 2.0 * np.pi
    pos = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    bs = np.zeros(2)
    _freeze(pos, bs)
    return Deployment(bs_position=bs, ue_positions=pos, seed_used=int(seed))


def fading_power(rng: np.random.Generator, size, kind: str) -> np.ndarray:
    """Unit-mean fading power factors (exponential for Rayleigh)."""
    if kind == "none":
        return np.ones(size)
    if kind == "rayleigh":
        return rng.standard_exponential(size)
    raise ValueError(f"unknown fading model {kind!r}")


def compute_channel_state(deployment: Deployment, config: ScenarioConfig) -> ChannelState:
    config.validate()
    m = config.num_ues
    if deployment.ue_positions.shape != (m, 2):
        raise ValueError(f"deployment has {deployment.ue_positions.shape[0]} UEs, config expects {m}")

    # separate stream from the geometry so toggling fading keeps positions fixed
    rng = np.random.default_rng([deployment.seed_used, 1])

    d_bs = np.maximum(deployment.bs_distances, 1e-3)
    g_bs = db2lin(-config.pathloss_bs.loss_db(d_bs)) * fading_power(rng, m, config.fading)

    diff = deployment.ue_positions[:, None, :] - deployment.ue_positions[None, :, :]
    d_ue = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), 1e-3)
    iu = np.triu_indices(m, k=1)
    upper = db2lin(-config.pathloss_ue.loss_db(d_ue[iu])) * fading_power(rng, len(iu[0]), config.fading)
    g_ue = np.zeros((m, m))
    g_ue[iu] = upper
    g_ue[(iu[1], iu[0])] = upper

    noise = float(dbm2watt(config.noise_psd_dbm_hz) * config.rb_bandwidth_hz)
    p_u = float(dbm2watt(config.ue_tx_power_dbm))
    p_b = float(dbm2watt(config.bs_total_power_dbm)) / m

    snr_ul = p_u * g_bs / noise
    snr_dl = p_b * g_bs / noise
    snr_d2d = p_u * g_ue / noise
    si_snr = float(p_u * db2lin(-config.si_cancellation_db) / noise)

    _freeze(g_bs, g_ue, snr_ul, snr_dl, snr_d2d)
    return ChannelState(
        g_bs=g_bs,
        g_ue=g_ue,
        noise_per_rb_w=noise,
        ue_tx_power_w=p_u,
        bs_power_per_ue_w=p_b,
        snr_ul=snr_ul,
        snr_dl=snr_dl,
        snr_d2d=snr_d2d,
        si_snr=si_snr,
    )
