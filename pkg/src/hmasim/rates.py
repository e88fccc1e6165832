"""Per-cluster fitness: optimised UL+DL symmetric rates of one solo UE or one pair.

Rates are in bit/s/Hz per resource block (unit RB bandwidth). A channel is
one UL RB plus one DL RB, so a solo UE occupies two RBs and a pair four.

Pair conventions
----------------
``k`` is the lower-indexed member. For the relaying topologies the relay is
the member with the larger DL SNR (``k`` on ties); the other member is the
*source* (THR) or *end node* (TWR). The relay keeps its own channel for its own
traffic and the partner's channel carries the relayed traffic. Under FD
the relay runs both directions at once on each of its own RBs as well.

Every inner optimisation (power split, SIC time share, phase durations)
can be solved two ways: ``method="closed"`` uses the exact optimum from
:mod:`hmasim.kernels`; ``method="golden"`` runs
:func:`hmasim.optimize.optimize_scalar` on the same objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import kernels
from .config import Duplex, TopologyKind
from .optimize import optimize_scalar


@dataclass(frozen=True)
class PairContext:
    snr_ul_k: float
    snr_dl_k: float
    snr_ul_j: float
    snr_dl_j: float
    snr_d2d: float
    si_snr: float = 0.0
    duplex: Duplex = Duplex.HD
    tol: float = 1e-9

    def __post_init__(self):
        for name in ("snr_ul_k", "snr_dl_k", "snr_ul_j", "snr_dl_j", "snr_d2d", "si_snr"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        object.__setattr__(self, "duplex", Duplex(self.duplex))

    @property
    def relay_is_k(self) -> bool:
        return self.snr_dl_k >= self.snr_dl_j

    @property
    def relay_snrs(self) -> tuple[float, float]:
        """(UL, DL) SNR of the relaying member."""
        if self.relay_is_k:
            return self.snr_ul_k, self.snr_dl_k
        return self.snr_ul_j, self.snr_dl_j


@dataclass(frozen=True)
class FitnessValue:
    value: float
    topology: TopologyKind
    operating_point: dict = field(default_factory=dict)
    relay: int | None = None  # 0: k relays, 1: j relays


def shannon_rate(snr: float) -> float:
    if not (math.isfinite(snr) and snr >= 0):
        raise ValueError(f"snr must be finite and >= 0, got {snr!r}")
    return math.log2(1.0 + snr)


def cf_rate(snr: float) -> float:
    """Compute-forward rate ``max(0, log2(1/2 + snr))``."""
    return max(0.0, math.log2(0.5 + snr))


def oma_fitness(snr_ul: float, snr_dl: float) -> FitnessValue:
    return FitnessValue(shannon_rate(snr_ul) + shannon_rate(snr_dl), TopologyKind.OMA)


def _check_method(method):
    if method not in ("closed", "golden"):
        raise ValueError(f"method must be 'closed' or 'golden', got {method!r}")


def two_phase(first: float, second: float, tol: float = 1e-9, method: str = "closed"):
    """max over t of min(t*first, (1-t)*second) -> (t, value)."""
    _check_method(method)
    if method == "golden":
        return optimize_scalar(lambda t: min(t * first, (1.0 - t) * second), tol)
    t, v = kernels.two_phase(first, second)
    return float(t), float(v)


def mac_symmetric(snr_a: float, snr_b: float, tol: float = 1e-9, method: str = "closed"):
    """Equal-rate point of a two-user Gaussian MAC with SIC time sharing.

    Returns ``(theta, rate)``; ``theta`` is the fraction of time user ``a``
    is decoded first, treating ``b`` as noise.
    """
    _check_method(method)
    if method == "closed":
        theta, rate = kernels.mac_symmetric(snr_a, snr_b)
        return float(theta), float(rate)
    ca, cb = shannon_rate(snr_a), shannon_rate(snr_b)
    a_lo = math.log2(1.0 + snr_a / (1.0 + snr_b))
    b_lo = math.log2(1.0 + snr_b / (1.0 + snr_a))

    def sym(theta):
        return min(theta * a_lo + (1.0 - theta) * ca, theta * cb + (1.0 - theta) * b_lo)

    return optimize_scalar(sym, tol)


def bc_symmetric(snr_strong: float, snr_weak: float, tol: float = 1e-9, method: str = "closed"):
    """Equal-rate point of a two-user degraded BC -> ``(alpha, rate)``.

    ``alpha`` is the power share of the strong user, who cancels the weak
    user's layer before decoding its own.
    """
    _check_method(method)
    if method == "closed":
        alpha, rate = kernels.bc_symmetric(snr_strong, snr_weak)
        return float(alpha), float(rate)

    def sym(alpha):
        rs = math.log2(1.0 + alpha * snr_strong)
        rw = math.log2(1.0 + (1.0 - alpha) * snr_weak / (alpha * snr_weak + 1.0))
        return min(rs, rw)

    return optimize_scalar(sym, tol)


def noma_fitness(ctx: PairContext, method: str = "closed") -> FitnessValue:
    """Both members share both channels at the same symmetric operating point."""
    theta, r_ul = mac_symmetric(ctx.snr_ul_k, ctx.snr_ul_j, ctx.tol, method)
    strong_is_k = ctx.snr_dl_k >= ctx.snr_dl_j
    s, w = (ctx.snr_dl_k, ctx.snr_dl_j) if strong_is_k else (ctx.snr_dl_j, ctx.snr_dl_k)
    alpha, r_dl = bc_symmetric(s, w, ctx.tol, method)
    return FitnessValue(
        4.0 * (r_ul + r_dl),  # 2 users x 2 shared channels
        TopologyKind.NOMA,
        {"alpha": alpha, "mac_share": theta, "r_ul": r_ul, "r_dl": r_dl, "strong": 0 if strong_is_k else 1},
    )


def relay_own_rate(ctx: PairContext) -> float:
    ul_r, dl_r = ctx.relay_snrs
    if ctx.duplex is Duplex.HD:
        return oma_fitness(ul_r, dl_r).value
    deg = 1.0 + ctx.si_snr
    return 2.0 * (shannon_rate(ul_r / deg) + shannon_rate(dl_r / deg))


def thr_fitness(ctx: PairContext, method: str = "closed") -> FitnessValue:
    """Two-hop decode-forward through the relay on the source's channel."""
    ul_r, dl_r = ctx.relay_snrs
    base = relay_own_rate(ctx)
    c_d2d = shannon_rate(ctx.snr_d2d)
    if ctx.duplex is Duplex.HD:
        tau_ul, r_ul = two_phase(c_d2d, shannon_rate(ul_r), ctx.tol, method)
        tau_dl, r_dl = two_phase(shannon_rate(dl_r), c_d2d, ctx.tol, method)
    else:
        deg = 1.0 + ctx.si_snr
        tau_ul = tau_dl = 1.0
        r_ul = min(shannon_rate(ctx.snr_d2d / deg), shannon_rate(ul_r))
        r_dl = min(shannon_rate(dl_r / deg), c_d2d)
    return FitnessValue(
        base + r_ul + r_dl,
        TopologyKind.THR,
        {"tau_ul": tau_ul, "tau_dl": tau_dl, "r_ul": r_ul, "r_dl": r_dl},
        relay=0 if ctx.relay_is_k else 1,
    )


def _twr(ctx: PairContext, kind: TopologyKind, method: str) -> FitnessValue:
    # UL direction: end -> relay (d2d), relay -> BS (relay UL)
    # DL direction: BS -> relay (relay DL), relay -> end (d2d)
    ul_r, dl_r = ctx.relay_snrs
    base = relay_own_rate(ctx)
    deg = 1.0 if ctx.duplex is Duplex.HD else 1.0 + ctx.si_snr
    d2d = ctx.snr_d2d / deg
    if kind is TopologyKind.TWR_DF:
        first = mac_symmetric(dl_r / deg, d2d, ctx.tol, method)[1]
    else:
        first = min(cf_rate(dl_r / deg), cf_rate(d2d))
    second = min(shannon_rate(ul_r / deg), shannon_rate(d2d))
    if ctx.duplex is Duplex.HD:
        tau, rate = two_phase(first, second, ctx.tol, method)
    else:
        tau, rate = 1.0, min(first, second)
    # symmetric exchange: both directions on both RBs of the end node's channel
    return FitnessValue(
        base + 4.0 * rate, kind, {"tau": tau, "rate": rate}, relay=0 if ctx.relay_is_k else 1
    )


def twr_df_fitness(ctx: PairContext, method: str = "closed") -> FitnessValue:
    """Decode-forward two-way relaying: MAC phase into the relay, then broadcast."""
    return _twr(ctx, TopologyKind.TWR_DF, method)


def twr_plnc_fitness(ctx: PairContext, method: str = "closed") -> FitnessValue:
    """Compute-forward (lattice PLNC) two-way relaying."""
    return _twr(ctx, TopologyKind.TWR_PLNC, method)


PAIR_FITNESS = {
    TopologyKind.NOMA: noma_fitness,
    TopologyKind.THR: thr_fitness,
    TopologyKind.TWR_DF: twr_df_fitness,
    TopologyKind.TWR_PLNC: twr_plnc_fitness,
}


def pair_fitness(kind: TopologyKind, ctx: PairContext, method: str = "closed") -> FitnessValue:
    try:
        fn = PAIR_FITNESS[TopologyKind(kind)]
    except KeyError:
        raise ValueError(f"{kind} is not a pair topology") from None
    return fn(ctx, method)
