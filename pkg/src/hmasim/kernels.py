"""Closed-form rate primitives, vectorised over numpy arrays.

Everything here accepts scalars or broadcastable arrays. The batch entry
point :func:`pair_fitness_batch` evaluates one topology for many pairs at
once and is what the tensor builder calls.
"""
from __future__ import annotations

import numpy as np

from .config import Duplex, TopologyKind


def cap(snr):
    return np.log2(1.0 + snr)


def cf_cap(snr):
    return np.maximum(0.0, np.log2(0.5 + np.asarray(snr, dtype=float)))


def two_phase(first, second):
    """max over t in [0,1] of min(t*first, (1-t)*second) -> (t*, value).

    The optimum equalises the phases: t* = second / (first + second).
    """
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    tot = first + second
    safe = np.where(tot > 0, tot, 1.0)
    t = np.where(tot > 0, second / safe, 0.5)
    v = np.where(tot > 0, first * second / safe, 0.0)
    return t, v


def mac_symmetric(snr_a, snr_b):
    """Equal-rate point of the two-user MAC -> (theta, rate).

    ``theta`` is the fraction of time ``a`` is decoded first.
    """
    snr_a = np.asarray(snr_a, dtype=float)
    snr_b = np.asarray(snr_b, dtype=float)
    rate = np.minimum(0.5 * cap(snr_a + snr_b), cap(np.minimum(snr_a, snr_b)))
    # corner "a first": (log(1+a/(1+b)), C(b)); corner "b first": (C(a), log(1+b/(1+a)))
    gap_a_first = np.log2(1.0 + snr_a / (1.0 + snr_b)) - cap(snr_b)
    gap_b_first = cap(snr_a) - np.log2(1.0 + snr_b / (1.0 + snr_a))
    den = gap_b_first - gap_a_first
    safe = np.where(den > 0, den, 1.0)
    theta = np.where(den > 0, np.clip(gap_b_first / safe, 0.0, 1.0), 0.5)
    return theta, rate


def bc_symmetric(snr_strong, snr_weak):
    """Equal-rate point of the two-user degraded BC -> (alpha, rate).

    ``alpha`` (strong user's power share) is the positive root of
    ``s*w*a^2 + (s+w)*a - w = 0``, written in cancellation-free form.
    """
    s = np.asarray(snr_strong, dtype=float)
    w = np.asarray(snr_weak, dtype=float)
    tot = s + w
    den = tot + np.sqrt(tot * tot + 4.0 * s * w * w)
    safe = np.where(den > 0, den, 1.0)
    alpha = np.where(den > 0, 2.0 * w / safe, 0.0)
    return alpha, cap(alpha * s)


def oma_batch(snr_ul, snr_dl):
    return cap(snr_ul) + cap(snr_dl)


def relay_own_batch(ul_r, dl_r, deg=1.0, hd=True):
    """Rate of the relay's own traffic on its own channel.

    HD: plain OMA. FD: both RBs carry UL and DL at once, with every
    receive SNR degraded by residual self-interference.
    """
    if hd:
        return oma_batch(ul_r, dl_r)
    return 2.0 * oma_batch(np.asarray(ul_r) / deg, np.asarray(dl_r) / deg)


def _relay_split(ul_k, dl_k, ul_j, dl_j):
    relay_is_k = dl_k >= dl_j
    ul_r = np.where(relay_is_k, ul_k, ul_j)
    dl_r = np.where(relay_is_k, dl_k, dl_j)
    return relay_is_k, ul_r, dl_r


def pair_fitness_batch(kind, ul_k, dl_k, ul_j, dl_j, d2d, si_snr=0.0, duplex=Duplex.HD):
    """Fitness of topology ``kind`` for many (k, j) pairs.

    Returns ``(value, aux)`` where ``aux`` maps operating-point names to
    arrays (plus ``relay_is_k`` for relaying topologies).
    """
    kind = TopologyKind(kind)
    duplex = Duplex(duplex)
    ul_k, dl_k, ul_j, dl_j, d2d = (np.asarray(x, dtype=float) for x in (ul_k, dl_k, ul_j, dl_j, d2d))

    if kind is TopologyKind.NOMA:
        theta, r_ul = mac_symmetric(ul_k, ul_j)
        strong_is_k = dl_k >= dl_j
        alpha, r_dl = bc_symmetric(np.maximum(dl_k, dl_j), np.minimum(dl_k, dl_j))
        return 4.0 * (r_ul + r_dl), {"alpha": alpha, "mac_share": theta, "strong_is_k": strong_is_k}

    if kind is TopologyKind.OMA:
        raise ValueError("OMA is a solo topology")

    relay_is_k, ul_r, dl_r = _relay_split(ul_k, dl_k, ul_j, dl_j)
    hd = duplex is Duplex.HD
    deg = 1.0 if hd else 1.0 + si_snr
    base = relay_own_batch(ul_r, dl_r, deg, hd)

    if kind is TopologyKind.THR:
        if hd:
            tau_ul, r_ul = two_phase(cap(d2d), cap(ul_r))
            tau_dl, r_dl = two_phase(cap(dl_r), cap(d2d))
        else:
            tau_ul = tau_dl = np.ones_like(base)
            r_ul = np.minimum(cap(d2d / deg), cap(ul_r))
            r_dl = np.minimum(cap(dl_r / deg), cap(d2d))
        return base + r_ul + r_dl, {"tau_ul": tau_ul, "tau_dl": tau_dl, "relay_is_k": relay_is_k}

    # two-way relaying on the end node's channel
    d2d_rx = d2d / deg
    second = np.minimum(cap(ul_r / deg), cap(d2d_rx))
    if kind is TopologyKind.TWR_DF:
        _, first = mac_symmetric(dl_r / deg, d2d_rx)
    else:
        first = np.minimum(cf_cap(dl_r / deg), cf_cap(d2d_rx))
    if hd:
        tau, rate = two_phase(first, second)
    else:
        tau, rate = np.ones_like(base), np.minimum(first, second)
    return base + 4.0 * rate, {"tau": tau, "relay_is_k": relay_is_k}
