"""Bounded scalar maximisation on [0, 1]."""
from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...

# finest grid used when golden-section gives up on a non-unimodal objective
MIN_GRID_STEP = 1e-5


class NonFiniteObjective(ValueError):
    pass


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def g(x: float) -> float:
        y = float(f(x))
        if not math.isfinite(y):
            raise NonFiniteObjective(f"objective returned {y!r} at x={x!r}")
        return y

    return g


def _is_valley(fl, fm, fr, eps):
    return fm < fl - eps and fm < fr - eps


def golden_section(f, lo, hi, tol, max_iter=200):
    """Golden-section search for a maximum of ``f`` on ``[lo, hi]``.

    Returns ``(x, fx, ok)``; ``ok`` is False when a sampled interior point
    sits strictly below both of its neighbours, which a unimodal objective
    cannot produce.
    """
    a, b = lo, hi
    fa, fb = f(a), f(b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    scale = max(abs(fa), abs(fb), abs(fc), abs(fd), 1.0)
    eps = 1e-12 * scale
    ok = True
    it = 0
    while b - a > tol and it < max_iter:
        if _is_valley(fa, fc, fd, eps) or _is_valley(fc, fd, fb, eps):
            ok = False
            break
        if fc >= fd:
            b, fb = d, fd
            d, fd = c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    x = 0.5 * (a + b)
    return x, f(x), ok


def optimize_scalar(objective: Callable[[float], float], tol: float = 1e-9) -> tuple[float, float]:
    """Maximise a (nominally unimodal) objective on [0, 1].

    Golden-section search down to an interval of width ``tol``. If the
    bracket breaks (the objective is not unimodal), a dense grid with step
    ``max(tol, MIN_GRID_STEP)`` locates the best cell, which golden-section
    then refines locally.

    Returns
    -------
    (argmax, max)
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    f = _checked(objective)
    x, fx, ok = golden_section(f, 0.0, 1.0, tol)
    if ok:
        return x, fx

    step = max(tol, MIN_GRID_STEP)
    n = int(math.ceil(1.0 / step))
    best_i, best_v = 0, -math.inf
    for i in range(n + 1):
        v = f(min(i * step, 1.0))
        if v > best_v:
            best_i, best_v = i, v
    lo = max(0.0, (best_i - 1) * step)
    hi = min(1.0, (best_i + 1) * step)
    x, fx, _ = golden_section(f, lo, hi, tol)
    if fx < best_v:
        return min(best_i * step, 1.0), best_v
    return x, fx
