"""Dense linear assignment (Jonker-Volgenant) plus matching oracles.

The hot loop lives in the compiled ``_lapjv`` extension when it is
available; otherwise :mod:`._lap_py` is used. ``BACKEND`` reports which
one was picked at import. Set ``HMASIM_PURE_PYTHON=1`` to force the
fallback.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _lap_py
from ._lap_py import Infeasible

_compiled = None
if not os.environ.get("HMASIM_PURE_PYTHON"):
    try:
        from . import _lapjv as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

FORBIDDEN = float("nan")
"""Sentinel for disallowed entries. Excluded from every path; never a big number."""

BRUTE_LAP_MAX_ROWS = 8
BRUTE_LAP_MAX_MAPS = 2_000_000
BRUTE_MATCHING_MAX = 12


class InfeasibleAssignment(ValueError):
    def __init__(self, row: int, msg: str | None = None):
        super().__init__(msg or f"no complete assignment exists (row {row} cannot be placed)")
        self.row = row


def is_forbidden(x) -> np.ndarray:
    return np.isnan(x)


@dataclass(frozen=True)
class CostMatrix:
    entries: np.ndarray
    sense: str = "maximize"

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2:
            raise ValueError("cost matrix must be 2-D")
        if a.shape[0] > a.shape[1]:
            raise ValueError(f"need rows <= cols, got {a.shape}")
        if self.sense not in ("maximize", "minimize"):
            raise ValueError(f"sense must be 'maximize' or 'minimize', got {self.sense!r}")
        if np.isinf(a).any():
            raise ValueError("entries must be finite (use FORBIDDEN to exclude a cell)")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        for i, row in enumerate(a):
            if is_forbidden(row).all():
                raise InfeasibleAssignment(i, f"row {i} has no allowed entry")

    @property
    def shape(self):
        return self.entries.shape

    def total(self, row_to_col) -> float:
        return math.fsum(self.entries[i, j] for i, j in enumerate(row_to_col))


@dataclass(frozen=True)
class AssignmentResult:
    row_to_col: tuple[int, ...]
    objective: float


@dataclass(frozen=True)
class MatchingResult:
    pairs: tuple[tuple[int, int], ...]
    solos: tuple[int, ...]
    objective: float

    def partner_of(self) -> dict[int, int]:
        out = {}
        for a, b in self.pairs:
            out[a], out[b] = b, a
        return out


def _as_cost(cost, sense) -> CostMatrix:
    if isinstance(cost, CostMatrix):
        if sense is not None and sense != cost.sense:
            return CostMatrix(cost.entries, sense)
        return cost
    return CostMatrix(np.asarray(cost, dtype=float), sense or "maximize")


def working_costs(cm: CostMatrix) -> np.ndarray:
    """Nonnegative minimisation costs, FORBIDDEN -> +inf.

    maximize: ``max(entries) - entries``; minimize: ``entries - min(entries)``.
    The shift is a constant per row assignment, so it never changes the
    argmin and is dropped when the objective is re-summed from raw entries.
    """
    a = cm.entries
    mask = is_forbidden(a)
    finite = a[~mask]
    if cm.sense == "maximize":
        w = finite.max() - a
    else:
        w = a - finite.min()
    w = np.where(mask, np.inf, w)
    return np.ascontiguousarray(w, dtype=np.float64)


def solve_lap_jv(cost, sense: str | None = None, *, backend: str | None = None, trace=None):
    """Exact dense assignment by Jonker-Volgenant shortest augmenting paths.

    Parameters
    ----------
    cost : CostMatrix or array_like
        R x C with R <= C; ``FORBIDDEN`` marks disallowed cells.
    sense : {"maximize", "minimize"}, optional
        Overrides the sense of a CostMatrix; defaults to maximize for arrays.
    backend : {"cython", "python"}, optional
        Defaults to :data:`BACKEND`.
    trace : text stream, optional
        If given, one JSON line per augmentation (duals and the augmenting
        path) is written to it. Tracing always runs the Python backend.

    Runs in O(R^2 C).
    """
    cm = _as_cost(cost, sense)
    nr, nc = cm.shape
    if nr == 0:
        return AssignmentResult((), 0.0)
    w = working_costs(cm)
    backend = backend or BACKEND
    if trace is not None:
        backend = "python"
    try:
        if backend == "cython":
            if _compiled is None:
                raise RuntimeError("compiled backend not available")
            col4row, _, _ = _compiled.lap_min(w)
        elif backend == "python":
            col4row, _, _ = _lap_py.lap_min(w.tolist(), trace=trace)
        else:
            raise ValueError(f"unknown backend {backend!r}")
    except Infeasible as exc:
        raise InfeasibleAssignment(exc.row) from None
    r2c = tuple(int(c) for c in col4row)
    return AssignmentResult(r2c, cm.total(r2c))


@lru_cache(maxsize=32)
def _injective_maps(nr: int, nc: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(nc), nr)), dtype=np.intp).reshape(-1, nr)


def brute_force_lap(cost, sense: str | None = None) -> AssignmentResult:
    """Exhaustive oracle over every injective row -> column map (R <= 8)."""
    cm = _as_cost(cost, sense)
    nr, nc = cm.shape
    if nr > BRUTE_LAP_MAX_ROWS or math.perm(nc, nr) > BRUTE_LAP_MAX_MAPS:
        raise ValueError(f"brute force guard exceeded for shape {cm.shape}")
    if nr == 0:
        return AssignmentResult((), 0.0)
    maps = _injective_maps(nr, nc)
    a = cm.entries
    bad = np.inf if cm.sense == "minimize" else -np.inf
    a = np.where(is_forbidden(a), bad, a)
    totals = a[np.arange(nr), maps].sum(axis=1)
    best = int(np.argmin(totals) if cm.sense == "minimize" else np.argmax(totals))
    if not np.isfinite(totals[best]):
        raise InfeasibleAssignment(0, "no complete assignment avoids FORBIDDEN entries")
    r2c = tuple(int(c) for c in maps[best])
    return AssignmentResult(r2c, cm.total(r2c))


def matching_objective(pairs, solos, pair_fitness, solo_fitness) -> float:
    terms = [pair_fitness[a][b] for a, b in pairs] + [solo_fitness[i] for i in solos]
    return math.fsum(terms)


def _surplus(a, b, pair_fitness, solo_fitness):
    p = pair_fitness[a][b]
    if p != p:  # FORBIDDEN
        return -math.inf
    return p - solo_fitness[a] - solo_fitness[b]


def permutation_cycles(perm) -> list[list[int]]:
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = perm[i]
        cycles.append(cyc)
    return cycles


def repair_to_matching(perm, pair_fitness, solo_fitness) -> MatchingResult:
    """Turn an M x M assignment into a valid pairing.

    Fixed points become solos and 2-cycles become pairs. Longer cycles are
    broken greedily: the adjacent (in cycle order) pair with the largest
    surplus over its members' solo fitness is extracted, the rest of the
    cycle becomes a path, and extraction continues on the remaining path
    segments. A pair is only formed when its surplus is strictly positive;
    everything left over is solo.
    """
    r2c = perm.row_to_col if isinstance(perm, AssignmentResult) else tuple(perm)
    m = len(r2c)
    if sorted(r2c) != list(range(m)):
        raise ValueError("repair_to_matching needs a permutation")
    pair_fitness = np.asarray(pair_fitness, dtype=float)
    solo_fitness = np.asarray(solo_fitness, dtype=float)

    pairs: list[tuple[int, int]] = []
    solos: list[int] = []
    for cyc in permutation_cycles(r2c):
        if len(cyc) == 1:
            solos.append(cyc[0])
            continue
        if len(cyc) == 2:
            a, b = cyc
            if _surplus(a, b, pair_fitness, solo_fitness) > 0:
                pairs.append((min(a, b), max(a, b)))
            else:
                solos.extend(cyc)
            continue
        # first cut opens the cycle into a path
        n = len(cyc)
        best = max(range(n), key=lambda t: (_surplus(cyc[t], cyc[(t + 1) % n], pair_fitness, solo_fitness), -t))
        a, b = cyc[best], cyc[(best + 1) % n]
        if _surplus(a, b, pair_fitness, solo_fitness) <= 0:
            solos.extend(cyc)
            continue
        pairs.append((min(a, b), max(a, b)))
        segments = [[cyc[(best + 2 + t) % n] for t in range(n - 2)]]
        while True:
            cand = None
            for si, seg in enumerate(segments):
                for t in range(len(seg) - 1):
                    s = _surplus(seg[t], seg[t + 1], pair_fitness, solo_fitness)
                    if s > 0 and (cand is None or s > cand[0]):
                        cand = (s, si, t)
            if cand is None:
                break
            _, si, t = cand
            seg = segments.pop(si)
            a, b = seg[t], seg[t + 1]
            pairs.append((min(a, b), max(a, b)))
            segments[si:si] = [s for s in (seg[:t], seg[t + 2 :]) if s]
        for seg in segments:
            solos.extend(seg)

    pairs.sort()
    solos.sort()
    obj = matching_objective(pairs, solos, pair_fitness, solo_fitness)
    return MatchingResult(tuple(pairs), tuple(solos), obj)


def brute_force_matching(pair_fitness, solo_fitness) -> MatchingResult:
    """Globally optimal pairing-with-solos by exhaustive (memoised) recursion, M <= 12."""
    pair_fitness = np.asarray(pair_fitness, dtype=float)
    solo_fitness = np.asarray(solo_fitness, dtype=float)
    m = len(solo_fitness)
    if m > BRUTE_MATCHING_MAX:
        raise ValueError(f"brute_force_matching guard: M={m} > {BRUTE_MATCHING_MAX}")
    pf = pair_fitness.tolist()
    sf = solo_fitness.tolist()

    @lru_cache(maxsize=None)
    def best(mask: int):
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        v, choice = best(rest)
        top = (sf[i] + v, (("s", i),) + choice)
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            p = pf[i][j]
            if p != p:
                continue
            v, choice = best(rest & ~(1 << j))
            if p + v > top[0]:
                top = (p + v, (("p", i, j),) + choice)
        return top

    _, choice = best((1 << m) - 1)
    pairs = sorted((c[1], c[2]) for c in choice if c[0] == "p")
    solos = sorted(c[1] for c in choice if c[0] == "s")
    return MatchingResult(tuple(pairs), tuple(solos), matching_objective(pairs, solos, pair_fitness, solo_fitness))


__all__ = [
    "AssignmentResult",
    "BACKEND",
    "CostMatrix",
    "FORBIDDEN",
    "InfeasibleAssignment",
    "MatchingResult",
    "brute_force_lap",
    "brute_force_matching",
    "permutation_cycles",
    "repair_to_matching",
    "solve_lap_jv",
]
