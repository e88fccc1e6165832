"""Fitness tensor construction, HMA partitioning, and gain accounting."""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .assignment import FORBIDDEN, MatchingResult, repair_to_matching, solve_lap_jv
from .channel import ChannelState
from .config import ALL_TOPOLOGIES, ScenarioConfig, TopologyKind
from .kernels import oma_batch, pair_fitness_batch


class FitnessError(ValueError):
    pass


@dataclass(frozen=True)
class FitnessTensor:
    """``values[k, j, n]``: fitness of UE k clustered with UE j under ``topologies[n]``.

    The diagonal holds OMA only; off-diagonal entries are symmetric in
    (k, j). Disallowed entries are ``FORBIDDEN`` (NaN).
    """

    values: np.ndarray
    topologies: tuple[TopologyKind, ...]
    # per pair topology: (rows, cols) of the upper triangle and aux arrays
    pair_index: tuple[np.ndarray, np.ndarray]
    aux: dict

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def axis(self, kind: TopologyKind) -> int:
        return self.topologies.index(TopologyKind(kind))

    @property
    def solo(self) -> np.ndarray:
        oma = self.axis(TopologyKind.OMA)
        return np.diagonal(self.values[:, :, oma]).copy()

    def restrict(self, topologies) -> "FitnessTensor":
        """Sub-tensor over a subset of the topology axis (entries are shared, not recomputed)."""
        keep = tuple(sorted({TopologyKind(t) for t in topologies}, key=ALL_TOPOLOGIES.index))
        missing = [t.value for t in keep if t not in self.topologies]
        if missing:
            raise FitnessError(f"tensor has no axis for {missing}")
        if TopologyKind.OMA not in keep:
            raise FitnessError("restricted tensor must keep OMA")
        vals = self.values[:, :, [self.axis(t) for t in keep]]
        vals.setflags(write=False)
        aux = {k: v for k, v in self.aux.items() if k in keep}
        return FitnessTensor(vals, keep, self.pair_index, aux)

    def operating_point(self, k: int, j: int, kind: TopologyKind) -> dict:
        kind = TopologyKind(kind)
        if kind is TopologyKind.OMA or k == j:
            return {}
        a, b = (k, j) if k < j else (j, k)
        m = self.m
        # position of (a, b) in np.triu_indices(m, 1) order
        pos = a * m - a * (a + 1) // 2 + (b - a - 1)
        out = {}
        for name, arr in self.aux[kind].items():
            val = arr[pos].item()
            if name == "relay_is_k":
                out["relay"] = a if val else b
            elif name == "strong_is_k":
                out["strong"] = a if val else b
            else:
                out[name] = float(val)
        return out


def build_fitness_tensor(chan: ChannelState, cfg: ScenarioConfig) -> FitnessTensor:
    m = chan.num_ues
    if m != cfg.num_ues:
        raise FitnessError(f"channel state has {m} UEs, config expects {cfg.num_ues}")
    topologies = tuple(cfg.topology_set)
    n = len(topologies)
    values = np.full((m, m, n), FORBIDDEN)

    oma = oma_batch(chan.snr_ul, chan.snr_dl)
    bad = ~np.isfinite(oma) | (oma < 0)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise FitnessError(f"OMA fitness of UE {k} is {oma[k]!r}")
    diag = np.arange(m)
    values[diag, diag, topologies.index(TopologyKind.OMA)] = oma

    rows, cols = np.triu_indices(m, k=1)
    aux = {}
    for axis, kind in enumerate(topologies):
        if kind is TopologyKind.OMA:
            continue
        v, extra = pair_fitness_batch(
            kind,
            chan.snr_ul[rows],
            chan.snr_dl[rows],
            chan.snr_ul[cols],
            chan.snr_dl[cols],
            chan.snr_d2d[rows, cols],
            chan.si_snr,
            cfg.duplex,
        )
        bad = ~np.isfinite(v) | (v < 0)
        if bad.any():
            t = int(np.flatnonzero(bad)[0])
            raise FitnessError(f"{kind.value} fitness at (k={rows[t]}, j={cols[t]}, n={axis}) is {v[t]!r}")
        values[rows, cols, axis] = v
        values[cols, rows, axis] = v
        aux[kind] = {name: np.asarray(arr) for name, arr in extra.items()}
    values.setflags(write=False)
    return FitnessTensor(values, topologies, (rows, cols), aux)


@dataclass(frozen=True)
class UEAssignment:
    ue: int
    topology: TopologyKind
    partner: int | None
    role: str  # solo | relay | end | noma
    channels: tuple[int, ...]
    operating_point: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]
    topology: TopologyKind
    fitness: float
    channels: tuple[int, ...]
    operating_point: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PartitionReport:
    assignments: tuple[UEAssignment, ...]
    clusters: tuple[Cluster, ...]
    matching: MatchingResult
    lap_objective: float

    @property
    def objective(self) -> float:
        return self.matching.objective


def reduce_topologies(tensor: FitnessTensor):
    """Collapse the topology axis: best fitness per (k, j) and its topology index.

    Off-diagonal cells with no allowed topology stay FORBIDDEN.
    """
    v = np.where(np.isnan(tensor.values), -np.inf, tensor.values)
    best_n = np.argmax(v, axis=2)
    best = np.take_along_axis(v, best_n[..., None], axis=2)[..., 0]
    best = np.where(np.isneginf(best), FORBIDDEN, best)
    return best, best_n


def lap_weights(pair_best: np.ndarray) -> np.ndarray:
    """Square LAP weights: solo fitness on the diagonal, half the pair fitness elsewhere.

    A 2-cycle (k->j, j->k) then collects exactly one pair fitness, so a
    pair wins only when it beats the two solos it replaces.
    """
    w = pair_best / 2.0
    d = np.arange(pair_best.shape[0])
    w[d, d] = pair_best[d, d]
    return w


def solve_hma(tensor: FitnessTensor, *, backend: str | None = None) -> PartitionReport:
    m = tensor.m
    pair_best, best_n = reduce_topologies(tensor)
    solo = np.diagonal(pair_best).copy()
    assert np.isfinite(solo).all(), "OMA diagonal must be finite"

    perm = solve_lap_jv(lap_weights(pair_best), "maximize", backend=backend)
    matching = repair_to_matching(perm, pair_best, solo)

    assignments: list[UEAssignment | None] = [None] * m
    clusters = []
    for a, b in matching.pairs:
        kind = tensor.topologies[best_n[a, b]]
        op = tensor.operating_point(a, b, kind)
        fit = float(pair_best[a, b])
        clusters.append(Cluster((a, b), kind, fit, (a, b), op))
        for ue, other in ((a, b), (b, a)):
            if kind is TopologyKind.NOMA:
                role = "noma"
            else:
                role = "relay" if op.get("relay") == ue else "end"
            assignments[ue] = UEAssignment(ue, kind, other, role, (a, b), op)
    for i in matching.solos:
        clusters.append(Cluster((i,), TopologyKind.OMA, float(solo[i]), (i,)))
        assignments[i] = UEAssignment(i, TopologyKind.OMA, None, "solo", (i,))
    clusters.sort(key=lambda c: c.members)
    assert all(a is not None for a in assignments)
    return PartitionReport(tuple(assignments), tuple(clusters), matching, perm.objective)


@dataclass(frozen=True)
class GainReport:
    sum_rate: float  # bit/s
    oma_sum_rate: float  # bit/s
    gain_pct: float
    topology_shares: dict
    topology_gain_contrib: dict

    def as_dict(self) -> dict:
        return {
            "sum_rate": self.sum_rate,
            "oma_sum_rate": self.oma_sum_rate,
            "gain_pct": self.gain_pct,
            "topology_shares": {k.value: v for k, v in self.topology_shares.items()},
            "topology_gain_contrib": {k.value: v for k, v in self.topology_gain_contrib.items()},
        }


def evaluate(report: PartitionReport, tensor: FitnessTensor, cfg: ScenarioConfig) -> GainReport:
    m = tensor.m
    solo = tensor.solo
    scale = cfg.rb_bandwidth_hz
    fit_sum = math.fsum(c.fitness for c in report.clusters)
    oma_sum = math.fsum(solo.tolist())
    gain_pct = 100.0 * (fit_sum / oma_sum) if oma_sum > 0 else 100.0

    counts = dict.fromkeys(ALL_TOPOLOGIES, 0)
    per_ue_gain = {k: [] for k in ALL_TOPOLOGIES}
    for a in report.assignments:
        counts[a.topology] += 1
    for c in report.clusters:
        share = c.fitness / len(c.members)
        for ue in c.members:
            per_ue_gain[c.topology].append(share - solo[ue])
    shares = {k: counts[k] / m for k in ALL_TOPOLOGIES}
    total_gain = fit_sum - oma_sum
    if total_gain > 0:
        contrib = {k: math.fsum(per_ue_gain[k]) / total_gain for k in ALL_TOPOLOGIES}
    else:
        contrib = dict.fromkeys(ALL_TOPOLOGIES, 0.0)
    return GainReport(fit_sum * scale, oma_sum * scale, gain_pct, shares, contrib)


def _jsonable(x):
    if isinstance(x, TopologyKind):
        return x.value
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_report(report: PartitionReport, gain: GainReport, dest) -> None:
    """JSON Lines: one ``{"type": "ue"}`` record per UE, then one summary record."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w") if own else dest
    try:
        for a in report.assignments:
            rec = {"type": "ue", **_jsonable(asdict(a))}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
        summary = {
            "type": "summary",
            "objective": report.objective,
            "lap_objective": report.lap_objective,
            "pairs": _jsonable(report.matching.pairs),
            **_jsonable(gain.as_dict()),
        }
        fh.write(json.dumps(summary, sort_keys=True) + "\n")
    finally:
        if own:
            fh.close()


def read_report(src) -> tuple[list[dict], dict]:
    text = Path(src).read_text() if isinstance(src, (str, Path)) else src.read()
    ues, summary = [], None
    for line in io.StringIO(text):
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.pop("type") == "ue":
            ues.append(rec)
        else:
            summary = rec
    return ues, summary
