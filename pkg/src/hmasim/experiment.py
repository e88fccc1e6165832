"""Monte Carlo sweep over UE counts, scheme rows and duplex modes.

One channel realisation is drawn per (M, trial) and reused by every scheme
row and duplex mode, so comparisons between rows are paired. The fitness
tensor is built once per (M, trial, duplex) with all topologies and each
scheme row solves a restriction of it.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assignment import brute_force_matching, BRUTE_MATCHING_MAX
from .channel import compute_channel_state, generate_deployment
from .config import ALL_TOPOLOGIES, ConfigError, Duplex, ScenarioConfig, TopologyKind
from .engine import build_fitness_tensor, evaluate, reduce_topologies, solve_hma

T = TopologyKind
SCHEME_ROWS: dict[str, tuple[TopologyKind, ...]] = {
    "oma": (T.OMA,),
    "noma": (T.OMA, T.NOMA),
    "noma+thr": (T.OMA, T.NOMA, T.THR),
    "noma+thr+twr": (T.OMA, T.NOMA, T.THR, T.TWR_DF),
    "hma": ALL_TOPOLOGIES,
}

MASK64 = (1 << 64) - 1


def mix64(x: int) -> int:
    """SplitMix64 finaliser (Steele, Lea and Flood constants)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed0: int, m: int, trial: int) -> int:
    """Channel seed of trial ``trial`` at ``m`` UEs: ``seed0 XOR mix64(mix64(m << 32 | trial))``."""
    return (seed0 ^ mix64(mix64(((m & 0xFFFFFFFF) << 32) | (trial & 0xFFFFFFFF)))) & MASK64


def parse_schemes(tokens) -> tuple[str, ...]:
    out = []
    for tok in tokens:
        name = tok.strip().lower()
        if name not in SCHEME_ROWS:
            raise ConfigError(f"unknown scheme {tok.strip()!r} (expected one of {', '.join(SCHEME_ROWS)})")
        if name not in out:
            out.append(name)
    return tuple(out)


def parse_duplex(tokens) -> tuple[Duplex, ...]:
    out = []
    for tok in tokens:
        try:
            d = Duplex(tok.strip().upper())
        except ValueError:
            raise ConfigError(f"unknown duplex mode {tok.strip()!r} (expected hd or fd)") from None
        if d not in out:
            out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class RunSpec:
    base: ScenarioConfig
    ue_counts: tuple[int, ...]
    scheme_rows: tuple[str, ...] = tuple(SCHEME_ROWS)
    duplex_modes: tuple[Duplex, ...] = (Duplex.HD, Duplex.FD)
    trials: int = 100
    seed0: int = 42

    def __post_init__(self):
        object.__setattr__(self, "ue_counts", tuple(int(m) for m in self.ue_counts))
        object.__setattr__(self, "scheme_rows", parse_schemes(self.scheme_rows))
        object.__setattr__(self, "duplex_modes", parse_duplex(str(getattr(d, "value", d)) for d in self.duplex_modes))
        self.validate()

    def validate(self) -> None:
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials: must be an integer >= 1, got {self.trials!r}")
        if not self.ue_counts:
            raise ConfigError("ue_counts: must not be empty")
        if any(m < 1 for m in self.ue_counts):
            raise ConfigError(f"ue_counts: every M must be >= 1, got {list(self.ue_counts)}")
        if any(b <= a for a, b in zip(self.ue_counts, self.ue_counts[1:])):
            raise ConfigError(f"ue_counts: must be strictly ascending, got {list(self.ue_counts)}")
        if not self.scheme_rows:
            raise ConfigError("scheme_rows: must not be empty")
        if not self.duplex_modes:
            raise ConfigError("duplex_modes: must not be empty")
        if not (0 <= int(self.seed0) <= MASK64):
            raise ConfigError("seed0: must be a 64-bit unsigned integer")
        for name in self.scheme_rows:
            if T.OMA not in SCHEME_ROWS[name]:
                raise ConfigError(f"scheme {name!r} must include OMA")


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    duplex: str
    num_ues: int
    trial: int
    seed: int
    digest: str
    gain_pct: float
    shares: dict
    contrib: dict
    objective: float
    exact_objective: float | None = None

    @property
    def relaxation_ratio(self) -> float | None:
        if self.exact_objective is None:
            return None
        return self.objective / self.exact_objective


@dataclass(frozen=True)
class Cell:
    mean_gain_pct: float
    std_gain_pct: float
    trials: int
    shares: dict
    contrib: dict
    relax_gap_mean: float | None = None


@dataclass
class SummaryTable:
    spec: RunSpec
    cells: dict = field(default_factory=dict)  # (scheme, duplex, M) -> Cell
    log: list = field(default_factory=list)  # TrialRecord, sorted

    def keys(self):
        """Cell keys in output order: scheme row, then duplex, then M."""
        for s in self.spec.scheme_rows:
            for d in self.spec.duplex_modes:
                for m in self.spec.ue_counts:
                    yield (s, d.value, m)

    def records(self, scheme, duplex, m) -> list[TrialRecord]:
        duplex = getattr(duplex, "value", duplex)
        return [r for r in self.log if (r.scheme, r.duplex, r.num_ues) == (scheme, duplex, m)]

    def gains(self, scheme, duplex, m) -> np.ndarray:
        return np.array([r.gain_pct for r in self.records(scheme, duplex, m)])

    @property
    def has_oracle(self) -> bool:
        return any(r.exact_objective is not None for r in self.log)


def _aggregate(recs: list[TrialRecord]) -> Cell:
    n = len(recs)
    g = [r.gain_pct for r in recs]
    mean = math.fsum(g) / n
    std = math.sqrt(math.fsum((x - mean) ** 2 for x in g) / (n - 1)) if n > 1 else 0.0
    shares = {t.value: math.fsum(r.shares[t.value] for r in recs) / n for t in ALL_TOPOLOGIES}
    contrib = {t.value: math.fsum(r.contrib[t.value] for r in recs) / n for t in ALL_TOPOLOGIES}
    ratios = [r.relaxation_ratio for r in recs if r.exact_objective is not None]
    relax = math.fsum(ratios) / len(ratios) if ratios else None
    return Cell(mean, std, n, shares, contrib, relax)


class TrialError(RuntimeError):
    pass


def run_monte_carlo(spec: RunSpec, *, oracle_max_m: int | None = None, backend: str | None = None) -> SummaryTable:
    """Run every (M, trial, duplex, scheme) combination and aggregate per cell.

    With ``oracle_max_m`` set, instances with M <= oracle_max_m are also
    solved exactly by :func:`brute_force_matching` to measure the
    relaxation gap of the LAP plus repair pipeline.
    """
    spec.validate()
    if oracle_max_m is not None and oracle_max_m > BRUTE_MATCHING_MAX:
        raise ConfigError(f"oracle-check: maxM must be <= {BRUTE_MATCHING_MAX}, got {oracle_max_m}")
    table = SummaryTable(spec)
    for m in spec.ue_counts:
        cfg_m = spec.base.with_ues(m)
        for t in range(spec.trials):
            seed = trial_seed(spec.seed0, m, t)
            dep = generate_deployment(cfg_m, seed=seed)
            chan = compute_channel_state(dep, cfg_m)
            digest = chan.digest()
            for duplex in spec.duplex_modes:
                cfg_d = replace(cfg_m, duplex=duplex, topology_set=ALL_TOPOLOGIES)
                try:
                    full = build_fitness_tensor(chan, cfg_d)
                except Exception as exc:
                    raise TrialError(f"M={m} trial={t} duplex={duplex.value}: {exc}") from exc
                for scheme in spec.scheme_rows:
                    try:
                        rec = _run_one(full, chan, cfg_d, scheme, m, t, seed, digest, oracle_max_m, backend)
                    except Exception as exc:
                        raise TrialError(f"M={m} trial={t} duplex={duplex.value} scheme={scheme}: {exc}") from exc
                    table.log.append(rec)
    table.log.sort(key=lambda r: (r.scheme, r.duplex, r.num_ues, r.trial))
    for key in table.keys():
        recs = table.records(*key)
        table.cells[key] = _aggregate(recs)
    return table


def _run_one(full, chan, cfg_d, scheme, m, t, seed, digest, oracle_max_m, backend) -> TrialRecord:
    topo = SCHEME_ROWS[scheme]
    tensor = full.restrict(topo)
    cfg = replace(cfg_d, topology_set=topo)
    # paired-seed discipline: every row sees the same realisation
    if chan.digest() != digest:
        raise TrialError("channel state changed between scheme rows")
    report = solve_hma(tensor, backend=backend)
    gain = evaluate(report, tensor, cfg)
    exact = None
    if oracle_max_m is not None and m <= oracle_max_m:
        pair_best, _ = reduce_topologies(tensor)
        exact = brute_force_matching(pair_best, pair_best.diagonal()).objective
    return TrialRecord(
        scheme=scheme,
        duplex=cfg_d.duplex.value,
        num_ues=m,
        trial=t,
        seed=seed,
        digest=digest,
        gain_pct=gain.gain_pct,
        shares={k.value: v for k, v in gain.topology_shares.items()},
        contrib={k.value: v for k, v in gain.topology_gain_contrib.items()},
        objective=report.objective,
        exact_objective=exact,
    )


def csv_header(with_relax: bool = False) -> list[str]:
    cols = ["scheme", "duplex", "num_ues", "mean_gain_pct", "std_gain_pct", "trials"]
    cols += [f"share_{t.value}" for t in ALL_TOPOLOGIES]
    cols += [f"contrib_{t.value}" for t in ALL_TOPOLOGIES]
    if with_relax:
        cols.append("relax_gap_mean")
    return cols


def _g6(x) -> str:
    return f"{x:.6g}"


def _row(key, cell: Cell, with_relax: bool) -> dict:
    scheme, duplex, m = key
    row = {
        "scheme": scheme,
        "duplex": duplex.lower(),
        "num_ues": m,
        "mean_gain_pct": _g6(cell.mean_gain_pct),
        "std_gain_pct": _g6(cell.std_gain_pct),
        "trials": cell.trials,
    }
    for t in ALL_TOPOLOGIES:
        row[f"share_{t.value}"] = _g6(cell.shares[t.value])
    for t in ALL_TOPOLOGIES:
        row[f"contrib_{t.value}"] = _g6(cell.contrib[t.value])
    if with_relax:
        row["relax_gap_mean"] = "" if cell.relax_gap_mean is None else _g6(cell.relax_gap_mean)
    return row


def emit_results(table: SummaryTable, fmt: str, path) -> Path:
    """Write one row per cell as CSV or JSON Lines (same fields, same order)."""
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"unknown output format {fmt!r} (expected csv or jsonl)")
    path = Path(path)
    with_relax = table.has_oracle
    header = csv_header(with_relax)
    rows = [_row(k, table.cells[k], with_relax) for k in table.keys()]
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        else:
            for row in rows:
                fh.write(json.dumps({k: row[k] for k in header}) + "\n")
    return path


def write_trial_log(table: SummaryTable, path) -> Path:
    """Per-trial gains (full precision) for re-aggregation and inspection."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "duplex", "num_ues", "trial", "seed", "gain_pct", "objective", "exact_objective"])
        for r in table.log:
            exact = "" if r.exact_objective is None else repr(r.exact_objective)
            w.writerow([r.scheme, r.duplex.lower(), r.num_ues, r.trial, r.seed, repr(r.gain_pct), repr(r.objective), exact])
    return path


def write_relaxation(table: SummaryTable, path) -> Path:
    """Distribution of repaired / exact objective, one line per oracle-checked instance."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "duplex", "num_ues", "trial", "ratio"])
        for r in table.log:
            if r.exact_objective is not None:
                w.writerow([r.scheme, r.duplex.lower(), r.num_ues, r.trial, repr(r.relaxation_ratio)])
    return path


def write_fig3(table: SummaryTable, path) -> Path:
    """Long-form per-topology UE share and gain contribution per cell."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "duplex", "num_ues", "topology", "ue_share", "gain_contrib"])
        for key in table.keys():
            cell = table.cells[key]
            for t in ALL_TOPOLOGIES:
                w.writerow([key[0], key[1].lower(), key[2], t.value, _g6(cell.shares[t.value]), _g6(cell.contrib[t.value])])
    return path


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def format_table(table: SummaryTable) -> str:
    """Mean gain per scheme row (rows) and UE count (columns)."""
    ms = table.spec.ue_counts
    label_w = max(len(f"{s} ({d.value})") for s in table.spec.scheme_rows for d in table.spec.duplex_modes)
    label_w = max(label_w, len("# UEs"))
    lines = ["# UEs".ljust(label_w) + "".join(f"{m:>10d}" for m in ms)]
    for d in table.spec.duplex_modes:
        for s in table.spec.scheme_rows:
            cells = "".join(f"{table.cells[(s, d.value, m)].mean_gain_pct:>10.1f}" for m in ms)
            lines.append(f"{s} ({d.value})".ljust(label_w) + cells)
    if table.has_oracle:
        parts = []
        for key in table.keys():
            c = table.cells[key]
            if c.relax_gap_mean is not None:
                parts.append(f"{key[0]}/{key[1]}/M={key[2]}: {c.relax_gap_mean:.4f}")
        lines.append("relaxation gap (repaired/exact): " + ", ".join(parts))
    return "\n".join(lines)


def format_shares(table: SummaryTable) -> str:
    head = "cell".ljust(28) + "".join(f"{t.value:>18s}" for t in ALL_TOPOLOGIES)
    lines = [head]
    for key in table.keys():
        c = table.cells[key]
        vals = "".join(f"{100 * c.shares[t.value]:>8.1f}%/{100 * c.contrib[t.value]:>7.1f}%" for t in ALL_TOPOLOGIES)
        lines.append(f"{key[0]} {key[1]} M={key[2]}".ljust(28) + vals)
    return "\n".join(lines)
