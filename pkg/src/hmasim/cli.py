"""Command-line entry point: ``hmasim`` / ``python -m hmasim``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .experiment import (
    RunSpec,
    TrialError,
    emit_results,
    format_shares,
    format_table,
    parse_duplex,
    parse_schemes,
    run_monte_carlo,
    write_fig3,
    write_relaxation,
    write_trial_log,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one-line diagnostics instead of usage dumps
        raise _UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hmasim", description="Monte Carlo gains of hybrid multiple access over OMA.")
    p.add_argument("--config", type=Path, help="TOML scenario file (defaults are used when omitted)")
    p.add_argument("--ues", type=_int_list, default=[10, 50, 100], help="comma-separated UE counts, ascending")
    p.add_argument("--schemes", default="oma,noma,noma+thr,noma+thr+twr,hma", help="comma-separated scheme rows")
    p.add_argument("--duplex", default="hd,fd", help="comma-separated duplex modes (hd, fd)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=None, help="base seed (default: the config's seed)")
    p.add_argument("--out", type=Path, default=Path("results.csv"))
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--oracle-check", type=int, metavar="MAXM", help="also solve M <= MAXM exactly and report the gap")
    p.add_argument("--fig3-shares", action="store_true", help="print and write per-topology shares/contributions")
    p.add_argument("--trial-log", type=Path, help="write per-trial gains to this CSV")
    p.add_argument("--backend", choices=("cython", "python"), help="force an assignment backend")
    return p


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}_{suffix}.csv")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        base = load_config(args.config) if args.config else ScenarioConfig()
        spec = RunSpec(
            base=base,
            ue_counts=tuple(args.ues),
            scheme_rows=parse_schemes(args.schemes.split(",")),
            duplex_modes=parse_duplex(args.duplex.split(",")),
            trials=args.trials,
            seed0=base.rng_seed if args.seed is None else args.seed,
        )
        table = run_monte_carlo(spec, oracle_max_m=args.oracle_check, backend=args.backend)
        emit_results(table, args.format, args.out)
        if args.trial_log:
            write_trial_log(table, args.trial_log)
        print(format_table(table))
        if table.has_oracle:
            dist = write_relaxation(table, _sidecar(args.out, "relaxation"))
            print(f"relaxation distribution: {dist}")
        if args.fig3_shares:
            print(format_shares(table))
            print(f"shares: {write_fig3(table, _sidecar(args.out, 'fig3'))}")
        print(f"wrote {args.out}")
        return 0
    except _UsageError as exc:
        print(f"hmasim: usage error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, TrialError, OSError, ValueError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"hmasim: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
