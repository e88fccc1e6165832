import runpy
from pathlib import Path

import pytest

from hmasim import assignment

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_lap.py"


@pytest.mark.skipif(assignment.BACKEND != "cython", reason="compiled backend not built")
def test_benchmark_runs(tmp_path, capsys):
    main = runpy.run_path(str(BENCH))["main"]
    out = tmp_path / "bench.csv"
    assert main(["--sizes", "5,20", "--repeats", "1", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 2 * 2
    assert "speedup" in capsys.readouterr().out
