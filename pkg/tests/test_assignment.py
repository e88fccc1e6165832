import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hmasim import assignment
from hmasim.assignment import (
    FORBIDDEN,
    CostMatrix,
    InfeasibleAssignment,
    brute_force_lap,
    brute_force_matching,
    permutation_cycles,
    repair_to_matching,
    solve_lap_jv,
)

BACKENDS = ["python"] + (["cython"] if assignment.BACKEND == "cython" else [])


def shapes(max_r=6, max_c=8):
    return st.integers(1, max_r).flatmap(lambda r: st.tuples(st.just(r), st.integers(r, max_c)))


def matrices(max_r=6, max_c=8):
    return shapes(max_r, max_c).flatmap(
        lambda s: arrays(np.float64, s, elements=st.floats(-50, 50, allow_nan=False, width=32))
    )


# ---- worked examples ----------------------------------------------------------


@pytest.mark.parametrize("backend", BACKENDS)
def test_two_by_two(backend):
    res = solve_lap_jv([[1, 2], [2, 1]], "maximize", backend=backend)
    assert res.row_to_col == (1, 0) and res.objective == 4


def test_diagonal_dominant():
    d = np.ones((5, 5))
    np.fill_diagonal(d, 10.0)
    res = solve_lap_jv(d)
    assert res.row_to_col == tuple(range(5)) and res.objective == 50


def test_brute_examples():
    assert brute_force_lap([[3.5]]).row_to_col == (0,)
    assert brute_force_lap([[3.5]]).objective == 3.5
    res = brute_force_lap([[0, 5, 1], [5, 0, 1]], "maximize")
    assert res.row_to_col == (1, 0) and res.objective == 10


def test_rectangular_minimize():
    cost = [[4, 1, 3], [2, 0, 5]]
    res = solve_lap_jv(cost, "minimize")
    assert res.objective == brute_force_lap(cost, "minimize").objective == 3


def test_empty():
    assert solve_lap_jv(np.zeros((0, 3))).row_to_col == ()


# ---- oracle agreement ---------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(a=matrices(), sense=st.sampled_from(["maximize", "minimize"]))
def test_jv_matches_brute_force(a, sense):
    assert solve_lap_jv(a, sense).objective == brute_force_lap(a, sense).objective


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_identical():
    rng = np.random.default_rng(99)
    for _ in range(300):
        r = int(rng.integers(1, 30))
        a = rng.integers(0, 5, size=(r, int(rng.integers(r, 40)))).astype(float)
        mask = rng.random(a.shape) < 0.2
        a[mask] = FORBIDDEN
        try:
            py = solve_lap_jv(a, backend="python")
        except InfeasibleAssignment as exc:
            with pytest.raises(InfeasibleAssignment) as other:
                solve_lap_jv(a, backend="cython")
            assert other.value.row == exc.row
            continue
        assert solve_lap_jv(a, backend="cython") == py


def test_affine_shift_removed_from_objective():
    a = np.array([[1e6 + 1, 1e6], [1e6, 1e6 + 3]])
    assert solve_lap_jv(a).objective == 2e6 + 4


# ---- FORBIDDEN ----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(a=matrices(5, 7), data=st.data(), sense=st.sampled_from(["maximize", "minimize"]))
def test_forbidden_never_selected(a, data, sense):
    mask = data.draw(arrays(bool, a.shape))
    a = a.copy()
    a[mask] = FORBIDDEN
    try:
        want = brute_force_lap(a, sense)
    except InfeasibleAssignment:
        with pytest.raises(InfeasibleAssignment):
            solve_lap_jv(a, sense)
        return
    got = solve_lap_jv(a, sense)
    assert len(set(got.row_to_col)) == len(got.row_to_col)
    assert not any(np.isnan(a[i, j]) for i, j in enumerate(got.row_to_col))
    assert got.objective == want.objective


def test_forbidden_row_reported():
    with pytest.raises(InfeasibleAssignment) as exc:
        CostMatrix([[1.0, 2.0], [FORBIDDEN, FORBIDDEN]])
    assert exc.value.row == 1


def test_hall_violation_reports_witness():
    a = [[1.0, FORBIDDEN, FORBIDDEN], [2.0, FORBIDDEN, FORBIDDEN], [1.0, 1.0, 1.0]]
    with pytest.raises(InfeasibleAssignment) as exc:
        solve_lap_jv(a)
    assert exc.value.row == 1


@pytest.mark.parametrize(
    "bad, msg", [([[1.0, np.inf]], "finite"), ([[1.0], [2.0]], "rows <= cols"), (np.ones(3), "2-D")]
)
def test_cost_matrix_validation(bad, msg):
    with pytest.raises(ValueError, match=msg):
        CostMatrix(bad)


def test_bad_sense():
    with pytest.raises(ValueError, match="sense"):
        CostMatrix([[1.0]], "best")


# ---- scale invariance ---------------------------------------------------------


def test_scale_invariance_on_unique_optima():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(200):
        a = rng.random((5, 5))
        totals = a[np.arange(5), assignment._injective_maps(5, 5)].sum(axis=1)
        top2 = np.sort(totals)[-2:]
        if top2[1] - top2[0] < 1e-9:
            continue
        base = solve_lap_jv(a).row_to_col
        for c in (1e-3, 0.5, 7.0, 1e4):
            assert solve_lap_jv(a * c).row_to_col == base
        checked += 1
    assert checked > 150


# ---- trace --------------------------------------------------------------------


def test_trace_lines():
    buf = io.StringIO()
    solve_lap_jv([[4, 1, 3], [2, 0, 5], [3, 2, 2]], "minimize", trace=buf)
    lines = [json.loads(x) for x in buf.getvalue().splitlines()]
    assert [x["row"] for x in lines] == [0, 1, 2]
    assert all({"sink", "augmenting_path", "u", "v"} <= set(x) for x in lines)


# ---- repair -------------------------------------------------------------------


def test_repair_identity_all_solos():
    res = repair_to_matching(range(4), np.ones((4, 4)), np.ones(4))
    assert res.pairs == () and res.solos == (0, 1, 2, 3)


def test_repair_involution_kept():
    pf = np.full((4, 4), 5.0)
    res = repair_to_matching([1, 0, 3, 2], pf, np.ones(4))
    assert res.pairs == ((0, 1), (2, 3)) and res.objective == 10


def test_repair_three_cycle():
    pf = np.zeros((3, 3))
    pf[0, 1] = pf[1, 0] = 5
    pf[1, 2] = pf[2, 1] = 4
    pf[0, 2] = pf[2, 0] = 3
    res = repair_to_matching([1, 2, 0], pf, np.ones(3))
    assert res.pairs == ((0, 1),) and res.solos == (2,) and res.objective == 6


def test_repair_skips_unprofitable_pair():
    pf = np.full((2, 2), 1.5)
    res = repair_to_matching([1, 0], pf, np.ones(2))
    assert res.pairs == () and res.objective == 2


def test_repair_long_cycle_cascades():
    m = 6
    pf = np.full((m, m), 3.0)
    res = repair_to_matching([1, 2, 3, 4, 5, 0], pf, np.ones(m))
    assert len(res.pairs) == 3 and res.solos == ()


def test_repair_rejects_non_permutation():
    with pytest.raises(ValueError):
        repair_to_matching([0, 0], np.ones((2, 2)), np.ones(2))


def test_cycles():
    assert permutation_cycles([1, 2, 0, 3]) == [[0, 1, 2], [3]]


def _random_instance(rng, m):
    solo = rng.uniform(1, 5, m)
    pf = rng.uniform(0, 12, (m, m))
    pf = (pf + pf.T) / 2
    np.fill_diagonal(pf, solo)
    return pf, solo


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 8), data=st.data())
def test_repair_sound_and_below_exact(seed, m, data):
    rng = np.random.default_rng(seed)
    pf, solo = _random_instance(rng, m)
    perm = data.draw(st.permutations(range(m)))
    res = repair_to_matching(perm, pf, solo)
    used = [i for p in res.pairs for i in p] + list(res.solos)
    assert sorted(used) == list(range(m))
    assert res.objective <= brute_force_matching(pf, solo).objective + 1e-12


# ---- exact matching oracle ----------------------------------------------------


def test_matching_examples():
    assert brute_force_matching(np.ones((1, 1)), [1.0]).solos == (0,)
    pf = np.array([[1, 3], [3, 1]], dtype=float)
    assert brute_force_matching(pf, [1, 1]).pairs == ((0, 1),)
    pf[0, 1] = pf[1, 0] = 2.0
    assert brute_force_matching(pf, [1, 1]).pairs == ()


def test_matching_respects_forbidden():
    pf = np.array([[1, FORBIDDEN], [FORBIDDEN, 1]])
    assert brute_force_matching(pf, [1, 1]).pairs == ()


def test_matching_guard():
    with pytest.raises(ValueError, match="guard"):
        brute_force_matching(np.ones((13, 13)), np.ones(13))


def test_lap_guard():
    with pytest.raises(ValueError, match="guard"):
        brute_force_lap(np.ones((9, 9)))


def test_relaxation_gap_random_hma_shaped():
    # LAP on halved pair weights, then repair, against the exact matching
    from hmasim.engine import lap_weights

    rng = np.random.default_rng(1)
    ratios = []
    for _ in range(1000):
        pf, solo = _random_instance(rng, 8)
        res = repair_to_matching(solve_lap_jv(lap_weights(pf)), pf, solo)
        ratios.append(res.objective / brute_force_matching(pf, solo).objective)
    assert min(ratios) <= 1.0 + 1e-12
    assert np.mean(ratios) >= 0.95
