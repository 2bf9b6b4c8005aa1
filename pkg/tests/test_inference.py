import json
import warnings
from itertools import product

import numpy as np
import pytest

import errstat.inference as inf
from errstat.dataset import ErrorMatrix
from errstat.estimators import StatKind, evaluate
from errstat.inference import (
    BootstrapPlan,
    HIGHER_IS_RANK1,
    RankMatrix,
    bootstrap_se,
    compare_pair,
    diff_sample,
    generalized_p,
    index_matrix,
    p_inv,
    p_t_value,
    p_unc_value,
    paired_resample,
    rank_probability_matrix,
    rank_summary,
    replicate_stats,
    resample_indices,
)

MUE = StatKind.mue()
MSE = StatKind.mse()


def _em(cols, names=None):
    cols = np.column_stack(cols)
    names = names or [f"M{j + 1}" for j in range(cols.shape[1])]
    return ErrorMatrix(errors=cols, method_names=names)


# ------------------------------------------------------------------- plan

def test_plan_validation():
    with pytest.raises(ValueError):
        BootstrapPlan(B=99)
    with pytest.raises(ValueError):
        BootstrapPlan(n_prime=1)
    with pytest.raises(ValueError):
        BootstrapPlan(workers=0)
    plan = BootstrapPlan(B=100, n_prime=5)
    with pytest.raises(ValueError):
        plan.resample_size(4)
    assert plan.resample_size(9) == 5
    assert BootstrapPlan().resample_size(7) == 7


# ------------------------------------------------------------------ streams

def test_replicate_streams_deterministic_and_distinct():
    a = resample_indices(BootstrapPlan(seed=42), 7, 100)
    b = resample_indices(BootstrapPlan(seed=42), 7, 100)
    c = resample_indices(BootstrapPlan(seed=42), 8, 100)
    d = resample_indices(BootstrapPlan(seed=43), 7, 100)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_index_matrix_rows_are_replicate_draws():
    plan = BootstrapPlan(B=120, seed=9)
    idx = index_matrix(plan, 33)
    assert idx.shape == (120, 33)
    for j in (0, 57, 119):
        np.testing.assert_array_equal(idx[j], resample_indices(plan, j, 33))


def test_index_matrix_worker_count_is_invisible():
    base = index_matrix(BootstrapPlan(B=500, seed=4), 20)
    for workers in (2, 3, 8):
        np.testing.assert_array_equal(
            base, index_matrix(BootstrapPlan(B=500, seed=4, workers=workers), 20)
        )


def test_paired_resample_shares_indices_across_columns():
    e1 = np.arange(10.0)
    matrix = _em([e1, e1 + 100.0])
    out = paired_resample(matrix, BootstrapPlan(seed=5), 3)
    np.testing.assert_array_equal(out.errors[:, 1] - out.errors[:, 0], np.full(10, 100.0))
    again = paired_resample(matrix, BootstrapPlan(seed=5), 3)
    np.testing.assert_array_equal(out.errors, again.errors)


def test_paired_resample_single_row():
    matrix = ErrorMatrix(errors=np.array([[1.5, -2.0]]), method_names=["A", "B"])
    out = paired_resample(matrix, BootstrapPlan(seed=1), 0)
    np.testing.assert_array_equal(out.errors, [[1.5, -2.0]])


def test_paired_resample_carries_uncertainty_rows():
    matrix = ErrorMatrix(
        errors=np.arange(8.0).reshape(4, 2),
        method_names=["A", "B"],
        error_uncertainty=np.array([1.0, 2.0, 3.0, 4.0]),
        system_ids=["a", "b", "c", "d"],
    )
    out = paired_resample(matrix, BootstrapPlan(seed=2), 0)
    np.testing.assert_array_equal(out.error_uncertainty, 1.0 + out.errors[:, 0] / 2.0)


def test_one_index_draw_shared_by_all_columns(monkeypatch):
    calls = []
    original = inf.resample_indices

    def spy(plan, j, n):
        calls.append(j)
        return original(plan, j, n)

    monkeypatch.setattr(inf, "resample_indices", spy)
    replicate_stats(np.random.default_rng(0).normal(size=(12, 4)), MUE, BootstrapPlan(B=150, seed=3))
    assert len(calls) == 150  # one draw per replicate, not per column
    assert sorted(calls) == list(range(150))


# -------------------------------------------------------------- bootstrap SE

def test_bootstrap_se_constant_vector_is_zero():
    assert bootstrap_se(np.full(20, 1.25), MUE, BootstrapPlan(B=200, seed=1)) == 0.0


def test_bootstrap_se_mse_tracks_analytic_formula():
    # Oracle: u(mean) = s_e / sqrt(N)
    rng = np.random.default_rng(77)
    hits = 0
    trials = 30
    for t in range(trials):
        e = rng.normal(size=100)
        analytic = e.std(ddof=1) / 10.0
        se = bootstrap_se(e, MSE, BootstrapPlan(B=1000, seed=t))
        if abs(se - analytic) <= 0.25 * analytic:
            hits += 1
    assert hits >= int(0.95 * trials)


def test_bootstrap_se_self_consistent_in_B():
    e = np.random.default_rng(11).normal(size=60)
    a = bootstrap_se(e, MUE, BootstrapPlan(B=1000, seed=5))
    b = bootstrap_se(e, MUE, BootstrapPlan(B=4000, seed=5))
    assert abs(a - b) <= 0.15 * b


# -------------------------------------------------------------- diff sample

def test_diff_sample_identical_columns():
    e = np.random.default_rng(2).normal(size=15)
    d = diff_sample(e, e, MUE, BootstrapPlan(B=300, seed=2))
    assert np.all(d == 0.0)


def test_diff_sample_dominated_pair():
    e1 = np.random.default_rng(3).uniform(0.01, 0.1, size=12)
    e2 = np.random.default_rng(4).uniform(10.0, 20.0, size=12)
    d = diff_sample(e1, e2, MUE, BootstrapPlan(B=300, seed=3))
    assert np.all(d < 0.0)


def test_diff_sample_mean_matches_exhaustive_enumeration():
    # All 27 equally likely paired resamples of an N=3 pair.
    e1 = np.array([0.3, -1.1, 0.7])
    e2 = np.array([0.9, 0.2, -0.4])
    exact = []
    for draw in product(range(3), repeat=3):
        idx = list(draw)
        exact.append(np.abs(e1[idx]).mean() - np.abs(e2[idx]).mean())
    exact = np.asarray(exact)
    B = 40_000
    d = diff_sample(e1, e2, MUE, BootstrapPlan(B=B, seed=6))
    three_sigma = 3.0 * exact.std() / np.sqrt(B)
    assert abs(d.mean() - exact.mean()) <= three_sigma


# ----------------------------------------------------------------- p-values

def test_p_t_examples():
    xi, p = p_t_value(1.0, 1.0, 0.5)
    assert xi == 0.0 and p == 1.0
    _, p = p_t_value(1.96, 0.0, 1.0)
    assert p == pytest.approx(0.05, abs=1e-3)
    _, p = p_t_value(3.0, 0.0, 1.0)
    assert p == pytest.approx(0.0026997960632602, rel=1e-10)  # 2(1 - Phi(3))
    with pytest.raises(ValueError, match="degenerate"):
        p_t_value(1.0, 2.0, 0.0)


def test_p_unc_examples():
    _, p = p_unc_value(1.96 * np.sqrt(2.0), 0.0, 1.0, 1.0)
    assert p == pytest.approx(0.05, abs=1e-3)
    _, p = p_unc_value(0.7, 0.7, 1.0, 2.0)
    assert p == 1.0
    with pytest.raises(ValueError):
        p_unc_value(1.0, 2.0, 0.0, 0.0)


def test_p_unc_overestimates_p_t_under_positive_correlation():
    s1, s2, u1, u2 = 1.0, 0.7, 0.2, 0.25
    u_diff = 0.1  # strong positive covariance
    assert u_diff < np.hypot(u1, u2)
    _, pt = p_t_value(s1, s2, u_diff)
    _, punc = p_unc_value(s1, s2, u1, u2)
    assert punc >= pt


def test_generalized_p_counting():
    assert generalized_p(np.zeros(200)) == 1.0
    assert generalized_p(-np.ones(200)) == 0.0
    d = np.concatenate([-np.ones(30), np.ones(60), np.zeros(10)])
    # p* = (30 + 5) / 100
    assert generalized_p(d) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        generalized_p(np.ones(99))


def test_p_inv_counting():
    assert p_inv(np.ones(100), 2.0, 1.0) == 0.0
    d = np.concatenate([np.ones(50), -np.ones(50)])
    assert p_inv(d, 2.0, 1.0) == 0.5
    assert p_inv(d, 1.0, 2.0) == 0.5
    # null differences are compensated, not counted as inversions
    d = np.concatenate([np.ones(60), np.zeros(20), -np.ones(20)])
    assert p_inv(d, 2.0, 1.0) == pytest.approx(0.2)
    assert p_inv(d, 1.0, 1.0) == 0.5


def test_p_inv_equals_half_p_g_without_ties():
    rng = np.random.default_rng(13)
    checked = primary = 0
    for trial in range(300):
        n = int(rng.integers(5, 60))
        e1 = rng.normal(scale=1.0, size=n)
        e2 = rng.normal(scale=1.4, size=n)
        s1, s2 = evaluate(MUE, e1), evaluate(MUE, e2)
        if s1 == s2:
            continue
        if s1 < s2:
            e1, e2, s1, s2 = e2, e1, s2, s1
        d = diff_sample(e1, e2, MUE, BootstrapPlan(B=200, seed=trial))
        if np.any(d == 0.0):
            continue
        checked += 1
        pg = generalized_p(d)
        pi = p_inv(d, s1, s2)
        if pi <= 0.5:
            assert pi == pg / 2.0  # exact, same counts on both sides
            primary += 1
        else:
            assert pi == pytest.approx(1.0 - pg / 2.0, abs=1e-15)
    assert checked >= 250
    assert primary >= 0.9 * checked


# ------------------------------------------------------------- compare_pair

def test_compare_pair_identical_columns():
    e = np.random.default_rng(19).normal(size=40)
    comp = compare_pair(_em([e, e]), 0, 1, MUE, BootstrapPlan(B=200, seed=7))
    assert comp.p_g == 1.0
    assert comp.p_inv == 0.5
    assert comp.degenerate
    assert comp.xi is None and comp.p_t is None
    assert comp.n_zero_diffs == 200
    assert comp.u_diff == 0.0


def test_compare_pair_dominated():
    rng = np.random.default_rng(23)
    e1 = rng.uniform(0.01, 0.05, size=40)
    e2 = rng.uniform(5.0, 6.0, size=40)
    comp = compare_pair(_em([e1, e2]), 0, 1, MUE, BootstrapPlan(B=300, seed=11))
    assert comp.p_g == 0.0
    assert comp.p_inv == 0.0
    assert comp.p_t < 1e-6
    assert not comp.degenerate


def test_compare_pair_deterministic_across_runs_and_workers():
    rng = np.random.default_rng(29)
    matrix = _em([rng.normal(size=50), rng.normal(size=50)])
    reports = [
        json.dumps(
            compare_pair(matrix, 0, 1, MUE, BootstrapPlan(B=400, seed=3, workers=w), ).to_dict(),
            sort_keys=True,
        )
        for w in (1, 1, 4)
    ]
    assert reports[0] == reports[1] == reports[2]


def test_compare_pair_rejects_self_comparison():
    e = np.random.default_rng(1).normal(size=30)
    with pytest.raises(ValueError):
        compare_pair(_em([e, -e]), 1, 1, MUE, BootstrapPlan(B=100, seed=1))


def test_small_n_warnings():
    rng = np.random.default_rng(31)
    matrix = _em([rng.normal(size=20), rng.normal(size=20)])
    with pytest.warns(UserWarning, match="small for MUE"):
        compare_pair(matrix, 0, 1, MUE, BootstrapPlan(B=100, seed=1))
    with pytest.warns(UserWarning, match="small for Q95"):
        compare_pair(matrix, 0, 1, StatKind.quantile(0.95), BootstrapPlan(B=100, seed=1))
    big = _em([rng.normal(size=60), rng.normal(size=60)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        compare_pair(big, 0, 1, StatKind.quantile(0.95), BootstrapPlan(B=100, seed=1))


# ------------------------------------------------------------------ ranking

def test_rank_matrix_disjoint_ranges_identity():
    rng = np.random.default_rng(37)
    cols = [rng.uniform(10**j, 2 * 10**j, size=12) for j in range(3)]
    rm = rank_probability_matrix(_em(cols), MUE, BootstrapPlan(B=200, seed=2))
    np.testing.assert_array_equal(rm.p, np.eye(3))
    for j, entry in enumerate(rm.summary):
        assert entry.mode == j + 1
        assert entry.mode_probability == 1.0
        assert entry.interval == (j + 1, j + 1)


def test_rank_matrix_tie_break_lowest_index():
    e = np.random.default_rng(41).normal(size=15)
    rm = rank_probability_matrix(_em([e, e]), MUE, BootstrapPlan(B=150, seed=3))
    np.testing.assert_array_equal(rm.p, [[1.0, 0.0], [0.0, 1.0]])


def test_rank_matrix_doubly_stochastic():
    rng = np.random.default_rng(43)
    cols = [rng.normal(size=25) for _ in range(5)]
    rm = rank_probability_matrix(_em(cols), MUE, BootstrapPlan(B=500, seed=4))
    np.testing.assert_allclose(rm.p.sum(axis=0), np.ones(5), atol=1e-12)
    np.testing.assert_allclose(rm.p.sum(axis=1), np.ones(5), atol=1e-12)


def test_rank_matrix_orientation_flip():
    rng = np.random.default_rng(47)
    cols = [rng.uniform(0.1, 0.2, size=30), rng.uniform(5.0, 6.0, size=30)]
    low = rank_probability_matrix(_em(cols), MUE, BootstrapPlan(B=150, seed=5))
    high = rank_probability_matrix(_em(cols), MUE, BootstrapPlan(B=150, seed=5), HIGHER_IS_RANK1)
    np.testing.assert_array_equal(low.p, [[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(high.p, [[0.0, 1.0], [1.0, 0.0]])


def test_rank_matrix_exhaustive_n2():
    # N=2, K=2: 4 equally likely paired resamples.
    e1 = np.array([0.2, 1.5])
    e2 = np.array([0.8, 0.9])
    exact = np.zeros((2, 2))
    for draw in product(range(2), repeat=2):
        idx = list(draw)
        s = [np.abs(e1[idx]).mean(), np.abs(e2[idx]).mean()]
        order = np.argsort(s, kind="stable")
        ranks = np.empty(2, dtype=int)
        ranks[order] = np.arange(2)
        for j in range(2):
            exact[j, ranks[j]] += 0.25
    B = 20_000
    rm = rank_probability_matrix(_em([e1, e2]), MUE, BootstrapPlan(B=B, seed=6))
    sigma = np.sqrt(exact * (1 - exact) / B)
    assert np.all(np.abs(rm.p - exact) <= 3 * sigma + 1e-12)


def test_rank_summary_shapes():
    rm = RankMatrix(
        p=np.array([[0.5, 0.4, 0.1], [0.3, 0.3, 0.4], [0.2, 0.3, 0.5]]),
        labels=["A", "B", "C"],
        stat=MUE,
        orientation="lower",
        summary=None,
    )
    entries = rank_summary(rm)
    assert entries[0].mode == 1
    assert entries[0].interval == (1, 2)

    uniform = RankMatrix(
        p=np.full((4, 4), 0.25), labels=list("ABCD"), stat=MUE, orientation="lower", summary=None
    )
    for entry in rank_summary(uniform):
        assert entry.interval == (1, 4)


def test_rank_matrix_nprime_subsampling():
    rng = np.random.default_rng(53)
    cols = [rng.normal(size=40), rng.normal(size=40) * 1.05]
    plan = BootstrapPlan(B=200, seed=9, n_prime=13)
    rm = rank_probability_matrix(_em(cols), MUE, plan)
    np.testing.assert_allclose(rm.p.sum(axis=1), np.ones(2), atol=1e-12)
    assert index_matrix(plan, 40).shape == (200, 13)
