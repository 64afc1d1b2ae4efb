from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oudasim.budget import (
    CropCounts,
    budget_memory,
    budget_standard,
    clamp_to_available,
    round_conserving,
    subset_size,
)


def test_subset_size_examples():
    assert subset_size(20, 702) == 14040
    assert subset_size(1, 1) == 1
    assert subset_size(25, 702) == 17550
    with pytest.raises(ValueError):
        subset_size(0, 5)


def test_standard_uniform_2x2():
    b = budget_standard(CropCounts.from_nested([[25, 25], [25, 25]]), 40)
    assert b.b.tolist() == [[10, 10], [10, 10]]
    np.testing.assert_allclose(b.fractional, 10.0)


def test_standard_single_cell_gets_everything():
    assert budget_standard(CropCounts.from_nested([[37]]), 13).b.tolist() == [[13]]


def test_standard_already_integral():
    b = budget_standard(CropCounts.from_nested([[30, 10], [40, 20]]), 10)
    np.testing.assert_allclose(b.fractional, [[3, 1], [4, 2]])
    assert b.b.tolist() == [[3, 1], [4, 2]]


def test_memory_uniform_2x2():
    b = budget_memory(CropCounts.from_nested([[25, 25], [25, 25]]), 40)
    assert b.b.tolist() == [[10, 20], [10, 20]]
    assert b.b[:, -1].sum() == 40


def test_memory_single_segment_equals_standard():
    counts = CropCounts.from_nested([[3], [5], [9]])
    assert budget_memory(counts, 11).b.tolist() == budget_standard(counts, 11).b.tolist()


def test_zero_total_rejected():
    with pytest.raises(ValueError):
        budget_standard(CropCounts.from_nested([[0, 0]]), 5)
    with pytest.raises(ValueError):
        budget_memory(CropCounts.from_nested([[0, 0]]), 5)


def test_round_conserving_examples():
    assert round_conserving([3.0, 1.0], 4).tolist() == [3, 1]
    # Largest remainder: floors (1, 1, 1) leave one unit; the .5 tie goes to index 0.
    assert round_conserving([1.5, 1.5, 1.0], 4).tolist() == [2, 1, 1]


@given(st.lists(st.floats(0, 1000, allow_nan=False), min_size=1, max_size=20))
def test_round_conserving_sum_and_error_bound(vals):
    f = np.array(vals)
    target = int(round(f.sum()))
    # Only meaningful targets: scale so the sum is exactly integral.
    if f.sum() == 0:
        return
    f = f * (target / f.sum()) if target > 0 else f * 0
    out = round_conserving(f, target)
    assert out.sum() == target
    assert np.all(np.abs(out - f) < 1 + 1e-9)


counts_st = arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 6)),
                   elements=st.integers(0, 500)).filter(lambda a: a.sum() > 0)


@settings(max_examples=200)
@given(counts_st, st.integers(0, 5000))
def test_budget_invariants(n, k):
    counts = CropCounts(n)
    std = budget_standard(counts, k)
    assert std.b.sum() == k
    assert np.all(std.b[n == 0] == 0)
    assert np.all(np.abs(std.b - std.fractional) < 1)
    mem = budget_memory(counts, k)
    assert mem.b[:, -1].sum() == k
    assert np.all(np.diff(mem.b, axis=1) >= 0)
    np.testing.assert_allclose(mem.fractional, np.cumsum(std.fractional, axis=1))


@given(counts_st, st.integers(0, 2000), st.integers(2, 9))
def test_scale_invariance(n, k, scale):
    a = budget_standard(CropCounts(n), k)
    b = budget_standard(CropCounts(n * scale), k)
    assert a.b.tolist() == b.b.tolist()


def test_causal_mode_uses_running_totals():
    counts = CropCounts.from_nested([[10, 0, 30], [0, 20, 10]])
    b = budget_standard(counts, 30, mode="causal")
    # Segment targets 10 each; at t=0 only camera 0 has data, at t=1 running
    # totals are (10, 20), at t=2 (40, 30).
    np.testing.assert_allclose(b.fractional[:, 0], [10, 0])
    np.testing.assert_allclose(b.fractional[:, 1], [10 / 3, 20 / 3])
    np.testing.assert_allclose(b.fractional[:, 2], [40 / 7, 30 / 7])
    assert b.b.sum() == 30
    assert b.b[:, 1].sum() == b.b[:, 2].sum() == 10
    mem = budget_memory(counts, 30, mode="causal")
    assert mem.b[:, -1].sum() == 30
    assert np.all(np.diff(mem.b, axis=1) >= 0)


def test_clamp_examples():
    r = clamp_to_available(np.array([[10]]), np.array([[4]]))
    assert r.b.tolist() == [[4]] and r.shortfall.tolist() == [[6]]
    b = np.array([[3, 2], [1, 5]])
    r = clamp_to_available(b, b + 1)
    assert r.b.tolist() == b.tolist() and r.shortfall.sum() == 0


def test_clamp_redistribute_proportional_to_slack():
    # Column: budgets (10, 5, 5), available (4, 10, 8): shortfall 6 on camera 0,
    # slack (0, 5, 3). Shares 6*5/8 = 3.75 and 6*3/8 = 2.25 round to 4 and 2.
    b = np.array([[10], [5], [5]])
    avail = np.array([[4], [10], [8]])
    r = clamp_to_available(b, avail, redistribute=True)
    assert r.redistributed[:, 0].tolist() == [0, 4, 2]
    assert r.b[:, 0].tolist() == [4, 9, 7]
    assert r.shortfall.sum() == 0
    assert np.all(r.b <= avail)


def test_clamp_redistribute_limited_by_slack():
    b = np.array([[10], [5]])
    avail = np.array([[4], [7]])
    r = clamp_to_available(b, avail, redistribute=True)
    assert r.b[:, 0].tolist() == [4, 7]
    assert r.shortfall.sum() == 4
