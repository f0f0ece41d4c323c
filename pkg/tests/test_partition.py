import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kregret import Dataset, normalize
from kregret.partition import (
    MINWIDTH_TOL, default_inc, equiwidth_breakpoints, find_breakpoints, minwidth_breakpoints,
    minwidth_feasible,
)


def reference_breakpoints(xs, t, inc, floor=1.0):
    """Literal linear-scan version: returns (lo, hi) index pairs and the final delta."""
    n = len(xs)
    cap = (xs[-1] - floor) / t
    per = math.ceil(n / t)
    delta = 0
    while True:
        out, lo = [], 0
        for _ in range(t):
            if lo >= n:
                break
            hi = lo
            while hi + 1 < n and hi + 1 - lo < per + delta and xs[hi + 1] - xs[lo] <= cap:
                hi += 1
            out.append((lo, hi))
            lo = hi + 1
        if lo >= n:
            return out, delta
        delta += inc


def norm_ds(values, other=None):
    x = np.asarray(values, dtype=float)
    y = np.linspace(1.5, 2.0, len(x)) if other is None else np.asarray(other, dtype=float)
    return Dataset(np.column_stack([x, y]), normalized=True)


def test_computers_dimension0_trace(computers_norm):
    # sorted: p2 1.5667, p4 1.7, p5 1.7, p1 1.7667, p3 1.9333, p6 2.0
    # cap = (2 - 1)/2 = 0.5, ceil(6/2) = 3, delta stays 0
    iv = find_breakpoints(computers_norm, t=2, i=0, inc=1)
    assert iv.order.tolist() == [1, 3, 4, 0, 2, 5]
    assert iv.lo_idx.tolist() == [0, 3]
    assert iv.hi_idx.tolist() == [2, 5]
    assert iv.delta_used == 0
    assert iv.width_cap == 0.5
    assert sorted(iv.members(0).tolist()) == [1, 3, 4]
    assert iv.labels().tolist() == [1, 0, 1, 0, 0, 1]


def test_delta_escalates_when_width_cuts_an_interval():
    ds = norm_ds([1.1, 1.9, 1.95, 2.0])
    iv = find_breakpoints(ds, t=2, i=0, inc=1)
    assert iv.delta_used == 1
    assert iv.lo_idx.tolist() == [0, 1]
    assert iv.hi_idx.tolist() == [0, 3]


def test_identical_coordinates_split_by_count():
    ds = Dataset(np.column_stack([np.full(8, 2.0), np.linspace(1.2, 2.0, 8)]), normalized=True)
    iv = find_breakpoints(ds, t=4, i=0, inc=1)
    assert iv.counts.tolist() == [2, 2, 2, 2]
    assert iv.delta_used == 0
    assert np.all(iv.widths == 0)


def test_t1_is_one_interval(computers_norm):
    iv = find_breakpoints(computers_norm, 1, 1)
    assert iv.counts.tolist() == [6]


def test_fewer_points_than_intervals():
    iv = find_breakpoints(norm_ds([1.5, 2.0]), t=5, i=0)
    assert iv.counts.tolist() == [1, 1, 0, 0, 0]
    assert np.isnan(iv.widths[2])


def test_argument_checks(computers, computers_norm):
    with pytest.raises(ValueError):
        find_breakpoints(computers, 2, 0)
    with pytest.raises(ValueError):
        find_breakpoints(computers_norm, 0, 0)
    with pytest.raises(ValueError):
        find_breakpoints(computers_norm, 2, 2)
    with pytest.raises(ValueError):
        find_breakpoints(computers_norm, 2, 0, inc=0)


def test_raw_domain_uses_minimum_as_floor(computers):
    iv = find_breakpoints(computers, 2, 0, raw_domain=True)
    assert iv.width_cap == pytest.approx((3.0 - 1.7) / 2)
    assert iv.counts.sum() == 6


def test_default_inc():
    assert default_inc(1) == 1
    assert default_inc(10_000) == 1
    assert default_inc(10_001) == 2
    assert default_inc(1_000_000) == 100


@pytest.mark.parametrize("seed", range(60))
def test_matches_reference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 200))
    raw = rng.choice([rng.uniform(0, 1, n), rng.integers(1, 6, n).astype(float),
                      rng.beta(0.3, 0.3, n) + 1e-3])
    ds = normalize(Dataset(np.column_stack([raw + 1e-9, np.ones(n)])))
    t, inc = int(rng.integers(1, 12)), int(rng.integers(1, 5))
    iv = find_breakpoints(ds, t, 0, inc=inc)
    xs = np.sort(ds.coords[:, 0])
    want, delta = reference_breakpoints(xs, t, inc)
    got = [(int(a), int(b)) for a, b in zip(iv.lo_idx, iv.hi_idx) if a <= b]
    assert got == want
    assert iv.delta_used == delta


def test_equiwidth_edges_go_to_lower_slice():
    ds = norm_ds([1.25, 1.5, 1.75, 2.0, 1.1])
    iv = equiwidth_breakpoints(ds, t=4, i=0)
    # slices (1, 1.25], (1.25, 1.5], (1.5, 1.75], (1.75, 2]
    assert iv.labels().tolist() == [0, 1, 2, 3, 0]
    assert iv.counts.tolist() == [2, 1, 1, 1]


def test_equiwidth_counts_match_direct_binning():
    rng = np.random.default_rng(5)
    ds = normalize(Dataset(rng.uniform(0.01, 1, size=(500, 2))))
    iv = equiwidth_breakpoints(ds, 7, 1)
    x = ds.coords[:, 1]
    edges = 1 + np.arange(1, 8) / 7
    want = [int(np.sum((x > e - 1 / 7) & (x <= e))) for e in edges]
    assert iv.counts.tolist() == want


def greedy_width_oracle(xs, t):
    """Smallest width among all pairwise gaps at which t greedy intervals suffice."""
    cands = sorted({0.0} | {float(b - a) for a in xs for b in xs if b >= a})
    for w in cands:
        if minwidth_feasible(xs, w, t):
            return w
    raise AssertionError


@pytest.mark.parametrize("seed", range(20))
def test_minwidth_is_optimal(seed):
    rng = np.random.default_rng(100 + seed)
    n, t = int(rng.integers(2, 25)), int(rng.integers(1, 6))
    ds = normalize(Dataset(np.column_stack([rng.uniform(0.01, 1, n), np.ones(n)])))
    iv = minwidth_breakpoints(ds, t, 0)
    xs = np.sort(ds.coords[:, 0])
    best = greedy_width_oracle(xs, t)
    assert best - MINWIDTH_TOL <= iv.width_cap <= best + MINWIDTH_TOL
    assert iv.counts.sum() == n
    assert np.nanmax(iv.widths) <= iv.width_cap


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.001, 1.0), min_size=1, max_size=80),
       st.integers(1, 15), st.integers(1, 6))
def test_breakpoint_invariants(values, t, inc):
    n = len(values)
    ds = normalize(Dataset(np.column_stack([values, np.ones(n)])))
    iv = find_breakpoints(ds, t, 0, inc=inc)
    counts = iv.counts
    assert counts.sum() == n
    assert sorted(iv.order.tolist()) == list(range(n))
    nonempty = counts > 0
    # contiguous, in order, no overlap
    assert iv.lo_idx[0] == 0
    assert np.all(iv.lo_idx[1:][nonempty[1:]] == iv.hi_idx[:-1][nonempty[1:]] + 1)
    assert np.all(iv.widths[nonempty] <= iv.width_cap)
    assert np.all(counts <= math.ceil(n / t) + iv.delta_used)


@pytest.mark.parametrize("seed", range(10))
def test_sorted_dimension_breaks_ties_by_id(seed):
    from kregret.partition import _sorted_dim
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3000))
    X = rng.integers(1, int(rng.integers(2, 50)), size=(n, 2)).astype(float)
    order, xs = _sorted_dim(Dataset(X), 0)
    want = np.argsort(X[:, 0], kind="stable")
    assert np.array_equal(order, want)
    assert np.array_equal(xs, X[want, 0])
