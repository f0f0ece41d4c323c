"""Per-dimension interval construction.

Three strategies split one dimension into ``t`` index-contiguous intervals
over the points sorted by that coordinate (ties broken by id):

* :func:`find_breakpoints` - near-equal point counts under a width cap,
  relaxing the count limit by ``inc`` until ``t`` intervals cover all points;
* :func:`equiwidth_breakpoints` - ``t`` equal-width slices of the domain;
* :func:`minwidth_breakpoints` - smallest common width for which ``t``
  greedily placed intervals cover every point.

Bucket membership is by sorted index range, never by re-comparing raw
coordinates, so a point tied on a boundary belongs to exactly one interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

MINWIDTH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class IntervalSet:
    """``t`` intervals over dimension ``dim``.

    ``lo_idx``/``hi_idx`` are inclusive positions in ``order`` (the
    dimension-sorted point ids); an empty interval has ``lo_idx > hi_idx``
    and NaN coordinates.  ``width_cap`` is the per-interval width limit the
    strategy worked under.
    """

    dim: int
    t: int
    order: np.ndarray
    lo_idx: np.ndarray
    hi_idx: np.ndarray
    lo_coord: np.ndarray
    hi_coord: np.ndarray
    delta_used: int
    width_cap: float

    @property
    def counts(self) -> np.ndarray:
        return np.maximum(self.hi_idx - self.lo_idx + 1, 0)

    @property
    def widths(self) -> np.ndarray:
        """Coordinate spread of each nonempty interval (NaN when empty)."""
        return self.hi_coord - self.lo_coord

    def labels(self) -> np.ndarray:
        """Interval index of every point, indexed by point id."""
        out = np.empty(len(self.order), dtype=np.int64)
        out[self.order] = np.repeat(np.arange(self.t), self.counts)
        return out

    def members(self, j: int) -> np.ndarray:
        return self.order[self.lo_idx[j] : self.hi_idx[j] + 1]


def _sorted_dim(ds: Dataset, i: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 <= i < ds.d:
        raise ValueError(f"dimension {i} out of range for d={ds.d}")
    x = ds.coords[:, i]
    order = np.argsort(x)
    xs = x[order]
    # the fast sort is unstable: put ids in ascending order within runs of equal values
    eq = xs[1:] == xs[:-1]
    if eq.any():
        tied = np.zeros(len(xs), dtype=bool)
        tied[1:] |= eq
        tied[:-1] |= eq
        idx = np.flatnonzero(tied)
        run = np.cumsum(np.concatenate([[True], ~eq]))[idx]
        order[idx] = order[idx][np.lexsort((order[idx], run))]
    return order, xs


def _domain_floor(ds: Dataset, xs: np.ndarray, raw_domain: bool) -> float:
    if raw_domain:
        return float(xs[0])
    if not ds.normalized:
        raise ValueError("dataset must be normalized to (1, 2] (or pass raw_domain=True)")
    return 1.0


def _check_t(t: int) -> None:
    if t < 1:
        raise ValueError(f"number of intervals must be >= 1, got {t}")


def _build(dim, t, order, xs, bounds, delta, cap) -> IntervalSet:
    lo = np.full(t, len(xs), dtype=np.int64)
    hi = np.full(t, len(xs) - 1, dtype=np.int64)
    for j, (a, b) in enumerate(bounds):
        lo[j], hi[j] = a, b
    nonempty = lo <= hi
    lo_c = np.full(t, np.nan)
    hi_c = np.full(t, np.nan)
    lo_c[nonempty] = xs[lo[nonempty]]
    hi_c[nonempty] = xs[hi[nonempty]]
    return IntervalSet(dim, t, order, lo, hi, lo_c, hi_c, int(delta), float(cap))


def _last_within(xs: np.ndarray, lo: int, limit: int, cap: float) -> int:
    """Largest ``h`` in ``[lo, limit]`` with ``xs[h] - xs[lo] <= cap``."""
    base = xs[lo]
    h = int(np.searchsorted(xs, base + cap, side="right")) - 1
    # base + cap rounds; settle on the exact subtraction test
    n = len(xs)
    while h + 1 < n and xs[h + 1] - base <= cap:
        h = int(np.searchsorted(xs, xs[h + 1], side="right")) - 1
    while xs[h] - base > cap:
        h = int(np.searchsorted(xs, xs[h], side="left")) - 1
    return min(h, limit)


def default_inc(n: int) -> int:
    """Count-limit step: 0.01% of ``n``, at least 1."""
    return max(1, math.ceil(0.0001 * n))


def find_breakpoints(
    ds: Dataset, t: int, i: int, inc: int | None = None, raw_domain: bool = False
) -> IntervalSet:
    """Split dimension ``i`` into ``t`` intervals holding about ``ceil(n/t)`` points each.

    Each interval starts at the first uncovered point and takes as many of
    the next ``ceil(n/t) + delta`` points as fit within width
    ``(c_max - 1) / t``.  If ``t`` intervals leave points uncovered, ``delta``
    grows by ``inc`` and the pass restarts.

    With ``raw_domain=True`` the dataset need not be normalized and the
    domain floor is the smallest coordinate instead of 1.
    """
    _check_t(t)
    if inc is None:
        inc = default_inc(ds.n)
    if inc < 1:
        raise ValueError(f"inc must be >= 1, got {inc}")
    order, xs = _sorted_dim(ds, i)
    floor = _domain_floor(ds, xs, raw_domain)
    n = len(xs)
    cap = (float(ds.dim_max[i]) - floor) / t
    per = math.ceil(n / t)
    delta = 0
    while True:
        bounds = []
        lo = 0
        for _ in range(t):
            if lo >= n:
                break
            limit = min(lo + per - 1 + delta, n - 1)
            hi = _last_within(xs, lo, limit, cap)
            bounds.append((lo, hi))
            lo = hi + 1
        if lo >= n:
            return _build(i, t, order, xs, bounds, delta, cap)
        if delta >= n:
            # unreachable in exact arithmetic: t greedy width-cap intervals span the domain
            raise RuntimeError(f"breakpoints failed to cover dimension {i} at delta={delta}")
        delta += inc


def equiwidth_breakpoints(ds: Dataset, t: int, i: int, raw_domain: bool = False) -> IntervalSet:
    """``t`` slices of equal width between the domain floor and the dimension max.

    Slices are closed on the upper edge: a coordinate exactly on a breakpoint
    goes to the lower slice.
    """
    _check_t(t)
    order, xs = _sorted_dim(ds, i)
    floor = _domain_floor(ds, xs, raw_domain)
    top = float(ds.dim_max[i])
    w = (top - floor) / t
    if w > 0:
        labels = np.clip(np.ceil((xs - floor) / w).astype(np.int64) - 1, 0, t - 1)
    else:
        labels = np.zeros(len(xs), dtype=np.int64)
    counts = np.bincount(labels, minlength=t)
    ends = np.cumsum(counts)
    bounds = [(int(e - c), int(e - 1)) for c, e in zip(counts, ends)]
    return _build(i, t, order, xs, bounds, 0, w)


def _greedy_cover(xs: np.ndarray, w: float, limit: int) -> list[tuple[int, int]] | None:
    """Intervals of width ``w`` started at each uncovered point; None if more than ``limit``."""
    out = []
    lo, n = 0, len(xs)
    while lo < n:
        if len(out) == limit:
            return None
        hi = _last_within(xs, lo, n - 1, w)
        out.append((lo, hi))
        lo = hi + 1
    return out


def minwidth_feasible(xs: np.ndarray, w: float, t: int) -> bool:
    """Can ``t`` intervals of width ``w`` cover the sorted coordinates ``xs``?"""
    return _greedy_cover(np.asarray(xs), w, t) is not None


def minwidth_breakpoints(ds: Dataset, t: int, i: int, raw_domain: bool = False) -> IntervalSet:
    """Smallest width (to 1e-9) at which ``t`` greedy intervals cover dimension ``i``.

    Gaps between occupied stretches are skipped; unused intervals are
    returned empty at the end.
    """
    _check_t(t)
    order, xs = _sorted_dim(ds, i)
    if not raw_domain and not ds.normalized:
        raise ValueError("dataset must be normalized to (1, 2] (or pass raw_domain=True)")
    lo_w, hi_w = 0.0, float(xs[-1] - xs[0])
    if minwidth_feasible(xs, lo_w, t):
        hi_w = lo_w
    while hi_w - lo_w > MINWIDTH_TOL:
        mid = 0.5 * (lo_w + hi_w)
        if minwidth_feasible(xs, mid, t):
            hi_w = mid
        else:
            lo_w = mid
    bounds = _greedy_cover(xs, hi_w, t)
    return _build(i, t, order, xs, bounds, 0, hi_w)


STRATEGIES = {
    "findbreakpoints": find_breakpoints,
    "equiwidth": equiwidth_breakpoints,
    "minwidth": minwidth_breakpoints,
}
