"""Answer-set construction: MinVar, RF-MinVar and two baselines.

Dimensions are 0-based here: the apex points and the bucket grid use
dimensions ``0..d-2``; representatives are chosen by the last dimension.
Every argmax ties to the lowest point id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dataset import Dataset, skyline
from .partition import STRATEGIES


APEX = "apex"
BUCKET_REP = "bucket_rep"
FILL = "fill"
RANDOM_FILL = "random_fill"
SKYLINE = "skyline"


@dataclass(frozen=True)
class Provenance:
    kind: str
    dim: Optional[int] = None
    t: Optional[int] = None
    bucket: Optional[Tuple[int, ...]] = None

    def __str__(self) -> str:
        if self.kind == APEX:
            return f"apex(dim={self.dim})"
        if self.kind == BUCKET_REP:
            return f"bucket_rep(t={self.t}, bucket={list(self.bucket)})"
        return self.kind


@dataclass(frozen=True)
class AnswerSet:
    members: List[int]
    provenance: List[Provenance]
    t_base: Optional[int] = None

    def __len__(self) -> int:
        return len(self.members)


def compute_t(k: int, d: int) -> int:
    """``floor((k - d + 1) ** (1 / (d - 1)))``, exact for perfect powers."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if k < d:
        raise ValueError(f"k must be >= d (k={k}, d={d})")
    m, e = k - d + 1, d - 1
    t = int(round(m ** (1.0 / e)))
    while t**e > m:
        t -= 1
    while (t + 1) ** e <= m:
        t += 1
    return t


def _check_k(ds: Dataset, k: int) -> None:
    if k > ds.n:
        raise ValueError(f"k={k} exceeds dataset size n={ds.n}")
    if k < ds.d:
        raise ValueError(f"k={k} is smaller than d={ds.d}")


class _Builder:
    """Ordered, duplicate-free member list with provenance."""

    def __init__(self) -> None:
        self.members: List[int] = []
        self.prov: List[Provenance] = []
        self._seen: set = set()

    def add(self, pid: int, prov: Provenance) -> bool:
        pid = int(pid)
        if pid in self._seen:
            return False
        self._seen.add(pid)
        self.members.append(pid)
        self.prov.append(prov)
        return True

    def __contains__(self, pid) -> bool:
        return int(pid) in self._seen

    def __len__(self) -> int:
        return len(self.members)

    def reorder(self, keep: Sequence[int]) -> None:
        self.members = [self.members[i] for i in keep]
        self.prov = [self.prov[i] for i in keep]
        self._seen = set(self.members)

    def result(self, k: int, t_base) -> AnswerSet:
        return AnswerSet(self.members[:k], self.prov[:k], t_base)


def apex_points(ds: Dataset) -> List[int]:
    """Per-dimension argmax for dimensions ``0..d-2``."""
    return [int(np.argmax(ds.coords[:, i])) for i in range(ds.d - 1)]


def bucket_representatives(
    ds: Dataset, t: int, inc: int | None = None, partition: str = "findbreakpoints",
    raw_domain: bool = False,
) -> List[Tuple[Tuple[int, ...], int]]:
    """Best point by the last coordinate in every nonempty bucket of the ``t^(d-1)`` grid.

    Returned as ``(bucket, id)`` pairs in lexicographic bucket order.
    """
    try:
        strategy = STRATEGIES[partition]
    except KeyError:
        raise ValueError(f"unknown partition strategy {partition!r}") from None
    d = ds.d
    kw = {"raw_domain": raw_domain}
    if partition == "findbreakpoints":
        kw["inc"] = inc
    labels = [strategy(ds, t, i, **kw).labels() for i in range(d - 1)]
    shape = (t,) * (d - 1)
    flat = np.ravel_multi_index(tuple(labels), shape)
    y = ds.coords[:, -1]
    size = t ** (d - 1)
    top = np.full(size, -np.inf)
    np.maximum.at(top, flat, y)
    # among points at their bucket's top, the lowest id wins
    cand = np.flatnonzero(y == top[flat])
    win = np.full(size, ds.n)
    np.minimum.at(win, flat[cand], cand)
    buckets = np.flatnonzero(win < ds.n)
    winners = win[buckets]
    cells = np.unravel_index(buckets, shape)
    return [
        (tuple(int(c[j]) for c in cells), int(w)) for j, w in enumerate(winners)
    ]


def minvar(
    ds: Dataset, k: int, inc: int | None = None, partition: str = "findbreakpoints",
    raw_domain: bool = False,
) -> AnswerSet:
    """Apex points of dimensions ``0..d-2`` plus one representative per bucket.

    Empty buckets and repeated representatives leave the set short of ``k``;
    it is then padded with the lowest ids not yet chosen.  ``raw_domain``
    partitions an unnormalized dataset between each dimension's min and max.
    """
    _check_k(ds, k)
    if not raw_domain and not ds.normalized:
        raise ValueError("minvar needs a normalized dataset (or raw_domain=True)")
    S = _Builder()
    for i, pid in enumerate(apex_points(ds)):
        S.add(pid, Provenance(APEX, dim=i))
    t = compute_t(k, ds.d)
    for cell, pid in bucket_representatives(ds, t, inc, partition, raw_domain):
        S.add(pid, Provenance(BUCKET_REP, t=t, bucket=cell))
    pid = 0
    while len(S) < k:
        S.add(pid, Provenance(FILL))
        pid += 1
    return S.result(k, t)


def _beats(X: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """``out[a, b]``: row ``rows[a]`` makes row ``cols[b]`` redundant."""
    A, B = X[rows][:, None, :], X[cols][None, :, :]
    ge = np.all(A >= B, axis=2)
    gt = np.any(A > B, axis=2)
    return ge & (gt | (rows[:, None] < cols[None, :]))


def _eliminate_order(X: np.ndarray, block: int = 512) -> List[int]:
    """Survivor positions of the rows of ``X``, in output order.

    Row ``q`` is removed when another row ``r`` is ``>=`` in every coordinate
    and either beats it somewhere or is an exact copy listed earlier.  Each
    removed row is charged to the earliest survivor above it, and that
    survivor moves up to the earliest position it was charged with.
    """
    m = len(X)
    pos = np.arange(m)
    removed = np.zeros(m, dtype=bool)
    for start in range(0, m, block):
        cols = pos[start : start + block]
        removed[cols] = _beats(X, pos, cols).any(axis=0)
    survivors = pos[~removed]
    key = survivors.copy()
    lost = pos[removed]
    for start in range(0, len(lost), block):
        cols = lost[start : start + block]
        # the relation is transitive, so some survivor sits above every removed row
        owner = np.argmax(_beats(X, survivors, cols), axis=0)
        np.minimum.at(key, owner, cols)
    return [int(r) for r in survivors[np.lexsort((survivors, key))]]


def eliminate_redundant(ds: Dataset, members: Sequence[int]) -> List[int]:
    """Drop members dominated by another member, keeping a redundancy-free order.

    Of exact duplicates the earliest stays.  A surviving dominator takes over
    the earliest position among the points it displaced.
    """
    idx = ds.check_ids(members)
    keep = _eliminate_order(ds.coords[idx])
    return [int(idx[i]) for i in keep]


def rf_minvar(
    ds: Dataset, k: int, inc: int | None = None, itr_max: int = 11, seed: int = 0,
    raw_domain: bool = False,
) -> AnswerSet:
    """MinVar with redundancy elimination and growing ``t``.

    Each round adds the bucket representatives for ``t_base + itr`` and
    removes dominated members, until ``k`` members remain or ``itr_max``
    rounds ran.  Shortfalls are filled with random non-members drawn from
    ``seed``.
    """
    _check_k(ds, k)
    if itr_max < 1:
        raise ValueError(f"itr_max must be >= 1, got {itr_max}")
    if not raw_domain and not ds.normalized:
        raise ValueError("rf_minvar needs a normalized dataset (or raw_domain=True)")
    S = _Builder()
    for i, pid in enumerate(apex_points(ds)):
        S.add(pid, Provenance(APEX, dim=i))
    t_base = compute_t(k, ds.d)
    itr = 0
    while len(S) < k and itr < itr_max:
        t = t_base + itr
        for cell, pid in bucket_representatives(ds, t, inc, "findbreakpoints", raw_domain):
            S.add(pid, Provenance(BUCKET_REP, t=t, bucket=cell))
        S.reorder(_eliminate_order(ds.coords[S.members]))
        itr += 1
    if len(S) < k:
        rng = np.random.default_rng(seed)
        pool = np.setdiff1d(np.arange(ds.n), np.asarray(S.members, dtype=np.int64))
        for pid in rng.choice(pool, size=k - len(S), replace=False):
            S.add(pid, Provenance(RANDOM_FILL))
    return S.result(k, t_base)


def maxdom(ds: Dataset, k: int) -> AnswerSet:
    """Greedy max-coverage over skyline points.

    Each step picks the skyline point dominating the most non-skyline points
    not yet covered.  If the skyline has fewer than ``k`` points the rest are
    the lowest remaining ids.
    """
    if k > ds.n:
        raise ValueError(f"k={k} exceeds dataset size n={ds.n}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sky = skyline(ds)
    X = ds.coords
    is_sky = np.zeros(ds.n, dtype=bool)
    is_sky[sky] = True
    others = np.flatnonzero(~is_sky)
    cover = np.stack([np.all(X[s] >= X[others], axis=1) for s in sky]) if sky else None
    covered = np.zeros(len(others), dtype=bool)
    active = np.ones(len(sky), dtype=bool)
    S = _Builder()
    while active.any() and len(S) < k:
        gains = np.where(active, (cover & ~covered).sum(axis=1), -1)
        # first maximum = lowest id, since skyline ids are ascending
        best = int(np.argmax(gains))
        active[best] = False
        covered |= cover[best]
        S.add(sky[best], Provenance(SKYLINE))
    pid = 0
    while len(S) < k:
        S.add(pid, Provenance(FILL))
        pid += 1
    return S.result(k, None)


def random_subset(ds: Dataset, k: int, seed: int = 0) -> AnswerSet:
    if not 1 <= k <= ds.n:
        raise ValueError(f"k must lie in [1, n={ds.n}], got {k}")
    rng = np.random.default_rng(seed)
    ids = rng.choice(ds.n, size=k, replace=False)
    return AnswerSet([int(i) for i in ids], [Provenance("random")] * k, None)


ALGORITHMS = ("minvar", "rf-minvar", "maxdom", "random", "minvar-equiwidth", "minvar-minwidth")


def select(
    name: str, ds: Dataset, k: int, inc: int | None = None, itr_max: int = 11, seed: int = 0,
    raw_domain: bool = False,
) -> AnswerSet:
    """Dispatch by algorithm name."""
    if name == "minvar":
        return minvar(ds, k, inc, raw_domain=raw_domain)
    if name == "minvar-equiwidth":
        return minvar(ds, k, partition="equiwidth", raw_domain=raw_domain)
    if name == "minvar-minwidth":
        return minvar(ds, k, partition="minwidth", raw_domain=raw_domain)
    if name == "rf-minvar":
        return rf_minvar(ds, k, inc, itr_max, seed, raw_domain=raw_domain)
    if name == "maxdom":
        return maxdom(ds, k)
    if name == "random":
        return random_subset(ds, k, seed)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
