"""Points, datasets and the dominance relation.

Coordinates are held in a single ``(n, d)`` float64 array; point ids are the
dense row indices ``0..n-1``.  :class:`Point` objects are materialised on
demand only, so datasets with millions of rows stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Point:
    """A single identified point of strictly positive utilities."""

    id: int
    coords: Tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not c > 0 for c in self.coords):
            raise ValueError(f"point {self.id}: coordinates must be > 0, got {self.coords}")

    @property
    def d(self) -> int:
        return len(self.coords)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of ``n`` points in ``d >= 2`` dimensions.

    ``dim_max`` is recomputed from the coordinates on construction; passing
    ``normalized=True`` asserts that every coordinate lies in ``(1, 2]``
    with each dimension's maximum equal to exactly 2.
    """

    coords: np.ndarray
    normalized: bool = False
    dim_max: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.coords, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"coordinates must be a 2-D array, got shape {arr.shape}")
        n, d = arr.shape
        if n < 1:
            raise ValueError("dataset must contain at least one point")
        if d < 2:
            raise ValueError(f"dimensionality must be >= 2, got {d}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        if not np.all(arr > 0):
            bad = int(np.argwhere(~(arr > 0))[0, 0])
            raise ValueError(f"point {bad} has a non-positive coordinate")
        arr.setflags(write=False)
        dim_max = arr.max(axis=0)
        dim_max.setflags(write=False)
        if self.normalized and not (np.all(arr > 1.0) and np.all(dim_max == 2.0)):
            raise ValueError("normalized dataset must lie in (1, 2] with per-dimension max 2")
        object.__setattr__(self, "coords", arr)
        object.__setattr__(self, "dim_max", dim_max)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n)

    def __len__(self) -> int:
        return self.n

    def point(self, pid: int) -> Point:
        if not 0 <= pid < self.n:
            raise KeyError(f"no point with id {pid}")
        return Point(int(pid), tuple(float(c) for c in self.coords[pid]))

    @property
    def points(self) -> List[Point]:
        return [self.point(i) for i in range(self.n)]

    def __iter__(self) -> Iterator[Point]:
        return (self.point(i) for i in range(self.n))

    def check_ids(self, ids: Iterable[int]) -> np.ndarray:
        """Validate a subset given as point ids and return it as an index array."""
        idx = np.asarray(list(ids), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            missing = [int(i) for i in idx if not 0 <= i < self.n]
            raise KeyError(f"ids not in dataset: {missing}")
        return idx

    @classmethod
    def from_points(cls, rows: Sequence[Sequence[float]], normalized: bool = False) -> "Dataset":
        return cls(np.asarray(rows, dtype=np.float64), normalized=normalized)


def normalize(ds: Dataset) -> Dataset:
    """Map every coordinate ``c`` to ``1 + c / max_j`` so the domain becomes ``(1, 2]``.

    Not idempotent: normalize exactly once.
    """
    out = 1.0 + ds.coords / ds.dim_max
    # c / max is exactly 1 at the max, so the max maps to exactly 2.0
    return Dataset(out, normalized=True)


def dominates(p: Point | Sequence[float], q: Point | Sequence[float]) -> bool:
    """True iff ``p`` is coordinate-wise ``>=`` ``q``.  Reflexive: ``dominates(p, p)``."""
    a = p.coords if isinstance(p, Point) else tuple(p)
    b = q.coords if isinstance(q, Point) else tuple(q)
    if len(a) != len(b):
        raise ValueError(f"dimensionality mismatch: {len(a)} vs {len(b)}")
    return all(x >= y for x, y in zip(a, b))


def _strictly_dominated(W: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For each row of ``B``: is some row of ``W`` >= everywhere and > somewhere?"""
    ge = np.ones((len(W), len(B)), dtype=bool)
    gt = np.zeros_like(ge)
    for j in range(B.shape[1]):
        w, b = W[:, j, None], B[None, :, j]
        ge &= w >= b
        gt |= w > b
    return np.any(ge & gt, axis=0)


def skyline(ds: Dataset, block: int = 256) -> List[int]:
    """Ids of the points not strictly dominated by another point, in id order.

    Points equal in every coordinate do not eliminate each other.  Candidates
    are scanned in descending lexicographic order, where any strict dominator
    comes first, so each is checked only against skyline points found so far
    (plus its own block).
    """
    X = ds.coords
    order = np.lexsort(X.T[::-1])[::-1]
    window = np.empty((0, ds.d))
    keep = []
    for start in range(0, len(order), block):
        ids = order[start : start + block]
        B = X[ids]
        out = _strictly_dominated(window, B) | _strictly_dominated(B, B)
        window = np.concatenate([window, B[~out]])
        keep.extend(ids[~out].tolist())
    return sorted(keep)


def scale_dimension(ds: Dataset, j: int, lam: float) -> Dataset:
    """Multiply coordinate ``j`` of every point by ``lam > 0``.  Result is not normalized."""
    if not lam > 0:
        raise ValueError(f"scale factor must be > 0, got {lam}")
    if not 0 <= j < ds.d:
        raise ValueError(f"dimension {j} out of range for d={ds.d}")
    out = ds.coords.copy()
    out[:, j] *= lam
    return Dataset(out)
