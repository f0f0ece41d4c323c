"""Dataset sources: anti-correlated generator, quarter-circle construction, CSV I/O."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .dataset import Dataset

log = logging.getLogger(__name__)

EPS = 1e-6


def _peak(rng: np.random.Generator, lo: float, hi: float, size: int, terms: int = 12) -> np.ndarray:
    """Mean of ``terms`` uniforms, rescaled to ``[lo, hi]``: a bell-shaped draw with bounded support."""
    return lo + (hi - lo) * rng.uniform(size=(size, terms)).mean(axis=1)


def _anti_rows(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    v = _peak(rng, 0.25, 0.75, n)
    X = np.repeat(v[:, None], d, axis=1)
    spread = np.minimum(v, 1.0 - v)
    for j in range(d):
        h = rng.uniform(-1.0, 1.0, size=n) * spread
        X[:, j] += h
        X[:, (j + 1) % d] -= h
    return X


def gen_anticorrelated(n: int, d: int, seed: int) -> Dataset:
    """Points scattered around the hyperplane ``sum(c) = d * v`` with ``v`` peaked at 0.5.

    ``v`` is a 12-uniform "normal" on ``[0.25, 0.75]``.  Each point starts at
    ``(v, ..., v)``; for every dimension a uniform shift in ``[-l, l]`` (``l``
    the distance from ``v`` to the nearer edge of ``[0, 1]``) moves utility
    from one coordinate to the next, keeping the sum.  Points leaving the
    unit cube are redrawn; finally every coordinate is clipped to ``[0, 1]``
    and shifted up by ``1e-6`` for strict positivity.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    rng = np.random.default_rng(seed)
    X = _anti_rows(rng, n, d)
    bad = np.flatnonzero(np.any((X < 0) | (X > 1), axis=1))
    while bad.size:
        X[bad] = _anti_rows(rng, bad.size, d)
        bad = bad[np.any((X[bad] < 0) | (X[bad] > 1), axis=1)]
    return Dataset(np.clip(X, 0.0, 1.0) + EPS)


def gen_circle_lowerbound(m: int, seed: int | None = None) -> Dataset:
    """``m`` points ``(e^cos(theta), e^sin(theta))`` at ``theta_i = i * (pi/2) / m``, ``i = 1..m``.

    The construction is deterministic; ``seed`` is accepted for interface
    symmetry only.  The result lives in ``[1, e]`` and must not be normalized.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    theta = circle_angles(m)
    return Dataset(np.column_stack([np.exp(np.cos(theta)), np.exp(np.sin(theta))]))


def circle_angles(m: int) -> np.ndarray:
    return np.arange(1, m + 1) * (math.pi / 2) / m


@dataclass(frozen=True)
class LoadResult:
    dataset: Dataset
    dropped: int
    header: list | None


def _parse_row(row: Sequence[str], cols: Sequence[int]) -> list | None:
    try:
        vals = [float(row[c]) for c in cols]
    except (IndexError, ValueError):
        return None
    if not all(math.isfinite(x) and x > 0 for x in vals):
        return None
    return vals


def load_csv(path: str | Path, dim_columns: Sequence[int]) -> LoadResult:
    """Read the selected zero-based columns of a CSV file as a dataset.

    A first row with no parseable number in the selected columns is taken as
    a header.  Rows with a missing, non-numeric, non-finite or non-positive
    selected field are dropped and counted.
    """
    cols = list(dim_columns)
    if not cols:
        raise ValueError("select at least one column")
    if any(c < 0 for c in cols):
        raise ValueError(f"column indices must be >= 0, got {cols}")
    rows, dropped, header = [], 0, None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh)):
            if not row or all(not cell.strip() for cell in row):
                continue
            vals = _parse_row(row, cols)
            if vals is None:
                if lineno == 0 and not any(_is_number(row, c) for c in cols):
                    header = row
                    continue
                dropped += 1
                continue
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no usable rows ({dropped} dropped)")
    if dropped:
        log.info("%s: dropped %d rows with null or invalid fields", path, dropped)
    return LoadResult(Dataset(np.asarray(rows)), dropped, header)


def _is_number(row: Sequence[str], c: int) -> bool:
    try:
        float(row[c])
    except (IndexError, ValueError):
        return False
    return True


def dump_csv(ds: Dataset, dest: str | Path | TextIO) -> None:
    """Write ``id,c0,...`` rows with 17 significant digits (exact round trip)."""
    if hasattr(dest, "write"):
        _write_dump(ds, dest)
    else:
        with open(dest, "w", newline="") as fh:
            _write_dump(ds, fh)


def _write_dump(ds: Dataset, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id"] + [f"c{j}" for j in range(ds.d)])
    for i, row in enumerate(ds.coords):
        w.writerow([i] + [format(float(x), ".17g") for x in row])


def load_dump(path: str | Path) -> Dataset:
    """Inverse of :func:`dump_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "id":
            raise ValueError(f"{path}: expected an 'id' column first")
        rows = [[float(x) for x in r[1:]] for r in reader if r]
    return Dataset(np.asarray(rows))
