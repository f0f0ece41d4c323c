"""Closed-form regret-ratio bounds for MinVar answer sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable

from .selector import compute_t


def muf_upper_bound(k: int, d: int) -> float:
    """``ln(1 + 1/t)`` with ``t = floor((k-d+1)^(1/(d-1)))``; holds for MUFs on (1, 2] data."""
    return math.log1p(1.0 / compute_t(k, d))


def ces_upper_bound(k: int, d: int, b: float) -> float:
    """``(d-1)^(1/b) / (t + (d-1)^(1/b))`` for CES functions with exponent ``b``."""
    if not 0 < b < 1:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    t = compute_t(k, d)
    s = (d - 1) ** (1.0 / b)
    return s / (t + s)


def muf_lower_bound_scale(k: int) -> float:
    """Leading term ``pi^2 / (32 (k+1)^2)`` of the quarter-circle lower bound.

    Asymptotic only: finite ``k`` and a discretised circle both shave it, so
    treat it as a floor up to a safety factor.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return math.pi**2 / (32 * (k + 1) ** 2)


@dataclass(frozen=True)
class BoundReport:
    k: int
    d: int
    t: int
    muf_upper: float
    muf_lower_scale: float
    ces_upper: Dict[float, float] = field(default_factory=dict)


def bound_report(k: int, d: int, bs: Iterable[float] = ()) -> BoundReport:
    return BoundReport(
        k=k,
        d=d,
        t=compute_t(k, d),
        muf_upper=muf_upper_bound(k, d),
        muf_lower_scale=muf_lower_bound_scale(k),
        ces_upper={float(b): ces_upper_bound(k, d, b) for b in bs},
    )
