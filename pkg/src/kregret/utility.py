"""Utility functions (MUF, Cobb-Douglas, CES) and regret measures.

All families are evaluated in log space.  For a family ``F`` and dataset
``D`` the workhorse is :func:`log_utilities`, an ``(|F|, n)`` matrix of
``ln f(p)``; regret ratios are then ``1 - exp(best_S - best_D)``, computed
with ``expm1`` so small ratios keep full precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .dataset import Dataset, Point

MUF = "muf"
COBB_DOUGLAS = "cobb-douglas"
CES = "ces"
KINDS = (MUF, COBB_DOUGLAS, CES)

# slack on the MUF weight-sum constraint, absorbs rounding from normalisation
_SUM_TOL = 1e-9


@dataclass(frozen=True)
class UtilityFunction:
    kind: str
    alpha: tuple
    A: float = 1.0
    b: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.kind not in KINDS:
            raise ValueError(f"unknown utility kind {self.kind!r}")
        if any(not a >= 0 for a in self.alpha):
            raise ValueError(f"weights must be >= 0, got {self.alpha}")
        if not self.A > 0:
            raise ValueError(f"scale A must be > 0, got {self.A}")
        if self.kind == MUF:
            if self.A != 1.0:
                raise ValueError("MUF has no scale parameter (A must be 1)")
            if sum(self.alpha) > 1 + _SUM_TOL:
                raise ValueError(f"MUF weights must sum to <= 1, got {sum(self.alpha)}")
        if self.kind == CES:
            if self.b is None or not 0 < self.b < 1:
                raise ValueError(f"CES exponent b must lie in (0, 1), got {self.b}")
            if not sum(self.alpha) > 0:
                raise ValueError("CES needs at least one positive weight")
        elif self.b is not None:
            raise ValueError(f"{self.kind} takes no exponent b")

    @property
    def d(self) -> int:
        return len(self.alpha)

    def __call__(self, p: Point | Sequence[float]) -> float:
        return evaluate(self, p)


def muf(alpha: Sequence[float]) -> UtilityFunction:
    return UtilityFunction(MUF, tuple(alpha))


def cobb_douglas(alpha: Sequence[float], A: float = 1.0) -> UtilityFunction:
    return UtilityFunction(COBB_DOUGLAS, tuple(alpha), A=A)


def ces(alpha: Sequence[float], b: float, A: float = 1.0) -> UtilityFunction:
    return UtilityFunction(CES, tuple(alpha), A=A, b=b)


def ces_general(alpha: Sequence[float], rho: float, gamma: float = 1.0, A: float = 1.0):
    """The general CES form ``A * (sum a_j x_j^rho)^(gamma/rho)`` as a callable.

    Only the ``A = gamma = 1``, ``0 < rho < 1`` case is a :class:`UtilityFunction`;
    this helper exists so the general form can be compared against it.
    """
    if not (rho < 1 and rho != 0) or not gamma > 0 or not A > 0:
        raise ValueError("need rho < 1, rho != 0, gamma > 0, A > 0")
    a = np.asarray(alpha, dtype=np.float64)

    def f(p):
        x = np.asarray(p.coords if isinstance(p, Point) else p, dtype=np.float64)
        return float(A * np.sum(a * x**rho) ** (gamma / rho))

    return f


def _coords(p: Point | Sequence[float]) -> np.ndarray:
    x = np.asarray(p.coords if isinstance(p, Point) else p, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ValueError(f"coordinates must be > 0, got {x}")
    return x


def log_eval(f: UtilityFunction, p: Point | Sequence[float]) -> float:
    x = _coords(p)
    if x.shape != (f.d,):
        raise ValueError(f"dimension mismatch: function has d={f.d}, point has {x.shape[0]}")
    lx = np.log(x)
    a = np.asarray(f.alpha)
    if f.kind == CES:
        return math.log(f.A) + _logsumexp_weighted(f.b * lx[None, :], a[None, :])[0] / f.b
    return math.log(f.A) + float(a @ lx)


def evaluate(f: UtilityFunction, p: Point | Sequence[float]) -> float:
    """Utility of a single point: ``A * prod x_j^a_j`` or ``A * (sum a_j x_j^b)^(1/b)``."""
    return math.exp(log_eval(f, p))


def _logsumexp_weighted(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``log(sum_j w_j exp(z_j))`` along the last axis, for ``w >= 0``."""
    with np.errstate(divide="ignore"):
        lw = np.log(w)
    t = z + lw
    m = np.max(t, axis=-1, keepdims=True)
    return (m + np.log(np.sum(np.exp(t - m), axis=-1, keepdims=True)))[..., 0]


def log_utilities(F: Sequence[UtilityFunction], X: np.ndarray) -> np.ndarray:
    """Matrix of ``ln f(x)`` with shape ``(len(F), len(X))``."""
    X = np.asarray(X, dtype=np.float64)
    if not F:
        return np.empty((0, X.shape[0]))
    d = X.shape[1]
    for f in F:
        if f.d != d:
            raise ValueError(f"dimension mismatch: function has d={f.d}, data has d={d}")
    lX = np.log(X)
    kinds = {f.kind for f in F}
    alpha = np.array([f.alpha for f in F])
    logA = np.log(np.array([f.A for f in F]))[:, None]
    if CES not in kinds:
        return alpha @ lX.T + logA
    out = np.empty((len(F), X.shape[0]))
    for i, f in enumerate(F):
        if f.kind != CES:
            out[i] = lX @ alpha[i] + logA[i]
    ces_rows = [i for i, f in enumerate(F) if f.kind == CES]
    groups: dict = {}
    for i in ces_rows:
        groups.setdefault(F[i].b, []).append(i)
    loose = []
    for b, rows in groups.items():
        if len(rows) < 8:
            loose.extend(rows)
            continue
        # shared b: log(sum a_j x_j^b) as one matmul, shifted per point for range safety
        z = b * lX
        top = z.max(axis=1)
        P = np.exp(z - top[:, None])
        with np.errstate(divide="ignore"):
            out[rows] = (np.log(alpha[rows] @ P.T) + top) / b + logA[rows]
    # bound the (chunk, n, d) temporary to ~4M doubles
    chunk = max(1, 4_000_000 // X.size)
    for start in range(0, len(loose), chunk):
        rows = np.array(loose[start : start + chunk])
        b = np.array([F[i].b for i in rows])[:, None, None]
        z = b * lX[None, :, :]  # (m, n, d)
        lse = _logsumexp_weighted(z, alpha[rows][:, None, :])
        out[rows] = lse / b[:, :, 0] + logA[rows]
    return out


def gain(S: Sequence[Point] | Dataset, f: UtilityFunction) -> float:
    """Largest utility of any point in ``S``."""
    pts = list(S)
    if not pts:
        raise ValueError("gain of an empty set is undefined")
    return max(evaluate(f, p) for p in pts)


def _subset_rows(D: Dataset, S: Sequence[int]) -> np.ndarray:
    idx = D.check_ids(S)
    if idx.size == 0:
        raise ValueError("subset must be nonempty")
    return idx


def regret(D: Dataset, S: Sequence[int], f: UtilityFunction) -> float:
    """``gain(D, f) - gain(S, f)`` for the subset of ``D`` with ids ``S``."""
    idx = _subset_rows(D, S)
    L = log_utilities([f], D.coords)[0]
    best_d = L.max()
    best_s = L[idx].max()
    return max(0.0, -math.exp(best_d) * math.expm1(best_s - best_d))


def regret_ratio(D: Dataset, S: Sequence[int], f: UtilityFunction) -> float:
    idx = _subset_rows(D, S)
    L = log_utilities([f], D.coords)[0]
    return max(0.0, -math.expm1(L[idx].max() - L.max()))


@dataclass(frozen=True)
class RegretReport:
    per_function_ratio: np.ndarray
    max_ratio: float
    argmax_function: int
    gain_S: float
    gain_D: float

    def summary(self, F: Sequence[UtilityFunction] | None = None) -> str:
        lines = [
            f"functions evaluated : {len(self.per_function_ratio)}",
            f"max regret ratio    : {self.max_ratio:.6%}",
            f"worst function      : #{self.argmax_function}",
            f"gain(S) / gain(D)   : {self.gain_S:.6g} / {self.gain_D:.6g}",
        ]
        if F is not None:
            w = F[self.argmax_function]
            extra = f", b={w.b:.6g}" if w.b is not None else ""
            lines.append(f"worst parameters    : alpha={[round(a, 6) for a in w.alpha]}{extra}")
        return "\n".join(lines)


def max_regret_ratio(
    D: Dataset,
    S: Sequence[int],
    F: Sequence[UtilityFunction],
    L: np.ndarray | None = None,
) -> RegretReport:
    """Empirical maximum regret ratio of subset ``S`` over the finite family ``F``.

    ``L`` may carry a precomputed :func:`log_utilities` matrix for ``(F, D)``
    so several subsets can share one evaluation.  Ties in the maximum go to
    the lowest function index.
    """
    if len(F) == 0:
        raise ValueError("function family must be nonempty")
    idx = _subset_rows(D, S)
    if L is None:
        L = log_utilities(F, D.coords)
    best_d = L.max(axis=1)
    best_s = L[:, idx].max(axis=1)
    ratios = -np.expm1(best_s - best_d)
    # log-space rounding can leave -0.0 or a few ulps below zero
    ratios = np.maximum(ratios, 0.0)
    j = int(np.argmax(ratios))
    return RegretReport(
        per_function_ratio=ratios,
        max_ratio=float(ratios[j]),
        argmax_function=j,
        gain_S=float(np.exp(best_s[j])),
        gain_D=float(np.exp(best_d[j])),
    )


def _simplex(d: int, rng: np.random.Generator) -> tuple:
    while True:
        u = rng.uniform(0.0, 1.0, size=d)
        s = u.sum()
        if s > 0:
            return tuple(u / s)


def sample_muf(d: int, rng: np.random.Generator) -> UtilityFunction:
    """MUF with weights drawn by normalising ``d`` uniforms to sum 1."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return UtilityFunction(MUF, _simplex(d, rng))


def sample_cobb_douglas(d: int, rng: np.random.Generator) -> UtilityFunction:
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return UtilityFunction(COBB_DOUGLAS, _simplex(d, rng))


def sample_ces(d: int, rng: np.random.Generator, b: float | None = None) -> UtilityFunction:
    """CES with simplex weights and ``b ~ U[0.1, 0.9]`` unless ``b`` is fixed."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    alpha = _simplex(d, rng)
    if b is None:
        b = float(rng.uniform(0.1, 0.9))
    return UtilityFunction(CES, alpha, b=b)


def _simplex_rows(count: int, d: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(0.0, 1.0, size=(count, d))
    for i in np.flatnonzero(u.sum(axis=1) == 0):
        u[i] = _simplex(d, rng)
    return u / u.sum(axis=1, keepdims=True)


def sample_family(
    kind: str, d: int, count: int, seed: int | np.random.Generator, b: float | None = None
) -> List[UtilityFunction]:
    """``count`` functions of one kind; weights on the simplex, CES ``b ~ U[0.1, 0.9]`` unless fixed."""
    if kind not in KINDS:
        raise ValueError(f"unknown utility kind {kind!r}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    rng = np.random.default_rng(seed)
    alphas = _simplex_rows(count, d, rng).tolist()
    if kind != CES:
        return [UtilityFunction(kind, tuple(a)) for a in alphas]
    bs = rng.uniform(0.1, 0.9, size=count).tolist() if b is None else [b] * count
    return [UtilityFunction(CES, tuple(a), b=float(x)) for a, x in zip(alphas, bs)]
