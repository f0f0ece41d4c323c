"""Experiment runner behind ``kregret bench``.

A run is described by a flat ``key = value`` config.  For every
``(algorithm, k)`` pair the runner times the selection, evaluates the
chosen subset against a sampled utility family and emits one result row.
Rows carry the closed-form bound where one applies and minvar/rf-minvar
rows are checked against it before anything is written.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import bounds, datagen, selector, utility
from .dataset import Dataset, normalize

log = logging.getLogger(__name__)

COLUMNS = (
    "dataset", "algorithm", "n", "d", "k", "t", "family", "b", "num_functions",
    "seed", "max_rr", "bound", "select_ms", "eval_ms",
)
TIMING_COLUMNS = ("select_ms", "eval_ms")
DATASETS = ("anticorrelated", "circle", "csv")
FAMILIES = (utility.MUF, utility.COBB_DOUGLAS, utility.CES)
MINVAR_FAMILY = ("minvar", "minvar-equiwidth", "minvar-minwidth", "rf-minvar")
# algorithms whose bound is guaranteed, not just reported
ASSERTED = ("minvar", "rf-minvar")
BOUND_SLACK = 1e-12
THREADS_ENV = "KREGRET_THREADS"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class BoundViolation(RuntimeError):
    pass


def parse_int_list(text: str) -> List[int]:
    """``"20"``, ``"10,20,34"`` or ``"10..34:2"`` (inclusive range with step)."""
    out: List[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            rng, _, step = part.partition(":")
            lo, hi = rng.split("..")
            out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
        else:
            out.append(int(part))
    return out


@dataclass
class ExperimentConfig:
    dataset: str = "anticorrelated"
    n: int = 10_000
    d: int = 3
    m: int = 10_000
    path: Optional[str] = None
    columns: List[int] = field(default_factory=list)
    name: Optional[str] = None
    algorithms: List[str] = field(default_factory=lambda: ["minvar", "rf-minvar"])
    k: List[int] = field(default_factory=lambda: [20])
    family: str = utility.MUF
    b: Optional[float] = None
    num_functions: int = 10_000
    seed: int = 0
    inc: Optional[int] = None
    itr_max: int = 11

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.dataset == "csv":
            return os.path.basename(self.path or "csv")
        return self.dataset

    @classmethod
    def from_mapping(cls, values: Dict[str, str]) -> "ExperimentConfig":
        cfg = cls()
        known = {f.name for f in fields(cls)}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(key, "unknown setting")
            try:
                setattr(cfg, key, _coerce(key, str(raw).strip()))
            except ValueError as exc:
                raise ConfigError(key, f"cannot parse {raw!r} ({exc})") from None
        return cfg

    def validate(self, n: Optional[int] = None, d: Optional[int] = None) -> None:
        if self.dataset not in DATASETS:
            raise ConfigError("dataset", f"expected one of {DATASETS}, got {self.dataset!r}")
        if self.dataset == "csv" and (not self.path or not self.columns):
            raise ConfigError("path", "csv datasets need path and columns")
        bad = [a for a in self.algorithms if a not in selector.ALGORITHMS]
        if not self.algorithms or bad:
            raise ConfigError("algorithms", f"unknown {bad}; choose from {selector.ALGORITHMS}")
        if self.family not in FAMILIES:
            raise ConfigError("family", f"expected one of {FAMILIES}, got {self.family!r}")
        if self.b is not None:
            if self.family != utility.CES:
                raise ConfigError("b", "only CES functions take an exponent")
            if not 0 < self.b < 1:
                raise ConfigError("b", f"must lie in (0, 1), got {self.b}")
        if self.num_functions < 1:
            raise ConfigError("num_functions", "must be >= 1")
        if self.itr_max < 1:
            raise ConfigError("itr_max", "must be >= 1")
        if self.inc is not None and self.inc < 1:
            raise ConfigError("inc", "must be >= 1")
        if not self.k:
            raise ConfigError("k", "empty list")
        if n is None and d is None:
            if self.dataset == "csv":
                return  # sizes known only after loading
            n, d = (self.m, 2) if self.dataset == "circle" else (self.n, self.d)
        if d < 2:
            raise ConfigError("d", "must be >= 2")
        if n < 1:
            raise ConfigError("n", "must be >= 1")
        for k in self.k:
            if not d <= k <= n:
                raise ConfigError("k", f"{k} outside [d={d}, n={n}]")


_INT_KEYS = {"n", "d", "m", "num_functions", "seed", "itr_max", "inc"}


def _coerce(key: str, raw: str):
    if key in ("k", "columns"):
        return parse_int_list(raw)
    if key == "algorithms":
        return [a.strip() for a in raw.split(",") if a.strip()]
    if key in _INT_KEYS:
        if key == "inc" and raw.lower() in ("", "auto", "none"):
            return None
        return int(raw)
    if key == "b":
        return None if raw.lower() in ("", "none", "sampled") else float(raw)
    if key in ("path", "name"):
        return raw or None
    return raw


def parse_config_text(text: str) -> Dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(path: Optional[str], overrides: Sequence[str] = ()) -> ExperimentConfig:
    values: Dict[str, str] = {}
    if path:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        values.update(parse_config_text(text))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    return ExperimentConfig.from_mapping(values)


def _seeds(seed: int) -> tuple:
    data, funcs, algo = np.random.SeedSequence(seed).spawn(3)
    return (
        int(data.generate_state(1)[0]),
        np.random.default_rng(funcs),
        int(algo.generate_state(1)[0]),
    )


def build_dataset(cfg: ExperimentConfig, data_seed: int) -> Dataset:
    """The dataset the selectors see: normalized, except for the circle construction."""
    if cfg.dataset == "anticorrelated":
        return normalize(datagen.gen_anticorrelated(cfg.n, cfg.d, data_seed))
    if cfg.dataset == "circle":
        return datagen.gen_circle_lowerbound(cfg.m)
    return normalize(datagen.load_csv(cfg.path, cfg.columns).dataset)


def circle_family(count: int) -> List[utility.UtilityFunction]:
    """Cobb-Douglas functions ``c1^cos(a) * c2^sin(a)`` over a grid of angles in (0, pi/2]."""
    return [utility.cobb_douglas((math.cos(a), math.sin(a))) for a in datagen.circle_angles(count)]


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def log_utilities_parallel(F, X, threads: Optional[int] = None) -> np.ndarray:
    """:func:`utility.log_utilities` split over function chunks; row order is preserved."""
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(F) < 2 * threads:
        return utility.log_utilities(F, X)
    step = math.ceil(len(F) / threads)
    parts = [F[i : i + step] for i in range(0, len(F), step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.vstack(list(pool.map(lambda P: utility.log_utilities(P, X), parts)))


def row_bound(cfg: ExperimentConfig, algorithm: str, k: int, d: int, F) -> Optional[float]:
    if cfg.dataset == "circle" or algorithm not in MINVAR_FAMILY:
        return None
    if cfg.family == utility.CES:
        # each function obeys its own b's bound; the bound grows as b shrinks
        b = cfg.b if cfg.b is not None else min(f.b for f in F)
        return bounds.ces_upper_bound(k, d, b)
    return bounds.muf_upper_bound(k, d)


def _fmt(column: str, value) -> str:
    if value is None:
        return ""
    if column in TIMING_COLUMNS:
        return f"{value:.3f}"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def run_experiment(cfg: ExperimentConfig) -> List[Dict[str, object]]:
    """One row per ``(algorithm, k)`` in config order."""
    cfg.validate()
    data_seed, func_rng, algo_seed = _seeds(cfg.seed)
    ds = build_dataset(cfg, data_seed)
    cfg.validate(n=ds.n, d=ds.d)
    raw = cfg.dataset == "circle"
    if raw:
        F = circle_family(cfg.num_functions)
        family = "cobb-douglas-circle"
    else:
        F = utility.sample_family(cfg.family, ds.d, cfg.num_functions, func_rng, cfg.b)
        family = cfg.family
    t0 = time.perf_counter()
    L = log_utilities_parallel(F, ds.coords)
    log.info("utility matrix %s in %.1f ms", L.shape, 1e3 * (time.perf_counter() - t0))
    b_col = cfg.b if cfg.b is not None else ("sampled" if cfg.family == utility.CES and not raw else None)

    rows = []
    for algorithm in cfg.algorithms:
        for k in cfg.k:
            t0 = time.perf_counter()
            try:
                ans = selector.select(
                    algorithm, ds, k, cfg.inc, cfg.itr_max, algo_seed, raw_domain=raw
                )
            except Exception as exc:
                raise RuntimeError(f"{algorithm} failed at k={k}: {exc}") from exc
            select_ms = 1e3 * (time.perf_counter() - t0)
            t0 = time.perf_counter()
            report = utility.max_regret_ratio(ds, ans.members, F, L)
            eval_ms = 1e3 * (time.perf_counter() - t0)
            bound = row_bound(cfg, algorithm, k, ds.d, F)
            if algorithm in ASSERTED and bound is not None and report.max_ratio > bound + BOUND_SLACK:
                raise BoundViolation(
                    f"{algorithm} k={k}: max regret ratio {report.max_ratio!r} exceeds bound {bound!r}"
                )
            rows.append({
                "dataset": cfg.label,
                "algorithm": algorithm,
                "n": ds.n,
                "d": ds.d,
                "k": k,
                "t": ans.t_base,
                "family": family,
                "b": b_col,
                "num_functions": len(F),
                "seed": cfg.seed,
                "max_rr": report.max_ratio,
                "bound": bound,
                "select_ms": select_ms,
                "eval_ms": eval_ms,
            })
    return rows


def write_rows(rows: Sequence[Dict[str, object]], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(c, row[c]) for c in COLUMNS])


def rows_to_csv(rows: Sequence[Dict[str, object]]) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()


def strip_timing(text: str) -> str:
    """CSV text with the timing columns removed, for reproducibility checks."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    drop = {header.index(c) for c in TIMING_COLUMNS}
    keep = lambda r: [v for i, v in enumerate(r) if i not in drop]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keep(header))
    for r in reader:
        w.writerow(keep(r))
    return buf.getvalue()
