"""Acceptance criteria, one test each.  Every test records a PASS/FAIL line that
is printed in the terminal summary."""

import gc
import itertools
import math
import statistics
import time

import numpy as np
import pytest

from kregret import (
    Dataset, ces_upper_bound, maxdom, minvar, muf, muf_lower_bound_scale,
    muf_upper_bound, normalize, regret_ratio, rf_minvar, scale_dimension,
)
from kregret.datagen import gen_anticorrelated, gen_circle_lowerbound
from kregret.harness import ExperimentConfig, circle_family, rows_to_csv, run_experiment, strip_timing
from kregret.partition import find_breakpoints
from kregret.utility import evaluate, gain, log_utilities, max_regret_ratio, sample_family

SEEDS = range(20)
DIMS = (2, 3, 4)
KS = (10, 20, 34)


def record(log, num, title, ok, detail=""):
    log.append(f"[criterion {num:>2}] {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip())
    assert ok, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="module")
def bound_datasets():
    return {(s, d): normalize(gen_anticorrelated(1000, d, s)) for s in SEEDS for d in DIMS}


def test_1_worked_example(computers, acceptance_log):
    t0 = time.perf_counter()
    f3, f4 = muf((0.5, 0.5)), muf((0.99, 0.01))
    S = [0, 2, 4]
    checks = {
        "f3(p1)": (evaluate(f3, computers.point(0)), 13.56, 5e-3),
        "gain(S,f3)": (gain([computers.point(i) for i in S], f3), 13.56, 5e-3),
        "ratio(S,f3)": (regret_ratio(computers, S, f3), 0.0, 5e-3),
        "gain(S,f4)": (gain([computers.point(i) for i in S], f4), 2.88, 5e-3),
        "gain(D,f4)": (gain(computers, f4), 3.09, 5e-3),
        "ratio(S,f4)": (regret_ratio(computers, S, f4), 0.0680, 5e-3),
        "mr_ratio(S,{f3,f4})": (max_regret_ratio(computers, S, [f3, f4]).max_ratio, 0.0680, 5e-3),
    }
    elapsed = time.perf_counter() - t0
    bad = {k: v[0] for k, v in checks.items() if abs(v[0] - v[1]) > v[2]}
    record(acceptance_log, 1, "worked example", not bad and elapsed < 1.0,
           f"off={bad} time={elapsed:.3f}s")


def _bound_runs(datasets, families):
    """Yield (label, max_rr, bound) for minvar and rf-minvar over the full matrix."""
    for (s, d), ds in datasets.items():
        # selection does not depend on the utility family
        answers = [(k, algo, ans.members) for k in KS for algo, ans in
                   (("minvar", minvar(ds, k)), ("rf-minvar", rf_minvar(ds, k, seed=s)))]
        for name, F, bound_of in families(s, d):
            L = log_utilities(F, ds.coords)
            for k, algo, members in answers:
                rr = max_regret_ratio(ds, members, F, L).max_ratio
                yield f"{algo} seed={s} d={d} k={k} {name}", rr, bound_of(k, d)


def test_2_muf_bound(bound_datasets, acceptance_log):
    t0 = time.perf_counter()

    def fams(s, d):
        yield "muf", sample_family("muf", d, 10_000, 10_000 + s), muf_upper_bound

    runs = list(_bound_runs(bound_datasets, fams))
    elapsed = time.perf_counter() - t0
    bad = [r for r in runs if not r[1] <= r[2]]
    worst = max(r[1] / r[2] for r in runs)
    record(acceptance_log, 2, "MUF bound", not bad and elapsed < 60,
           f"runs={len(runs)} violations={len(bad)} worst rr/bound={worst:.3f} time={elapsed:.1f}s")


def test_3_ces_bound(bound_datasets, acceptance_log):
    t0 = time.perf_counter()

    def fams(s, d):
        for b in (0.1, 0.5, 0.9):
            F = sample_family("ces", d, 10_000, 20_000 + s, b=b)
            yield f"ces b={b}", F, lambda k, d, b=b: ces_upper_bound(k, d, b)

    runs = list(_bound_runs(bound_datasets, fams))
    elapsed = time.perf_counter() - t0
    bad = [r for r in runs if not r[1] <= r[2]]
    worst = max(r[1] / r[2] for r in runs)
    record(acceptance_log, 3, "CES bound", not bad and elapsed < 90,
           f"runs={len(runs)} violations={len(bad)} worst rr/bound={worst:.3f} time={elapsed:.1f}s")


def test_4_bound_values(acceptance_log):
    got = [
        (muf_upper_bound(3, 2), math.log(1.5)),
        (muf_upper_bound(20, 2), math.log(20 / 19)),
    ] + [(ces_upper_bound(3, 2, b), 1 / 3) for b in (0.1, 0.5, 0.9)] \
      + [(ces_upper_bound(20, 2, b), 1 / 20) for b in (0.1, 0.5, 0.9)]
    err = max(abs(a - b) for a, b in got)
    record(acceptance_log, 4, "bound values", err <= 1e-12, f"max error={err:.2e}")


def test_5_circle_lower_bound(acceptance_log):
    t0 = time.perf_counter()
    ds = gen_circle_lowerbound(10_000)
    F = circle_family(10_000)
    L = log_utilities(F, ds.coords)
    details, ok = [], True
    for k in (4, 6, 8, 10):
        a = max_regret_ratio(ds, minvar(ds, k, raw_domain=True).members, F, L).max_ratio
        b = max_regret_ratio(ds, maxdom(ds, k).members, F, L).max_ratio
        floor = 0.5 * muf_lower_bound_scale(k)
        ok &= min(a, b) >= floor
        details.append(f"k={k}: {min(a, b):.4f}>={floor:.4f}")
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 5, "circle lower bound", ok and elapsed < 120,
           f"{' '.join(details)} time={elapsed:.1f}s")


def _exhaustive_best(L, k):
    """Smallest max regret ratio over all k-subsets, from a log-utility matrix."""
    n = L.shape[1]
    best_d = L.max(axis=1)
    combos = np.array(list(itertools.combinations(range(n), k)))
    best_s = L[:, combos].max(axis=2)  # (functions, subsets)
    return float(np.min(np.max(-np.expm1(best_s - best_d[:, None]), axis=0)))


def test_6_exhaustive_oracle(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    failures, count = [], 0
    for inst in range(30):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(6, 15))
        k = int(rng.integers(d, 5))
        ds = normalize(Dataset(gen_anticorrelated(n, d, 600 + inst).coords))
        F = sample_family("muf", d, 200, 700 + inst)
        L = log_utilities(F, ds.coords)
        opt = _exhaustive_best(L, k)
        mv = max_regret_ratio(ds, minvar(ds, k).members, F, L).max_ratio
        bound = muf_upper_bound(k, d)
        count += 1
        if not (opt <= mv + 1e-15 and mv <= bound):
            failures.append((inst, n, d, k, opt, mv, bound))
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 6, "exhaustive oracle", not failures and elapsed < 60,
           f"instances={count} failures={failures} time={elapsed:.1f}s")


def test_7_scale_invariance(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    bad = 0
    for _ in range(1000):
        n, d = int(rng.integers(3, 40)), int(rng.integers(2, 6))
        ds = Dataset(rng.uniform(0.05, 20.0, size=(n, d)))
        f = sample_family("muf", d, 1, rng)[0]
        lam = np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=d))
        scaled = ds
        for j in range(d):
            scaled = scale_dimension(scaled, j, float(lam[j]))
        S = rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist()
        a0 = int(np.argmax(log_utilities([f], ds.coords)[0]))
        a1 = int(np.argmax(log_utilities([f], scaled.coords)[0]))
        r0, r1 = regret_ratio(ds, S, f), regret_ratio(scaled, S, f)
        if a0 != a1 or not math.isclose(r0, r1, rel_tol=1e-9, abs_tol=0.0):
            bad += 1
    elapsed = time.perf_counter() - t0
    record(acceptance_log, 7, "scale invariance", bad == 0 and elapsed < 10,
           f"triples=1000 mismatches={bad} time={elapsed:.1f}s")


def test_8_partition_invariants(acceptance_log):
    rng = np.random.default_rng(808)
    bad = 0
    for _ in range(1000):
        n = int(rng.integers(1, 400))
        kind = rng.integers(3)
        if kind == 0:
            x = rng.uniform(0.0, 1.0, n)
        elif kind == 1:
            x = rng.integers(1, 10, n).astype(float)
        else:
            x = np.concatenate([rng.normal(0.3, 0.01, n // 2), rng.uniform(0, 1, n - n // 2)])
        x = np.abs(x) + 1e-6
        ds = normalize(Dataset(np.column_stack([x, rng.uniform(0.1, 1, n)])))
        t, inc = int(rng.integers(1, 30)), int(rng.integers(1, 8))
        iv = find_breakpoints(ds, t, 0, inc=inc)
        labels = iv.labels()
        covered = np.array_equal(np.sort(iv.order), np.arange(n)) and iv.counts.sum() == n \
            and np.all((labels >= 0) & (labels < t))
        cap = (ds.dim_max[0] - 1.0) / t
        nonempty = iv.counts > 0
        widths_ok = np.all(iv.widths[nonempty] <= cap)
        counts_ok = np.all(iv.counts <= math.ceil(n / t) + iv.delta_used)
        bad += not (covered and widths_ok and counts_ok)
    record(acceptance_log, 8, "partition invariants", bad == 0, f"calls=1000 failures={bad}")


def _doubling_ratio(small, large, k, trials=5):
    """Median selection time ratio, trials interleaved so drift hits both sizes alike."""
    minvar(small, k)
    minvar(large, k)
    ts, tl = [], []
    for _ in range(trials):
        gc.collect()
        t0 = time.perf_counter()
        minvar(small, k)
        ts.append(time.perf_counter() - t0)
        gc.collect()
        t0 = time.perf_counter()
        minvar(large, k)
        tl.append(time.perf_counter() - t0)
    return statistics.median(tl) / statistics.median(ts)


def test_9_performance(acceptance_log):
    big = normalize(gen_anticorrelated(1_000_000, 3, 9))
    half = normalize(gen_anticorrelated(500_000, 3, 9))
    t0 = time.perf_counter()
    minvar(big, 20)
    single = time.perf_counter() - t0
    ratio = _doubling_ratio(half, big, 20)
    record(acceptance_log, 9, "performance", single <= 10 and ratio <= 2.6,
           f"n=1e6 select={single:.2f}s doubling ratio={ratio:.2f}")


def test_10_determinism(acceptance_log):
    def once():
        cfg = ExperimentConfig(n=2000, d=3, k=[10, 20], num_functions=2000, seed=42,
                               algorithms=["minvar", "rf-minvar", "maxdom", "random"])
        return strip_timing(rows_to_csv(run_experiment(cfg)))

    a, b = once(), once()
    record(acceptance_log, 10, "determinism", a == b, f"bytes={len(a)}")
