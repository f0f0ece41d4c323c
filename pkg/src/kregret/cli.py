"""Command-line entry point: ``kregret {generate,select,evaluate,bounds,bench}``.

Exit status: 0 on success, 2 on a configuration or usage error, 1 when a
run fails.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import bounds, datagen, harness, selector, utility
from .dataset import Dataset, normalize
from .harness import ConfigError, parse_int_list

log = logging.getLogger("kregret")


def _load(args) -> Dataset:
    """Dataset from ``--data`` (dump format) or ``--csv`` + ``--columns``, normalized unless ``--raw``."""
    if args.data and args.csv:
        raise ConfigError("data", "give either --data or --csv, not both")
    if args.data:
        ds = datagen.load_dump(args.data)
    elif args.csv:
        if not args.columns:
            raise ConfigError("columns", "--csv needs --columns")
        res = datagen.load_csv(args.csv, parse_int_list(args.columns))
        if res.dropped:
            print(f"# dropped {res.dropped} rows with null or invalid fields", file=sys.stderr)
        ds = res.dataset
    else:
        raise ConfigError("data", "no dataset given (--data or --csv)")
    return ds if args.raw else normalize(ds)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="dataset file written by 'generate' (id column first)")
    p.add_argument("--csv", help="arbitrary CSV file; pick dimensions with --columns")
    p.add_argument("--columns", help="zero-based column indices, e.g. 1,2,5")
    p.add_argument("--raw", action="store_true",
                   help="skip normalization and partition between each dimension's min and max")


def cmd_generate(args) -> int:
    if args.kind == "anticorrelated":
        ds = datagen.gen_anticorrelated(args.n, args.d, args.seed)
    else:
        ds = datagen.gen_circle_lowerbound(args.m)
    datagen.dump_csv(ds, sys.stdout if args.output == "-" else args.output)
    return 0


def cmd_select(args) -> int:
    ds = _load(args)
    ans = selector.select(args.algorithm, ds, args.k, args.inc, args.itr_max, args.seed,
                          raw_domain=args.raw)
    print(f"# {args.algorithm}: k={args.k} n={ds.n} d={ds.d}"
          + (f" t={ans.t_base}" if ans.t_base is not None else ""))
    print("id,provenance," + ",".join(f"c{j}" for j in range(ds.d)))
    for pid, prov in zip(ans.members, ans.provenance):
        coords = ",".join(format(float(x), ".10g") for x in ds.coords[pid])
        print(f'{pid},"{prov}",{coords}')
    return 0


def cmd_evaluate(args) -> int:
    ds = _load(args)
    ids = parse_int_list(args.ids)
    F = utility.sample_family(args.family, ds.d, args.num_functions, args.seed, args.b)
    report = utility.max_regret_ratio(ds, ids, F)
    print(report.summary(F))
    return 0


def cmd_bounds(args) -> int:
    bs = [float(b) for b in args.b.split(",")] if args.b else []
    print("k,d,t,muf_upper,muf_lower_scale" + "".join(f",ces_upper_b{b:g}" for b in bs))
    for d in parse_int_list(args.d):
        for k in parse_int_list(args.k):
            if k < d:
                continue
            r = bounds.bound_report(k, d, bs)
            ces = "".join(f",{r.ces_upper[b]:.6f}" for b in bs)
            print(f"{k},{d},{r.t},{r.muf_upper:.6f},{r.muf_lower_scale:.6f}{ces}")
    return 0


def cmd_bench(args) -> int:
    cfg = harness.load_config(args.config, args.set or [])
    rows = harness.run_experiment(cfg)
    if args.output and args.output != "-":
        with open(args.output, "w", newline="") as fh:
            harness.write_rows(rows, fh)
    else:
        harness.write_rows(rows, sys.stdout)
    if args.summary:
        for r in rows:
            bound = f" (bound {r['bound']:.2%})" if r["bound"] is not None else ""
            print(f"# {r['algorithm']:>16} k={r['k']:<3} RR={r['max_rr']:.4%}{bound}",
                  file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kregret", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    p.add_argument("--kind", choices=["anticorrelated", "circle"], default="anticorrelated")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--m", type=int, default=10_000, help="circle points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("select", help="run one selection algorithm")
    _add_data_args(p)
    p.add_argument("--algorithm", choices=selector.ALGORITHMS, default="minvar")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--inc", type=int, default=None)
    p.add_argument("--itr-max", type=int, default=11)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="max regret ratio of a subset over sampled functions")
    _add_data_args(p)
    p.add_argument("--ids", required=True, help="subset ids, e.g. 0,4,7 or 0..9")
    p.add_argument("--family", choices=harness.FAMILIES, default=utility.MUF)
    p.add_argument("--b", type=float, default=None, help="fixed CES exponent")
    p.add_argument("--num-functions", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bounds", help="closed-form bounds over a (k, d) grid")
    p.add_argument("--k", default="10..34:2")
    p.add_argument("--d", default="2..10")
    p.add_argument("--b", default="", help="CES exponents, e.g. 0.1,0.5,0.9")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("bench", help="run an experiment matrix from a config file")
    p.add_argument("config", nargs="?", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a setting")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--summary", action="store_true", help="also print percentages to stderr")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        if args.command != "bench":
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
