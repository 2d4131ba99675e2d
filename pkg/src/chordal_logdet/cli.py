"""Command-line interface: ``chordal-logdet {bench,sparse-hessian,verify}``.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

import argparse
import contextlib
import sys

from . import bench
from .mmio import MMParseError
from .verify import PROPERTIES, format_report, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_pattern_args(p):
    p.add_argument("--pattern", choices=("band", "arrow", "file", "random-chordal"),
                   default="band")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--file", help="Matrix Market file for --pattern file")
    p.add_argument("--density", type=float, default=0.05,
                   help="edge probability for --pattern random-chordal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mem-cap", type=float, default=2**30,
                   help="refuse instances whose predicted storage exceeds this many bytes")
    p.add_argument("--out", help="write CSV here instead of standard output")


def build_parser():
    ap = argparse.ArgumentParser(prog="chordal-logdet",
                                 description="Log-det barrier sweeps on chordal patterns.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="time algorithms on band, arrow, random or file patterns")
    _add_pattern_args(b)
    b.add_argument("--w", type=_int_list, default=[10],
                   help="bandwidth(s) for band/arrow, comma separated")
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--algorithms", default="projected_inverse,completion,completion_factored",
                   help=f"comma list from: {','.join(bench.ALGORITHMS)}")
    b.add_argument("--verify-cap", type=int, default=200,
                   help="cross-check against dense references when n <= this")

    s = sub.add_parser("sparse-hessian", help="pruned versus full Hessian factor evaluation")
    _add_pattern_args(s)
    s.add_argument("--w", type=int, default=50)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--nnz", type=int, default=2, help="random nonzeros per argument")
    s.add_argument("--reps", type=int, default=3)

    v = sub.add_parser("verify", help="run the property suite against dense references")
    v.add_argument("--suite", default="all", help=f"comma list from: {','.join(PROPERTIES)}")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--n-max", type=int, default=40)
    v.add_argument("--trials", type=int, default=6)
    v.add_argument("--inject", metavar="PROPERTY",
                   help="test hook: perturb the named property's result")
    return ap


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _cmd_bench(args):
    algs = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    bad = [a for a in algs if a not in bench.ALGORITHMS]
    if bad:
        raise bench.InputError(f"unknown algorithm {bad[0]!r}")
    checks = []
    common = dict(reps=args.reps, seed=args.seed, verify_cap=args.verify_cap,
                  mem_cap=args.mem_cap, checks=checks)
    if args.pattern in ("band", "arrow"):
        recs = bench.bench_band_arrow(args.pattern, args.n, args.w, algs, **common)
    elif args.pattern == "file":
        recs = bench.bench_pattern_file(args.file, algs, **common)
    else:
        V, label = bench.make_pattern("random-chordal", args.n, seed=args.seed,
                                      density=args.density)
        recs = bench.bench_pattern(V, args.pattern, label, algs, **common)
    with _output(args.out) as fh:
        bench.write_csv(recs, fh)
    failed = [c for c in checks if not c[2]]
    for alg, label, ok, err in checks:
        print(f"check {alg} [{label}]: {'ok' if ok else 'FAILED'} (error {err:.2e})",
              file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def _cmd_sparse(args):
    if args.pattern in ("band", "arrow"):
        V, label = bench.make_pattern(args.pattern, args.n, args.w)
    elif args.pattern == "file":
        V, label = bench.make_pattern("file", None, path=args.file)
    else:
        V, label = bench.make_pattern("random-chordal", args.n, seed=args.seed,
                                      density=args.density)
    recs, ratios, worst = bench.bench_sparse_hessian(V, args.pattern, label, args.trials,
                                                     args.nnz, args.seed, args.reps,
                                                     args.mem_cap)
    with _output(args.out) as fh:
        bench.write_csv(recs, fh)
    mean = sum(ratios) / len(ratios) if ratios else float("nan")
    print(f"mean speedup {mean:.2f} over {len(ratios)} trials; "
          f"largest deviation from the full evaluation {worst:.1e}", file=sys.stderr)
    return EXIT_VERIFY if worst > 1e-12 else EXIT_OK


def _cmd_verify(args):
    suites = None if args.suite == "all" else [s.strip() for s in args.suite.split(",")]
    try:
        results = run_suite(suites, seed=args.seed, n_max=args.n_max, trials=args.trials,
                            inject=args.inject)
    except ValueError as e:
        raise bench.InputError(str(e))
    print(format_report(results))
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"bench": _cmd_bench, "sparse-hessian": _cmd_sparse, "verify": _cmd_verify}
    try:
        return handler[args.command](args)
    except (bench.InputError, MMParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
