"""Benchmark drivers producing CSV records.

CSV columns: algorithm, pattern_kind, n, w_or_file, rep, seconds, checksum,
counter1, counter2.  ``counter1`` counts frontal assemblies (columns or
cliques), ``counter2`` counts re-triangularization reflections.  Every
configuration writes one row per repetition and a ``median`` row.
"""

import csv
import hashlib
import os
import time
from dataclasses import dataclass

import numpy as np

from . import hessian as hs
from . import multifrontal as mf
from . import oracle
from . import supernodal as sn
from .chordal import clique_tree
from .mmio import read_pattern
from .ordering import order_heuristic
from .patterns import arrow, band
from .symbolic import SparseSymMatrix, etree_only, fill_pattern

__all__ = [
    "ALGORITHMS", "BenchRecord", "CSV_FIELDS", "InputError", "checksum", "make_pattern",
    "bench_pattern", "bench_band_arrow", "bench_pattern_file", "bench_sparse_hessian",
    "write_csv",
]

CSV_FIELDS = ("algorithm", "pattern_kind", "n", "w_or_file", "rep", "seconds", "checksum",
              "counter1", "counter2")

ALGORITHMS = (
    "factor", "product", "projected_inverse", "completion", "completion_factored",
    "sn_factor", "sn_projected_inverse", "sn_completion", "hess_apply", "hess_solve",
    "hess_factor_apply",
)


class InputError(ValueError):
    """Bad command-line geometry, file or resource request."""


@dataclass
class BenchRecord:
    algorithm: str
    pattern_kind: str
    n: int
    w_or_file: str
    rep: str
    seconds: float
    checksum: str
    counter1: int = 0
    counter2: int = 0

    def row(self):
        return [self.algorithm, self.pattern_kind, self.n, self.w_or_file, self.rep,
                f"{self.seconds:.6g}", self.checksum, self.counter1, self.counter2]


def checksum(values) -> str:
    """Short digest of values rounded to 10 significant digits."""
    v = np.asarray(values, dtype=float).ravel()
    text = "\n".join(f"{x:.10e}" for x in v)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def make_pattern(kind, n, w=None, seed=0, density=0.05, path=None):
    """(filled pattern, label) for a pattern source."""
    if kind in ("band", "arrow"):
        if w is None or w < 1:
            raise InputError("band/arrow patterns need --w >= 1")
        if n <= 3 * w:
            raise InputError(f"need n > 3*w (n={n}, w={w})")
        return (band(n, w) if kind == "band" else arrow(n, w)), str(w)
    if kind == "random-chordal":
        if n is None or n < 1:
            raise InputError("random-chordal needs --n >= 1")
        return oracle.gen_chordal(n, density, seed), f"density={density:g}"
    if kind == "file":
        if path is None:
            raise InputError("--pattern file needs --file PATH")
        if not os.path.exists(path):
            raise InputError(f"no such file: {path}")
        raw = read_pattern(path)
        return fill_pattern(raw, order_heuristic(raw)).pattern, os.path.basename(path)
    raise InputError(f"unknown pattern kind {kind!r}")


def _check_memory(sym, cap):
    need = sym.front_storage_bytes() + 8 * 6 * sym.pattern.nnz
    if cap is not None and need > cap:
        raise InputError(f"predicted storage {need / 2**20:.1f} MiB exceeds the cap "
                         f"{cap / 2**20:.1f} MiB")


def _rel(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300))


class _Instance:
    """Lazily built inputs shared by all algorithms on one pattern."""

    def __init__(self, V, seed):
        self.V = V
        self.seed = seed
        self.sym = etree_only(V)
        self._cache = {}

    def get(self, key):
        if key not in self._cache:
            self._cache[key] = getattr(self, "_make_" + key)()
        return self._cache[key]

    def _make_X(self):
        return oracle.gen_spd(self.V, self.seed)

    def _make_S(self):
        return oracle.gen_completable(self.V, self.seed + 1)

    def _make_Y(self):
        return oracle.random_sym(self.V, self.seed + 2)

    def _make_F(self):
        return mf.factor(self.get("X"), self.sym)

    def _make_cf(self):
        return clique_tree(self.sym)

    def _make_B(self):
        return sn.sn_factor(self.get("X"), self.get("cf"))

    def _make_ctx(self):
        ctx = hs.HessianContext(self.get("F"))
        ctx.rbuf
        return ctx


def _runner(alg, inst):
    """(callable, values-of-result, counter1, counter2-of-result)."""
    n, sym = inst.V.n, inst.sym
    g = inst.get
    if alg == "factor":
        return (lambda: mf.factor(g("X"), sym)), lambda F: np.r_[F.L, F.D], n, lambda F: 0
    if alg == "product":
        return (lambda: mf.product(g("F"))), lambda X: X.values, n, lambda X: 0
    if alg == "projected_inverse":
        return (lambda: mf.projected_inverse(g("F"))), lambda S: S.values, n, lambda S: 0
    if alg == "completion":
        return (lambda: mf.completion(g("S"), sym)), lambda F: np.r_[F.L, F.D], n, lambda F: 0
    if alg == "completion_factored":
        return ((lambda: mf.completion_factored(g("S"), sym)), lambda F: np.r_[F.L, F.D], n,
                lambda F: F.rotations)
    if alg == "sn_factor":
        cf = g("cf")
        return (lambda: sn.sn_factor(g("X"), cf)), lambda B: np.r_[B.D, B.Lb], cf.size, \
            lambda B: 0
    if alg == "sn_projected_inverse":
        cf = g("cf")
        return (lambda: sn.sn_projected_inverse(g("B"))), lambda S: S.values, cf.size, \
            lambda S: 0
    if alg == "sn_completion":
        cf = g("cf")
        return (lambda: sn.sn_completion(g("S"), cf)), lambda B: np.r_[B.D, B.Lb], cf.size, \
            lambda B: B.rotations
    if alg == "hess_apply":
        return (lambda: hs.hess_apply(g("ctx"), g("Y"))), lambda T: T.values, n, lambda T: 0
    if alg == "hess_solve":
        return (lambda: hs.hess_solve(g("ctx"), g("Y"))), lambda T: T.values, n, lambda T: 0
    if alg == "hess_factor_apply":
        return (lambda: hs.hess_factor_apply(g("ctx"), g("Y"))), lambda W: W.values, n, \
            lambda W: 0
    raise InputError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")


def oracle_check(alg, inst, result, tol=1e-8):
    """Compare one benchmark result with the dense reference; returns (ok, error)."""
    g = inst.get
    V = inst.V
    Xd = g("X").todense()
    if alg in ("factor", "sn_factor"):
        err = _rel(result.todense(), Xd)
    elif alg in ("completion", "completion_factored", "sn_completion"):
        # the inverse of the completion must reproduce S on the pattern
        Z = np.linalg.inv(result.todense())
        err = _rel(oracle.dense_project(Z, V).values, g("S").values)
    elif alg == "product":
        err = _rel(result.values, g("X").values)
    elif alg in ("projected_inverse", "sn_projected_inverse"):
        err = _rel(result.values, oracle.dense_project(np.linalg.inv(Xd), V).values)
    else:
        Xi = np.linalg.inv(Xd)
        Y = g("Y")
        if alg == "hess_apply":
            err = _rel(result.values, oracle.dense_project(Xi @ Y.todense() @ Xi, V).values)
        elif alg == "hess_solve":
            T = oracle.dense_project(Xi @ result.todense() @ Xi, V)
            err = _rel(T.values, Y.values)
        else:
            ref = oracle.dense_project(Xi @ Y.todense() @ Xi, V).inner(Y)
            err = abs(result.inner(result) - ref) / max(abs(ref), 1e-300)
    return err <= tol, err


def _median(records, template):
    secs = float(np.median([r.seconds for r in records]))
    return BenchRecord(template.algorithm, template.pattern_kind, template.n, template.w_or_file,
                       "median", secs, template.checksum, template.counter1, template.counter2)


def bench_pattern(V, kind, label, algorithms, reps=3, seed=0, verify_cap=200, mem_cap=None,
                  checks=None):
    """Time each algorithm ``reps`` times on one pattern.

    Oracle outcomes for n <= ``verify_cap`` are appended to ``checks`` as
    (algorithm, label, ok, error).
    """
    inst = _Instance(V, seed)
    _check_memory(inst.sym, mem_cap)
    out = []
    for alg in algorithms:
        call, values, c1, c2 = _runner(alg, inst)
        recs = []
        result = call()  # warm-up, untimed
        for rep in range(reps):
            t0 = time.perf_counter()
            result = call()
            dt = time.perf_counter() - t0
            recs.append(BenchRecord(alg, kind, V.n, label, str(rep), dt, checksum(values(result)),
                                    c1, c2(result)))
        out.extend(recs)
        out.append(_median(recs, recs[-1]))
        if checks is not None and V.n <= verify_cap:
            ok, err = oracle_check(alg, inst, result)
            checks.append((alg, label, ok, err))
    return out


def bench_band_arrow(kind, n, ws, algorithms, reps=3, seed=0, verify_cap=200, mem_cap=None,
                     checks=None):
    out = []
    for w in ws:
        V, label = make_pattern(kind, n, w)
        out.extend(bench_pattern(V, kind, label, algorithms, reps, seed, verify_cap, mem_cap,
                                 checks))
    return out


def bench_pattern_file(path, algorithms, reps=3, seed=0, verify_cap=200, mem_cap=None,
                       checks=None):
    V, label = make_pattern("file", None, path=path)
    return bench_pattern(V, "file", label, algorithms, reps, seed, verify_cap, mem_cap, checks)


def random_argument(V, nnz, rng):
    """Matrix with ``nnz`` random stored positions set to standard normals."""
    Y = SparseSymMatrix(V)
    pos = rng.choice(V.nnz, size=min(nnz, V.nnz), replace=False)
    Y.values[pos] = rng.standard_normal(pos.size)
    return Y


def _median_time(f, reps):
    f()
    ts = []
    for _ in range(reps):
        t0 = time.perf_counter()
        f()
        ts.append(time.perf_counter() - t0)
    return float(np.median(ts))


def bench_sparse_hessian(V, kind, label, trials=10, nnz=2, seed=0, reps=3, mem_cap=None):
    """Pruned versus full Hessian-factor evaluation on random sparse arguments.

    Per trial writes a ``hess_factor_apply`` row and a
    ``hess_factor_apply_sparse`` row (counter1 = tree nodes visited).  A final
    ``sparse_speedup`` row carries the mean of the per-trial ratios
    full/pruned in the seconds column.
    """
    sym = etree_only(V)
    _check_memory(sym, mem_cap)
    ctx = hs.HessianContext(mf.factor(oracle.gen_spd(V, seed), sym))
    ctx.rbuf
    rng = np.random.default_rng(seed)
    out, ratios, worst = [], [], 0.0
    for trial in range(trials):
        Y = random_argument(V, nnz, rng)
        full = hs.hess_factor_apply(ctx, Y)
        pruned = hs.hess_factor_apply_sparse(ctx, Y)
        worst = max(worst, float(np.abs(full.values - pruned.matrix.values).max(initial=0.0)))
        tf = _median_time(lambda: hs.hess_factor_apply(ctx, Y), reps)
        tp = _median_time(lambda: hs.hess_factor_apply_sparse(ctx, Y), reps)
        ratios.append(tf / tp)
        out.append(BenchRecord("hess_factor_apply", kind, V.n, label, str(trial), tf,
                               checksum(full.values), V.n, 0))
        out.append(BenchRecord("hess_factor_apply_sparse", kind, V.n, label, str(trial), tp,
                               checksum(pruned.matrix.values), pruned.visited, 0))
    out.append(BenchRecord("sparse_speedup", kind, V.n, label, "mean",
                           float(np.mean(ratios)) if ratios else 1.0, checksum([0.0]),
                           trials, nnz))
    return out, ratios, worst


def write_csv(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.row())
