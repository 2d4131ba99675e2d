"""Property suite behind ``chordal-logdet verify``.

Each property draws seeded random instances, compares a fast path with a
dense reference and reports the worst error seen against its tolerance.
"""

from dataclasses import dataclass

import numpy as np

from . import hessian as hs
from . import multifrontal as mf
from . import oracle
from . import supernodal as sn
from .chordal import clique_tree, singleton_forest, verify_clique_tree
from .patterns import arrow, band
from .symbolic import (SparseSymMatrix, etree_only, extend_add, extract, fill_pattern,
                       SparsityPattern)

__all__ = ["PropertyResult", "PROPERTIES", "run_suite", "format_report"]


@dataclass
class PropertyResult:
    suite: str
    name: str
    tol: float
    worst: float

    @property
    def ok(self):
        return bool(self.worst <= self.tol)


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def _patterns(rng, n_max, trials):
    """Mixture of random chordal, band and arrow patterns."""
    out = []
    for t in range(trials):
        n = int(rng.integers(2, n_max + 1))
        kind = t % 3
        if kind == 0:
            out.append(oracle.gen_chordal(n, float(rng.uniform(0.02, 0.3)), int(rng.integers(1 << 30))))
        elif kind == 1:
            out.append(band(n, int(rng.integers(1, max(2, n // 3) + 1))))
        else:
            out.append(arrow(n, int(rng.integers(1, max(2, n // 3) + 1))))
    return out


# -- symbolic ----------------------------------------------------------------

def _p_fill(rng, n_max, trials):
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, min(n_max, 40) + 1))
        i, j = np.tril_indices(n, -1)
        keep = rng.random(i.size) < rng.uniform(0.05, 0.3)
        raw = SparsityPattern.from_entries(n, i[keep], j[keep])
        V = fill_pattern(raw).pattern
        worst = max(worst, len(oracle.fill_violations(V)), float(V != oracle.dense_fill(raw)))
    return worst


def _p_etree(rng, n_max, trials):
    bad = 0
    for V in _patterns(rng, n_max, trials):
        sym = etree_only(V)
        pos = np.empty(V.n, dtype=np.int64)
        pos[sym.postorder] = np.arange(V.n)
        for k in range(V.n):
            Ik = sym.colset(k)
            p = sym.parent[k]
            if Ik.size:
                bad += p != Ik[0] or pos[k] >= pos[p]
            else:
                bad += p != -1
    return float(bad)


def _p_extend_add(rng, n_max, trials):
    worst = 0.0
    for V in _patterns(rng, n_max, trials):
        sym = etree_only(V)
        for i in np.flatnonzero(sym.parent >= 0)[:5]:
            j = sym.parent[i]
            m, d = sym.front(j).size, sym.colset(i).size
            U = rng.standard_normal((d, d))
            U += U.T
            W = rng.standard_normal((m, m))
            W += W.T
            rm = sym.relmap(i)
            lhs = np.sum(extend_add(np.zeros((m, m)), U, rm) * W)
            rhs = np.sum(U * extract(W, rm))
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1.0))
    return worst


def _p_idempotent(rng, n_max, trials):
    bad = 0
    for V in _patterns(rng, n_max, trials):
        bad += fill_pattern(V).pattern != V
    return float(bad)


# -- chordal -----------------------------------------------------------------

def _p_clique_tree(rng, n_max, trials):
    bad = 0
    for V in _patterns(rng, n_max, trials):
        sym = etree_only(V)
        for pick in ("max-degree", "first-eligible"):
            cf = clique_tree(sym, pick)
            bad += verify_clique_tree(cf) is not None
            cols = [set(sym.front(j).tolist()) for j in range(V.n)]
            maximal = {j for j in range(V.n) if not any(
                k != j and cols[j] < cols[k] for k in range(V.n))}
            bad += maximal != set(cf.reps.tolist())
    return float(bad)


# -- multifrontal ------------------------------------------------------------

def _instances(rng, n_max, trials):
    for V in _patterns(rng, n_max, trials):
        yield V, etree_only(V), int(rng.integers(1 << 30))


def _p_roundtrip(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, n_max, trials):
        X = oracle.gen_spd(V, seed)
        worst = max(worst, _rel(mf.product(mf.factor(X, sym)).values, X.values))
    return worst


def _p_pinv(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, n_max, trials):
        X = oracle.gen_spd(V, seed)
        ref = oracle.dense_project(np.linalg.inv(X.todense()), V)
        worst = max(worst, _rel(mf.projected_inverse(mf.factor(X, sym)).values, ref.values))
    return worst


def _p_completion(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, n_max, trials):
        S = oracle.gen_completable(V, seed)
        Z = np.linalg.inv(mf.completion(S, sym).todense())
        worst = max(worst, _rel(oracle.dense_project(Z, V).values, S.values))
    return worst


def _p_completion_factored(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, n_max, trials):
        S = oracle.gen_completable(V, seed)
        a, b = mf.completion(S, sym), mf.completion_factored(S, sym)
        worst = max(worst, _rel(np.r_[b.L, b.D], np.r_[a.L, a.D]))
    return worst


def _p_gradient(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, min(n_max, 40), trials):
        X = oracle.gen_spd(V, seed)
        Y = oracle.random_sym(V, seed + 1)
        grad = -mf.projected_inverse(mf.factor(X, sym))
        fd = oracle.finite_diff_gradient(X, Y)
        exact = grad.inner(Y)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-12))
    return worst


# -- hessian -----------------------------------------------------------------

def _contexts(rng, n_max, trials):
    for V, sym, seed in _instances(rng, n_max, trials):
        X = oracle.gen_spd(V, seed)
        yield V, X, hs.HessianContext(mf.factor(X, sym)), seed


def _p_hess_dense(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        Y = oracle.random_sym(V, seed + 1)
        Xi = np.linalg.inv(X.todense())
        ref = oracle.dense_project(Xi @ Y.todense() @ Xi, V)
        worst = max(worst, _rel(hs.hess_apply(ctx, Y).values, ref.values))
    return worst


def _p_hess_fd(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, min(n_max, 40), trials):
        Y = oracle.random_sym(V, seed + 1)
        fd = oracle.finite_diff_hessian(X, Y)
        worst = max(worst, _rel(fd.values, hs.hess_apply(ctx, Y).values))
    return worst


def _p_self_adjoint(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        Y, Z = oracle.random_sym(V, seed + 1), oracle.random_sym(V, seed + 2)
        a, b = hs.hess_apply(ctx, Y).inner(Z), Y.inner(hs.hess_apply(ctx, Z))
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-12))
    return worst


def _p_positive(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        Y = oracle.random_sym(V, seed + 1)
        worst = max(worst, float(hs.hess_apply(ctx, Y).inner(Y) <= 0))
    return worst


def _p_solve(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        Y = oracle.random_sym(V, seed + 1)
        worst = max(worst, _rel(hs.hess_solve(ctx, hs.hess_apply(ctx, Y)).values, Y.values),
                    _rel(hs.hess_apply(ctx, hs.hess_solve(ctx, Y)).values, Y.values))
    return worst


def _p_factor_composition(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        Y = oracle.random_sym(V, seed + 1)
        RR = hs.hess_factor_adjoint(ctx, hs.hess_factor_apply(ctx, Y))
        worst = max(worst, _rel(RR.values, hs.hess_apply(ctx, Y).values))
    return worst


def _p_factor_adjoint(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        Y, W = oracle.random_sym(V, seed + 1), oracle.random_sym(V, seed + 2)
        a = hs.hess_factor_apply(ctx, Y).inner(W)
        b = Y.inner(hs.hess_factor_adjoint(ctx, W))
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-12))
    return worst


def _p_sparse(rng, n_max, trials):
    worst = 0.0
    for V, X, ctx, seed in _contexts(rng, n_max, trials):
        for nnz in (0, 1, 2, 3):
            Y = SparseSymMatrix(V)
            pos = rng.choice(V.nnz, size=min(nnz, V.nnz), replace=False)
            Y.values[pos] = rng.standard_normal(pos.size)
            full = hs.hess_factor_apply(ctx, Y).values
            worst = max(worst, float(np.abs(hs.hess_factor_apply_sparse(ctx, Y).matrix.values
                                            - full).max(initial=0.0)))
    return worst


def _p_dual(rng, n_max, trials):
    """Inverse Hessian at the completion versus differences of the completion map."""
    worst = 0.0
    for V, sym, seed in _instances(rng, min(n_max, 15), trials):
        S = oracle.gen_completable(V, seed)
        ctx = hs.HessianContext(mf.completion(S, sym), S)
        dS = oracle.random_sym(V, seed + 1)
        t = 1e-5 * S.norm() / dS.norm()
        hi = mf.product(mf.completion(S + t * dS, sym))
        lo = mf.product(mf.completion(S - t * dS, sym))
        # grad f*(S) = -completion(S) and the dual Hessian is hess_solve at X
        fd = (hi - lo) * (-0.5 / t)
        worst = max(worst, _rel(fd.values, hs.hess_solve(ctx, dS).values))
    return worst


# -- supernodal --------------------------------------------------------------

def _p_sn(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, n_max, trials):
        X = oracle.gen_spd(V, seed)
        S = oracle.gen_completable(V, seed + 1)
        F = mf.factor(X, sym)
        for pick in ("max-degree", "first-eligible"):
            cf = clique_tree(sym, pick)
            B = sn.sn_factor(X, cf)
            Fs = sn.to_scalar_factor(B)
            worst = max(worst, _rel(np.r_[Fs.L, Fs.D], np.r_[F.L, F.D]))
            worst = max(worst, _rel(sn.sn_projected_inverse(B).values,
                                    mf.projected_inverse(F).values))
            G = mf.completion(S, sym)
            for fac in (False, True):
                Gs = sn.to_scalar_factor(sn.sn_completion(S, cf, fac))
                worst = max(worst, _rel(np.r_[Gs.L, Gs.D], np.r_[G.L, G.D]))
    return worst


def _p_singleton(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, n_max, trials):
        X = oracle.gen_spd(V, seed)
        F = mf.factor(X, sym)
        B = sn.sn_factor(X, singleton_forest(sym))
        Fs = sn.to_scalar_factor(B)
        worst = max(worst, _rel(np.r_[Fs.L, Fs.D], np.r_[F.L, F.D]),
                    _rel(sn.sn_projected_inverse(B).values, mf.projected_inverse(F).values))
    return worst


# -- oracle ------------------------------------------------------------------

def _p_dense_hessian(rng, n_max, trials):
    worst = 0.0
    for V, sym, seed in _instances(rng, min(n_max, 15), trials):
        S = oracle.gen_completable(V, seed)
        Xh = mf.completion(S, sym).todense()
        H = oracle.dense_hessian_matrix(Xh, V)
        ctx = hs.HessianContext(mf.completion(S, sym), S)
        # columns of the dual Hessian, i.e. hess_solve on basis elements
        cols = []
        for q in range(V.nnz):
            e = np.zeros(V.nnz)
            e[q] = 1.0
            cols.append(oracle.to_coords(hs.hess_solve(ctx, oracle.from_coords(V, e))))
        Hd = np.array(cols).T
        worst = max(worst, _rel(H @ Hd, np.eye(V.nnz)), _rel(H, H.T))
    return worst


PROPERTIES = {
    "symbolic": [("fill_property_and_dense_fill", 0.0, _p_fill),
                 ("etree_parent_and_postorder", 0.0, _p_etree),
                 ("extend_add_extract_adjoint", 1e-12, _p_extend_add),
                 ("fill_idempotent", 0.0, _p_idempotent)],
    "chordal": [("clique_tree_properties", 0.0, _p_clique_tree)],
    "multifrontal": [("factor_product_roundtrip", 1e-12, _p_roundtrip),
                     ("projected_inverse_dense", 1e-10, _p_pinv),
                     ("completion_roundtrip", 1e-9, _p_completion),
                     ("completion_factored_agrees", 1e-11, _p_completion_factored),
                     ("gradient_finite_difference", 1e-5, _p_gradient)],
    "hessian": [("hess_apply_dense", 1e-9, _p_hess_dense),
                ("hess_apply_finite_difference", 1e-5, _p_hess_fd),
                ("hess_self_adjoint", 1e-10, _p_self_adjoint),
                ("hess_positive_definite", 0.0, _p_positive),
                ("hess_solve_inverse", 1e-8, _p_solve),
                ("factor_composition", 1e-9, _p_factor_composition),
                ("factor_adjoint_pairing", 1e-10, _p_factor_adjoint),
                ("sparse_equals_dense", 1e-12, _p_sparse),
                ("dual_hessian_relation", 1e-4, _p_dual)],
    "supernodal": [("supernodal_agrees", 1e-11, _p_sn),
                   ("singleton_supernodes_exact", 1e-14, _p_singleton)],
    "oracle": [("dense_hessian_dual_inverse", 1e-8, _p_dense_hessian)],
}


def run_suite(suites=None, seed=0, n_max=40, trials=6, inject=None):
    """Run the selected suites; ``inject`` names a property whose result is perturbed."""
    suites = list(PROPERTIES) if suites in (None, "all") else list(suites)
    out = []
    for s in suites:
        if s not in PROPERTIES:
            raise ValueError(f"unknown suite {s!r}; choose from {', '.join(PROPERTIES)}")
        for k, (name, tol, fn) in enumerate(PROPERTIES[s]):
            rng = np.random.default_rng([seed, len(s), k])
            worst = fn(rng, n_max, trials)
            if inject == name:
                worst += 1e-3
            out.append(PropertyResult(s, name, tol, float(worst)))
    return out


def format_report(results):
    lines = [f"{'suite':<13}{'property':<32}{'tolerance':>11}{'worst':>12}  status"]
    for r in results:
        lines.append(f"{r.suite:<13}{r.name:<32}{r.tol:>11.1e}{r.worst:>12.3e}  "
                     f"{'PASS' if r.ok else 'FAIL'}")
    bad = sum(not r.ok for r in results)
    lines.append(f"{len(results) - bad} passed, {bad} failed")
    return "\n".join(lines)
