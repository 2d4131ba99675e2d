"""Compiled sweeps over elimination trees and clique trees.

Every kernel takes the column-compressed pattern (``cp``, ``ri``), the
relative-index map ``rel`` and a traversal order, and works on flat value
arrays aligned with ``ri``.  Update matrices live on an explicit LIFO
buffer; ``info[0]`` reports failures (1: not positive definite, 2:
numerical breakdown) and ``info[1]`` the offending column or clique.
"""

import math

import numpy as np
from numba import njit

OK = 0
NOT_PD = 1
BREAKDOWN = 2


# ---------------------------------------------------------------------------
# dense helpers


@njit(cache=True)
def _chol_lower(A, m, thresh):
    """In-place lower Cholesky of A[:m, :m]; False if a pivot is <= thresh."""
    for j in range(m):
        s = A[j, j]
        for k in range(j):
            s -= A[j, k] * A[j, k]
        if not s > thresh:
            return False
        r = math.sqrt(s)
        A[j, j] = r
        for i in range(j + 1, m):
            t = A[i, j]
            for k in range(j):
                t -= A[i, k] * A[j, k]
            A[i, j] = t / r
    return True


@njit(cache=True)
def _chol_solve(C, m, b):
    """Solve (C C^T) x = b in place, C lower from :func:`_chol_lower`."""
    for i in range(m):
        t = b[i]
        for k in range(i):
            t -= C[i, k] * b[k]
        b[i] = t / C[i, i]
    for i in range(m - 1, -1, -1):
        t = b[i]
        for k in range(i + 1, m):
            t -= C[k, i] * b[k]
        b[i] = t / C[i, i]


@njit(cache=True)
def _upper_solve(R, m, b):
    """b := R^{-1} b for upper triangular R."""
    for i in range(m - 1, -1, -1):
        t = b[i]
        for k in range(i + 1, m):
            t -= R[i, k] * b[k]
        b[i] = t / R[i, i]


@njit(cache=True)
def _upper_t_solve(R, m, b):
    """b := R^{-T} b for upper triangular R."""
    for i in range(m):
        t = b[i]
        for k in range(i):
            t -= R[k, i] * b[k]
        b[i] = t / R[i, i]


@njit(cache=True)
def _rev_chol(A, m, R, thresh):
    """Upper triangular R with R R^T = A[:m, :m]; False on breakdown."""
    for j in range(m - 1, -1, -1):
        s = A[j, j]
        for k in range(j + 1, m):
            s -= R[j, k] * R[j, k]
        if not s > thresh:
            return False
        r = math.sqrt(s)
        R[j, j] = r
        for i in range(j):
            t = A[i, j]
            for k in range(j + 1, m):
                t -= R[i, k] * R[j, k]
            R[i, j] = t / r
        for i in range(j + 1, m):
            R[i, j] = 0.0
    return True


@njit(cache=True)
def _reduce_rows(C, pr, pc, rows):
    """Triangularize C[:pr, :pc] (selected rows of an upper factor) from the right.

    Row ``k`` of C is row ``rows[k]`` of an upper triangular matrix.  Householder
    reflections acting on columns compress row ``k`` into column
    ``pc - pr + k``, processing rows bottom-up.  On return C[:, pc-pr:]
    is upper triangular with nonnegative diagonal and the same C C^T.
    Returns the number of nontrivial reflections.
    """
    nrot = 0
    v = np.empty(pc)
    for k in range(pr - 1, -1, -1):
        ck = pc - pr + k
        s0 = rows[k]
        t = ck - s0 + 1
        if t <= 1:
            continue
        nrm = 0.0
        for q in range(t):
            v[q] = C[k, s0 + q]
            nrm += v[q] * v[q]
        nrm = math.sqrt(nrm)
        if nrm == 0.0:
            continue
        nrot += 1
        last = v[t - 1]
        alpha = -nrm if last >= 0.0 else nrm
        v[t - 1] = last - alpha
        vv = 0.0
        for q in range(t):
            vv += v[q] * v[q]
        for r in range(k):
            dot = 0.0
            for q in range(t):
                dot += C[r, s0 + q] * v[q]
            f = 2.0 * dot / vv
            for q in range(t):
                C[r, s0 + q] -= f * v[q]
        for q in range(t - 1):
            C[k, s0 + q] = 0.0
        C[k, ck] = alpha
    off = pc - pr
    for q in range(pr):
        if C[q, off + q] < 0.0:
            for r in range(q + 1):
                C[r, off + q] = -C[r, off + q]
    return nrot


@njit(cache=True)
def _child_factor(R, d, rows, pr, sjj, s_col, Rc, C, thresh):
    """Factor of a child update matrix from the parent factor.

    ``R`` (d x d, upper) factors V_j; ``rows`` are the positions of
    I_i \\ {j} inside I_j; ``s_col`` holds S_{I_j j}.  Writes the
    (pr+1) x (pr+1) factor of V_i into ``Rc``.  Returns (ok, reflections).
    """
    for k in range(pr):
        rk = rows[k]
        for q in range(d):
            C[k, q] = R[rk, q]
    nrot = _reduce_rows(C, pr, d, rows)
    off = d - pr
    beta = np.empty(pr)
    for k in range(pr):
        beta[k] = s_col[rows[k]]
    for i in range(pr - 1, -1, -1):
        t = beta[i]
        for k in range(i + 1, pr):
            t -= C[i, off + k] * beta[k]
        beta[i] = t / C[i, off + i]
    a2 = sjj
    for k in range(pr):
        a2 -= beta[k] * beta[k]
    if not a2 > thresh:
        return False, nrot
    Rc[0, 0] = math.sqrt(a2)
    for k in range(pr):
        Rc[0, k + 1] = beta[k]
        Rc[k + 1, 0] = 0.0
        for q in range(pr):
            Rc[k + 1, q + 1] = C[k, off + q]
    return True, nrot


# ---------------------------------------------------------------------------
# multifrontal factorization and product


@njit(cache=True)
def mf_factor(cp, ri, rel, post, chptr, chlist, xv, lv, dv, buf, maxm, thresh, info):
    n = cp.size - 1
    F = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    item_id = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        for a in range(m):
            for b in range(a + 1):
                F[a, b] = 0.0
            F[a, 0] = xv[p0 + a]
        for c in range(chptr[j + 1] - chptr[j]):
            top -= 1
            off = item_off[top]
            i = item_id[top]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            for a in range(di):
                ra = rel[rp + a]
                base = off + a * di
                for b in range(a + 1):
                    F[ra, rel[rp + b]] += buf[base + b]
            ptr = off
        piv = F[0, 0]
        if not piv > thresh:
            info[0] = NOT_PD
            info[1] = j
            return
        dv[j] = piv
        lv[p0] = 1.0
        for a in range(1, m):
            lv[p0 + a] = F[a, 0] / piv
        d = m - 1
        if d > 0:
            for a in range(d):
                la = piv * lv[p0 + 1 + a]
                base = ptr + a * d
                for b in range(a + 1):
                    buf[base + b] = F[a + 1, b + 1] - la * lv[p0 + 1 + b]
            item_off[top] = ptr
            item_id[top] = j
            top += 1
            ptr += d * d
    info[0] = OK


@njit(cache=True)
def mf_product(cp, ri, rel, post, chptr, chlist, lv, dv, xv, buf, maxm):
    n = cp.size - 1
    F = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    item_id = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        dj = dv[j]
        F[0, 0] = dj
        for a in range(1, m):
            la = dj * lv[p0 + a]
            F[a, 0] = la
            for b in range(1, a + 1):
                F[a, b] = la * lv[p0 + b]
        for c in range(chptr[j + 1] - chptr[j]):
            top -= 1
            off = item_off[top]
            i = item_id[top]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            for a in range(di):
                ra = rel[rp + a]
                base = off + a * di
                for b in range(a + 1):
                    F[ra, rel[rp + b]] -= buf[base + b]
            ptr = off
        for a in range(m):
            xv[p0 + a] = F[a, 0]
        d = m - 1
        if d > 0:
            for a in range(d):
                base = ptr + a * d
                for b in range(a + 1):
                    buf[base + b] = -F[a + 1, b + 1]
            item_off[top] = ptr
            item_id[top] = j
            top += 1
            ptr += d * d


# ---------------------------------------------------------------------------
# projected inverse and completion (reverse sweeps)


@njit(cache=True)
def _pop_full(buf, off, d, B):
    """Copy a stacked d x d matrix into B[1:, 1:]."""
    for a in range(d):
        base = off + a * d
        for b in range(d):
            B[a + 1, b + 1] = buf[base + b]


@njit(cache=True)
def _push_children(j, cp, rel, chptr, chlist, B, buf, ptr, item_off, top):
    """Push E^T B E for every child of j; returns the new (ptr, top)."""
    for c in range(chptr[j], chptr[j + 1]):
        i = chlist[c]
        rp = cp[i] + 1
        di = cp[i + 1] - rp
        item_off[top] = ptr
        top += 1
        for a in range(di):
            ra = rel[rp + a]
            base = ptr + a * di
            for b in range(di):
                buf[base + b] = B[ra, rel[rp + b]]
        ptr += di * di
    return ptr, top


@njit(cache=True)
def mf_projected_inverse(cp, ri, rel, post, parent, chptr, chlist, lv, dv, sv, buf, maxm):
    n = cp.size - 1
    B = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        if parent[j] >= 0:
            top -= 1
            ptr = item_off[top]
            _pop_full(buf, ptr, d, B)
        sjj = 1.0 / dv[j]
        for a in range(d):
            s = 0.0
            for b in range(d):
                s -= B[a + 1, b + 1] * lv[p0 + 1 + b]
            B[a + 1, 0] = s
            B[0, a + 1] = s
            sv[p0 + 1 + a] = s
            sjj -= s * lv[p0 + 1 + a]
        B[0, 0] = sjj
        sv[p0] = sjj
        ptr, top = _push_children(j, cp, rel, chptr, chlist, B, buf, ptr, item_off, top)


@njit(cache=True)
def mf_completion(cp, ri, rel, post, parent, chptr, chlist, sv, lv, dv, buf, maxm, thresh, info):
    n = cp.size - 1
    B = np.zeros((maxm, maxm))
    W = B[1:, 1:]
    x = np.empty(maxm)
    item_off = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        if parent[j] >= 0:
            top -= 1
            ptr = item_off[top]
            _pop_full(buf, ptr, d, B)
        sjj = sv[p0]
        B[0, 0] = sjj
        for a in range(d):
            B[a + 1, 0] = sv[p0 + 1 + a]
            B[0, a + 1] = sv[p0 + 1 + a]
        # the children only need S, so push them before V_j is overwritten
        ptr, top = _push_children(j, cp, rel, chptr, chlist, B, buf, ptr, item_off, top)
        if not _chol_lower(W, d, 0.0):
            info[0] = NOT_PD
            info[1] = j
            return
        for a in range(d):
            x[a] = sv[p0 + 1 + a]
        _chol_solve(W, d, x)
        schur = sjj
        for a in range(d):
            lv[p0 + 1 + a] = -x[a]
            schur -= sv[p0 + 1 + a] * x[a]
        if not schur > thresh:
            info[0] = NOT_PD
            info[1] = j
            return
        dv[j] = 1.0 / schur
        lv[p0] = 1.0
    info[0] = OK


@njit(cache=True)
def mf_completion_factored(cp, ri, rel, post, parent, chptr, chlist, sv, lv, dv, buf, maxm,
                           thresh, info):
    """Completion propagating upper factors V_j = R_j R_j^T.  info[2] counts reflections."""
    n = cp.size - 1
    R = np.zeros((maxm, maxm))
    C = np.zeros((maxm, maxm))
    Rc = np.zeros((maxm, maxm))
    x = np.empty(maxm)
    rows = np.empty(maxm, np.int64)
    item_off = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    nrot = 0
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        if parent[j] >= 0:
            top -= 1
            ptr = item_off[top]
            for a in range(d):
                base = ptr + a * d
                for b in range(d):
                    R[a, b] = buf[base + b]
        for a in range(d):
            x[a] = sv[p0 + 1 + a]
        _upper_solve(R, d, x)
        _upper_t_solve(R, d, x)
        sjj = sv[p0]
        schur = sjj
        for a in range(d):
            lv[p0 + 1 + a] = -x[a]
            schur -= sv[p0 + 1 + a] * x[a]
        if not schur > thresh:
            info[0] = NOT_PD
            info[1] = j
            info[2] = nrot
            return
        dv[j] = 1.0 / schur
        lv[p0] = 1.0
        scol = sv[p0 + 1:p0 + m]
        for c in range(chptr[j], chptr[j + 1]):
            i = chlist[c]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            pr = di - 1
            for k in range(pr):
                rows[k] = rel[rp + 1 + k] - 1
            ok, nr = _child_factor(R, d, rows, pr, sjj, scol, Rc, C, thresh)
            nrot += nr
            if not ok:
                info[0] = BREAKDOWN
                info[1] = i
                info[2] = nrot
                return
            item_off[top] = ptr
            top += 1
            for a in range(di):
                base = ptr + a * di
                for b in range(di):
                    buf[base + b] = Rc[a, b]
            ptr += di * di
    info[0] = OK
    info[2] = nrot


@njit(cache=True)
def mf_factor_cache(cp, ri, rel, post, parent, chptr, chlist, sv, roff, rbuf, maxm, thresh, info):
    """Upper factors R_j of S_{I_j I_j} for all columns, stored at rbuf[roff[j]:]."""
    n = cp.size - 1
    R = np.zeros((maxm, maxm))
    C = np.zeros((maxm, maxm))
    Rc = np.zeros((maxm, maxm))
    rows = np.empty(maxm, np.int64)
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        o = roff[j]
        for a in range(d):
            for b in range(d):
                R[a, b] = rbuf[o + a * d + b]
        scol = sv[p0 + 1:p0 + m]
        for c in range(chptr[j], chptr[j + 1]):
            i = chlist[c]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            pr = di - 1
            for k in range(pr):
                rows[k] = rel[rp + 1 + k] - 1
            ok, nr = _child_factor(R, d, rows, pr, sv[p0], scol, Rc, C, thresh)
            if not ok:
                info[0] = BREAKDOWN
                info[1] = i
                return
            oi = roff[i]
            for a in range(di):
                for b in range(di):
                    rbuf[oi + a * di + b] = Rc[a, b]
    info[0] = OK


# ---------------------------------------------------------------------------
# linearized sweeps (Hessian)


@njit(cache=True)
def lin_factor(cp, ri, rel, post, chptr, chlist, reach, lv, yv, kv, buf, maxm):
    """Linearized factorization Y -> K over the columns with reach[j] set.

    Returns the number of columns visited.
    """
    n = cp.size - 1
    F = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    item_id = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    visited = 0
    for t in range(n):
        j = post[t]
        if not reach[j]:
            continue
        visited += 1
        p0 = cp[j]
        m = cp[j + 1] - p0
        for a in range(m):
            for b in range(a + 1):
                F[a, b] = 0.0
            F[a, 0] = yv[p0 + a]
        for c in range(chptr[j], chptr[j + 1]):
            if not reach[chlist[c]]:
                continue
            top -= 1
            off = item_off[top]
            i = item_id[top]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            for a in range(di):
                ra = rel[rp + a]
                base = off + a * di
                for b in range(a + 1):
                    F[ra, rel[rp + b]] += buf[base + b]
            ptr = off
        f11 = F[0, 0]
        kv[p0] = f11
        d = m - 1
        for a in range(d):
            kv[p0 + 1 + a] = F[a + 1, 0] - lv[p0 + 1 + a] * f11
        if d > 0:
            for a in range(d):
                la = lv[p0 + 1 + a]
                fa = F[a + 1, 0]
                base = ptr + a * d
                for b in range(a + 1):
                    lb = lv[p0 + 1 + b]
                    buf[base + b] = (F[a + 1, b + 1] - la * F[b + 1, 0] - fa * lb
                                     + f11 * la * lb)
            item_off[top] = ptr
            item_id[top] = j
            top += 1
            ptr += d * d
    return visited


@njit(cache=True)
def lin_projinv(cp, ri, rel, post, parent, chptr, chlist, lv, mv, tv, buf, maxm):
    """Linearized projected inverse M -> T (reverse sweep)."""
    n = cp.size - 1
    B = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        if parent[j] >= 0:
            top -= 1
            ptr = item_off[top]
            _pop_full(buf, ptr, d, B)
        tjj = mv[p0]
        quad = 0.0
        for a in range(d):
            s = 0.0
            for b in range(d):
                s += B[a + 1, b + 1] * lv[p0 + 1 + b]
            quad += lv[p0 + 1 + a] * s
            ta = mv[p0 + 1 + a] - s
            tjj -= 2.0 * mv[p0 + 1 + a] * lv[p0 + 1 + a]
            B[a + 1, 0] = ta
            B[0, a + 1] = ta
            tv[p0 + 1 + a] = ta
        tjj += quad
        B[0, 0] = tjj
        tv[p0] = tjj
        ptr, top = _push_children(j, cp, rel, chptr, chlist, B, buf, ptr, item_off, top)


@njit(cache=True)
def hess_scale_projinv(cp, ri, rel, post, parent, chptr, chlist, lv, dv, sv, kv, tv,
                       buf, buf2, maxm):
    """K -> M -> T with V_j = S_{I_j I_j} propagated alongside V'_j."""
    n = cp.size - 1
    B = np.zeros((maxm, maxm))
    B2 = np.zeros((maxm, maxm))
    mi = np.empty(maxm)
    item_off = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        if parent[j] >= 0:
            top -= 1
            ptr = item_off[top]
            _pop_full(buf, ptr, d, B)
            _pop_full(buf2, ptr, d, B2)
        dj = dv[j]
        mjj = kv[p0] / (dj * dj)
        for a in range(d):
            s = 0.0
            for b in range(d):
                s += B[a + 1, b + 1] * kv[p0 + 1 + b]
            mi[a] = s / dj
        tjj = mjj
        quad = 0.0
        for a in range(d):
            s = 0.0
            for b in range(d):
                s += B2[a + 1, b + 1] * lv[p0 + 1 + b]
            quad += lv[p0 + 1 + a] * s
            ta = mi[a] - s
            tjj -= 2.0 * mi[a] * lv[p0 + 1 + a]
            B2[a + 1, 0] = ta
            B2[0, a + 1] = ta
            tv[p0 + 1 + a] = ta
        tjj += quad
        B2[0, 0] = tjj
        tv[p0] = tjj
        B[0, 0] = sv[p0]
        for a in range(d):
            B[a + 1, 0] = sv[p0 + 1 + a]
            B[0, a + 1] = sv[p0 + 1 + a]
        for c in range(chptr[j], chptr[j + 1]):
            i = chlist[c]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            item_off[top] = ptr
            top += 1
            for a in range(di):
                ra = rel[rp + a]
                base = ptr + a * di
                for b in range(di):
                    rb = rel[rp + b]
                    buf[base + b] = B[ra, rb]
                    buf2[base + b] = B2[ra, rb]
            ptr += di * di


@njit(cache=True)
def lin_completion(cp, ri, rel, post, parent, chptr, chlist, lv, tv, mv, buf, maxm):
    """Inverse of :func:`lin_projinv`: T -> M (reverse sweep)."""
    n = cp.size - 1
    B = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n - 1, -1, -1):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        d = m - 1
        if parent[j] >= 0:
            top -= 1
            ptr = item_off[top]
            _pop_full(buf, ptr, d, B)
        tjj = tv[p0]
        mjj = tjj
        quad = 0.0
        for a in range(d):
            s = 0.0
            for b in range(d):
                s += B[a + 1, b + 1] * lv[p0 + 1 + b]
            la = lv[p0 + 1 + a]
            quad += la * s
            ta = tv[p0 + 1 + a]
            mjj += 2.0 * la * ta
            mv[p0 + 1 + a] = ta + s
            B[a + 1, 0] = ta
            B[0, a + 1] = ta
        mv[p0] = mjj + quad
        B[0, 0] = tjj
        ptr, top = _push_children(j, cp, rel, chptr, chlist, B, buf, ptr, item_off, top)


@njit(cache=True)
def lin_product(cp, ri, rel, post, chptr, chlist, lv, kv, yv, buf, maxm):
    """Inverse of :func:`lin_factor`: K -> Y (forward sweep)."""
    n = cp.size - 1
    F = np.zeros((maxm, maxm))
    item_off = np.empty(n + 1, np.int64)
    item_id = np.empty(n + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(n):
        j = post[t]
        p0 = cp[j]
        m = cp[j + 1] - p0
        kjj = kv[p0]
        F[0, 0] = kjj
        for a in range(1, m):
            la = lv[p0 + a]
            ka = kv[p0 + a]
            F[a, 0] = la * kjj + ka
            for b in range(1, a + 1):
                lb = lv[p0 + b]
                F[a, b] = kjj * la * lb + ka * lb + la * kv[p0 + b]
        for c in range(chptr[j + 1] - chptr[j]):
            top -= 1
            off = item_off[top]
            i = item_id[top]
            rp = cp[i] + 1
            di = cp[i + 1] - rp
            for a in range(di):
                ra = rel[rp + a]
                base = off + a * di
                for b in range(a + 1):
                    F[ra, rel[rp + b]] -= buf[base + b]
            ptr = off
        for a in range(m):
            yv[p0 + a] = F[a, 0]
        d = m - 1
        if d > 0:
            for a in range(d):
                base = ptr + a * d
                for b in range(a + 1):
                    buf[base + b] = -F[a + 1, b + 1]
            item_off[top] = ptr
            item_id[top] = j
            top += 1
            ptr += d * d


@njit(cache=True)
def factor_scale(cp, reach, dv, roff, rbuf, kv, wv):
    """W_jj = K_jj / D_jj, W_{I_j j} = R_j^T K_{I_j j} / sqrt(D_jj)."""
    n = cp.size - 1
    for j in range(n):
        if not reach[j]:
            continue
        p0 = cp[j]
        d = cp[j + 1] - p0 - 1
        dj = dv[j]
        wv[p0] = kv[p0] / dj
        sc = 1.0 / math.sqrt(dj)
        o = roff[j]
        for a in range(d):
            s = 0.0
            for b in range(a + 1):
                s += rbuf[o + b * d + a] * kv[p0 + 1 + b]
            wv[p0 + 1 + a] = s * sc


@njit(cache=True)
def factor_scale_adj(cp, dv, roff, rbuf, wv, mv):
    """M_jj = W_jj / D_jj, M_{I_j j} = R_j W_{I_j j} / sqrt(D_jj)."""
    n = cp.size - 1
    for j in range(n):
        p0 = cp[j]
        d = cp[j + 1] - p0 - 1
        dj = dv[j]
        mv[p0] = wv[p0] / dj
        sc = 1.0 / math.sqrt(dj)
        o = roff[j]
        for a in range(d):
            s = 0.0
            for b in range(a, d):
                s += rbuf[o + a * d + b] * wv[p0 + 1 + b]
            mv[p0 + 1 + a] = s * sc


@njit(cache=True)
def solve_scale(cp, dv, roff, rbuf, mv, kv, maxm):
    """K_jj = D_jj^2 M_jj, K_{I_j j} = D_jj S_{I_j I_j}^{-1} M_{I_j j} via R_j."""
    n = cp.size - 1
    R = np.zeros((maxm, maxm))
    x = np.empty(maxm)
    for j in range(n):
        p0 = cp[j]
        d = cp[j + 1] - p0 - 1
        dj = dv[j]
        kv[p0] = dj * dj * mv[p0]
        o = roff[j]
        for a in range(d):
            x[a] = mv[p0 + 1 + a]
            for b in range(d):
                R[a, b] = rbuf[o + a * d + b]
        _upper_solve(R, d, x)
        _upper_t_solve(R, d, x)
        for a in range(d):
            kv[p0 + 1 + a] = dj * x[a]


# ---------------------------------------------------------------------------
# supernodal (clique tree) sweeps
#
# Clique k has vertex list cl[clptr[k]:clptr[k+1]] = new(k) followed by
# anc(k); nn[k] = |new(k)|.  crel[clptr[k] + nn[k]:clptr[k+1]] are the
# positions of anc(k) inside the parent clique.  snpos[p] is the position
# of row ri[p] inside the clique owning column p's vertex, and vpos[v] the
# position of v inside that clique.  Blocks: D at doff[k] (nn x nn), L at
# loff[k] (na x nn), both row-major.


@njit(cache=True)
def _sn_gather(k, cp, cl, clptr, nn, vpos, snpos, vals, F):
    """F[:, :nn] (and its transpose) := values of the columns in new(k)."""
    for q in range(nn[k]):
        v = cl[clptr[k] + q]
        cq = vpos[v]
        for p in range(cp[v], cp[v + 1]):
            r = snpos[p]
            F[r, cq] = vals[p]
            F[cq, r] = vals[p]


@njit(cache=True)
def _sn_scatter(k, cp, cl, clptr, nn, vpos, snpos, B, vals):
    for q in range(nn[k]):
        v = cl[clptr[k] + q]
        cq = vpos[v]
        for p in range(cp[v], cp[v + 1]):
            vals[p] = B[snpos[p], cq]


@njit(cache=True)
def _tri_inv_lower(C, m):
    """Inverse of the lower triangular C[:m, :m]."""
    Ci = np.zeros((m, m))
    for j in range(m):
        Ci[j, j] = 1.0 / C[j, j]
        for i in range(j + 1, m):
            s = 0.0
            for k in range(j, i):
                s -= C[i, k] * Ci[k, j]
            Ci[i, j] = s / C[i, i]
    return Ci


@njit(cache=True)
def sn_factor(cp, cl, clptr, nn, crel, cpost, cchptr, cchlist, vpos, snpos, xv,
              dblk, cblk, doff, lblk, loff, buf, maxm, thresh, info):
    l = nn.size
    F = np.zeros((maxm, maxm))
    item_off = np.empty(l + 1, np.int64)
    item_id = np.empty(l + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(l):
        k = cpost[t]
        m = clptr[k + 1] - clptr[k]
        s = nn[k]
        na = m - s
        for a in range(m):
            for b in range(m):
                F[a, b] = 0.0
        _sn_gather(k, cp, cl, clptr, nn, vpos, snpos, xv, F)
        for c in range(cchptr[k + 1] - cchptr[k]):
            top -= 1
            off = item_off[top]
            i = item_id[top]
            r0 = clptr[i] + nn[i]
            di = clptr[i + 1] - r0
            for a in range(di):
                ra = crel[r0 + a]
                base = off + a * di
                for b in range(di):
                    F[ra, crel[r0 + b]] += buf[base + b]
            ptr = off
        D = np.ascontiguousarray(F[:s, :s])
        C = D.copy()
        if not _chol_lower(C, s, thresh):
            info[0] = NOT_PD
            info[1] = k
            return
        o = doff[k]
        for a in range(s):
            for b in range(s):
                dblk[o + a * s + b] = D[a, b]
                cblk[o + a * s + b] = C[a, b]
        if na > 0:
            Cinv = _tri_inv_lower(C, s)
            F21 = np.ascontiguousarray(F[s:m, :s])
            G = np.dot(F21, Cinv.T.copy())
            L = np.dot(G, Cinv)
            U = np.ascontiguousarray(F[s:m, s:m]) - np.dot(G, G.T.copy())
            o = loff[k]
            for a in range(na):
                for b in range(s):
                    lblk[o + a * s + b] = L[a, b]
            for a in range(na):
                base = ptr + a * na
                for b in range(na):
                    buf[base + b] = U[a, b]
            item_off[top] = ptr
            item_id[top] = k
            top += 1
            ptr += na * na
    info[0] = OK


@njit(cache=True)
def _sn_push_children(k, clptr, nn, crel, cchptr, cchlist, B, buf, ptr, item_off, top):
    for c in range(cchptr[k], cchptr[k + 1]):
        i = cchlist[c]
        r0 = clptr[i] + nn[i]
        di = clptr[i + 1] - r0
        item_off[top] = ptr
        top += 1
        for a in range(di):
            ra = crel[r0 + a]
            base = ptr + a * di
            for b in range(di):
                buf[base + b] = B[ra, crel[r0 + b]]
        ptr += di * di
    return ptr, top


@njit(cache=True)
def sn_projected_inverse(cp, cl, clptr, nn, crel, cpost, cparent, cchptr, cchlist, vpos, snpos,
                         cblk, doff, lblk, loff, sv, buf, maxm):
    l = nn.size
    B = np.zeros((maxm, maxm))
    item_off = np.empty(l + 1, np.int64)
    top = 0
    ptr = 0
    for t in range(l - 1, -1, -1):
        k = cpost[t]
        m = clptr[k + 1] - clptr[k]
        s = nn[k]
        na = m - s
        if cparent[k] >= 0:
            top -= 1
            ptr = item_off[top]
            for a in range(na):
                base = ptr + a * na
                for b in range(na):
                    B[s + a, s + b] = buf[base + b]
        C = np.empty((s, s))
        o = doff[k]
        for a in range(s):
            for b in range(s):
                C[a, b] = cblk[o + a * s + b]
        Cinv = _tri_inv_lower(C, s)
        Snn = np.dot(Cinv.T.copy(), Cinv)
        if na > 0:
            L = np.empty((na, s))
            o = loff[k]
            for a in range(na):
                for b in range(s):
                    L[a, b] = lblk[o + a * s + b]
            V = np.ascontiguousarray(B[s:m, s:m])
            San = -np.dot(V, L)
            Snn -= np.dot(San.T.copy(), L)
            for a in range(na):
                for b in range(s):
                    B[s + a, b] = San[a, b]
                    B[b, s + a] = San[a, b]
        for a in range(s):
            for b in range(s):
                B[a, b] = Snn[a, b]
        _sn_scatter(k, cp, cl, clptr, nn, vpos, snpos, B, sv)
        ptr, top = _sn_push_children(k, clptr, nn, crel, cchptr, cchlist, B, buf, ptr,
                                     item_off, top)


@njit(cache=True)
def _sn_store_d(k, M, s, dblk, cblk, doff, thresh):
    """Store D = M^{-1} and its Cholesky factor; False if M is not PD."""
    W = M.copy()
    if not _chol_lower(W, s, thresh):
        return False
    Wi = _tri_inv_lower(W, s)
    D = np.dot(Wi.T.copy(), Wi)
    C = D.copy()
    if not _chol_lower(C, s, 0.0):
        return False
    o = doff[k]
    for a in range(s):
        for b in range(s):
            dblk[o + a * s + b] = D[a, b]
            cblk[o + a * s + b] = C[a, b] if b <= a else 0.0
    return True


@njit(cache=True)
def sn_completion(cp, cl, clptr, nn, crel, cpost, cparent, cchptr, cchlist, vpos, snpos, sv,
                  dblk, cblk, doff, lblk, loff, buf, maxm, thresh, factored, info):
    """Block completion; with ``factored`` the stack holds upper factors of V_j."""
    l = nn.size
    B = np.zeros((maxm, maxm))
    R = np.zeros((maxm, maxm))
    Cw = np.zeros((maxm, maxm))
    item_off = np.empty(l + 1, np.int64)
    top = 0
    ptr = 0
    nrot = 0
    for t in range(l - 1, -1, -1):
        k = cpost[t]
        m = clptr[k + 1] - clptr[k]
        s = nn[k]
        na = m - s
        for a in range(m):
            for b in range(m):
                B[a, b] = 0.0
        _sn_gather(k, cp, cl, clptr, nn, vpos, snpos, sv, B)
        if cparent[k] >= 0:
            top -= 1
            ptr = item_off[top]
            for a in range(na):
                base = ptr + a * na
                for b in range(na):
                    if factored:
                        R[a, b] = buf[base + b]
                    else:
                        B[s + a, s + b] = buf[base + b]
        if factored and na > 0:
            # V_j = R R^T, rebuild the dense block for the child extraction
            for a in range(na):
                for b in range(a + 1):
                    acc = 0.0
                    for q in range(max(a, b), na):
                        acc += R[a, q] * R[b, q]
                    B[s + a, s + b] = acc
                    B[s + b, s + a] = acc
        San = B[s:m, :s].copy()
        X = San.copy()
        if na > 0:
            if factored:
                for q in range(s):
                    col = X[:, q].copy()
                    _upper_solve(R, na, col)
                    _upper_t_solve(R, na, col)
                    X[:, q] = col
            else:
                W = B[s:m, s:m].copy()
                if not _chol_lower(W, na, 0.0):
                    info[0] = NOT_PD
                    info[1] = k
                    info[2] = nrot
                    return
                for q in range(s):
                    col = X[:, q].copy()
                    _chol_solve(W, na, col)
                    X[:, q] = col
        Mblk = B[:s, :s].copy()
        if na > 0:
            Mblk -= np.dot(San.T.copy(), X)
        if not _sn_store_d(k, Mblk, s, dblk, cblk, doff, thresh):
            info[0] = NOT_PD
            info[1] = k
            info[2] = nrot
            return
        o = loff[k]
        for a in range(na):
            for b in range(s):
                lblk[o + a * s + b] = -X[a, b]
        if not factored:
            ptr, top = _sn_push_children(k, clptr, nn, crel, cchptr, cchlist, B, buf, ptr,
                                         item_off, top)
            continue
        for c in range(cchptr[k], cchptr[k + 1]):
            i = cchlist[c]
            r0 = clptr[i] + nn[i]
            di = clptr[i + 1] - r0
            qa = 0
            while qa < di and crel[r0 + qa] < s:
                qa += 1
            pr = di - qa
            rows = np.empty(pr, np.int64)
            for q in range(pr):
                rows[q] = crel[r0 + qa + q] - s
            for q in range(pr):
                for b in range(na):
                    Cw[q, b] = R[rows[q], b]
            nrot += _reduce_rows(Cw, pr, na, rows)
            off = na - pr
            # Z = R^{-1} B with B = S_{rows, A}
            Z = np.empty((pr, qa))
            for a in range(qa):
                col = np.empty(pr)
                for q in range(pr):
                    col[q] = B[s + rows[q], crel[r0 + a]]
                for ii in range(pr - 1, -1, -1):
                    tt = col[ii]
                    for kk in range(ii + 1, pr):
                        tt -= Cw[ii, off + kk] * col[kk]
                    col[ii] = tt / Cw[ii, off + ii]
                for q in range(pr):
                    Z[q, a] = col[q]
            At = np.empty((qa, qa))
            for a in range(qa):
                for b in range(qa):
                    At[a, b] = B[crel[r0 + a], crel[r0 + b]]
            if pr > 0:
                At -= np.dot(Z.T.copy(), Z)
            Rt = np.zeros((qa, qa))
            if not _rev_chol(At, qa, Rt, thresh):
                info[0] = BREAKDOWN
                info[1] = i
                info[2] = nrot
                return
            item_off[top] = ptr
            top += 1
            for a in range(di):
                base = ptr + a * di
                for b in range(di):
                    if a < qa and b < qa:
                        val = Rt[a, b]
                    elif a < qa:
                        val = Z[b - qa, a]
                    elif b < qa:
                        val = 0.0
                    else:
                        val = Cw[a - qa, off + b - qa]
                    buf[base + b] = val
            ptr += di * di
    info[0] = OK
    info[2] = nrot
