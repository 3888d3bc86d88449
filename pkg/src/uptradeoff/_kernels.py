"""Hot numeric kernels.

Every kernel exists twice: a loop version that numba compiles, and a
vectorised numpy version.  Both implement the same selection rules
(including tie-breaking), so results agree to rounding.  The exported
names at the bottom of the module point at whichever backend
:mod:`uptradeoff._accel` selected.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# status codes shared by the kernels
OK = 0
ITERATION_LIMIT = 1
UNBALANCED = 2
UNBOUNDED = 3


# ---------------------------------------------------------------------------
# entropy / mutual information
# ---------------------------------------------------------------------------

def _entropy_np(p):
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _mutual_information_np(t):
    return (_entropy_np(t.sum(axis=1)) + _entropy_np(t.sum(axis=0))
            - _entropy_np(t.ravel()))


def _entropy_loop(p):
    h = 0.0
    for i in range(p.shape[0]):
        v = p[i]
        if v > 0.0:
            h -= v * np.log2(v)
    return h


def _mutual_information_loop(t):
    n, m = t.shape
    rows = np.zeros(n)
    cols = np.zeros(m)
    hj = 0.0
    for i in range(n):
        for j in range(m):
            v = t[i, j]
            rows[i] += v
            cols[j] += v
            if v > 0.0:
                hj -= v * np.log2(v)
    hr = 0.0
    for i in range(n):
        if rows[i] > 0.0:
            hr -= rows[i] * np.log2(rows[i])
    hc = 0.0
    for j in range(m):
        if cols[j] > 0.0:
            hc -= cols[j] * np.log2(cols[j])
    return hr + hc - hj


# ---------------------------------------------------------------------------
# full-observation water filling (the Algorithm 1 loop)
#
# Returns, in order:
#   assign  (max_u, nx) int   y linked from each subgroup x, per realization
#   mass    (max_u,)          p_U of each realization
#   n_u, n_init               realizations created / created before iterating
#   levels  (max_u+1, nx, ny) water levels, levels[0] = a_1
#   astar   (max_u,)          filled amount per iteration
#   star    (max_u, 2)        (x*, y*) per iteration
#   fmin    (max_u, nx)       f_i(x) per iteration, -1 when subgroup is dry
#   n_iter, status
# Ties: (x*, y*) takes the lowest row-major index; f_i(x) takes the highest
# y index.
# ---------------------------------------------------------------------------

def _waterfill_full_loop(ch, snap, tie):
    nx, ny = ch.shape
    supp = 0
    for x in range(nx):
        for y in range(ny):
            if ch[x, y] > 0.0:
                supp += 1
    max_u = supp + 1
    assign = np.full((max_u, nx), -1, dtype=np.int64)
    mass = np.zeros(max_u)
    levels = np.zeros((max_u + 1, nx, ny))
    astar = np.zeros(max_u)
    star = np.full((max_u, 2), -1, dtype=np.int64)
    fmin = np.full((max_u, nx), -1, dtype=np.int64)
    a = np.zeros((nx, ny))
    n_u = 0
    for y in range(ny):
        m = np.inf
        for x in range(nx):
            if ch[x, y] < m:
                m = ch[x, y]
        if m > 0.0:
            for x in range(nx):
                assign[n_u, x] = y
            mass[n_u] = m
            n_u += 1
        else:
            m = 0.0
        for x in range(nx):
            if ch[x, y] > 0.0:
                v = ch[x, y] - m
                a[x, y] = v if v >= snap else 0.0
    n_init = n_u
    levels[0] = a
    it = 0
    status = OK
    while True:
        best = np.inf
        for x in range(nx):
            for y in range(ny):
                if a[x, y] > 0.0 and a[x, y] < best:
                    best = a[x, y]
        if best == np.inf:
            break
        if n_u >= max_u:
            status = ITERATION_LIMIT
            break
        bx = -1
        by = -1
        for x in range(nx):
            for y in range(ny):
                if bx < 0 and a[x, y] > 0.0 and a[x, y] <= best + tie:
                    bx = x
                    by = y
        for x in range(nx):
            rmin = np.inf
            for y in range(ny):
                if a[x, y] > 0.0 and a[x, y] < rmin:
                    rmin = a[x, y]
            if rmin < np.inf:
                for y in range(ny):
                    if a[x, y] > 0.0 and a[x, y] <= rmin + tie:
                        fmin[it, x] = y
            if a[x, by] > 0.0:
                assign[n_u, x] = by
            else:
                assign[n_u, x] = fmin[it, x]
        dry = False
        for x in range(nx):
            if assign[n_u, x] < 0:
                dry = True
        if dry:
            status = UNBALANCED
            break
        for x in range(nx):
            y = assign[n_u, x]
            v = a[x, y] - best
            a[x, y] = v if v >= snap else 0.0
        mass[n_u] = best
        astar[it] = best
        star[it, 0] = bx
        star[it, 1] = by
        n_u += 1
        it += 1
        levels[it] = a
    return assign, mass, n_u, n_init, levels, astar, star, fmin, it, status


def _waterfill_full_np(ch, snap, tie):
    nx, ny = ch.shape
    supp = int((ch > 0).sum())
    max_u = supp + 1
    assign = np.full((max_u, nx), -1, dtype=np.int64)
    mass = np.zeros(max_u)
    levels = np.zeros((max_u + 1, nx, ny))
    astar = np.zeros(max_u)
    star = np.full((max_u, 2), -1, dtype=np.int64)
    fmin = np.full((max_u, nx), -1, dtype=np.int64)

    mins = ch.min(axis=0)
    common = np.flatnonzero(mins > 0)
    n_u = common.size
    assign[:n_u] = common[:, None]
    mass[:n_u] = mins[common]
    a = np.where(ch > 0, ch - np.where(mins > 0, mins, 0.0)[None, :], 0.0)
    a[a < snap] = 0.0
    n_init = n_u
    levels[0] = a
    rows = np.arange(nx)
    it = 0
    status = OK
    while True:
        vals = np.where(a > 0, a, np.inf)
        best = vals.min()
        if best == np.inf:
            break
        if n_u >= max_u:
            status = ITERATION_LIMIT
            break
        flat = int(np.flatnonzero(vals.ravel() <= best + tie)[0])
        bx, by = divmod(flat, ny)
        rmin = vals.min(axis=1)
        live = np.isfinite(rmin)
        ties = (vals <= rmin[:, None] + tie) & live[:, None]
        last = ny - 1 - np.argmax(ties[:, ::-1], axis=1)
        fmin[it] = np.where(live, last, -1)
        choice = np.where(a[:, by] > 0, by, fmin[it])
        if (choice < 0).any():
            status = UNBALANCED
            break
        assign[n_u] = choice
        v = a[rows, choice] - best
        a[rows, choice] = np.where(v >= snap, v, 0.0)
        mass[n_u] = best
        astar[it] = best
        star[it] = (bx, by)
        n_u += 1
        it += 1
        levels[it] = a
    return assign, mass, n_u, n_init, levels, astar, star, fmin, it, status


# ---------------------------------------------------------------------------
# public-observation water filling for binary X (the Algorithm 3 loop)
#
# post[y] = p(x0|y), cls[y] in {-1 (low), +1 (high), 0 (deterministic or
# zero mass)}.  Returns pairs (max_u, 2), weights f, mass, n, levels,
# status, residual.  Pair selection takes the smallest posterior on each
# side (lowest index on ties).
# ---------------------------------------------------------------------------

def _waterfill_public_loop(post, prior, py, cls, snap):
    ny = post.shape[0]
    max_u = ny + 1
    pairs = np.full((max_u, 2), -1, dtype=np.int64)
    fw = np.zeros(max_u)
    mass = np.zeros(max_u)
    levels = np.zeros((max_u + 1, ny))
    a = np.zeros(ny)
    for y in range(ny):
        if cls[y] != 0:
            a[y] = py[y]
    levels[0] = a
    n = 0
    status = OK
    residual = 0.0
    while True:
        live = False
        for y in range(ny):
            if a[y] > 0.0:
                live = True
        if not live:
            break
        if n >= max_u:
            status = ITERATION_LIMIT
            break
        y0 = -1
        y1 = -1
        for y in range(ny):
            if a[y] > 0.0:
                if cls[y] < 0 and (y0 < 0 or post[y] < post[y0]):
                    y0 = y
                if cls[y] > 0 and (y1 < 0 or post[y] < post[y1]):
                    y1 = y
        if y0 < 0 or y1 < 0:
            for y in range(ny):
                residual += a[y]
            status = UNBALANCED
            break
        f = (post[y1] - prior) / (post[y1] - post[y0])
        m = min(a[y0] / f, a[y1] / (1.0 - f))
        v0 = a[y0] - m * f
        v1 = a[y1] - m * (1.0 - f)
        a[y0] = v0 if v0 >= snap else 0.0
        a[y1] = v1 if v1 >= snap else 0.0
        pairs[n, 0] = y0
        pairs[n, 1] = y1
        fw[n] = f
        mass[n] = m
        n += 1
        levels[n] = a
    return pairs, fw, mass, n, levels, status, residual


def _waterfill_public_np(post, prior, py, cls, snap):
    ny = post.shape[0]
    max_u = ny + 1
    pairs = np.full((max_u, 2), -1, dtype=np.int64)
    fw = np.zeros(max_u)
    mass = np.zeros(max_u)
    levels = np.zeros((max_u + 1, ny))
    a = np.where(cls != 0, py, 0.0)
    levels[0] = a
    low = cls < 0
    high = cls > 0
    n = 0
    status = OK
    residual = 0.0
    while (a > 0).any():
        if n >= max_u:
            status = ITERATION_LIMIT
            break
        live = a > 0
        lo = np.where(low & live, post, np.inf)
        hi = np.where(high & live, post, np.inf)
        if not (np.isfinite(lo).any() and np.isfinite(hi).any()):
            residual = float(a.sum())
            status = UNBALANCED
            break
        y0 = int(np.argmin(lo))
        y1 = int(np.argmin(hi))
        f = (post[y1] - prior) / (post[y1] - post[y0])
        m = min(a[y0] / f, a[y1] / (1.0 - f))
        v0 = a[y0] - m * f
        v1 = a[y1] - m * (1.0 - f)
        a[y0] = v0 if v0 >= snap else 0.0
        a[y1] = v1 if v1 >= snap else 0.0
        pairs[n] = (y0, y1)
        fw[n] = f
        mass[n] = m
        n += 1
        levels[n] = a
    return pairs, fw, mass, n, levels, status, residual


# ---------------------------------------------------------------------------
# dense simplex pivoting with Bland's rule
#
# T is a (m+1, k+1) tableau: constraint rows, then the reduced-cost row;
# the last column is the right-hand side.  Only the first ``ncols``
# columns may enter.  Operates in place; returns (status, pivots).
# ---------------------------------------------------------------------------

def _bland_loop(T, basis, ncols, rc_tol, piv_tol, max_iter):
    m = T.shape[0] - 1
    k1 = T.shape[1]
    it = 0
    while it < max_iter:
        enter = -1
        for j in range(ncols):
            if T[m, j] < -rc_tol:
                enter = j
                break
        if enter < 0:
            return OK, it
        best = np.inf
        for i in range(m):
            if T[i, enter] > piv_tol:
                r = T[i, k1 - 1] / T[i, enter]
                if r < best:
                    best = r
        if best == np.inf:
            return UNBOUNDED, it
        leave = -1
        for i in range(m):
            if T[i, enter] > piv_tol:
                r = T[i, k1 - 1] / T[i, enter]
                if r <= best + 1e-12 * (1.0 + abs(best)):
                    if leave < 0 or basis[i] < basis[leave]:
                        leave = i
        piv = T[leave, enter]
        for c in range(k1):
            T[leave, c] /= piv
        for i in range(m + 1):
            if i != leave:
                fac = T[i, enter]
                if fac != 0.0:
                    for c in range(k1):
                        T[i, c] -= fac * T[leave, c]
        basis[leave] = enter
        it += 1
    return ITERATION_LIMIT, it


def _bland_np(T, basis, ncols, rc_tol, piv_tol, max_iter):
    m = T.shape[0] - 1
    it = 0
    while it < max_iter:
        cand = np.flatnonzero(T[m, :ncols] < -rc_tol)
        if cand.size == 0:
            return OK, it
        enter = int(cand[0])
        col = T[:m, enter]
        ok = col > piv_tol
        if not ok.any():
            return UNBOUNDED, it
        ratios = np.full(m, np.inf)
        ratios[ok] = T[:m, -1][ok] / col[ok]
        best = ratios.min()
        rows = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))
        leave = int(rows[np.argmin(basis[rows])])
        T[leave] /= T[leave, enter]
        fac = T[:, enter].copy()
        fac[leave] = 0.0
        T -= np.outer(fac, T[leave])
        basis[leave] = enter
        it += 1
    return ITERATION_LIMIT, it


numpy_impl = {
    "entropy": _entropy_np,
    "mutual_information": _mutual_information_np,
    "waterfill_full": _waterfill_full_np,
    "waterfill_public": _waterfill_public_np,
    "bland": _bland_np,
}

numba_impl = {
    "entropy": njit(_entropy_loop),
    "mutual_information": njit(_mutual_information_loop),
    "waterfill_full": njit(_waterfill_full_loop),
    "waterfill_public": njit(_waterfill_public_loop),
    "bland": njit(_bland_loop),
}

_active = numba_impl if USE_NUMBA else numpy_impl

entropy_kernel = _active["entropy"]
mutual_information_kernel = _active["mutual_information"]
waterfill_full = _active["waterfill_full"]
waterfill_public = _active["waterfill_public"]
bland_pivot = _active["bland"]
