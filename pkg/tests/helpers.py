"""Shared helpers for the test suite."""

import itertools
import math

import numpy as np

from uptradeoff.prob import Channel, JointPmf, joint_from


def gen(seed):
    return np.random.Generator(np.random.PCG64(seed))


def random_pmf(g, n, sparse=False):
    p = g.random(n)
    if sparse:
        p[g.random(n) < 0.3] = 0.0
        p[g.integers(n)] += 0.1
    return p / p.sum()


def random_channel(g, nx, ny, sparse=False):
    return np.array([random_pmf(g, ny, sparse) for _ in range(nx)])


def joint(p_x, ch):
    return joint_from(np.asarray(p_x, dtype=float), Channel(np.asarray(ch, dtype=float)))


def hb(t):
    if t <= 0 or t >= 1:
        return 0.0
    return -t * math.log2(t) - (1 - t) * math.log2(1 - t)


def H(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mi(t):
    t = np.asarray(t, dtype=float)
    return H(t.sum(1)) + H(t.sum(0)) - H(t)


def brute_force_lp(c, A, b, tol=1e-9):
    """Minimum of c.w over the basic feasible solutions of A w = b, w >= 0."""
    m, n = A.shape
    best = math.inf
    r = np.linalg.matrix_rank(A)
    for cols in itertools.combinations(range(n), r):
        sub = A[:, cols]
        if np.linalg.matrix_rank(sub) < r:
            continue
        w_s, *_ = np.linalg.lstsq(sub, b, rcond=None)
        if np.abs(sub @ w_s - b).max() > 1e-8 or (w_s < -tol).any():
            continue
        best = min(best, float(np.asarray(c)[list(cols)] @ w_s))
    return best
