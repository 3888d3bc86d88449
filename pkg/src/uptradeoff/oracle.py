"""Exact G_0 and g_0 on small instances.

Optimal perfectly private mechanisms only need conditionals at the
vertices of the feasible polytope, so the optimum is an LP over vertex
weights: minimise sum_v w_v H(Y|v) subject to the weights reproducing
the source distribution.  The LP is solved by a dense two-phase simplex.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Optional

import numpy as np

from . import _kernels
from .config import tol
from .errors import InvariantViolation, LpInfeasible, TooManyVertices
from .prob import (FULL, PUBLIC, Channel, JointPmf, Mechanism, _default_labels, condition,
                   entropy, numerical_rank)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


@dataclasses.dataclass(frozen=True, eq=False)
class LpProblem:
    """min c.w  subject to  A w = b,  w >= 0."""

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if a.shape != (b.size, c.size):
            raise ValueError(f"A has shape {a.shape}, expected {(b.size, c.size)}")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.objective.size


@dataclasses.dataclass(frozen=True, eq=False)
class LpSolution:
    weights: np.ndarray
    objective_value: float
    basis: tuple
    status: str
    residual: float = 0.0
    pivots: int = 0


def _pivot(T, basis, r, c):
    T[r] /= T[r, c]
    fac = T[:, c].copy()
    fac[r] = 0.0
    T -= np.outer(fac, T[r])
    basis[r] = c


def _run(T, basis, ncols, max_iter):
    t = tol()
    status, piv = _kernels.bland_pivot(T, basis, ncols, t.pivot, t.pivot, max_iter)
    return int(status), int(piv)


def simplex_solve(p: LpProblem, max_iter: Optional[int] = None) -> LpSolution:
    """Two-phase dense simplex with Bland's rule.

    Rows are sign-flipped so that b >= 0, phase one minimises the sum of
    artificial variables, artificials left in the basis at zero level are
    pivoted out (or their rows dropped as redundant), and phase two
    optimises the original costs.  Ties in the ratio test go to the basic
    variable with the smallest index, so the result is deterministic.
    """
    t = tol()
    A = p.A.copy()
    b = p.b.copy()
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    m, n = A.shape
    max_iter = 50 * (m + n) + 100 if max_iter is None else max_iter
    scale = max(1.0, float(np.abs(b).max()) if m else 1.0)

    # phase one
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m, dtype=np.int64)
    status, piv1 = _run(T, basis, n + m, max_iter)
    if status != _kernels.OK:
        return LpSolution(np.zeros(n), math.nan, tuple(basis), ITERATION_LIMIT, pivots=piv1)
    if -T[m, -1] > t.lp * scale:
        return LpSolution(np.zeros(n), math.nan, tuple(basis), INFEASIBLE, pivots=piv1)

    # drive artificials out of the basis, dropping redundant rows
    keep = []
    for r in range(m):
        if basis[r] < n:
            keep.append(r)
            continue
        cols = np.flatnonzero(np.abs(T[r, :n]) > t.pivot)
        if cols.size:
            _pivot(T, basis, r, int(cols[0]))
            keep.append(r)
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis = np.array([basis[r] for r in keep], dtype=np.int64)

    # phase two
    c = p.objective
    T2[-1, :n] = c
    T2[-1, -1] = 0.0
    for i, bi in enumerate(basis):
        if c[bi] != 0.0:
            T2[-1] -= c[bi] * T2[i]
    status, piv2 = _run(T2, basis, n, max_iter)
    if status == _kernels.UNBOUNDED:
        return LpSolution(np.zeros(n), -math.inf, tuple(basis), UNBOUNDED, pivots=piv1 + piv2)
    if status != _kernels.OK:
        return LpSolution(np.zeros(n), math.nan, tuple(basis), ITERATION_LIMIT,
                          pivots=piv1 + piv2)

    w = np.zeros(n)
    w[basis] = T2[:-1, -1]
    if (w < -t.lp * scale).any():
        raise InvariantViolation(f"negative basic weight {w.min()!r}")
    w = np.clip(w, 0.0, None)
    residual = float(np.abs(p.A @ w - p.b).max()) if m else 0.0
    return LpSolution(w, float(c @ w), tuple(int(i) for i in basis), OPTIMAL,
                      residual, piv1 + piv2)


# ---------------------------------------------------------------------------
# extreme points
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class ExtremePointSet:
    """Candidate conditionals at the vertices of the feasible polytope.

    Attributes
    ----------
    model : str
        ``"full"`` or ``"public"``.
    points : ndarray
        Full model: (V, |X|) array, ``points[v, x]`` is the y that vertex v
        pairs with x (-1 for zero-mass x).  Public model: (V, |Y|) array of
        conditionals p_{Y|U=v}.
    entropies : ndarray, shape (V,)
        H(Y | U = v).
    flags : tuple
        Diagnostics (e.g. skipped rank-deficient supports).
    """

    model: str
    points: np.ndarray
    entropies: np.ndarray
    flags: tuple = ()

    def __len__(self):
        return self.points.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class OracleResult:
    model: str
    value_bits: float
    mechanism: Mechanism
    vertex_count: int
    active_vertices: tuple
    weights: np.ndarray
    extreme_points: ExtremePointSet
    lp: LpSolution


def _row_entropies(q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return np.clip(terms.sum(axis=1), 0.0, None)


def full_vertex_count(j: JointPmf) -> int:
    on = j.table > tol().pmf
    live = j.p_x > 0
    return int(np.prod([on[x].sum() for x in np.flatnonzero(live)], dtype=object))


def enumerate_extreme_full(j: JointPmf, cap: int = 10 ** 6) -> ExtremePointSet:
    """One vertex per choice of a supported y for every x with p(x) > 0.

    Vertex v puts mass p(x) on (x, y_x(v)); its H(Y|U=v) is the entropy of
    p_X pushed forward through x -> y_x(v).
    """
    count = full_vertex_count(j)
    if count > cap:
        raise TooManyVertices(f"{count} vertices exceed cap {cap}")
    on = j.table > tol().pmf
    live = np.flatnonzero(j.p_x > 0)
    choices = [np.flatnonzero(on[x]) for x in live]
    pts = np.full((count, j.nx), -1, dtype=np.int64)
    if live.size:
        grid = np.array(list(itertools.product(*choices)), dtype=np.int64).reshape(count, live.size)
        pts[:, live] = grid
    q = np.zeros((count, j.ny))
    rows = np.arange(count)
    for x in live:
        np.add.at(q, (rows, pts[:, x]), j.p_x[x])
    pts.setflags(write=False)
    return ExtremePointSet(FULL, pts, _row_entropies(q))


def _full_lp(j: JointPmf, eps: ExtremePointSet):
    ch = condition(j, "x").matrix
    on = j.table > tol().pmf
    pairs = [(x, y) for x in np.flatnonzero(j.p_x > 0) for y in np.flatnonzero(on[x])]
    A = np.zeros((len(pairs), len(eps)))
    b = np.zeros(len(pairs))
    for r, (x, y) in enumerate(pairs):
        A[r] = eps.points[:, x] == y
        b[r] = ch[x, y]
    return LpProblem(eps.entropies, A, b)


def _solve_checked(p: LpProblem) -> LpSolution:
    sol = simplex_solve(p)
    if sol.status != OPTIMAL:
        raise LpInfeasible(f"vertex LP ended with status {sol.status}")
    if sol.residual > 1e3 * tol().lp:
        raise InvariantViolation(f"vertex LP residual {sol.residual!r}")
    return sol


def _active(sol: LpSolution):
    return tuple(int(v) for v in np.flatnonzero(sol.weights > tol().lp * 1e-3))


def exact_g0_full(j: JointPmf, cap: int = 10 ** 6) -> OracleResult:
    """G_0 by LP over the full-model vertices.

    The mechanism releases the index of a positive-weight vertex:
    p(u_v | x, y) = w_v 1{y_x(v) = y} / p(y|x).
    """
    eps = enumerate_extreme_full(j, cap)
    sol = _solve_checked(_full_lp(j, eps))
    act = _active(sol)
    w = sol.weights[list(act)]
    ch = condition(j, "x").matrix
    on = j.table > tol().pmf
    k = np.zeros((j.nx, j.ny, len(act)))
    for i, v in enumerate(act):
        for x in np.flatnonzero(j.p_x > 0):
            y = eps.points[v, x]
            k[x, y, i] += w[i] / ch[x, y]
    k[~on] = 0.0
    k[~on, 0] = 1.0
    k /= k.sum(axis=2, keepdims=True)
    labels = tuple(f"({x},{y})" for x in j.x_labels for y in j.y_labels)
    mech = Mechanism(FULL, Channel(k.reshape(j.nx * j.ny, len(act)), labels,
                                   _default_labels("u", len(act))), j.nx, j.ny)
    value = max(entropy(j.p_y) - sol.objective_value, 0.0)
    return OracleResult(FULL, value, mech, len(eps), act, w, eps, sol)


def public_subset_count(n_active: int, rank: int) -> int:
    return sum(math.comb(n_active, k) for k in range(1, min(rank, n_active) + 1))


def enumerate_extreme_public(j: JointPmf, cap: int = 2 ** 16) -> ExtremePointSet:
    """Vertices of {q >= 0 : sum_y p(x|y) q(y) = p(x) for all x}.

    Every vertex is a basic solution, so it is found by solving the
    system restricted to each support T with |T| <= rank(P_{X|Y}).
    Supports whose columns are linearly dependent are skipped (and
    counted in ``flags``); duplicates are merged.
    """
    t = tol()
    live = np.flatnonzero(j.p_y > 0)
    P = condition(j, "y").matrix[live].T  # (|X|, |Y_live|), columns p_{X|Y}(.|y)
    A = np.vstack([P, np.ones(live.size)])
    b = np.append(j.p_x, 1.0)
    r = numerical_rank(A)
    n_sub = public_subset_count(live.size, r)
    if n_sub > cap:
        raise TooManyVertices(f"{n_sub} candidate supports exceed cap {cap}")
    found: list = []
    skipped = 0
    for size in range(1, r + 1):
        for T in itertools.combinations(range(live.size), size):
            sub = A[:, T]
            if numerical_rank(sub) < size:
                skipped += 1
                continue
            q, *_ = np.linalg.lstsq(sub, b, rcond=None)
            if np.abs(sub @ q - b).max() > t.lp * 10 or (q < -t.eq).any():
                continue
            full = np.zeros(j.ny)
            full[live[list(T)]] = np.clip(q, 0.0, None)
            full /= full.sum()
            if not any(np.abs(full - g).max() <= t.eq for g in found):
                found.append(full)
    pts = np.array(found).reshape(len(found), j.ny)
    pts.setflags(write=False)
    flags = (f"skipped {skipped} rank-deficient supports",) if skipped else ()
    return ExtremePointSet(PUBLIC, pts, _row_entropies(pts), flags)


def exact_g0_public(j: JointPmf, cap: int = 2 ** 16) -> OracleResult:
    """g_0 by LP over the public-model vertices.

    The mechanism releases the vertex index: p(u_v | y) = w_v q_v(y) / p(y).
    """
    eps = enumerate_extreme_public(j, cap)
    live = np.flatnonzero(j.p_y > 0)
    prob = LpProblem(eps.entropies, eps.points[:, live].T, j.p_y[live])
    sol = _solve_checked(prob)
    act = _active(sol)
    w = sol.weights[list(act)]
    k = np.zeros((j.ny, len(act)))
    for i, v in enumerate(act):
        k[live, i] = w[i] * eps.points[v, live] / j.p_y[live]
    dead = j.p_y <= 0
    k[dead] = 0.0
    k[dead, 0] = 1.0
    k /= k.sum(axis=1, keepdims=True)
    mech = Mechanism(PUBLIC, Channel(k, j.y_labels, _default_labels("u", len(act))), None, j.ny)
    value = max(entropy(j.p_y) - sol.objective_value, 0.0)
    return OracleResult(PUBLIC, value, mech, len(eps), act, w, eps, sol)
