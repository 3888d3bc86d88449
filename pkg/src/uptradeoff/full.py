"""Full data observation: the curator sees (X, Y) and designs p_{U|XY}.

Contains the water-filling construction for perfect privacy
(:func:`algorithm1`), the closed-form bounds on G_0, and the achievable
curves obtained by merging symbols of X (:func:`curve_full_exhaustive`,
:func:`curve_full_greedy`, :func:`curve_full_nonalgorithmic`).
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from ._parallel import pmap
from .config import tol
from .envelope import TradeoffCurve, TradeoffPoint, sanity_band, upper_concave_envelope
from .errors import (DimensionMismatch, InvariantViolation, OutOfRange, SubsetTooLarge,
                     TooManySubsets, WrongAlphabetSize)
from .prob import (FULL, Channel, JointPmf, Mechanism, _default_labels, binary_entropy,
                   condition, entropy, evaluate_mechanism, mutual_information,
                   mutual_information_table)

# Tie window for comparing water levels; levels that should be equal in
# exact arithmetic differ by a few ulps after repeated subtraction.
_LEVEL_TIE = 1e-12


@dataclasses.dataclass(frozen=True, eq=False)
class AlgorithmOneTrace:
    """Record of one water-filling run.

    Attributes
    ----------
    common_support_set : tuple of int
        y indices with p(y|x) > 0 for every x.
    water_levels : ndarray, shape (N + 1, |X|, |Y|)
        ``water_levels[i]`` holds a_{i+1}; the last slice is all zero.
    minima : tuple
        ``(a_i*, (x*, y*))`` per iteration.
    subgroup_minimizers : ndarray, shape (N, |X|)
        f_i(x) per iteration (-1 once subgroup x is dry).
    iterations : int
        N.
    links : ndarray, shape (|U|, |X|)
        y linked to u in subgroup x.
    masses : ndarray, shape (|U|,)
        p_U, identical for every p_X.
    """

    common_support_set: tuple
    water_levels: np.ndarray
    minima: tuple
    subgroup_minimizers: np.ndarray
    iterations: int
    links: np.ndarray
    masses: np.ndarray


def _pair_labels(xl, yl):
    return tuple(f"({x},{y})" for x in xl for y in yl)


def algorithm1(ch) -> tuple:
    """Perfect-privacy mechanism for the full observation model.

    Parameters
    ----------
    ch : Channel or array_like
        p_{Y|X}, one row per x.  The construction never looks at p_X.

    Returns
    -------
    (Mechanism, AlgorithmOneTrace)
        ``p(u|x,y) = p(u) / p(y|x)`` when u links (x, y); pairs with
        p(y|x) = 0 map to u index 0.

    Notes
    -----
    Realizations u_1..u_|I| are created first, one per common-support y.
    Then, at each iteration, the smallest positive water level a* is
    located (lowest row-major (x, y) on ties), every subgroup x links to
    y* if its level there is positive and otherwise to its own smallest
    positive level (highest y on ties), and a* is drained from each linked
    cell.  Levels below the pmf tolerance are snapped to zero.
    """
    if not isinstance(ch, Channel):
        ch = Channel(np.asarray(ch, dtype=float))
    m = np.ascontiguousarray(ch.matrix)
    nx, ny = m.shape
    t = tol()
    (assign, mass, n_u, n_init, levels, astar, star, fmin, n_iter,
     status) = _kernels.waterfill_full(m, t.pmf, _LEVEL_TIE)
    if status != _kernels.OK:
        raise InvariantViolation(f"water filling stopped with status {status}")
    assign = assign[:n_u].copy()
    mass = mass[:n_u].copy()

    k = np.zeros((nx, ny, n_u))
    for u in range(n_u):
        k[np.arange(nx), assign[u], u] += mass[u]
    on = m > 0
    k[on] /= m[on][:, None]
    k[~on] = 0.0
    k[~on, 0] = 1.0
    k /= k.sum(axis=2, keepdims=True)

    for arr in (assign, mass):
        arr.setflags(write=False)
    trace = AlgorithmOneTrace(
        common_support_set=tuple(int(y) for y in np.flatnonzero(m.min(axis=0) > 0)),
        water_levels=levels[:n_iter + 1].copy(),
        minima=tuple((float(astar[i]), (int(star[i, 0]), int(star[i, 1])))
                     for i in range(n_iter)),
        subgroup_minimizers=fmin[:n_iter].copy(),
        iterations=int(n_iter),
        links=assign,
        masses=mass,
    )
    kernel = Channel(k.reshape(nx * ny, n_u),
                     _pair_labels(ch.input_labels, ch.output_labels),
                     _default_labels("u", n_u))
    return Mechanism(FULL, kernel, nx, ny, trace), trace


def _lift_kernel(kz: np.ndarray, zmap: np.ndarray, on: np.ndarray) -> np.ndarray:
    """p(u|x,y) = p(u|z(x),y) on the support, point mass on u_0 elsewhere."""
    k = kz[zmap].copy()
    k[~on] = 0.0
    k[~on, 0] = 1.0
    return k


def algorithm1_joint(j: JointPmf) -> Mechanism:
    """:func:`algorithm1` on p_{Y|X} of ``j``, skipping zero-mass x.

    Rows of p_{Y|X} for symbols with p(x) = 0 are arbitrary, and feeding
    them in would shrink the common support for no reason.
    """
    live = np.flatnonzero(j.p_x > 0)
    ch = condition(j, "x")
    sub = Channel(ch.matrix[live], tuple(ch.input_labels[i] for i in live), ch.output_labels)
    mech, trace = algorithm1(sub)
    if live.size == j.nx:
        return mech
    zmap = np.zeros(j.nx, dtype=int)
    zmap[live] = np.arange(live.size)
    kz = mech.kernel_xyu()
    k = _lift_kernel(kz, zmap, j.table > 0)
    kernel = Channel(k.reshape(j.nx * j.ny, mech.n_u),
                     _pair_labels(j.x_labels, j.y_labels), mech.u_labels)
    return Mechanism(FULL, kernel, j.nx, j.ny, trace)


def _live_channel(j: JointPmf) -> np.ndarray:
    return condition(j, "x").matrix[j.p_x > 0]


def _theorem1_bound(table: np.ndarray) -> float:
    """(H(Y) - (1 - sum_y min_x p(y|x)) min{H(X), log|Y|})^+ for a joint array."""
    px = table.sum(axis=1)
    py = table.sum(axis=0)
    rows = table[px > 0] / px[px > 0, None]
    s = rows.min(axis=0).sum()
    n_y = int((py > 0).sum())
    val = entropy(py) - (1.0 - s) * min(entropy(px), math.log2(n_y))
    return max(val, 0.0)


def g0_full_lower_bound(j: JointPmf) -> float:
    """Closed-form lower bound on G_0 (Theorem 1).

    ``|Y|`` counts only symbols of positive probability, which can only
    tighten the bound.
    """
    return _theorem1_bound(j.table)


def g0_full_upper_bound(j: JointPmf) -> float:
    """H(Y) - (1 - sum_y min_x p(y|x)) H_b(min_x p(x)), over x with p(x) > 0."""
    rows = _live_channel(j)
    s = rows.min(axis=0).sum()
    pmin = float(j.p_x[j.p_x > 0].min())
    return entropy(j.p_y) - (1.0 - s) * binary_entropy(min(pmin, 1.0))


def g0_full_closed_binary(j: JointPmf) -> float:
    """Exact G_0 for binary X."""
    if j.nx != 2:
        raise WrongAlphabetSize(f"closed form needs |X| = 2, got {j.nx}")
    rows = _live_channel(j)
    s = rows.min(axis=0).sum()
    return max(entropy(j.p_y) - (1.0 - s) * entropy(j.p_x), 0.0)


def relabel_3x2(j: JointPmf) -> tuple:
    """Indices (x_1, x_2, x_3) used by :func:`g0_full_closed_3x2`.

    x_1 minimises p(y_1|x) and x_2 minimises p(y_2|x), lowest index on ties.
    If both pick the same symbol (all rows equal), x_2 becomes the next
    lowest index.
    """
    ch = condition(j, "x").matrix
    x1 = int(np.argmin(ch[:, 0]))
    x2 = int(np.argmin(ch[:, 1]))
    if x2 == x1:
        x2 = min(i for i in range(3) if i != x1)
    x3 = 3 - x1 - x2
    return x1, x2, x3


def g0_full_closed_3x2(j: JointPmf) -> float:
    """Exact G_0 for |X| = 3, |Y| = 2."""
    if (j.nx, j.ny) != (3, 2):
        raise WrongAlphabetSize(f"closed form needs (|X|,|Y|) = (3,2), got ({j.nx},{j.ny})")
    ch = condition(j, "x").matrix
    x1, x2, x3 = relabel_3x2(j)
    p = j.p_x
    val = (entropy(j.p_y)
           - (ch[x3, 0] - ch[x1, 0]) * binary_entropy(p[x1])
           - (ch[x3, 1] - ch[x2, 1]) * binary_entropy(p[x2]))
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# merging symbols of X: Z = X 1{X in X'}
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class SubsetRestriction:
    """Z = X 1{X in X'}, with z index 0 for the merged rest, then X' in order."""

    subset: tuple
    z_pmf: np.ndarray
    z_channel: Channel
    z_joint: np.ndarray
    zmap: np.ndarray
    leakage: float
    slope_bound: float


def _check_subset(j: JointPmf, subset, allow_large=False) -> tuple:
    sub = tuple(sorted(int(x) for x in subset))
    if len(set(sub)) != len(sub):
        raise DimensionMismatch(f"repeated symbol in subset {sub}")
    if any(x < 0 or x >= j.nx for x in sub):
        raise OutOfRange(f"subset {sub} has indices outside 0..{j.nx - 1}")
    if not allow_large and len(sub) > j.nx - 2:
        raise SubsetTooLarge(f"|X'| = {len(sub)} exceeds |X| - 2 = {j.nx - 2}")
    return sub


def restrict_to_z(j: JointPmf, subset: Iterable[int]) -> SubsetRestriction:
    """Build Z for the subset X' and the quantities that need no mechanism.

    The leakage of any mechanism built from Algorithm 1 on (Z, Y) is
    I(X;Y) - I(Z;Y); ``slope_bound`` is the bound f(p_XY, X') on the slope
    from that point to (I(X;Y), H(Y)), or ``inf`` when I(Z;Y) vanishes.
    """
    sub = _check_subset(j, subset)
    zmap = np.zeros(j.nx, dtype=int)
    zmap[list(sub)] = np.arange(1, len(sub) + 1)
    zt = np.zeros((len(sub) + 1, j.ny))
    np.add.at(zt, zmap, j.table)
    zt.setflags(write=False)
    zmap.setflags(write=False)
    i_zy = mutual_information_table(zt)
    leak = max(mutual_information(j) - i_zy, 0.0)
    pz = zt.sum(axis=1)

    if i_zy <= tol().num:
        slope = math.inf
    else:
        rows = zt[pz > 0] / pz[pz > 0, None]
        s = rows.min(axis=0).sum()
        n_y = int((j.p_y > 0).sum())
        h_y = entropy(j.p_y)
        slope = min(h_y, (1.0 - s) * min(entropy(pz), math.log2(n_y))) / i_zy

    rest = [j.x_labels[x] for x in range(j.nx) if x not in sub]
    zl = ("{" + ",".join(rest) + "}",) + tuple(j.x_labels[x] for x in sub)
    mass = np.where(pz > 0, pz, 1.0)
    rows = np.where(pz[:, None] > 0, zt / mass[:, None], 1.0 / j.ny)
    deg = tuple(np.flatnonzero(pz <= 0).tolist())
    zch = Channel(rows / rows.sum(axis=1, keepdims=True), zl, j.y_labels, deg)
    return SubsetRestriction(sub, pz, zch, zt, zmap, leak, slope)


def subset_mechanism(j: JointPmf, subset: Iterable[int]) -> Mechanism:
    """Algorithm 1 on (Z, Y), lifted back to p_{U|XY}."""
    r = restrict_to_z(j, subset)
    live = np.flatnonzero(r.z_pmf > 0)
    sub = Channel(r.z_channel.matrix[live],
                  tuple(r.z_channel.input_labels[i] for i in live), j.y_labels)
    mz, _ = algorithm1(sub)
    pos = np.full(r.z_pmf.size, 0, dtype=int)
    pos[live] = np.arange(live.size)
    k = _lift_kernel(mz.kernel_xyu(), pos[r.zmap], j.table > 0)
    kernel = Channel(k.reshape(j.nx * j.ny, mz.n_u),
                     _pair_labels(j.x_labels, j.y_labels), mz.u_labels)
    return Mechanism(FULL, kernel, j.nx, j.ny, mz.trace)


def _subset_tag(j, sub):
    return "X'={" + ",".join(j.x_labels[x] for x in sub) + "}"


def curve_point_from_subset(j: JointPmf, subset: Iterable[int]) -> TradeoffPoint:
    sub = _check_subset(j, subset)
    ev = evaluate_mechanism(j, subset_mechanism(j, sub))
    return TradeoffPoint(ev.leakage_bits, ev.utility_bits, _subset_tag(j, sub))


def _endpoints(j: JointPmf):
    ev = evaluate_mechanism(j, algorithm1_joint(j))
    left = TradeoffPoint(0.0, ev.utility_bits, "L")
    right = TradeoffPoint(mutual_information(j), entropy(j.p_y), "R")
    return left, right


def admissible_subsets(nx: int):
    """All X' with 1 <= |X'| <= |X| - 2, by size then lexicographically."""
    for size in range(1, nx - 1):
        yield from itertools.combinations(range(nx), size)


def subset_count(nx: int) -> int:
    return max(2 ** nx - nx - 2, 0)


def _finish(j, points, model, method, left_utility, **meta):
    env = upper_concave_envelope(points)
    return TradeoffCurve(tuple(points), env, model, method,
                         band=sanity_band(j, left_utility), meta=meta)


def curve_full_exhaustive(j: JointPmf, cap: int = 4096, workers: Optional[int] = None) -> TradeoffCurve:
    """Envelope of the points from every admissible subset, plus L and R.

    Raises
    ------
    TooManySubsets
        If 2^|X| - |X| - 2 exceeds ``cap``; use :func:`curve_full_greedy`.
    """
    n = subset_count(j.nx)
    if n > cap:
        raise TooManySubsets(
            f"{n} subsets exceed cap {cap}; use the greedy curve instead")
    subsets = list(admissible_subsets(j.nx))
    pts = pmap(lambda s: curve_point_from_subset(j, s), subsets, workers)
    left, right = _endpoints(j)
    return _finish(j, pts + [left, right], FULL, "exhaustive", left.utility,
                   subsets=len(subsets))


def greedy_chain(j: JointPmf) -> list:
    """Nested subsets X_1 ⊂ X_2 ⊂ ... picked by the slope bound.

    At step k the symbol minimising f(p_XY, X_{k-1} ∪ {x}) joins (lowest
    index on ties).  The chain stops once I(Z_{k-1};Y) reaches I(X;Y) or
    after |X| - 2 steps.
    """
    i_xy = mutual_information(j)
    eps = tol().endpoint
    chain: list = []
    current: tuple = ()
    i_z = 0.0
    for _ in range(max(j.nx - 2, 0)):
        if abs(i_xy - i_z) <= eps:
            break
        best, best_f = None, math.inf
        for x in range(j.nx):
            if x in current:
                continue
            f = restrict_to_z(j, current + (x,)).slope_bound
            if best is None or f < best_f:
                best, best_f = x, f
        current = tuple(sorted(current + (best,)))
        chain.append(current)
        i_z = i_xy - restrict_to_z(j, current).leakage
    return chain


def curve_full_greedy(j: JointPmf) -> TradeoffCurve:
    """Envelope of L, R and one point per subset of the greedy chain."""
    chain = greedy_chain(j)
    pts = [curve_point_from_subset(j, s) for s in chain]
    left, right = _endpoints(j)
    return _finish(j, pts + [left, right], FULL, "greedy", left.utility,
                   chain=[list(s) for s in chain])


def nonalgorithmic_point(j: JointPmf, subset) -> TradeoffPoint:
    """Same leakage as the algorithmic point; utility from the Theorem 1 bound on (Z, Y)."""
    r = restrict_to_z(j, subset)
    return TradeoffPoint(r.leakage, _theorem1_bound(r.z_joint), _subset_tag(j, r.subset) + "~")


def curve_full_nonalgorithmic(j: JointPmf, mode: str = "exhaustive", cap: int = 4096) -> TradeoffCurve:
    """Points whose utilities come from closed-form bounds instead of Algorithm 1.

    ``mode`` selects the subsets: ``"exhaustive"`` (all admissible) or
    ``"greedy"`` (the chain of :func:`greedy_chain`).
    """
    if mode == "exhaustive":
        n = subset_count(j.nx)
        if n > cap:
            raise TooManySubsets(f"{n} subsets exceed cap {cap}; use mode='greedy'")
        subsets = list(admissible_subsets(j.nx))
    elif mode == "greedy":
        subsets = greedy_chain(j)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    pts = [nonalgorithmic_point(j, s) for s in subsets]
    left = TradeoffPoint(0.0, g0_full_lower_bound(j), "L~")
    right = TradeoffPoint(mutual_information(j), entropy(j.p_y), "R")
    return _finish(j, pts + [left, right], FULL, f"nonalgorithmic-{mode}", left.utility)


def independence_level(joint_xu) -> int:
    """Number of x (with p(x) > 0) whose posterior p_{U|X}(.|x) equals p_U."""
    t = np.asarray(joint_xu.table if isinstance(joint_xu, JointPmf) else joint_xu, dtype=float)
    px = t.sum(axis=1)
    pu = t.sum(axis=0)
    live = px > 0
    post = t[live] / px[live, None]
    return int((np.abs(post - pu).max(axis=1) <= tol().eq).sum())


def verify_k_independence(joint_xu, k: int) -> bool:
    """True if at least ``k`` symbols of X are independent of U (Definition 4)."""
    return independence_level(joint_xu) >= k
