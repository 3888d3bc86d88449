"""Public data observation: the curator sees only Y and designs p_{U|Y}.

:func:`algorithm3` builds a perfectly private mechanism for binary X by
pairing outputs whose posteriors straddle the prior.  Non-binary X is
handled through chains of indicators 1{X = x_i} (:func:`curve_public_stage`,
:func:`curve_public_exhaustive`, :func:`curve_public_greedy`).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from ._parallel import pmap
from .config import tol
from .envelope import TradeoffCurve, TradeoffPoint, sanity_band, upper_concave_envelope
from .errors import (InvariantViolation, SymbolReused, TooManyOrderings,
                     WrongAlphabetSize)
from .prob import (PUBLIC, Channel, JointPmf, Mechanism, _default_labels, binary_entropy,
                   compose_mechanisms, condition, entropy, evaluate_mechanism,
                   mutual_information, mutual_information_table, numerical_rank)


@dataclasses.dataclass(frozen=True, eq=False)
class AlgorithmThreeTrace:
    """Record of one run of :func:`algorithm3`.

    ``links[n]`` is the pair (y_0, y_0') joined by the n-th mixed
    realization, with weight ``mix_weights[n]`` on y_0 and mass
    ``masses[n]``.  Deterministic realizations (one per member of the
    deterministic set) come first in the U alphabet.
    """

    deterministic_set: tuple
    low_set: tuple
    high_set: tuple
    posterior: np.ndarray
    prior: float
    links: tuple
    mix_weights: tuple
    masses: tuple
    water_levels: np.ndarray
    iterations: int
    p_y: np.ndarray
    unbalanced: bool = False
    residual: float = 0.0

    @property
    def p_u(self):
        """p_U, deterministic realizations first."""
        return np.array([self.p_y[y] for y in self.deterministic_set] + list(self.masses))


def algorithm3(j: JointPmf):
    """Perfect-privacy mechanism p_{U|Y} for binary X.

    Row 0 of ``j`` plays the role of x_0.  Outputs whose posterior
    p(x_0|y) equals the prior (within the equality tolerance) are released
    as-is; the others are paired, lowest posterior below the prior with
    lowest posterior above it, and drained at the mixing weight that makes
    the pair's posterior equal to the prior.

    Returns
    -------
    (Mechanism, AlgorithmThreeTrace)
    """
    if j.nx != 2:
        raise WrongAlphabetSize(f"algorithm 3 needs binary X, got |X| = {j.nx}")
    t = tol()
    py = j.p_y
    prior = float(j.p_x[0])
    live = py > 0
    post = np.where(live, j.table[0] / np.where(live, py, 1.0), prior)
    diff = post - prior
    cls = np.zeros(j.ny, dtype=np.int64)
    cls[live & (diff < -t.eq)] = -1
    cls[live & (diff > t.eq)] = 1
    det = tuple(int(y) for y in np.flatnonzero(live & (cls == 0)))

    pairs, fw, mass, n, levels, status, residual = _kernels.waterfill_public(
        np.ascontiguousarray(post), prior, np.ascontiguousarray(py), cls, t.pmf)
    unbalanced = False
    if status == _kernels.UNBALANCED:
        # impossible in exact arithmetic: both sides carry the same deviation
        if residual >= 10 * t.pmf:
            raise InvariantViolation(f"unbalanced water levels, residual {residual!r}")
        unbalanced = True
    elif status != _kernels.OK:
        raise InvariantViolation(f"water filling stopped with status {status}")

    n_u = len(det) + n
    if n_u == 0:
        n_u = 1  # every output has zero mass; cannot happen for a valid joint
    k = np.zeros((j.ny, n_u))
    for i, y in enumerate(det):
        k[y, i] = 1.0
    for i in range(n):
        u = len(det) + i
        y0, y1 = pairs[i]
        k[y0, u] += mass[i] * fw[i] / py[y0]
        k[y1, u] += mass[i] * (1.0 - fw[i]) / py[y1]
    k[~live] = 0.0
    k[~live, 0] = 1.0
    k /= k.sum(axis=1, keepdims=True)

    trace = AlgorithmThreeTrace(
        deterministic_set=det,
        low_set=tuple(int(y) for y in np.flatnonzero(cls < 0)),
        high_set=tuple(int(y) for y in np.flatnonzero(cls > 0)),
        posterior=post,
        prior=prior,
        links=tuple((int(a), int(b)) for a, b in pairs[:n]),
        mix_weights=tuple(float(f) for f in fw[:n]),
        masses=tuple(float(m) for m in mass[:n]),
        water_levels=levels[:n + 1].copy(),
        iterations=int(n),
        p_y=py,
        unbalanced=unbalanced,
        residual=float(residual),
    )
    kernel = Channel(k, j.y_labels, _default_labels("u", n_u))
    return Mechanism(PUBLIC, kernel, None, j.ny, trace), trace


def mix_weight(post: np.ndarray, prior: float, y0: int, y1: int) -> float:
    """f(y_0, y_0') = (p(x_0|y_0') - p(x_0)) / (p(x_0|y_0') - p(x_0|y_0))."""
    return float((post[y1] - prior) / (post[y1] - post[y0]))


def g0_public_formula_bound(trace: AlgorithmThreeTrace, j: JointPmf) -> float:
    """(H(Y) - (1 - p(B)) max H_b(f))^+, the max over all low/high pairs.

    Every mixed realization has H(Y|U=u) = H_b(f) for one of the pairs, so
    the largest binary entropy over the pairs bounds H(Y|U).  (Evaluating
    H_b at the largest weight instead is not a bound: H_b is not monotone
    on [0, 1].)
    """
    h_y = entropy(j.p_y)
    if not trace.low_set or not trace.high_set:
        return h_y
    h_max = max(binary_entropy(min(max(mix_weight(trace.posterior, trace.prior, a, b), 0.0), 1.0))
                for a in trace.low_set for b in trace.high_set)
    p_b = float(j.p_y[list(trace.deterministic_set)].sum())
    return max(h_y - (1.0 - p_b) * h_max, 0.0)


def rank_bounds(j: JointPmf):
    """(g_0^L, G_0^L) from the rank of P_{X|Y} (outputs with p(y) > 0 only)."""
    p_xgy = condition(j, "y").matrix[j.p_y > 0]
    r = max(numerical_rank(p_xgy), 1)
    h_y = entropy(j.p_y)
    lr = math.log2(r)
    return max(h_y - lr, 0.0), max(h_y - min(entropy(j.p_x), lr), 0.0)


def identity_mechanism(j: JointPmf) -> Mechanism:
    """U_0 = Y."""
    return Mechanism(PUBLIC, Channel(np.eye(j.ny), j.y_labels, j.y_labels), None, j.ny)


def canonicalize(m: Mechanism, p_y: Optional[np.ndarray] = None) -> Mechanism:
    """Canonical U alphabet for comparing public mechanisms.

    Realizations that are never used (zero column, or zero mass under
    ``p_y``) are dropped, the rest are sorted by their first linked y
    (then by the column itself), and columns that agree within the
    equality tolerance are merged.
    """
    k = m.kernel.matrix
    used = k.max(axis=0) > 0
    if p_y is not None:
        used &= (np.asarray(p_y) @ k) > 0
    cols = [k[:, u] for u in np.flatnonzero(used)]
    cols.sort(key=lambda c: (int(np.flatnonzero(c > 0)[0]), tuple(-c)))
    merged: list = []
    for c in cols:
        if merged and np.abs(merged[-1][0] - c).max() <= tol().eq:
            merged[-1][1] += c
        else:
            merged.append([c, c.copy()])
    kk = np.column_stack([s for _, s in merged])
    kk /= kk.sum(axis=1, keepdims=True)
    return Mechanism(PUBLIC, Channel(kk, m.kernel.input_labels,
                                     _default_labels("u", kk.shape[1])), None, m.ny)


# ---------------------------------------------------------------------------
# chains of binary indicators
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class StageResult:
    """One stage U_{i-1} -> U_i for the indicator of ``symbol``."""

    symbol: int
    stage_kernel: Channel
    mechanism: Mechanism
    point: TradeoffPoint
    indicator_information: float
    trace: AlgorithmThreeTrace
    evaluation: object = dataclasses.field(default=None, repr=False)


@dataclasses.dataclass(frozen=True, eq=False)
class OrderingPlan:
    """A sequence of stages; ``ordering`` lists the symbols actually used."""

    ordering: tuple
    stages: tuple

    @property
    def points(self):
        return tuple(s.point for s in self.stages)


def _xu_table(j: JointPmf, m: Mechanism) -> np.ndarray:
    return j.table @ m.kernel.matrix


def indicator_information(j: JointPmf, m: Mechanism, x: int) -> float:
    """I(1{X=x}; U) for the public mechanism ``m``."""
    xu = _xu_table(j, m)
    two = np.vstack([xu[x], xu.sum(axis=0) - xu[x]])
    return mutual_information_table(np.clip(two, 0.0, None))


def curve_public_stage(j: JointPmf, prev: Mechanism, x_i: int, used: Sequence[int] = (),
                       prev_eval=None, check: bool = True) -> StageResult:
    """Apply Algorithm 3 to (1{X=x_i}, U_{i-1}) and compose with ``prev``.

    With ``check`` the stage is verified against the per-stage bounds:
    utility drops by at most one bit, and leakage drops by at least
    I(1{X=x_i}; U_{i-1}).
    """
    if x_i in used:
        raise SymbolReused(f"symbol {x_i} already used in this ordering")
    xu = _xu_table(j, prev)
    two = np.vstack([xu[x_i], xu.sum(axis=0) - xu[x_i]])
    two = np.clip(two, 0.0, None)
    two /= two.sum()
    jj = JointPmf(two, (f"1{{X={j.x_labels[x_i]}}}", "else"), prev.u_labels)
    stage, trace = algorithm3(jj)
    mech = compose_mechanisms(prev, stage.kernel)
    ev = evaluate_mechanism(j, mech)
    i_ind = mutual_information_table(two)
    if check:
        if prev_eval is None:
            prev_eval = evaluate_mechanism(j, prev)
        slack = 1e-9
        if prev_eval.utility_bits - ev.utility_bits > 1.0 + slack:
            raise InvariantViolation("stage lost more than one bit of utility")
        if ev.leakage_bits > prev_eval.leakage_bits - i_ind + slack:
            raise InvariantViolation("stage leakage above I(X;U_prev) - I(indicator;U_prev)")
    pt = TradeoffPoint(ev.leakage_bits, ev.utility_bits,
                       "S=" + ",".join(j.x_labels[x] for x in tuple(used) + (x_i,)))
    return StageResult(x_i, stage.kernel, mech, pt, i_ind, trace, ev)


def run_ordering(j: JointPmf, ordering: Sequence[int], check: bool = True) -> OrderingPlan:
    """Run stages along ``ordering`` until leakage vanishes."""
    prev = identity_mechanism(j)
    prev_eval = evaluate_mechanism(j, prev)
    stages = []
    used: list = []
    for x in ordering:
        if prev_eval.leakage_bits <= tol().num:
            break
        st = curve_public_stage(j, prev, x, used, prev_eval, check)
        stages.append(st)
        used.append(x)
        prev = st.mechanism
        prev_eval = st.evaluation
    return OrderingPlan(tuple(used), tuple(stages))


def _dedupe(points):
    seen = {}
    for p in points:
        key = (round(p.leakage, 12), round(p.utility, 12))
        seen.setdefault(key, p)
    return list(seen.values())


def _right(j):
    return TradeoffPoint(mutual_information(j), entropy(j.p_y), "R")


def _dfs(j, prev, prev_eval, prefix, remaining, budget, out, check):
    """Depth-first walk of the ordering tree; returns leaves consumed.

    Orderings are tuples of length |X| - 1; ``budget`` caps how many of
    them (in lexicographic order) are covered.  A node whose leakage has
    already vanished stands for all the orderings below it.
    """
    depth_left = len(remaining) - 1  # stages still to go before a leaf
    if depth_left == 0 or prev_eval.leakage_bits <= tol().num:
        return math.factorial(len(remaining))
    done = 0
    for x in remaining:
        if done >= budget:
            break
        st = curve_public_stage(j, prev, x, prefix, prev_eval, check)
        out.append(st.point)
        ev = st.evaluation
        rest = [y for y in remaining if y != x]
        done += _dfs(j, st.mechanism, ev, prefix + (x,), rest, budget - done, out, check)
    return done


def ordering_count(nx: int) -> int:
    return math.factorial(nx) if nx > 1 else 1


def curve_public_exhaustive(j: JointPmf, cap: int = 720, limit: Optional[int] = None,
                            workers: Optional[int] = None, check: bool = True) -> TradeoffCurve:
    """Envelope over every ordering of indicator stages, plus R.

    Parameters
    ----------
    cap : int
        Largest number of orderings accepted without ``limit``.
    limit : int, optional
        Cover only the first ``limit`` orderings in lexicographic order;
        the curve is then flagged as truncated.

    Raises
    ------
    TooManyOrderings
        If |X|! exceeds ``cap`` and no ``limit`` is given.
    """
    total = ordering_count(j.nx)
    if limit is None and total > cap:
        raise TooManyOrderings(
            f"{total} orderings exceed cap {cap}; use the greedy curve or set a limit")
    budget = total if limit is None else min(limit, total)
    if j.nx < 2:
        return TradeoffCurve(**_curve_kwargs(j, [], "exhaustive", False, {"orderings": 1}))

    root = identity_mechanism(j)
    root_eval = evaluate_mechanism(j, root)
    symbols = list(range(j.nx))
    per_first = math.factorial(j.nx - 1)
    # split the tree by first symbol; each task gets its lexicographic share
    tasks = []
    left = budget
    for x in symbols:
        if left <= 0:
            break
        tasks.append((x, min(left, per_first)))
        left -= per_first

    def walk(task):
        x, b = task
        out: list = []
        if root_eval.leakage_bits <= tol().num:
            return out
        st = curve_public_stage(j, root, x, (), root_eval, check)
        out.append(st.point)
        ev = st.evaluation
        _dfs(j, st.mechanism, ev, (x,), [y for y in symbols if y != x], b, out, check)
        return out

    pts = [p for chunk in pmap(walk, tasks, workers) for p in chunk]
    return TradeoffCurve(**_curve_kwargs(j, pts, "exhaustive", budget < total,
                                         {"orderings": budget, "total_orderings": total}))


def _curve_kwargs(j, points, method, truncated, meta):
    pts = _dedupe(points) + [_right(j)]
    env = upper_concave_envelope(pts)
    return dict(points=tuple(pts), envelope=env, model=PUBLIC, method=method,
                band=sanity_band(j, env.breakpoints[0].utility),
                truncated=truncated, meta=meta)


def greedy_plan(j: JointPmf, check: bool = True) -> OrderingPlan:
    """Adaptive ordering maximising I(1{X=x}; U_{i-1}) at each stage."""
    prev = identity_mechanism(j)
    prev_eval = evaluate_mechanism(j, prev)
    used: list = []
    stages = []
    while prev_eval.leakage_bits > tol().num and len(used) < j.nx - 1:
        scores = [(indicator_information(j, prev, x), x) for x in range(j.nx) if x not in used]
        top = max(s for s, _ in scores)
        x = min(x for s, x in scores if s >= top - 1e-12)
        st = curve_public_stage(j, prev, x, used, prev_eval, check)
        stages.append(st)
        used.append(x)
        prev = st.mechanism
        prev_eval = st.evaluation
    return OrderingPlan(tuple(used), tuple(stages))


def curve_public_greedy(j: JointPmf, check: bool = True) -> TradeoffCurve:
    """Envelope of the greedy ordering's stage points plus R."""
    plan = greedy_plan(j, check)
    return TradeoffCurve(**_curve_kwargs(j, list(plan.points), "greedy", False,
                                         {"ordering": list(plan.ordering)}))
