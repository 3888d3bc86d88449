"""Finite probability primitives.

Distributions are immutable: every array held by a :class:`Pmf`,
:class:`JointPmf`, :class:`Channel` or :class:`Mechanism` is a read-only
copy.  All information quantities are in bits.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .config import tol
from .errors import (DimensionMismatch, EmptyInput, IncompatibleAlphabets,
                     InvalidChannel, InvariantViolation, NegativeEntry,
                     OutOfRange, SumNotOne)

FULL = "full"
PUBLIC = "public"


def _frozen(a, ndim=None):
    arr = np.array(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _default_labels(prefix, n):
    return tuple(f"{prefix}{i}" for i in range(n))


def _check_labels(labels, n, prefix):
    if labels is None:
        return _default_labels(prefix, n)
    labels = tuple(str(s) for s in labels)
    if len(labels) != n:
        raise DimensionMismatch(f"{len(labels)} labels for {n} symbols")
    return labels


@dataclasses.dataclass(frozen=True, eq=False)
class Pmf:
    """A probability vector with optional symbol names."""

    probs: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        p = _frozen(self.probs, 1)
        if p.size == 0:
            raise EmptyInput("a pmf needs at least one symbol")
        if (p < 0).any():
            raise NegativeEntry("negative probability")
        if abs(p.sum() - 1.0) > tol().pmf:
            raise SumNotOne(f"probabilities sum to {p.sum()!r}")
        object.__setattr__(self, "probs", p)
        if self.labels is not None:
            object.__setattr__(self, "labels", _check_labels(self.labels, p.size, "s"))

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return self.probs[i]

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)


@dataclasses.dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint pmf of (X, Y); ``table[x, y]``."""

    table: np.ndarray
    x_labels: Optional[tuple] = None
    y_labels: Optional[tuple] = None

    def __post_init__(self):
        t = _frozen(self.table, 2)
        if t.size == 0:
            raise EmptyInput("empty joint table")
        if (t < 0).any():
            raise NegativeEntry("negative probability in joint table")
        if abs(t.sum() - 1.0) > tol().pmf:
            raise SumNotOne(f"joint table sums to {t.sum()!r}")
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "x_labels", _check_labels(self.x_labels, t.shape[0], "x"))
        object.__setattr__(self, "y_labels", _check_labels(self.y_labels, t.shape[1], "y"))

    @property
    def nx(self):
        return self.table.shape[0]

    @property
    def ny(self):
        return self.table.shape[1]

    @property
    def p_x(self):
        return self.table.sum(axis=1)

    @property
    def p_y(self):
        return self.table.sum(axis=0)

    @property
    def marginal_x(self):
        return Pmf(self.p_x, self.x_labels)

    @property
    def marginal_y(self):
        return Pmf(self.p_y, self.y_labels)

    def transpose(self):
        return JointPmf(self.table.T, self.y_labels, self.x_labels)


@dataclasses.dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix: row i is the output pmf given input i.

    ``degenerate_rows`` lists inputs whose row was filled in (uniformly)
    because the conditioning symbol has zero probability.
    """

    matrix: np.ndarray
    input_labels: Optional[tuple] = None
    output_labels: Optional[tuple] = None
    degenerate_rows: tuple = ()

    def __post_init__(self):
        m = _frozen(self.matrix, 2)
        if (m < 0).any():
            raise InvalidChannel("negative transition probability")
        bad = np.flatnonzero(np.abs(m.sum(axis=1) - 1.0) > tol().pmf)
        if bad.size:
            raise InvalidChannel(f"rows {bad.tolist()} do not sum to 1")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "input_labels",
                           _check_labels(self.input_labels, m.shape[0], "i"))
        object.__setattr__(self, "output_labels",
                           _check_labels(self.output_labels, m.shape[1], "o"))
        object.__setattr__(self, "degenerate_rows", tuple(self.degenerate_rows))

    @property
    def n_in(self):
        return self.matrix.shape[0]

    @property
    def n_out(self):
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, n, labels=None):
        return cls(np.eye(n), labels, labels)


@dataclasses.dataclass(frozen=True, eq=False)
class Mechanism:
    """A release channel p_{U|XY} (``model='full'``) or p_{U|Y} (``'public'``).

    For the full model the kernel input index of (x, y) is ``x * ny + y``.
    """

    model: str
    kernel: Channel
    nx: Optional[int]
    ny: int
    trace: object = dataclasses.field(default=None, repr=False)

    def __post_init__(self):
        if self.model not in (FULL, PUBLIC):
            raise ValueError(f"unknown observation model {self.model!r}")
        expect = self.ny if self.model == PUBLIC else self.nx * self.ny
        if self.kernel.n_in != expect:
            raise IncompatibleAlphabets(
                f"{self.model} kernel has {self.kernel.n_in} input rows, expected {expect}")

    @property
    def u_labels(self):
        return self.kernel.output_labels

    @property
    def n_u(self):
        return self.kernel.n_out

    def kernel_xyu(self):
        """Kernel as an (nx, ny, |U|) array (full model only)."""
        return self.kernel.matrix.reshape(self.nx, self.ny, self.n_u)


@dataclasses.dataclass(frozen=True, eq=False)
class EvaluatedMechanism:
    leakage_bits: float
    utility_bits: float
    joint_xyu: np.ndarray


# ---------------------------------------------------------------------------

def validate_pmf(raw: Sequence[float], labels=None) -> Pmf:
    """Check a raw probability vector and return it as a :class:`Pmf`.

    Entries smaller than the pmf tolerance are set to exactly zero and the
    vector is renormalised.
    """
    p = np.array(raw, dtype=float).ravel()
    if p.size == 0:
        raise EmptyInput("empty probability vector")
    t = tol().pmf
    if (p < -t).any():
        raise NegativeEntry(f"negative entry {p.min()!r}")
    if abs(p.sum() - 1.0) > t:
        raise SumNotOne(f"entries sum to {p.sum()!r}")
    p[p < t] = 0.0
    return Pmf(p / p.sum(), labels)


def validate_joint(raw, x_labels=None, y_labels=None) -> JointPmf:
    t = np.array(raw, dtype=float)
    if t.ndim != 2 or t.size == 0:
        raise DimensionMismatch(f"joint table must be a non-empty matrix, got shape {t.shape}")
    tp = tol().pmf
    if (t < -tp).any():
        raise NegativeEntry(f"negative entry {t.min()!r}")
    if abs(t.sum() - 1.0) > tp:
        raise SumNotOne(f"joint table sums to {t.sum()!r}")
    t[t < tp] = 0.0
    return JointPmf(t / t.sum(), x_labels, y_labels)


def validate_channel(raw, input_labels=None, output_labels=None) -> Channel:
    m = np.array(raw, dtype=float)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"channel must be a non-empty matrix, got shape {m.shape}")
    rows = [validate_pmf(r).probs for r in m]
    return Channel(np.vstack(rows), input_labels, output_labels)


def entropy(p) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    arr = np.ascontiguousarray(np.asarray(p, dtype=float).ravel())
    return max(float(_kernels.entropy_kernel(arr)), 0.0)


def binary_entropy(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise OutOfRange(f"binary entropy argument {t!r} outside [0, 1]")
    if t == 0.0 or t == 1.0:
        return 0.0
    return -t * math.log2(t) - (1.0 - t) * math.log2(1.0 - t)


def kl_divergence(p, q) -> float:
    """D(p || q) in bits; ``math.inf`` when p is not absolutely continuous w.r.t. q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatch(f"pmfs of sizes {p.size} and {q.size}")
    on = p > 0
    if (q[on] <= 0).any():
        return math.inf
    return max(float((p[on] * np.log2(p[on] / q[on])).sum()), 0.0)


def joint_from(p_x, ch: Channel) -> JointPmf:
    px = np.asarray(p_x, dtype=float)
    if px.size != ch.n_in:
        raise DimensionMismatch(f"p_x has {px.size} symbols, channel has {ch.n_in} inputs")
    labels = p_x.labels if isinstance(p_x, Pmf) and p_x.labels else ch.input_labels
    t = px[:, None] * ch.matrix
    return JointPmf(t / t.sum(), labels, ch.output_labels)


def marginals(j: JointPmf):
    return j.marginal_x, j.marginal_y


def condition(j: JointPmf, given: str = "x") -> Channel:
    """p_{Y|X} (``given='x'``) or p_{X|Y} (``given='y'``).

    Rows for zero-probability conditioning symbols are uniform and listed
    in ``degenerate_rows``.
    """
    if given == "x":
        t, lin, lout = j.table, j.x_labels, j.y_labels
    elif given == "y":
        t, lin, lout = j.table.T, j.y_labels, j.x_labels
    else:
        raise ValueError("given must be 'x' or 'y'")
    mass = t.sum(axis=1)
    dead = mass <= 0
    rows = np.where(dead[:, None], 1.0 / t.shape[1],
                    t / np.where(dead, 1.0, mass)[:, None])
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Channel(rows, lin, lout, tuple(np.flatnonzero(dead).tolist()))


def _clamp_info(v: float) -> float:
    if v < -1e-9:
        raise InvariantViolation(f"negative mutual information {v!r}")
    return 0.0 if v < tol().num else float(v)


def mutual_information_table(t) -> float:
    """I between the row and column variables of a (normalised) joint array."""
    arr = np.ascontiguousarray(np.asarray(t, dtype=float))
    return _clamp_info(float(_kernels.mutual_information_kernel(arr)))


def mutual_information(j: JointPmf) -> float:
    return mutual_information_table(j.table)


def support(j: JointPmf) -> frozenset:
    xs, ys = np.nonzero(j.table > tol().pmf)
    return frozenset(zip(xs.tolist(), ys.tolist()))


def numerical_rank(ch, rel_tol: float = 1e-8) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts when it exceeds ``rel_tol`` times the largest absolute
    entry of the matrix.
    """
    a = np.array(ch.matrix if isinstance(ch, Channel) else ch, dtype=float)
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        return 0
    thresh = rel_tol * scale
    n, m = a.shape
    rank = 0
    for col in range(m):
        if rank == n:
            break
        piv = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[piv, col]) <= thresh:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, col] / a[rank, col], a[rank])
        rank += 1
    return rank


def random_joint(seed: int, nx: int, ny: int) -> JointPmf:
    """Random joint pmf from a PCG64 stream.

    p_X and each row of p_{Y|X} are normalised vectors of iid Uniform[0, 1)
    draws; p_X is drawn first, then the rows in order.
    """
    if nx < 1 or ny < 1:
        raise OutOfRange("alphabet sizes must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    px = rng.random(nx)
    rows = rng.random((nx, ny))
    px /= px.sum()
    rows /= rows.sum(axis=1, keepdims=True)
    t = px[:, None] * rows
    return JointPmf(t / t.sum())


def evaluate_mechanism(j: JointPmf, m: Mechanism) -> EvaluatedMechanism:
    """Leakage I(X;U) and utility I(Y;U) of a mechanism applied to ``j``."""
    if m.model == FULL:
        if (m.nx, m.ny) != (j.nx, j.ny):
            raise IncompatibleAlphabets(
                f"mechanism built for {m.nx}x{m.ny}, joint is {j.nx}x{j.ny}")
        xyu = j.table[:, :, None] * m.kernel_xyu()
    else:
        if m.ny != j.ny:
            raise IncompatibleAlphabets(f"mechanism reads |Y|={m.ny}, joint has {j.ny}")
        xyu = j.table[:, :, None] * m.kernel.matrix[None, :, :]
    leak = mutual_information_table(xyu.sum(axis=1))
    util = mutual_information_table(xyu.sum(axis=0))
    xyu.setflags(write=False)
    return EvaluatedMechanism(leak, util, xyu)


def compose_mechanisms(first: Mechanism, second: Channel) -> Mechanism:
    """Follow ``first`` (observation -> U1) by the channel U1 -> U2."""
    if first.n_u != second.n_in:
        raise DimensionMismatch(
            f"first mechanism emits {first.n_u} symbols, second channel reads {second.n_in}")
    k = first.kernel.matrix @ second.matrix
    k = k / k.sum(axis=1, keepdims=True)
    kernel = Channel(k, first.kernel.input_labels, second.output_labels)
    return Mechanism(first.model, kernel, first.nx, first.ny)


def deterministic_mechanism(j: JointPmf, f: Sequence[int], n_u: Optional[int] = None,
                            model: str = PUBLIC) -> Mechanism:
    """Public mechanism U = f(Y) (or full mechanism U = f(x*ny + y))."""
    f = np.asarray(f, dtype=int)
    n_in = j.ny if model == PUBLIC else j.nx * j.ny
    if f.size != n_in:
        raise DimensionMismatch(f"map has {f.size} entries, expected {n_in}")
    n_u = int(f.max()) + 1 if n_u is None else n_u
    k = np.zeros((n_in, n_u))
    k[np.arange(n_in), f] = 1.0
    in_labels = j.y_labels if model == PUBLIC else _pair_labels(j)
    return Mechanism(model, Channel(k, in_labels, _default_labels("u", n_u)),
                     None if model == PUBLIC else j.nx, j.ny)


def _pair_labels(j: JointPmf):
    return tuple(f"({x},{y})" for x in j.x_labels for y in j.y_labels)
