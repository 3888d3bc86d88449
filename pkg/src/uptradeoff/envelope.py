"""Upper concave envelopes of achievable (leakage, utility) points."""

from __future__ import annotations

import dataclasses
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import tol
from .errors import EmptyInput
from .prob import JointPmf, entropy, mutual_information


@dataclasses.dataclass(frozen=True)
class TradeoffPoint:
    """An achievable pair (I(X;U), I(Y;U)) in bits."""

    leakage: float
    utility: float
    tag: str = ""

    def __post_init__(self):
        # information quantities can carry rounding residue just below zero
        t = tol().num
        if self.leakage < -t or self.utility < -t:
            raise ValueError(f"negative coordinate in {self!r}")
        object.__setattr__(self, "leakage", max(float(self.leakage), 0.0))
        object.__setattr__(self, "utility", max(float(self.utility), 0.0))


@dataclasses.dataclass(frozen=True)
class PiecewiseLinear:
    """Concave piecewise-linear function through ``breakpoints``.

    Breakpoints have strictly increasing leakage.  A single breakpoint
    describes a function on a one-point domain.
    """

    breakpoints: tuple

    def __post_init__(self):
        bps = tuple(self.breakpoints)
        if not bps:
            raise EmptyInput("a piecewise-linear function needs a breakpoint")
        xs = [p.leakage for p in bps]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint leakages must be strictly increasing")
        object.__setattr__(self, "breakpoints", bps)

    @property
    def xs(self):
        return np.array([p.leakage for p in self.breakpoints])

    @property
    def ys(self):
        return np.array([p.utility for p in self.breakpoints])

    @property
    def domain(self):
        return self.breakpoints[0].leakage, self.breakpoints[-1].leakage

    def slopes(self):
        return np.diff(self.ys) / np.diff(self.xs)

    def __call__(self, x):
        return evaluate_envelope(self, x)

    def is_concave(self, slack: Optional[float] = None) -> bool:
        slack = tol().num if slack is None else slack
        s = self.slopes()
        return bool((np.diff(s) <= slack).all())

    def is_nondecreasing(self, slack: Optional[float] = None) -> bool:
        slack = tol().num if slack is None else slack
        return bool((np.diff(self.ys) >= -slack).all())


@dataclasses.dataclass(frozen=True)
class TradeoffCurve:
    """Achievable points, their envelope and (optionally) the sanity band."""

    points: tuple
    envelope: PiecewiseLinear
    model: str = ""
    method: str = ""
    band: Optional[tuple] = None
    truncated: bool = False
    meta: dict = dataclasses.field(default_factory=dict)

    def rows(self):
        """(epsilon_bits, utility_bits, kind) rows for CSV export."""
        out = [(p.leakage, p.utility, "point") for p in self.points]
        out += [(p.leakage, p.utility, "envelope") for p in self.envelope.breakpoints]
        if self.band is not None:
            lower, upper = self.band
            out += [(p.leakage, p.utility, "band_upper") for p in upper.breakpoints]
            out += [(p.leakage, p.utility, "band_lower") for p in lower.breakpoints]
        return out

    def __call__(self, x):
        return evaluate_envelope(self.envelope, x)


def upper_concave_envelope(points: Iterable[TradeoffPoint]) -> PiecewiseLinear:
    """Upper hull of a finite point set.

    Points sharing a leakage value keep only the largest utility; the hull
    is then a monotone-chain scan that discards left and near-collinear
    turns (within the numeric tolerance).
    """
    pts = sorted(points, key=lambda p: (p.leakage, -p.utility))
    if not pts:
        raise EmptyInput("no points to envelope")
    t = tol().num
    merged = [pts[0]]
    start = pts[0].leakage
    for p in pts[1:]:
        if p.leakage - start <= t:
            if p.utility > merged[-1].utility:
                merged[-1] = p
            continue
        merged.append(p)
        start = p.leakage

    hull: list = []
    for p in merged:
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = ((a.leakage - o.leakage) * (p.utility - o.utility)
                     - (a.utility - o.utility) * (p.leakage - o.leakage))
            if cross >= -t:
                hull.pop()
            else:
                break
        hull.append(p)
    return PiecewiseLinear(tuple(hull))


def evaluate_envelope(env: PiecewiseLinear, x: float, return_flag: bool = False):
    """Linear interpolation on ``env``; ``x`` outside the domain is clamped.

    With ``return_flag`` the result is ``(value, clamped)``.
    """
    lo, hi = env.domain
    clamped = x < lo or x > hi
    xc = min(max(x, lo), hi)
    if len(env.breakpoints) == 1:
        v = env.breakpoints[0].utility
    else:
        v = float(np.interp(xc, env.xs, env.ys))
    return (v, clamped) if return_flag else v


def _chord(x1, y0, y1, tag):
    if x1 <= tol().num:
        return PiecewiseLinear((TradeoffPoint(0.0, y1, tag),))
    return PiecewiseLinear((TradeoffPoint(0.0, min(y0, y1), tag), TradeoffPoint(x1, y1, tag)))


def sanity_band(j: JointPmf, g0_leftmost: float):
    """The two Remark-1 chords ``(lower_line, upper_line)``.

    ``upper_line`` joins (0, H(Y|X)) to (I(X;Y), H(Y)); ``lower_line``
    joins (0, g0_leftmost) to the same right end point.  When X and Y are
    independent both degenerate to the single point (0, H(Y)).
    """
    i_xy = mutual_information(j)
    h_y = entropy(j.p_y)
    upper = _chord(i_xy, h_y - i_xy, h_y, "band_upper")
    lower = _chord(i_xy, max(g0_leftmost, 0.0), h_y, "band_lower")
    return lower, upper


def in_band(point: TradeoffPoint, band, slack: float = 1e-9) -> bool:
    """True if ``point`` lies in the band's domain and under its upper chord.

    Achievable points may sit below the lower chord (only the optimal curve
    is bounded from below), so only the upper chord is enforced.
    """
    _, upper = band
    lo, hi = upper.domain
    if point.leakage < lo - slack or point.leakage > hi + slack:
        return False
    return point.utility <= evaluate_envelope(upper, point.leakage) + slack


def envelope_dominated(lower: PiecewiseLinear, upper: PiecewiseLinear,
                       slack: float = 1e-9, grid: Optional[Sequence[float]] = None) -> bool:
    """True if ``lower(x) <= upper(x) + slack`` on the union of breakpoints."""
    xs = np.union1d(lower.xs, upper.xs) if grid is None else np.asarray(grid, dtype=float)
    return all(evaluate_envelope(lower, x) <= evaluate_envelope(upper, x) + slack for x in xs)
