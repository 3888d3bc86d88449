"""Worked instances: the numbered examples, classic channels and the 8x8 case study."""

from __future__ import annotations

import numpy as np

from .errors import InvariantViolation, OutOfRange
from .prob import Channel, JointPmf, joint_from

# Example 1: p_{Y|X}, one row per x.
EXAMPLE1_CHANNEL = ((0.2, 0.5, 0.3),
                    (0.4, 0.2, 0.4),
                    (0.6, 0.3, 0.1))

# Example 3: p_Y and p(x_0|y).
EXAMPLE3_P_Y = (0.5, 0.25, 0.125, 0.125)
EXAMPLE3_POSTERIOR = (0.3, 0.8, 0.5, 0.4)

# 8x8 case study, printed to three decimals.  Column i of NUMERICAL_M is
# p_{Y|X}(.|x_i).
NUMERICAL_P_X = (0.175, 0.089, 0.146, 0.026, 0.077, 0.167, 0.145, 0.175)
NUMERICAL_M = (
    (0.130, 0.233, 0.159, 0.045, 0.185, 0.158, 0.039, 0.051),
    (0.007, 0.061, 0.072, 0.117, 0.046, 0.054, 0.067, 0.065),
    (0.168, 0.251, 0.217, 0.106, 0.034, 0.107, 0.219, 0.160),
    (0.185, 0.011, 0.008, 0.154, 0.141, 0.147, 0.066, 0.123),
    (0.134, 0.099, 0.100, 0.169, 0.271, 0.188, 0.212, 0.091),
    (0.150, 0.016, 0.087, 0.180, 0.096, 0.202, 0.063, 0.216),
    (0.147, 0.035, 0.175, 0.066, 0.165, 0.115, 0.242, 0.152),
    (0.078, 0.293, 0.182, 0.162, 0.063, 0.029, 0.091, 0.143),
)

# rounding of the printed values stays below this per row / vector
PRINTED_ROUNDING = 5e-3


def _renormalized(v, what):
    v = np.asarray(v, dtype=float)
    s = v.sum(axis=-1, keepdims=True)
    if (np.abs(s - 1.0) >= PRINTED_ROUNDING).any():
        raise InvariantViolation(f"{what}: printed values are off by more than rounding")
    return v / s


def labels(prefix, n, start=1):
    return tuple(f"{prefix}{i}" for i in range(start, start + n))


def example1_channel() -> Channel:
    return Channel(np.array(EXAMPLE1_CHANNEL), labels("x", 3), labels("y", 3))


def example1_joint(p_x=(1 / 3, 1 / 3, 1 / 3)) -> JointPmf:
    return joint_from(np.asarray(p_x, dtype=float), example1_channel())


def example3_joint() -> JointPmf:
    py = np.array(EXAMPLE3_P_Y)
    post = np.array(EXAMPLE3_POSTERIOR)
    return JointPmf(np.vstack([py * post, py * (1 - post)]), ("x0", "x1"), labels("y", 4))


def numerical_joint() -> JointPmf:
    """The 8x8 instance with printed rows renormalised."""
    px = _renormalized(NUMERICAL_P_X, "p_X")
    ch = _renormalized(np.array(NUMERICAL_M).T, "p_{Y|X}")
    return joint_from(px, Channel(ch, labels("x", 8), labels("y", 8)))


def cyclic_joint(K: int) -> JointPmf:
    """X uniform on K symbols, Y uniform on {x, ..., x+K-2} mod K."""
    if K < 2:
        raise OutOfRange("K must be at least 2")
    ch = np.zeros((K, K))
    for x in range(K):
        ch[x, [(x + d) % K for d in range(K - 1)]] = 1.0 / (K - 1)
    return joint_from(np.full(K, 1.0 / K), Channel(ch, labels("x", K), labels("y", K)))


def cyclic_g0(K: int) -> float:
    return (K - 1) / K * np.log2(K - 1)


def erasure_joint(M: int, e: float, p_x=None) -> JointPmf:
    """M-ary erasure channel: Y = 0 (erasure) w.p. e, else Y = X.

    Output symbol 0 is the erasure; symbol i (1..M) reproduces x_i.
    """
    if not 0.0 <= e <= 1.0:
        raise OutOfRange(f"erasure probability {e!r} outside [0, 1]")
    ch = np.zeros((M, M + 1))
    ch[:, 0] = e
    ch[np.arange(M), np.arange(1, M + 1)] = 1.0 - e
    px = np.full(M, 1.0 / M) if p_x is None else np.asarray(p_x, dtype=float)
    return joint_from(px, Channel(ch, labels("x", M), ("e",) + labels("y", M)))


def bec_joint(e: float, p: float = 0.5) -> JointPmf:
    return erasure_joint(2, e, (p, 1.0 - p))


def bac_joint(alpha: float, beta: float, p: float = 0.5) -> JointPmf:
    """Binary asymmetric channel: p(y_1|x_1) = 1 - alpha, p(y_1|x_2) = beta."""
    ch = np.array([[1 - alpha, alpha], [beta, 1 - beta]])
    return joint_from(np.array([p, 1 - p]), Channel(ch, labels("x", 2), labels("y", 2)))


def bsc_joint(alpha: float, p: float = 0.5) -> JointPmf:
    return bac_joint(alpha, alpha, p)
