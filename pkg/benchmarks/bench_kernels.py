"""Compare the numba kernels with their numpy fallbacks.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Each kernel is called on a fixed set of inputs under both backends; the
table reports the best-of-N wall time per call and the speed-up.  With
``--end-to-end`` the public exhaustive curve for the 8x8 numerical example
(truncated to a few thousand orderings) is also timed in two subprocesses,
one per backend, so that the ``UPT_NO_NUMBA`` switch is exercised exactly
as a user would.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from uptradeoff import _kernels

NP = _kernels.numpy_impl
NB = _kernels.numba_impl


def _gen(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _channel(g, nx, ny):
    m = g.random((nx, ny))
    return np.ascontiguousarray(m / m.sum(axis=1, keepdims=True))


def _tableau(g, m, n):
    A = g.random((m, n))
    b = A @ g.random(n)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    return T, np.arange(n, n + m, dtype=np.int64)


def cases():
    g = _gen(0)
    p = _gen(1).random(64)
    p /= p.sum()
    t = _channel(g, 8, 8) / 8
    ch = _channel(g, 8, 8)
    tab = g.random((2, 16))
    tab /= tab.sum()
    py = tab.sum(axis=0)
    prior = float(tab[0].sum())
    post = tab[0] / py
    cls = np.sign(post - prior).astype(np.int64)
    T, basis = _tableau(g, 9, 60)
    n = T.shape[1] - T.shape[0]
    return {
        "entropy": lambda impl: impl["entropy"](p),
        "mutual_information": lambda impl: impl["mutual_information"](t),
        "waterfill_full": lambda impl: impl["waterfill_full"](ch, 1e-9, 1e-12),
        "waterfill_public": lambda impl: impl["waterfill_public"](post, prior, py, cls, 1e-9),
        "bland": lambda impl: impl["bland"](T.copy(), basis.copy(), n, 1e-11, 1e-11, 10000),
    }


def best_time(fn, repeat, inner):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def end_to_end(limit):
    code = ("import time; from uptradeoff import fixtures, public; j = fixtures.numerical_joint(); "
            f"t = time.perf_counter(); public.curve_public_exhaustive(j, limit={limit}, workers=1); "
            "print(time.perf_counter() - t)")
    out = {}
    for name, flag in (("numba", "0"), ("numpy", "1")):
        env = {**os.environ, "UPT_NO_NUMBA": flag}
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                           text=True, check=True)
        out[name] = float(r.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--inner", type=int, default=200)
    ap.add_argument("--end-to-end", action="store_true")
    ap.add_argument("--limit", type=int, default=2000)
    args = ap.parse_args(argv)

    print(f"{'kernel':<20}{'numpy [us]':>12}{'numba [us]':>12}{'speed-up':>10}")
    for name, fn in cases().items():
        fn(NB)  # compile outside the timed region
        t_np = best_time(lambda: fn(NP), args.repeat, args.inner)
        t_nb = best_time(lambda: fn(NB), args.repeat, args.inner)
        print(f"{name:<20}{t_np * 1e6:>12.2f}{t_nb * 1e6:>12.2f}{t_np / t_nb:>10.1f}")

    if args.end_to_end:
        e = end_to_end(args.limit)
        print(f"\npublic exhaustive curve, 8x8, {args.limit} orderings")
        print(f"  numba {e['numba']:.2f} s   numpy {e['numpy']:.2f} s   "
              f"speed-up {e['numpy'] / e['numba']:.1f}")


if __name__ == "__main__":
    main()
