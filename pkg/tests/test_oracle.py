import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uptradeoff import fixtures as F
from uptradeoff import full, oracle, public
from uptradeoff.errors import TooManyVertices
from uptradeoff.oracle import LpProblem, simplex_solve
from uptradeoff.prob import JointPmf, binary_entropy, evaluate_mechanism, random_joint

from helpers import brute_force_lp, gen, hb, joint


class TestSimplex:
    def test_trivial(self):
        sol = simplex_solve(LpProblem([0.0, 0.0], np.eye(2), [0.3, 0.7]))
        assert sol.status == "optimal"
        assert np.allclose(sol.weights, [0.3, 0.7])

    def test_infeasible(self):
        sol = simplex_solve(LpProblem([1.0], [[1.0], [1.0]], [0.3, 0.7]))
        assert sol.status == "infeasible"

    def test_unbounded(self):
        sol = simplex_solve(LpProblem([-1.0, 0.0], [[1.0, -1.0]], [1.0]))
        assert sol.status == "unbounded"

    def test_negative_rhs_and_redundant_rows(self):
        A = np.array([[1.0, 1.0, 0.0], [-1.0, -1.0, 0.0], [0.0, 1.0, 1.0]])
        b = np.array([1.0, -1.0, 1.0])
        sol = simplex_solve(LpProblem([1.0, 2.0, 0.5], A, b))
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(brute_force_lp([1.0, 2.0, 0.5], A, b))
        assert sol.residual <= 1e-9

    def test_table1(self):
        # columns (P111, P222, P211, P212, P112, P121, P122, P221); rows are the
        # independent constraints for (x1,y1), (x2,y2), (x3,y1) plus total mass
        p = np.array([0.2, 0.3, 0.5])
        ch1 = np.array([0.2, 0.9, 0.5])  # p(y1|x), relabelled already
        cols = [(0, 0, 0), (1, 1, 1), (1, 0, 0), (1, 0, 1), (0, 0, 1), (0, 1, 0), (0, 1, 1), (1, 1, 0)]
        A = np.zeros((4, 8))
        for c, (a1, a2, a3) in enumerate(cols):
            A[0, c] = a1 == 0
            A[1, c] = a2 == 1
            A[2, c] = a3 == 0
            A[3, c] = 1.0
        b = np.array([ch1[0], 1 - ch1[1], ch1[2], 1.0])

        def cost(v):
            q = np.zeros(2)
            for x, y in enumerate(v):
                q[y] += p[x]
            return hb(q[0])

        c = np.array([cost(v) for v in cols])
        sol = simplex_solve(LpProblem(c, A, b))
        bfs0 = np.array([ch1[0], 1 - ch1[1], ch1[2] - ch1[0], (1 - ch1[2]) - (1 - ch1[1]), 0, 0, 0, 0])
        assert sol.objective_value == pytest.approx(c @ bfs0, abs=1e-12)
        assert np.allclose(sol.weights, bfs0, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4), st.integers(2, 8), st.integers(0, 2 ** 31))
    def test_against_brute_force(self, m, n, seed):
        g = gen(seed)
        A = g.random((m, n))
        w0 = g.random(n) * (g.random(n) < 0.6)
        b = A @ w0
        c = g.normal(size=n)
        c = np.abs(c)  # nonnegative costs keep the LP bounded
        sol = simplex_solve(LpProblem(c, A, b))
        assert sol.status == "optimal"
        assert sol.objective_value == pytest.approx(brute_force_lp(c, A, b), abs=1e-8)

    def test_deterministic(self):
        g = gen(3)
        A = g.random((3, 7))
        b = A @ g.random(7)
        c = g.random(7)
        a = simplex_solve(LpProblem(c, A, b))
        bb = simplex_solve(LpProblem(c, A, b))
        assert a.basis == bb.basis and np.array_equal(a.weights, bb.weights)


class TestExtremeFull:
    def test_counts(self):
        assert len(oracle.enumerate_extreme_full(random_joint(1, 3, 2))) == 8
        assert len(oracle.enumerate_extreme_full(JointPmf(np.eye(3) / 3))) == 1
        assert len(oracle.enumerate_extreme_full(F.example1_joint())) == 27

    def test_cap(self):
        with pytest.raises(TooManyVertices):
            oracle.enumerate_extreme_full(random_joint(1, 8, 8))

    def test_structure(self):
        j = random_joint(2, 3, 3)
        res = oracle.exact_g0_full(j)
        ev = evaluate_mechanism(j, res.mechanism)
        assert ev.leakage_bits <= 1e-9
        assert ev.utility_bits == pytest.approx(res.value_bits, abs=1e-9)
        assert ((ev.joint_xyu > 1e-15).sum(axis=1) <= 1).all()
        # Lemma 1 cardinality
        assert res.mechanism.n_u >= max((j.table[x] > 0).sum() for x in range(3))

    def test_splitting_never_improves(self):
        # adding mixtures of two vertices as extra columns leaves the optimum unchanged
        j = random_joint(4, 3, 2)
        eps = oracle.enumerate_extreme_full(j)
        base = oracle.exact_g0_full(j).lp.objective_value
        lp = oracle._full_lp(j, eps)
        g = gen(9)
        extra_cols, extra_cost = [], []
        for _ in range(10):
            a, b = g.choice(len(eps), 2, replace=False)
            lam = g.random()
            extra_cols.append(lam * lp.A[:, a] + (1 - lam) * lp.A[:, b])
            qa = np.zeros(2)
            qb = np.zeros(2)
            for x in range(3):
                qa[eps.points[a, x]] += j.p_x[x]
                qb[eps.points[b, x]] += j.p_x[x]
            q = lam * qa + (1 - lam) * qb
            extra_cost.append(hb(q[0]))
        A = np.hstack([lp.A, np.array(extra_cols).T])
        c = np.concatenate([lp.objective, extra_cost])
        assert simplex_solve(LpProblem(c, A, lp.b)).objective_value >= base - 1e-12


class TestExtremePublic:
    def test_example3_vertices(self):
        j = F.example3_joint()
        eps = oracle.enumerate_extreme_public(j)
        assert (np.count_nonzero(eps.points, axis=1) == 2).all()
        want = np.zeros(4)
        want[0], want[2] = 0.1875, 0.8125
        assert any(np.allclose(q, want) for q in eps.points)
        assert len(eps) == 4

    def test_independent(self):
        j = JointPmf(np.outer([0.3, 0.7], [0.2, 0.3, 0.5]))
        eps = oracle.enumerate_extreme_public(j)
        assert len(eps) == 3 and np.allclose(sorted(eps.points.max(axis=1)), 1.0)

    def test_function_of_x(self):
        j = JointPmf(np.diag([0.2, 0.3, 0.5]))
        eps = oracle.enumerate_extreme_public(j)
        assert len(eps) == 1 and np.allclose(eps.points[0], [0.2, 0.3, 0.5])

    def test_example3_value(self):
        j = F.example3_joint()
        res = oracle.exact_g0_public(j)
        u = evaluate_mechanism(j, public.algorithm3(j)[0]).utility_bits
        assert res.value_bits == pytest.approx(u, abs=1e-12)
        ev = evaluate_mechanism(j, res.mechanism)
        assert ev.leakage_bits <= 1e-9
        assert ((res.mechanism.kernel.matrix > 0).sum(axis=0) <= 2).all()

    def test_erasure(self):
        for M in (2, 3):
            j = F.erasure_joint(M, 0.3)
            assert oracle.exact_g0_public(j).value_bits == pytest.approx(binary_entropy(0.3), abs=1e-9)

    def test_cap(self):
        with pytest.raises(TooManyVertices):
            oracle.enumerate_extreme_public(random_joint(1, 8, 20), cap=100)


def test_report_matches_mechanism():
    j = random_joint(5, 3, 3)
    for fn in (oracle.exact_g0_full, oracle.exact_g0_public):
        r = fn(j)
        assert len(r.active_vertices) == r.mechanism.n_u
        assert r.weights.sum() == pytest.approx(1.0)
