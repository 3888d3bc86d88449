import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uptradeoff import fixtures as F
from uptradeoff import full, oracle, public
from uptradeoff.envelope import in_band
from uptradeoff.errors import SymbolReused, TooManyOrderings, WrongAlphabetSize
from uptradeoff.prob import (JointPmf, binary_entropy, entropy, evaluate_mechanism,
                             mutual_information, random_joint)

from helpers import gen, joint, random_channel, random_pmf


def util(j):
    return evaluate_mechanism(j, public.algorithm3(j)[0]).utility_bits


class TestAlgorithm3:
    def test_example3_trace(self):
        j = F.example3_joint()
        m, tr = public.algorithm3(j)
        assert tr.deterministic_set == ()
        assert tr.low_set == (0, 3) and tr.high_set == (1, 2)
        assert tr.links == ((0, 2), (0, 1), (3, 1))
        assert tr.mix_weights[2] == pytest.approx(0.84375)
        assert tr.iterations <= 4 - 0 - 1
        assert np.allclose(tr.p_u, [0.1538, 0.6980, 0.1481], atol=1e-3)

    def test_independent(self):
        j = JointPmf(np.outer([0.4, 0.6], [0.2, 0.3, 0.5]))
        m, tr = public.algorithm3(j)
        assert tr.deterministic_set == (0, 1, 2)
        assert util(j) == pytest.approx(entropy(j.p_y))
        assert public.g0_public_formula_bound(tr, j) == pytest.approx(entropy(j.p_y))

    def test_wrong_size(self):
        with pytest.raises(WrongAlphabetSize):
            public.algorithm3(F.example1_joint())

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 7), st.integers(0, 2 ** 31), st.booleans())
    def test_structure(self, ny, seed, with_b):
        g = gen(seed)
        ch = random_channel(g, 2, ny)
        px = random_pmf(g, 2)
        if with_b:
            # force one output with posterior equal to the prior
            ch[:, 0] = ch[:, 0].mean()
            ch[:, 1:] *= (1 - ch[0, 0]) / ch[:, 1:].sum(axis=1, keepdims=True)
        j = joint(px, ch)
        m, tr = public.algorithm3(j)
        k = m.kernel.matrix
        assert ((k > 0).sum(axis=0) <= 2).all()
        xu = j.table @ k
        pu = xu.sum(axis=0)
        assert np.abs(xu[0] / pu - j.p_x[0]).max() <= 1e-9
        assert np.allclose(j.p_y @ k, pu)
        assert tr.iterations <= ny - len(tr.deterministic_set) - 1 or tr.iterations == 0
        if not tr.deterministic_set:
            assert m.n_u <= ny - 1
        for y in tr.deterministic_set:
            assert (k[y] == 1).sum() == 1
        u = evaluate_mechanism(j, m).utility_bits
        b = public.g0_public_formula_bound(tr, j)
        assert b <= u + 1e-12
        assert b >= max(entropy(j.p_y) - 1, 0) - 1e-12

    def test_example3_bound(self):
        j = F.example3_joint()
        _, tr = public.algorithm3(j)
        b = public.g0_public_formula_bound(tr, j)
        assert b <= util(j)
        assert b == pytest.approx(1.75 - binary_entropy(0.375))


class TestRank:
    def test_independent(self):
        j = JointPmf(np.outer([0.4, 0.6], [0.5, 0.5]))
        assert public.rank_bounds(j)[0] == pytest.approx(1.0)

    def test_example3(self):
        g0l, big = public.rank_bounds(F.example3_joint())
        assert g0l == pytest.approx(0.75)
        assert big >= g0l

    def test_erasure(self):
        e = 0.3
        j = F.erasure_joint(3, e)
        g0l, big = public.rank_bounds(j)
        assert g0l <= binary_entropy(e) + 1e-12 and big <= binary_entropy(e) + 1e-12


class TestStages:
    def test_stage1_leakage_bound(self):
        j = random_joint(3, 3, 4)
        root = public.identity_mechanism(j)
        st = public.curve_public_stage(j, root, 1)
        ind = np.vstack([j.table[1], j.table.sum(axis=0) - j.table[1]])
        from helpers import mi
        assert st.point.leakage <= mutual_information(j) - mi(ind) + 1e-9

    def test_reused(self):
        j = random_joint(3, 3, 4)
        with pytest.raises(SymbolReused):
            public.curve_public_stage(j, public.identity_mechanism(j), 1, used=(1,))

    def test_independent_indicator_is_identity(self):
        # 1{X=x_0} independent of Y: the stage leaves utility and leakage unchanged
        ch = np.array([[0.25, 0.25, 0.5], [0.1, 0.4, 0.5], [0.4, 0.1, 0.5]])
        j = joint([0.2, 0.4, 0.4], ch)
        root = public.identity_mechanism(j)
        st = public.curve_public_stage(j, root, 0)
        assert st.indicator_information == pytest.approx(0.0, abs=1e-12)
        assert st.point.utility == pytest.approx(entropy(j.p_y))
        assert st.point.leakage == pytest.approx(mutual_information(j))

    def test_drop_bounded(self):
        for s in range(10):
            j = random_joint(400 + s, 4, 5)
            plan = public.run_ordering(j, (0, 1, 2))
            prev = evaluate_mechanism(j, public.identity_mechanism(j))
            for i, st in enumerate(plan.stages, 1):
                assert prev.utility_bits - st.evaluation.utility_bits <= 1 + 1e-9
                assert st.evaluation.leakage_bits <= prev.leakage_bits + 1e-12
                assert full.independence_level(j.table @ st.mechanism.kernel.matrix) >= i
                prev = st.evaluation
            assert plan.stages[-1].point.leakage <= 1e-9


class TestCurves:
    def test_binary(self):
        j = random_joint(5, 2, 4)
        c = public.curve_public_exhaustive(j)
        g = public.curve_public_greedy(j)
        assert len(c.points) == 2
        assert [(p.leakage, p.utility) for p in c.points] == [(p.leakage, p.utility) for p in g.points]
        assert c.points[0].utility == pytest.approx(util(j))

    def test_three(self):
        j = random_joint(6, 3, 4)
        c = public.curve_public_exhaustive(j)
        interior = [p for p in c.points if p.tag != "R"]
        assert len(interior) <= 3 + 6
        assert c.envelope.breakpoints[0].leakage <= 1e-9

    def test_cap_and_limit(self):
        j = random_joint(7, 7, 4)
        with pytest.raises(TooManyOrderings):
            public.curve_public_exhaustive(j)
        c = public.curve_public_exhaustive(j, limit=10)
        assert c.truncated and c.meta["orderings"] == 10

    def test_limit_prefix(self):
        j = random_joint(8, 4, 4)
        all_pts = {(p.leakage, p.utility) for p in public.curve_public_exhaustive(j).points}
        part = {(p.leakage, p.utility) for p in public.curve_public_exhaustive(j, limit=6).points}
        assert part <= all_pts

    def test_greedy_picks_dominant(self):
        # x_2 is the only symbol informative about Y
        ch = np.array([[0.3, 0.3, 0.4], [0.3, 0.3, 0.4], [0.9, 0.05, 0.05]])
        j = joint([0.4, 0.3, 0.3], ch)
        plan = public.greedy_plan(j)
        assert plan.ordering[0] == 2

    def test_greedy_below_exhaustive(self):
        from uptradeoff.envelope import envelope_dominated
        for s in range(5):
            j = random_joint(90 + s, 4, 5)
            assert envelope_dominated(public.curve_public_greedy(j).envelope,
                                      public.curve_public_exhaustive(j).envelope)

    def test_public_below_full(self):
        from uptradeoff.envelope import envelope_dominated
        for s in range(5):
            j = random_joint(95 + s, 4, 4)
            assert envelope_dominated(public.curve_public_exhaustive(j).envelope,
                                      full.curve_full_exhaustive(j).envelope)

    def test_in_band(self):
        j = random_joint(11, 4, 5)
        c = public.curve_public_exhaustive(j)
        assert all(in_band(p, c.band) for p in c.points)

    def test_parallel_same(self):
        j = random_joint(12, 4, 4)
        a = public.curve_public_exhaustive(j, workers=1)
        b = public.curve_public_exhaustive(j, workers=3)
        assert [(p.leakage, p.utility) for p in a.points] == [(p.leakage, p.utility) for p in b.points]


def test_canonicalize():
    j = F.example3_joint()
    m, _ = public.algorithm3(j)
    k = np.hstack([m.kernel.matrix[:, [2, 0]], np.zeros((4, 1)), m.kernel.matrix[:, [1]]])
    from uptradeoff.prob import Channel, Mechanism
    shuffled = Mechanism("public", Channel(k), None, 4)
    a = public.canonicalize(m).kernel.matrix
    b = public.canonicalize(shuffled).kernel.matrix
    assert np.allclose(a, b)


def test_convexity_public_oracle():
    g = gen(31)
    for _ in range(20):
        ch = random_channel(g, 2, 3)
        p1, p2 = random_pmf(g, 2), random_pmf(g, 2)
        f = lambda p: oracle.exact_g0_public(joint(p, ch)).value_bits
        assert f((p1 + p2) / 2) <= (f(p1) + f(p2)) / 2 + 1e-9
