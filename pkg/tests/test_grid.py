"""Tests for the deterministic 2D grid engine and its exact DP."""

import numpy as np
import pytest

from dagbroadcast.model import AND2, IDENTITY, OR2, XOR2, BudgetExceededError, Gate
from dagbroadcast.grid import (
    GridDistribution,
    grid_exact_distribution,
    grid_mc_tv_estimate,
    grid_propagate,
)
from oracles import grid_joint_by_enumeration

NOT = Gate("NOT", 1, (1, 0))


class TestGridPropagate:
    def test_level_shapes(self):
        levels = grid_propagate(XOR2, IDENTITY, 0.1, 1, 9, seed=3)
        assert [len(lv) for lv in levels] == list(range(1, 11))

    def test_deterministic(self):
        a = grid_propagate(AND2, IDENTITY, 0.2, 1, 8, seed=11)
        b = grid_propagate(AND2, IDENTITY, 0.2, 1, 8, seed=11)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_noiseless_and_grid_consensus(self):
        for root in (0, 1):
            levels = grid_propagate(AND2, IDENTITY, 0.0, root, 10, seed=1)
            for lv in levels:
                assert (lv == root).all()

    def test_noiseless_xor_is_pascal_parity(self):
        levels = grid_propagate(XOR2, IDENTITY, 0.0, 1, 8, seed=1)
        for k, lv in enumerate(levels):
            expect = [(j & k) == j for j in range(k + 1)]
            np.testing.assert_array_equal(lv, np.array(expect, dtype=np.uint8))

    def test_gate_arity_checked(self):
        with pytest.raises(ValueError):
            grid_propagate(IDENTITY, IDENTITY, 0.1, 1, 3, seed=1)
        with pytest.raises(ValueError):
            grid_propagate(AND2, AND2, 0.1, 1, 3, seed=1)


class TestGridDistribution:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridDistribution(1, np.array([0.5, 0.5]), np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            GridDistribution(
                0, np.array([0.7, 0.7]), np.array([0.5, 0.5])
            )

    def test_tv_and_ml(self):
        d = GridDistribution(0, np.array([0.1, 0.9]), np.array([0.6, 0.4]))
        assert d.tv() == pytest.approx(0.5)
        assert d.ml_error() == pytest.approx(0.25)


class TestExactDp:
    @pytest.mark.parametrize("f1", [AND2, OR2, XOR2])
    @pytest.mark.parametrize("f2", [IDENTITY, NOT])
    @pytest.mark.parametrize("delta", [0.0, 0.13, 0.3])
    def test_matches_enumeration_oracle(self, f1, f2, delta):
        dists = grid_exact_distribution(f1, f2, delta, 3)
        for depth in (1, 2, 3):
            for root, vec in ((1, dists[depth].plus), (0, dists[depth].minus)):
                oracle = grid_joint_by_enumeration(f1, f2, delta, depth, root)
                np.testing.assert_allclose(vec, oracle, atol=1e-12)

    def test_level_one_tv_closed_form(self):
        # both level-1 nodes are boundary nodes: two independent noisy
        # copies of the root, so TV = (1 - delta)^2 - delta^2 = 1 - 2 delta
        for delta in (0.1, 0.2, 0.35):
            dists = grid_exact_distribution(XOR2, IDENTITY, delta, 1)
            assert dists[1].tv() == pytest.approx(1 - 2 * delta, abs=1e-12)

    def test_tv_nonincreasing(self):
        for f1 in (AND2, XOR2):
            dists = grid_exact_distribution(f1, IDENTITY, 0.12, 9)
            tvs = [d.tv() for d in dists]
            assert all(b <= a + 1e-10 for a, b in zip(tvs, tvs[1:]))

    def test_noiseless_point_masses(self):
        dists = grid_exact_distribution(AND2, IDENTITY, 0.0, 5)
        for d in dists:
            assert d.tv() == pytest.approx(1.0)
            assert d.plus[(1 << (d.level + 1)) - 1] == pytest.approx(1.0)
            assert d.minus[0] == pytest.approx(1.0)

    def test_depth_cap(self):
        with pytest.raises(BudgetExceededError):
            grid_exact_distribution(AND2, IDENTITY, 0.1, 13)
        dists = grid_exact_distribution(AND2, IDENTITY, 0.1, 13, depth_cap=13)
        assert dists[-1].level == 13

    def test_xor_grid_tv_decays(self):
        dists = grid_exact_distribution(XOR2, IDENTITY, 0.2, 10)
        assert dists[10].tv() < 0.05 * dists[1].tv()


class TestMcTvEstimate:
    def test_agrees_with_dp(self):
        exact = grid_exact_distribution(XOR2, IDENTITY, 0.15, 6)
        est = grid_mc_tv_estimate(XOR2, IDENTITY, 0.15, 6, 40_000, seed=9)
        for e in est:
            truth = exact[e.level].tv()
            assert abs(e.tv - truth) <= 3 * e.dev + 1e-9

    def test_and_grid_agrees_with_dp(self):
        exact = grid_exact_distribution(AND2, IDENTITY, 0.25, 5)
        est = grid_mc_tv_estimate(AND2, IDENTITY, 0.25, 5, 40_000, seed=10)
        for e in est:
            assert abs(e.tv - exact[e.level].tv()) <= 3 * e.dev + 1e-9

    def test_deterministic(self):
        a = grid_mc_tv_estimate(XOR2, IDENTITY, 0.2, 4, 2000, seed=5)
        b = grid_mc_tv_estimate(XOR2, IDENTITY, 0.2, 4, 2000, seed=5)
        assert [e.tv for e in a] == [e.tv for e in b]

    def test_depth_guard(self):
        with pytest.raises(BudgetExceededError):
            grid_mc_tv_estimate(XOR2, IDENTITY, 0.2, 21, 10, seed=1)
