import numpy as np
import pytest

from ccm import lp

from _oracles import lp_scipy, lp_vertex_enum


def test_town_consumer_lp_against_vertex_enumeration():
    c = [1.0, 0.0]
    A = [[2.0, 0.0], [1.0, 1.0]]
    b = [1.0, 1.0]
    expect, _ = lp_vertex_enum(c, A, b)
    assert expect == pytest.approx(0.5, abs=1e-12)
    sol = lp.solve_arrays(c, A, b)
    assert sol.status == lp.OPTIMAL
    assert sol.objective_value == pytest.approx(0.5, abs=1e-9)
    assert np.allclose(sol.dual, [0.5, 0.0], atol=1e-9)


def test_zero_objective_and_unbounded():
    sol = lp.solve_arrays([0.0], [[1.0]], [1.0])
    assert sol.status == lp.OPTIMAL and sol.objective_value == 0.0
    assert lp.solve_arrays([1.0], [[-1.0]], [1.0]).status == lp.UNBOUNDED


def test_infeasible():
    assert lp.solve_arrays([0.0], [[1.0], [-1.0]], [1.0, -3.0]).status == lp.INFEASIBLE


def test_determinism_bit_identical():
    rng = np.random.default_rng(3)
    A = rng.uniform(-1, 2, (4, 5))
    b = rng.uniform(0.5, 2, 4)
    c = rng.uniform(-1, 2, 5)
    s1 = lp.solve_arrays(c, A, b)
    s2 = lp.solve_arrays(c, A, b)
    assert np.array_equal(s1.primal, s2.primal)
    assert np.array_equal(s1.dual, s2.dual)
    assert s1.objective_value == s2.objective_value


@pytest.mark.parametrize("seed", range(8))
def test_random_lps_match_scipy(seed):
    rng = np.random.default_rng(seed)
    for _ in range(25):
        m = int(rng.integers(1, 7))
        r = int(rng.integers(1, 6))
        A = rng.uniform(-1, 2, (r, m))
        b = rng.uniform(-0.5, 2, r)
        c = rng.uniform(-1, 2, m)
        ours = lp.solve_arrays(c, A, b)
        status, val, _ = lp_scipy(c, A, b)
        assert ours.status == status
        if status == lp.OPTIMAL:
            assert ours.objective_value == pytest.approx(val, abs=1e-7)


def test_duality_and_complementary_slackness_residuals():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m = int(rng.integers(1, 6))
        r = int(rng.integers(1, 5))
        A = rng.uniform(0, 2, (r, m))
        b = rng.uniform(0.1, 2, r)
        c = rng.uniform(0, 2, m)
        sol = lp.solve_arrays(c, A, b)
        assert sol.status == lp.OPTIMAL
        gap = abs(c @ sol.primal - b @ sol.dual)
        assert gap <= 1e-9 * (1 + abs(sol.objective_value))
        cs = np.abs(sol.dual * (b - A @ sol.primal))
        assert cs.max() <= 1e-9 * (1 + np.abs(b).max())


class TestConsumerProblem:
    def test_town_agent(self):
        opt = lp.consumer_problem([1.0, 0.0], [2.0, 0.0])
        assert opt.value == pytest.approx(0.5, abs=1e-9)
        assert opt.mu0 == pytest.approx(0.0, abs=1e-9)
        assert opt.mu1 == pytest.approx(0.5, abs=1e-9)

    def test_single_outcome(self):
        opt = lp.consumer_problem([5.0], [1.0])
        assert opt.value == pytest.approx(5.0, abs=1e-9)
        assert np.allclose(opt.demand, [1.0], atol=1e-9)

    def test_free_goods_budget_slack(self):
        opt = lp.consumer_problem([3.0, 1.0], [0.0, 0.0])
        assert opt.value == pytest.approx(3.0, abs=1e-9)
        assert np.allclose(opt.demand, [1.0, 0.0], atol=1e-9)
        assert opt.mu1 == pytest.approx(0.0, abs=1e-9)

    def test_rejects_zero_stake(self):
        with pytest.raises(ValueError, match="no stake"):
            lp.consumer_problem([0.0, 0.0], [1.0, 1.0])

    def test_dual_supports_utilities(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            k = int(rng.integers(1, 7))
            u = rng.integers(0, 9, size=k) / 8.0
            if u.max() == 0:
                u[int(rng.integers(0, k))] = 1.0
            p = rng.integers(0, 5, size=k) / 2.0
            opt = lp.consumer_problem(u, p)
            # mu1 * p >= u - mu0 everywhere, equality on the support.
            resid = opt.mu1 * p - (u - opt.mu0)
            assert resid.min() >= -1e-9
            on = opt.demand > 1e-8
            if on.any():
                assert np.abs(resid[on]).max() <= 1e-8


class TestMinimalCostDemand:
    def test_equal_utilities_pick_cheap_outcome(self):
        q, cost = lp.minimal_cost_demand([1.0, 1.0], [1.0, 2.0])
        assert np.allclose(q, [1.0, 0.0], atol=1e-9)
        assert cost == pytest.approx(1.0, abs=1e-9)

    def test_town_minimal_cost(self):
        q, cost = lp.minimal_cost_demand([1.0, 0.0], [2.0, 0.0])
        assert cost == pytest.approx(1.0, abs=1e-9)
        assert q[0] == pytest.approx(0.5, abs=1e-9)

    def test_free_single_good(self):
        q, cost = lp.minimal_cost_demand([4.0], [0.0])
        assert np.allclose(q, [1.0])
        assert cost == 0.0

    def test_cost_never_exceeds_consumer_cost(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            k = int(rng.integers(2, 6))
            u = rng.integers(1, 9, size=k) / 8.0
            p = rng.integers(0, 5, size=k) / 2.0
            opt = lp.consumer_problem(u, p)
            q, cost = lp.minimal_cost_demand(u, p)
            assert u @ q == pytest.approx(opt.value, abs=1e-8)
            assert cost <= p @ opt.demand + 1e-8


class TestShadowPrices:
    def test_town_case(self):
        c, a = lp.shadow_prices([1.0, 0.0], [2.0, 0.0], [0.5, 0.5])
        assert (c, a) == (pytest.approx(0.0, abs=1e-9), pytest.approx(0.5, abs=1e-9))

    def test_equal_utilities_unit_prices(self):
        c, a = lp.shadow_prices([2.0, 2.0], [1.0, 1.0], [0.5, 0.5])
        assert c == pytest.approx(0.0, abs=1e-9)
        assert a == pytest.approx(2.0, abs=1e-9)

    def test_single_outcome(self):
        c, a = lp.shadow_prices([5.0], [1.0], [1.0])
        assert (c, a) == (pytest.approx(0.0), pytest.approx(5.0))

    def test_cheap_outcome_rule(self):
        # Equal support utilities, degenerate budget dual, one cheap outcome.
        u = [2.0, 2.0, 1.5]
        p = [1.0, 1.0, 0.5]
        q = [0.5, 0.5, 0.0]
        c, a = lp.shadow_prices(u, p, q)
        resid = a * np.asarray(p) - (np.asarray(u) - c)
        assert resid.min() >= -1e-8
        assert abs(resid[0]) <= 1e-8 and abs(resid[1]) <= 1e-8

    def test_precondition_violations_are_reported(self):
        with pytest.raises(ValueError, match="unit mass"):
            lp.shadow_prices([1.0, 0.0], [2.0, 0.0], [0.5, 0.0])
        with pytest.raises(ValueError, match="budget"):
            lp.shadow_prices([1.0, 1.0], [0.5, 0.5], [0.5, 0.5])
        with pytest.raises(ValueError, match="not a consumer optimum"):
            lp.shadow_prices([1.0, 2.0], [2.0, 0.0], [0.5, 0.5])
        with pytest.raises(ValueError, match="not minimal cost"):
            lp.shadow_prices([1.0, 1.0, 1.0], [1.0, 1.0, 0.0], [0.5, 0.5, 0.0])
