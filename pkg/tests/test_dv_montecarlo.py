from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcsign import dv_montecarlo as dv


def test_expected_costs_are_exact():
    assert dv.expected_cost_res_state("knill") == 603
    assert dv.expected_cost_res_state("cluster_std") == 768
    assert dv.expected_cost_res_state("cluster_adv") == Fraction(1552, 3)
    assert round(dv.expected_cost_res_state("cluster_adv")) == 517
    with pytest.raises(ValueError):
        dv.expected_cost_res_state("fusion")


def test_knill_cost_by_hand():
    assert Fraction(27, 2) * 2 + Fraction(27, 2) * 2 * Fraction(16, 3) * 4 == 603


def test_factory_costs():
    assert dv.BELL.expected_cost == Fraction(64, 3)
    assert dv.GHZ3.expected_cost == 192
    with pytest.raises(ValueError):
        dv.FactorySpec(4, Fraction(0))
    with pytest.raises(ValueError):
        dv.FactorySpec(4, Fraction(3, 2))


def test_ghz_join():
    assert dv.ghz_join(3, 3, True) == 4
    assert dv.ghz_join(2, 2, True) == 2
    assert dv.ghz_join(3, 5, False) is None
    with pytest.raises(ValueError):
        dv.ghz_join(1, 3, True)


def test_grice_estimate():
    assert dv.grice_cost_estimate(4) == pytest.approx(3792.6, abs=0.1)
    assert dv.grice_cost_estimate(5) == pytest.approx(10113.6, abs=0.1)
    with pytest.raises(ValueError):
        dv.grice_cost_estimate(3)


def test_grice_p_bm_levels():
    assert dv.grice_p_bm(1, 0) == 0.5
    assert dv.grice_p_bm(4, 3) == 1 - 2 ** -4
    assert dv.grice_p_bm(4, 2) == 1 - 2 ** -3
    assert dv.grice_p_bm(4, 1) == 0.5


def test_dv_quality():
    assert dv.dv_quality(1, 0.5) == 0.25
    assert dv.dv_quality(1, 0.75) == 0.5625
    assert dv.dv_quality(0, 0.9) == 0
    with pytest.raises(ValueError):
        dv.dv_quality(1.1, 0.5)


def test_rng_stream_reproducible():
    a = dv.RngStream(7, 3).generator().random(5)
    b = dv.RngStream(7, 3).generator().random(5)
    c = dv.RngStream(7, 4).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(dv.ROUTES), st.integers(0, 20000), st.integers(0, 2 ** 32 - 1))
def test_res_round_ledger_balances(route, n, seed):
    made, led = dv.res_round(route, n, np.random.default_rng(seed))
    assert led.balanced()
    assert made >= 0
    assert led.surviving == 4 * made  # two Bell pairs or one GHZ4


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 7), st.integers(0, 200000), st.integers(0, 2 ** 32 - 1))
def test_grice_round_ledger_balances(N, n, seed):
    K, led = dv.grice_round(N, n, np.random.default_rng(seed))
    assert led.balanced()
    assert 0 <= K <= max(N - 1, 0)


def test_zero_budget_gives_nothing():
    curve = dv.simulate_res_state_curve("knill", [0], 50, dv.RngStream(1))
    assert curve.success_prob[0] == 0
    made, _ = dv.res_round("cluster_adv", 0, np.random.default_rng(0))
    assert made == 0


@pytest.mark.parametrize("route", dv.ROUTES)
def test_ten_times_cost_is_nearly_certain(route):
    n = 10 * round(dv.expected_cost_res_state(route))
    curve = dv.simulate_res_state_curve(route, [n], 10_000, dv.RngStream(5))
    assert curve.success_prob[0] > 0.99


@pytest.mark.parametrize("route", dv.ROUTES)
def test_curve_monotone_within_noise(route):
    grid = range(0, 4001, 250)
    c = dv.simulate_res_state_curve(route, grid, 2000, dv.RngStream(9))
    for i in range(1, len(grid)):
        slack = 3 * np.hypot(c.stderr[i], c.stderr[i - 1])
        assert c.success_prob[i] >= c.success_prob[i - 1] - slack


def test_curve_deterministic_across_threads():
    grid = range(100, 2001, 100)
    a = dv.simulate_res_state_curve("cluster_adv", grid, 400, dv.RngStream(42), threads=1)
    b = dv.simulate_res_state_curve("cluster_adv", grid, 400, dv.RngStream(42), threads=3)
    assert np.array_equal(a.success_prob, b.success_prob)
    assert list(a.rows()) == list(b.rows())
    g1 = dv.simulate_grice_cost(5, [5000, 20000], 200, dv.RngStream(1), threads=1)
    g2 = dv.simulate_grice_cost(5, [5000, 20000], 200, dv.RngStream(1), threads=2)
    assert np.array_equal(g1.success_prob, g2.success_prob)


def test_curve_rows_and_first_reaching():
    c = dv.ResourceCurve("x", np.array([10, 20, 30]), np.array([0.1, 0.96, 0.99]),
                         np.zeros(3), 5, 11)
    assert list(c.rows())[0] == ("x", 10, 0.1, 0.0, 5, 11)
    assert c.first_reaching(0.95) == 20
    assert c.first_reaching(0.999) is None


def test_mean_cost_close_to_expectation():
    # a small-sample version of the 2% convergence check
    cost = dv.mean_cost_per_res("cluster_std", 768_000, 300, dv.RngStream(2))
    assert cost == pytest.approx(768, rel=0.03)


def test_grice_single_level_is_standard_measurement():
    c = dv.simulate_grice_cost(1, [0, 1000], 20, dv.RngStream(0))
    assert np.all(c.success_prob == 0.5)


def test_grice_asymptote():
    N = 4
    c = dv.simulate_grice_cost(N, [40 * round(dv.grice_cost_estimate(N))], 200, dv.RngStream(3))
    assert c.success_prob[0] == pytest.approx(1 - 2 ** -N, abs=1e-12)
    assert c.extra["p_full"][0] == 1.0


def test_grice_cost_metric():
    cost, n, pf = dv.grice_monte_carlo_cost(5, 200, dv.RngStream(3))
    assert cost == pytest.approx(n / pf)
    assert 1.0 < cost / dv.grice_cost_estimate(5) < 4.0
