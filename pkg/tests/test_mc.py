import math
from dataclasses import replace

import numpy as np
import pytest

from telegraph_market import mc
from telegraph_market.model import ModelParams
from telegraph_market.pricing import CallSpec, SeriesControls, call_price

CTRL = SeriesControls()


def test_simulate_terminals_worker_independent(asym_params):
    a = mc.simulate_terminals(asym_params, 1.0, 40_000, seed=3, n_workers=1)
    b = mc.simulate_terminals(asym_params, 1.0, 40_000, seed=3, n_workers=2)
    c = mc.simulate_terminals(asym_params, 1.0, 40_000, seed=3, n_workers=8)
    for other in (b, c):
        assert np.array_equal(a[0], other[0])
        assert np.array_equal(a[1], other[1])


def test_simulate_terminals_occupation_bounds(asym_params):
    n_sw, occ = mc.simulate_terminals(asym_params, 1.0, 20_000, seed=4)
    assert np.all((occ >= 0.0) & (occ <= 1.0))
    assert np.all(occ[n_sw == 0] == 1.0)
    inner = occ[n_sw >= 1]
    assert np.all((inner > 0.0) & (inner < 1.0))


def test_switch_counts_match_poisson_for_equal_rates():
    params = ModelParams(
        c_plus=0.3, c_minus=-0.3, lambda_plus=2.5, lambda_minus=2.5,
        h_plus=0.2, h_minus=0.2, r_plus=0.1, r_minus=0.1, s0=1.0, sigma0=1,
    )
    n_sw, _ = mc.simulate_terminals(params, 1.0, 200_000, seed=5)
    mean = n_sw.mean()
    se = n_sw.std(ddof=1) / math.sqrt(n_sw.size)
    assert abs(mean - 2.5) < 3 * se


def test_mc_price_matches_series(asym_params):
    spec = CallSpec(strike=100.0, maturity=1.0)
    ref = call_price(asym_params, spec, CTRL).price
    est = mc.mc_price(
        asym_params, lambda s: np.maximum(s - 100.0, 0.0), 1.0,
        200_000, seed=7,
    )
    assert abs(est.mean - ref) < 3 * est.std_error
    assert est.std_error < 0.002 * asym_params.s0


def test_mc_price_se_scaling(asym_params):
    payoff = lambda s: np.maximum(s - 100.0, 0.0)
    small = mc.mc_price(asym_params, payoff, 1.0, 50_000, seed=8)
    big = mc.mc_price(asym_params, payoff, 1.0, 200_000, seed=8)
    assert big.std_error == pytest.approx(small.std_error / 2.0, rel=0.2)


def test_girsanov_route_agrees_with_direct(asym_params):
    payoff = lambda s: np.maximum(s - 100.0, 0.0)
    direct = mc.mc_price(asym_params, payoff, 1.0, 200_000, seed=9)
    rewt = mc.mc_price_girsanov(asym_params, payoff, 1.0, 200_000, seed=10)
    joint = math.hypot(direct.std_error, rewt.std_error)
    assert abs(direct.mean - rewt.mean) < 3 * joint


def test_girsanov_density_unit_mean():
    params = ModelParams(
        c_plus=0.5, c_minus=-0.3, lambda_plus=2.0, lambda_minus=1.5,
        h_plus=-0.2, h_minus=0.4, r_plus=0.0, r_minus=0.0, s0=100.0, sigma0=1,
    )
    est = mc.mc_price_girsanov(
        params, lambda s: np.ones_like(s), 1.0, 400_000, seed=11
    )
    assert abs(est.mean - 1.0) < 3 * est.std_error


def test_martingale_identity_discounted_stock(asym_params):
    est = mc.mc_price(asym_params, lambda s: s, 1.0, 400_000, seed=12)
    assert abs(est.mean - asym_params.s0) < 3 * est.std_error


def test_mc_measure_validation(asym_params):
    with pytest.raises(ValueError):
        mc.mc_price(asym_params, lambda s: s, 1.0, 100, seed=1, measure="risk")


def test_arbitrage_demo_jump_free():
    params = ModelParams(
        c_plus=0.4, c_minus=-0.3, lambda_plus=1.2, lambda_minus=1.0,
        h_plus=0.0, h_minus=0.0, r_plus=0.0, r_minus=0.0, s0=100.0, sigma0=1,
    )
    res = mc.arbitrage_demo(params, 105.0, 115.0, 1.0, 20_000, seed=13)
    assert res.min_profit == 0.0
    assert res.p_positive.mean > 3 * res.p_positive.std_error
    assert np.all(res.profits >= 0.0)


def test_arbitrage_demo_validation():
    params = ModelParams(
        c_plus=0.4, c_minus=-0.3, lambda_plus=1.2, lambda_minus=1.0,
        h_plus=0.0, h_minus=0.0, r_plus=0.0, r_minus=0.0, s0=100.0, sigma0=1,
    )
    with pytest.raises(ValueError):
        mc.arbitrage_demo(params, 95.0, 115.0, 1.0, 100, seed=1)  # A < s0
    with pytest.raises(ValueError):
        # B not reachable before the horizon
        mc.arbitrage_demo(params, 105.0, 200.0, 1.0, 100, seed=1)
    with pytest.raises(ValueError):
        mc.arbitrage_demo(
            replace(params, r_plus=0.05, r_minus=0.05), 105.0, 115.0,
            1.0, 100, seed=1,
        )


def test_arbitrage_demo_martingale_control():
    # with admissible jumps under the martingale measure the same strategy
    # has zero expected profit
    params = ModelParams(
        c_plus=0.5, c_minus=-0.3, lambda_plus=2.0, lambda_minus=1.5,
        h_plus=-0.2, h_minus=0.4, r_plus=0.0, r_minus=0.0, s0=100.0, sigma0=1,
    )
    res = mc.arbitrage_demo(
        params, 105.0, 115.0, 1.0, 100_000, seed=14, measure="martingale"
    )
    assert abs(res.mean_profit.mean) < 3 * res.mean_profit.std_error
    assert res.min_profit < 0.0  # losses do occur: no free lunch


def test_limit_scaling_check_monotone():
    errs = mc.limit_scaling_check(
        0.3, 0.2, 0.05, [1, 4, 16, 64], [-1.0, 0.5, 1.0], 1.0
    )
    worst = errs.max(axis=1)
    assert np.all(np.diff(worst) < 0)
    assert worst[-1] < 0.02


def test_limit_scaling_zero_argument_exact():
    errs = mc.limit_scaling_check(0.3, 0.2, 0.05, [1, 4], [0.0], 1.0)
    assert np.all(errs < 1e-10)


def test_limit_scaling_pure_velocity_case():
    # v_a = 0: jump-free telegraph scaling, same convergence
    errs = mc.limit_scaling_check(0.3, 0.0, 0.1, [1, 4, 16, 64], [1.0], 1.0)
    assert np.all(np.diff(errs[:, 0]) < 0)
    assert errs[-1, 0] < 0.02
