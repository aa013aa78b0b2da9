import math
from dataclasses import replace

import numpy as np
import pytest

from telegraph_market.hedging import (
    hedge_ratio,
    hedge_ratio_at_jump,
    make_call_pricer,
    pde_residual,
    replication_backtest,
)
from telegraph_market.model import RegimePath, sample_path
from telegraph_market.pricing import CallSpec, SeriesControls, call_price

CTRL = SeriesControls()


@pytest.fixture(scope="module")
def pricer_and_params():
    from telegraph_market.model import ModelParams

    params = ModelParams(
        c_plus=0.5, c_minus=-0.3, lambda_plus=2.0, lambda_minus=1.5,
        h_plus=-0.2, h_minus=0.4, r_plus=0.08, r_minus=0.05,
        s0=100.0, sigma0=+1,
    )
    spec = CallSpec(strike=100.0, maturity=1.0)
    return make_call_pricer(params, spec, CTRL), params, spec


def test_hedge_ratio_deep_in_the_money(pricer_and_params):
    pricer, params, spec = pricer_and_params
    # phi -> 1 like O(K/S) deep in the money (regime discount factors differ)
    phi = hedge_ratio(0.0, 400.0, +1, pricer, params)
    assert phi == pytest.approx(1.0, abs=0.05)
    phi_far = hedge_ratio(0.0, 4000.0, +1, pricer, params)
    assert abs(phi_far - 1.0) < abs(phi - 1.0) / 5.0
    phi_out = hedge_ratio(0.9, 20.0, +1, pricer, params)
    assert abs(phi_out) < 1e-6


def test_hedge_ratio_shape(pricer_and_params):
    # the jump hedge ratio is a difference quotient of a convex value
    # function: increasing in S and close to [0, 1] without being pinned to it
    pricer, params, _ = pricer_and_params
    s = np.linspace(60.0, 160.0, 11)
    for sigma in (+1, -1):
        phi = hedge_ratio(0.3, s, sigma, pricer, params)
        assert np.all(phi >= -0.01) and np.all(phi <= 1.05)
        # strictly increasing through the at-the-money region
        mid = phi[(s >= 80.0) & (s <= 120.0)]
        assert np.all(np.diff(mid) > 0)


def test_hedge_ratio_zero_jump_rejected(pricer_and_params):
    pricer, params, _ = pricer_and_params
    bad = replace(params, h_plus=0.0)
    with pytest.raises(ValueError):
        hedge_ratio(0.0, 100.0, +1, pricer, bad)


def test_hedge_ratio_left_continuous_at_jumps(pricer_and_params):
    pricer, params, _ = pricer_and_params
    rng = np.random.default_rng(5)
    for _ in range(25):
        tau = float(rng.uniform(0.05, 0.95))
        s_before = float(rng.uniform(70.0, 140.0))
        sigma_before = 1 if rng.random() < 0.5 else -1
        held = hedge_ratio_at_jump(tau, s_before, sigma_before, pricer, params)
        left = hedge_ratio(tau, s_before, sigma_before, pricer, params)
        assert held == left  # identical formula, bitwise equal


def test_pde_residual_linear_payoff_exact(pricer_and_params):
    _, params, _ = pricer_and_params
    # F(t, x, sigma) = x solves the pricing equation exactly: central
    # differences are exact for linear functions at any spacing
    def stock_f(t, x, sigma):
        return np.asarray(x, dtype=float)

    rep = pde_residual(
        stock_f, np.array([0.2, 0.5]), np.array([80.0, 100.0, 125.0]),
        +1, params, dt=0.05, dx=5.0,
    )
    assert rep.max_residual <= 1e-10 * params.s0


def test_pde_residual_call_price_small(pricer_and_params):
    pricer, params, _ = pricer_and_params
    rep = pde_residual(
        pricer, np.array([0.3, 0.6]), np.array([90.0, 105.0, 120.0]),
        +1, params, dt=1e-4, dx=1e-2,
    )
    assert rep.max_residual < 1e-5 * params.s0


def test_replication_stock_payoff_exact(pricer_and_params):
    _, params, spec = pricer_and_params
    paths = [sample_path(params, spec.maturity, seed=17, path_index=i)
             for i in range(20)]
    stats = replication_backtest(
        paths, spec, params, 400,
        pricer_f=lambda t, x, sigma: np.asarray(x, dtype=float),
        payoff=lambda s: s,
        initial_capital=params.s0,
        controls=CTRL,
    )
    assert stats.max_abs_error < 1e-9 * params.s0


def test_replication_call_error_shrinks(pricer_and_params):
    pricer, params, spec = pricer_and_params
    paths = [sample_path(params, spec.maturity, seed=29, path_index=i)
             for i in range(40)]
    coarse = replication_backtest(
        paths, spec, params, 250, pricer_f=pricer, controls=CTRL
    )
    fine = replication_backtest(
        paths, spec, params, 1000, pricer_f=pricer, controls=CTRL
    )
    assert coarse.initial_capital == pytest.approx(
        call_price(params, spec, CTRL).price, rel=1e-12
    )
    assert fine.mean_abs_error < coarse.mean_abs_error
    # first-order scheme: quadrupling the grid should shrink the mean error
    # by roughly 4 (generous band: path-dependent constants)
    ratio = coarse.mean_abs_error / fine.mean_abs_error
    assert 2.0 < ratio < 8.0


def test_replication_hits_payoff(pricer_and_params):
    pricer, params, spec = pricer_and_params
    paths = [sample_path(params, spec.maturity, seed=31, path_index=i)
             for i in range(10)]
    stats = replication_backtest(
        paths, spec, params, 2000, pricer_f=pricer, controls=CTRL
    )
    assert stats.mean_abs_error < 5e-3 * params.s0
    assert stats.errors.shape == (10,)


def test_replication_exact_on_no_switch_path(pricer_and_params):
    # a path with no switches: the hedge grows deterministically and must
    # land on the payoff up to grid error only in the phi rebalancing
    pricer, params, spec = pricer_and_params
    path = RegimePath(sigma0=+1, switch_times=(), horizon=spec.maturity)
    stats = replication_backtest(
        [path], spec, params, 4000, pricer_f=pricer, controls=CTRL
    )
    assert stats.max_abs_error < 2e-3 * params.s0
