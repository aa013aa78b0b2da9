"""Perfect hedging and replication backtesting.

The hedge ratio compares the option value just before and just after a
hypothetical regime switch; between switches the market is deterministic,
so a self-financing portfolio rebalanced on a grid augmented with the exact
switch times replicates the claim up to grid-placement error only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .measure import martingale_intensities
from .model import ModelParams, Regime, RegimePath, check_regime
from .pricing import CallSpec, SeriesControls, call_price, call_value_surface

PricerF = Callable[..., np.ndarray | float]


@dataclass(frozen=True)
class HedgePosition:
    """Portfolio snapshot: phi stock units, psi bond units."""

    phi: float
    psi: float
    capital: float


def make_call_pricer(
    params: ModelParams,
    spec: CallSpec,
    controls: SeriesControls = SeriesControls(),
) -> PricerF:
    """Vectorized F(t, x, sigma) for a call, bound to one parameter set."""
    intens = martingale_intensities(params)

    def pricer(t, x, sigma):
        return call_value_surface(t, x, sigma, params, spec, controls, intens)

    return pricer


def hedge_ratio(
    t: np.ndarray | float,
    s: np.ndarray | float,
    sigma: Regime,
    pricer_f: PricerF,
    params: ModelParams,
) -> np.ndarray | float:
    """Stock position phi = [F(t, S(1+h), -sigma) - F(t, S, sigma)] / (S h)."""
    check_regime(sigma)
    h = params.h(sigma)
    if h == 0.0:
        raise ValueError("hedge ratio undefined for zero jump size")
    s_arr = np.asarray(s, dtype=float)
    num = pricer_f(t, s_arr * (1.0 + h), -sigma) - pricer_f(t, s_arr, sigma)
    out = num / (s_arr * h)
    return float(out) if np.ndim(s) == 0 and np.ndim(t) == 0 else out


def hedge_ratio_at_jump(
    tau: float,
    s_before: float,
    sigma_before: Regime,
    pricer_f: PricerF,
    params: ModelParams,
) -> float:
    """Hedge ratio held across a switch, from pre-switch state; equals the
    left limit of hedge_ratio, so phi is left-continuous at switch times."""
    return hedge_ratio(tau, s_before, sigma_before, pricer_f, params)


class PdeResidualReport(NamedTuple):
    max_residual: float
    dt: float
    dx: float


def pde_residual(
    pricer_f: PricerF,
    t_grid: np.ndarray,
    x_grid: np.ndarray,
    sigma: Regime,
    params: ModelParams,
    dt: float,
    dx: float,
    kink_loci: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> PdeResidualReport:
    """Central-difference residual of the pricing transport equation
    d_t F + c_s x d_x F - (r_s + lam*_s) F + lam*_s F(t, x(1+h_s), -s)
    over the tensor grid t_grid x x_grid.

    ``kink_loci(t, x)`` may flag grid points too close to payoff kinks mapped
    through the characteristics; flagged grids are rejected.
    """
    check_regime(sigma)
    intens = martingale_intensities(params)
    lam_s = intens.lambda_star(sigma)
    c_s, r_s, h_s = params.c(sigma), params.r(sigma), params.h(sigma)
    tt, xx = np.meshgrid(
        np.asarray(t_grid, dtype=float), np.asarray(x_grid, dtype=float),
        indexing="ij",
    )
    if kink_loci is not None and np.any(kink_loci(tt, xx)):
        raise ValueError("grid touches a payoff-kink characteristic")
    f_tp = pricer_f(tt + dt, xx, sigma)
    f_tm = pricer_f(tt - dt, xx, sigma)
    f_xp = pricer_f(tt, xx + dx, sigma)
    f_xm = pricer_f(tt, xx - dx, sigma)
    f_0 = pricer_f(tt, xx, sigma)
    f_flip = pricer_f(tt, xx * (1.0 + h_s), -sigma)
    resid = (
        (f_tp - f_tm) / (2.0 * dt)
        + c_s * xx * (f_xp - f_xm) / (2.0 * dx)
        - (r_s + lam_s) * f_0
        + lam_s * f_flip
    )
    return PdeResidualReport(float(np.max(np.abs(resid))), dt, dx)


@dataclass
class ReplicationStats:
    """Terminal replication errors of the self-financing backtest."""

    initial_capital: float
    errors: np.ndarray
    mean_abs_error: float
    max_abs_error: float
    min_capital: float
    admissible: bool


def _path_states(
    path: RegimePath, params: ModelParams, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Regime, stock price, and short rate at each grid time (right-continuous
    at switches, so values at a switch time are post-jump)."""
    switches = np.asarray(path.switch_times)
    k = switches.size
    sigmas_seg = path.sigma0 * (-1) ** np.arange(k + 1)
    c_seg = np.where(sigmas_seg == 1, params.c_plus, params.c_minus)
    r_seg = np.where(sigmas_seg == 1, params.r_plus, params.r_minus)
    h_at_switch = np.where(sigmas_seg[:-1] == 1, params.h_plus, params.h_minus)
    edges = np.concatenate(([0.0], switches))
    seg_len = np.diff(np.concatenate((edges, [path.horizon])))
    x_at_edge = np.concatenate(([0.0], np.cumsum(c_seg[:-1] * seg_len[:-1])))
    log_j_at_edge = np.concatenate(([0.0], np.cumsum(np.log1p(h_at_switch))))
    idx = np.searchsorted(switches, times, side="right")
    x_t = x_at_edge[idx] + c_seg[idx] * (times - edges[idx])
    s_t = params.s0 * np.exp(x_t + log_j_at_edge[idx])
    return sigmas_seg[idx], s_t, r_seg[idx]


def replication_backtest(
    paths: Sequence[RegimePath],
    spec: CallSpec,
    params: ModelParams,
    n_steps: int,
    pricer_f: PricerF | None = None,
    payoff: Callable[[np.ndarray], np.ndarray] | None = None,
    initial_capital: float | None = None,
    controls: SeriesControls = SeriesControls(),
) -> ReplicationStats:
    """Self-financing replication of a European claim along simulated paths.

    Rebalances on a uniform n_steps grid augmented with the exact switch
    times of each path; between rebalances the position is held fixed and
    capital accrues via the stock drift/jumps and the bond. Reports terminal
    |capital - payoff| statistics and admissibility (capital >= 0).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    if pricer_f is None:
        pricer_f = make_call_pricer(params, spec, controls)
    if payoff is None:
        payoff = lambda s: np.maximum(s - spec.strike, 0.0)  # noqa: E731
    if initial_capital is None:
        initial_capital = call_price(params, spec, controls).price
    maturity = spec.maturity
    uniform = np.linspace(0.0, maturity, n_steps + 1)

    # assemble per-path grids and states, then batch the hedge-ratio calls
    grids, states = [], []
    for path in paths:
        if path.horizon < maturity:
            raise ValueError("path horizon shorter than the claim maturity")
        times = np.unique(np.concatenate((uniform, np.asarray(path.switch_times))))
        times = times[times <= maturity]
        sig, s_t, r_t = _path_states(path, params, times)
        grids.append(times)
        states.append((sig, s_t, r_t))

    offsets = np.cumsum([0] + [g.size - 1 for g in grids])
    t_all = np.concatenate([g[:-1] for g in grids])
    sig_all = np.concatenate([st[0][:-1] for st in states])
    s_all = np.concatenate([st[1][:-1] for st in states])
    phi_all = np.empty_like(s_all)
    for sg in (+1, -1):
        mask = sig_all == sg
        if np.any(mask):
            phi_all[mask] = hedge_ratio(
                t_all[mask], s_all[mask], sg, pricer_f, params
            )

    errors = np.empty(len(paths))
    min_capital = np.inf
    for i, (times, (sig, s_t, r_t)) in enumerate(zip(grids, states)):
        phi = phi_all[offsets[i] : offsets[i + 1]]
        dt_seg = np.diff(times)
        growth = np.exp(r_t[:-1] * dt_seg)
        gain = phi * (s_t[1:] - s_t[:-1] * growth)
        # capital follows F_{j+1} = g_j F_j + gain_j; solve by cumulative products
        cum_g = np.concatenate(([1.0], np.cumprod(growth)))
        capital = cum_g * (initial_capital + np.cumsum(
            np.concatenate(([0.0], gain / cum_g[1:]))
        ))
        errors[i] = capital[-1] - float(payoff(np.asarray(s_t[-1])))
        min_capital = min(min_capital, float(np.min(capital)))
    abs_err = np.abs(errors)
    return ReplicationStats(
        initial_capital=initial_capital,
        errors=errors,
        mean_abs_error=float(abs_err.mean()),
        max_abs_error=float(abs_err.max()),
        min_capital=min_capital,
        admissible=min_capital >= -1e-9 * params.s0,
    )
