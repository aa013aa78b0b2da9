"""Price a European call three ways and show they agree.

A two-regime market: the log-price drifts at velocity c_plus or c_minus
depending on the current regime, and every regime switch multiplies the
stock by (1 + h). We price a call by the closed series, by Monte Carlo
under the martingale measure, and (for a collapsed one-regime variant)
by the jump-diffusion closed form.
"""

import numpy as np

from telegraph_market import (
    CallSpec,
    ModelParams,
    SeriesControls,
    call_price,
    mc_price,
    merton_price,
)

params = ModelParams(
    c_plus=0.5,
    c_minus=-0.3,
    lambda_plus=2.0,
    lambda_minus=1.5,
    h_plus=-0.2,
    h_minus=0.4,
    r_plus=0.08,
    r_minus=0.05,
    s0=100.0,
    sigma0=+1,
)

spec = CallSpec(strike=100.0, maturity=1.0)

# Closed series: sum over switch counts of the per-count option kernels,
# truncated once the Poisson tail bound drops below tail_epsilon.
breakdown = call_price(params, spec, SeriesControls(tail_epsilon=1e-12))
print(f"series price        : {breakdown.price:.6f}")
print(f"  terms used        : {breakdown.n_used}")
print(f"  tail bound        : {breakdown.tail_bound:.3e}")

# Monte Carlo under the martingale measure: simulate regime paths at the
# risk-neutral switching intensities and discount the payoff pathwise.
payoff = lambda s: np.maximum(s - spec.strike, 0.0)
est = mc_price(params, payoff, spec.maturity, n_paths=400_000, seed=7)
z = (est.mean - breakdown.price) / est.std_error
print(f"monte carlo price   : {est.mean:.6f} +- {est.std_error:.6f}  (z = {z:+.2f})")

# One-regime collapse: equal velocities, rates, and jumps in both regimes
# reduce the market to a compound-Poisson jump model with its own closed
# form. The general series must reproduce it.
flat = ModelParams(
    c_plus=0.1, c_minus=0.1, lambda_plus=2.0, lambda_minus=2.0,
    h_plus=-0.25, h_minus=-0.25, r_plus=0.05, r_minus=0.05,
    s0=100.0, sigma0=+1,
)
collapsed = call_price(flat, spec).price
closed = merton_price(0.1, 0.05, 0.25, 100.0, spec.strike, spec.maturity)
print(f"one-regime series   : {collapsed:.10f}")
print(f"one-regime closed   : {closed:.10f}")
print(f"  rel difference    : {abs(collapsed - closed) / closed:.2e}")
