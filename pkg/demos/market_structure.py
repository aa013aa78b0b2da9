"""Two structural facts about the model, checked by simulation.

First: without price jumps the market admits arbitrage. The log-price is
continuous and of bounded variation, so a buy-at-A / sell-at-B stop
strategy never loses and wins whenever the trend visits both levels.
Adding jumps destroys the strategy: under the martingale measure (with
zero rates) its mean profit is zero and losses occur.

Second: under jump-diffusion-style scaling (switch intensity lambda -> m
lambda, velocities and jumps shrinking like 1/sqrt(m)), the terminal
log-trend converges to a Gaussian; the moment generating function error
shrinks as the level m grows.
"""

import dataclasses


from telegraph_market import ModelParams, arbitrage_demo, limit_scaling_check

# Jump-free market: zero rates, no jumps, trend velocities +-0.5.
free = ModelParams(
    c_plus=0.5,
    c_minus=-0.5,
    lambda_plus=2.0,
    lambda_minus=2.0,
    h_plus=0.0,
    h_minus=0.0,
    r_plus=0.0,
    r_minus=0.0,
    s0=100.0,
    sigma0=+1,
)
res = arbitrage_demo(free, level_a=102.0, level_b=106.0, t_horizon=1.0,
                     n_paths=20_000, seed=3)
print("jump-free market (buy at 102, sell at 106):")
print(f"  min profit        : {res.min_profit:.6f}")
print(f"  P(profit > 0)     : {res.p_positive.mean:.4f} +- {res.p_positive.std_error:.4f}")
print(f"  mean profit       : {res.mean_profit.mean:.4f}")

# Same strategy with jumps, simulated under the martingale measure: the
# discounted stock is a martingale, so any stop strategy has mean zero.
jumpy = dataclasses.replace(free, h_plus=-0.1, h_minus=0.15)
res = arbitrage_demo(jumpy, level_a=102.0, level_b=106.0, t_horizon=1.0,
                     n_paths=20_000, seed=3, measure="martingale")
print("\nwith jumps, martingale measure:")
print(f"  min profit        : {res.min_profit:.4f}  (losses occur)")
print(f"  mean profit       : {res.mean_profit.mean:.4f} +- {res.mean_profit.std_error:.4f}  (zero within noise)")

# Diffusion limit: relative MGF error vs the Gaussian target at levels
# m = 1, 4, 16, 64; each column should shrink roughly like 1/sqrt(m).
levels = [1, 4, 16, 64]
z_values = [-1.0, 0.5, 1.0]
errors = limit_scaling_check(0.3, 0.2, 0.05, levels, z_values, t_horizon=1.0)
print("\ndiffusion-limit MGF relative error (rows: level m, cols: z):")
print(f"        z = {'   '.join(f'{z:5.1f}' for z in z_values)}")
for m, row in zip(levels, errors):
    print(f"  m = {m:3d}: " + "  ".join(f"{e:.2e}" for e in row))
