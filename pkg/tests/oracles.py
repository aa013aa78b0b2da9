"""Independent numerical oracles used by the tests.

Everything here deliberately avoids the library's own series/kernel code:
switch-count masses come from direct ODE integration of the counting-process
forward equations, and the series terms u_n / U_n are recomputed by adaptive
quadrature against the per-switch densities.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad, solve_ivp

from telegraph_market.densities import DensityParams, p_n, p_n_continuous
from telegraph_market.model import kappa


def switch_count_masses_ode(
    lam_first: float, lam_second: float, t: float, n_max: int
) -> np.ndarray:
    """P(N(t) = n) for the alternating-rate counting process, n = 0..n_max.

    Forward equations: pi_0' = -r_0 pi_0, pi_n' = -r_n pi_n + r_{n-1} pi_{n-1}
    with rate r_n = lam_first for even n, lam_second for odd n.
    """
    rates = np.where(np.arange(n_max + 2) % 2 == 0, lam_first, lam_second)

    def rhs(_t, pi):
        out = -rates[: n_max + 1] * pi
        out[1:] += rates[:n_max] * pi[:-1]
        return out

    pi0 = np.zeros(n_max + 1)
    pi0[0] = 1.0
    sol = solve_ivp(rhs, (0.0, t), pi0, rtol=1e-12, atol=1e-14, method="DOP853")
    return sol.y[:, -1]


def u_n_quadrature(
    y: float,
    t: float,
    n: int,
    sigma: int,
    lam_p: float,
    lam_m: float,
    c_p: float,
    c_m: float,
    r_p: float,
    r_m: float,
) -> float:
    """u_n(y, t) = e^{-b_r t} int_y^inf e^{-a_r x} p_n(x, t) dx by quadrature,
    where (a_r, b_r) linearize the accumulated discount in the telegraph
    coordinate: int_0^t r ds = a_r X(t) + b_r t."""
    delta_c = c_p - c_m
    a_r = (r_p - r_m) / delta_c
    b_r = (c_p * r_m - c_m * r_p) / delta_c
    dens = DensityParams(
        c_plus=c_p, c_minus=c_m, lambda_plus=lam_p, lambda_minus=lam_m
    )
    if n == 0:
        val = p_n(np.array([0.0]), t, 0, sigma, dens)
        x_atom = val.atom_location
        if x_atom <= y:
            return 0.0
        return float(np.exp(-b_r * t - a_r * x_atom) * val.atom_weight)
    lo, hi = max(y, c_m * t), c_p * t
    if lo >= hi:
        lo = c_m * t
    if y >= hi:
        return 0.0

    def f(x):
        return np.exp(-b_r * t - a_r * x) * p_n_continuous(x, t, n, sigma, dens)

    out, _ = quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=400)
    return float(out)


def U_n_quadrature(
    y: float,
    t: float,
    n: int,
    sigma: int,
    lam_p: float,
    lam_m: float,
    c_p: float,
    c_m: float,
    r_p: float,
    r_m: float,
    h_p: float,
    h_m: float,
) -> float:
    """U_n(y, t) = kappa_n e^{-b_r t} int_y^inf e^{(1-a_r) x} p_n(x, t) dx."""
    delta_c = c_p - c_m
    a_r = (r_p - r_m) / delta_c
    b_r = (c_p * r_m - c_m * r_p) / delta_c
    kap = kappa(n, sigma, h_p, h_m)
    dens = DensityParams(
        c_plus=c_p, c_minus=c_m, lambda_plus=lam_p, lambda_minus=lam_m
    )
    if n == 0:
        val = p_n(np.array([0.0]), t, 0, sigma, dens)
        x_atom = val.atom_location
        if x_atom <= y:
            return 0.0
        return float(kap * np.exp(-b_r * t + (1.0 - a_r) * x_atom) * val.atom_weight)
    lo, hi = max(y, c_m * t), c_p * t
    if y >= hi:
        return 0.0

    def f(x):
        return np.exp(-b_r * t + (1.0 - a_r) * x) * p_n_continuous(
            x, t, n, sigma, dens
        )

    out, _ = quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=400)
    return float(kap * out)
