"""Exact distributions of the telegraph process position.

Per-switch-count (generalized) densities p_n, the total distribution with its
atom on the no-switch ray, the modified Bessel closed form, and the
moment-generating function of the jump telegraph process.

All densities are returned as an explicit (atom, continuous) pair; the atom
is never smoothed into the continuous part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .errors import DivergenceError
from .model import Regime, check_regime, log_kappa_sequence
from .numerics import gauss_legendre_nodes

_BESSEL_Z_MAX = 650.0  # I0 overflows float64 not far beyond this


@dataclass(frozen=True)
class DensityParams:
    """Velocity/intensity parameters of a telegraph process, c_plus > c_minus."""

    c_plus: float
    c_minus: float
    lambda_plus: float
    lambda_minus: float

    def __post_init__(self) -> None:
        if not self.c_plus > self.c_minus:
            raise ValueError("density formulas require c_plus > c_minus")
        if not (self.lambda_plus > 0 and self.lambda_minus > 0):
            raise ValueError("intensities must be positive")

    @property
    def delta_c(self) -> float:
        return self.c_plus - self.c_minus

    @property
    def nu(self) -> float:
        """(lambda_+ - lambda_-) / (c_+ - c_-); zero in the symmetric case."""
        return (self.lambda_plus - self.lambda_minus) / self.delta_c

    @property
    def lambda_tilde(self) -> float:
        """(lambda_- c_+ - lambda_+ c_-) / (c_+ - c_-)."""
        return (self.lambda_minus * self.c_plus - self.lambda_plus * self.c_minus) / self.delta_c

    def c(self, sigma: Regime) -> float:
        return self.c_plus if sigma == +1 else self.c_minus

    def lam(self, sigma: Regime) -> float:
        return self.lambda_plus if sigma == +1 else self.lambda_minus


@dataclass(frozen=True)
class DensityValue:
    """Point mass at the no-switch position plus a continuous density value."""

    atom_weight: float
    continuous: np.ndarray | float
    atom_location: float


def _log_power(exponent: np.ndarray | int, log_base: np.ndarray) -> np.ndarray:
    """exponent * log_base with the convention 0 * (-inf) = 0."""
    e = np.asarray(exponent, dtype=float)
    return np.where(e > 0, e * log_base, 0.0)


def q_n(
    x: np.ndarray | float,
    t: float,
    n: int,
    sigma: Regime,
    params: DensityParams,
) -> np.ndarray | float:
    """Polynomial kernel of the n-switch density, zero outside (c_- t, c_+ t).

    The two odd-order lines share one printed superscript in the source
    formulas; the lambda_+^{n+1} lambda_-^n line is assigned to sigma = +1,
    the assignment that reproduces the alternating-Poisson per-n masses.
    """
    check_regime(sigma)
    if not t > 0:
        raise ValueError("t must be positive")
    if n < 1:
        raise ValueError("q_n is defined for n >= 1; n = 0 is the caller's atom")
    x = np.asarray(x, dtype=float)
    dc = params.delta_c
    lo, hi = params.c_minus * t, params.c_plus * t
    inside = (x > lo) & (x < hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        la = np.log(hi - x)  # log(c_+ t - x)
        lb = np.log(x - lo)  # log(x - c_- t)
    lp, lm = math.log(params.lambda_plus), math.log(params.lambda_minus)
    ldc = math.log(dc)
    if n % 2 == 1:
        m = (n - 1) // 2
        if sigma == +1:
            lam_part = (m + 1) * lp + m * lm
        else:
            lam_part = m * lp + (m + 1) * lm
        logq = (
            lam_part
            - n * ldc
            + _log_power(m, la)
            + _log_power(m, lb)
            - 2.0 * gammaln(m + 1)
        )
    else:
        m = n // 2
        ea, eb = (m - 1, m) if sigma == +1 else (m, m - 1)
        logq = (
            m * (lp + lm)
            - n * ldc
            + _log_power(ea, la)
            + _log_power(eb, lb)
            - gammaln(m)
            - gammaln(m + 1)
        )
    out = np.where(inside, np.exp(logq), 0.0)
    return out if out.ndim else float(out)


def p_n_continuous(
    x: np.ndarray | float,
    t: float,
    n: int,
    sigma: Regime,
    params: DensityParams,
) -> np.ndarray | float:
    """Continuous part of the n-switch density (n >= 1)."""
    x_arr = np.asarray(x, dtype=float)
    pref = (-params.lam(sigma) + params.nu * params.c(sigma)) * t - params.nu * x_arr
    out = np.exp(pref) * q_n(x_arr, t, n, sigma, params)
    return out if np.ndim(x) else float(out)


def p_n(
    x: np.ndarray | float,
    t: float,
    n: int,
    sigma: Regime,
    params: DensityParams,
) -> DensityValue:
    """n-switch contribution: pure atom for n = 0, continuous part for n >= 1."""
    check_regime(sigma)
    if not t > 0:
        raise ValueError("t must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    atom_loc = params.c(sigma) * t
    if n == 0:
        cont = np.zeros_like(np.asarray(x, dtype=float))
        return DensityValue(
            atom_weight=math.exp(-params.lam(sigma) * t),
            continuous=cont if cont.ndim else 0.0,
            atom_location=atom_loc,
        )
    return DensityValue(
        atom_weight=0.0,
        continuous=p_n_continuous(x, t, n, sigma, params),
        atom_location=atom_loc,
    )


def p_n_table(
    x: np.ndarray,
    t: float,
    sigma: Regime,
    params: DensityParams,
    n_max: int,
) -> np.ndarray:
    """Continuous parts for n = 0..n_max stacked as shape (n_max + 1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.zeros((n_max + 1, x.size))
    for n in range(1, n_max + 1):
        table[n] = p_n_continuous(x, t, n, sigma, params)
    return table


def bessel_i0(z: np.ndarray | float) -> np.ndarray | float:
    """Modified Bessel I0 by its power series, z >= 0."""
    return _bessel_series(z, numerator_shift=0)


def bessel_i1(z: np.ndarray | float) -> np.ndarray | float:
    """Modified Bessel I1 = I0', via (z/2) * sum (z^2/4)^k / (k! (k+1)!)."""
    z_arr = np.asarray(z, dtype=float)
    out = 0.5 * z_arr * _bessel_series(z_arr, numerator_shift=1)
    return out if np.ndim(z) else float(out)


def bessel_i1_over_half_z(z: np.ndarray | float) -> np.ndarray | float:
    """I1(z) / (z / 2); smooth through z = 0 (value 1 there)."""
    return _bessel_series(z, numerator_shift=1)


def _bessel_series(z: np.ndarray | float, numerator_shift: int) -> np.ndarray | float:
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0):
        raise ValueError("Bessel series evaluated only for z >= 0")
    if np.any(z_arr > _BESSEL_Z_MAX):
        raise ValueError(
            f"Bessel argument beyond the operating range ({_BESSEL_Z_MAX}); "
            "this signals parameter misuse"
        )
    w = 0.25 * z_arr * z_arr
    term = np.ones_like(w)
    if numerator_shift:
        term = term / math.factorial(numerator_shift)
    acc = term.copy()
    for k in range(1, 500):
        term = term * w / (k * (k + numerator_shift))
        acc += term
        if np.all(term <= 1e-17 * acc):
            break
    return acc if np.ndim(z) else float(acc)


def density_total(
    x: np.ndarray | float,
    t: float,
    sigma: Regime,
    params: DensityParams,
) -> DensityValue:
    """Full distribution of the telegraph position at t: atom exp(-lambda_s t)
    at c_s t plus the Bessel closed form of the absolutely continuous part.

    At the support endpoints the continuous part is the one-sided limit.
    """
    check_regime(sigma)
    if not t > 0:
        raise ValueError("t must be positive")
    x_arr = np.asarray(x, dtype=float)
    dc = params.delta_c
    lo, hi = params.c_minus * t, params.c_plus * t
    on_support = (x_arr >= lo) & (x_arr <= hi)
    a = np.where(on_support, hi - x_arr, 0.0)  # c_+ t - x
    b = np.where(on_support, x_arr - lo, 0.0)  # x - c_- t
    lam_prod = params.lambda_plus * params.lambda_minus
    zeta = 2.0 * math.sqrt(lam_prod) / dc * np.sqrt(a * b)
    pref = np.exp(-(params.lambda_tilde * t + params.nu * x_arr))
    edge = b if sigma == +1 else a
    cont = pref * (
        params.lam(sigma) / dc * bessel_i0(zeta)
        + lam_prod / dc**2 * edge * bessel_i1_over_half_z(zeta)
    )
    cont = np.where(on_support, cont, 0.0)
    return DensityValue(
        atom_weight=math.exp(-params.lam(sigma) * t),
        continuous=cont if np.ndim(x) else float(cont),
        atom_location=params.c(sigma) * t,
    )


def mgf(
    z: float,
    t: float,
    sigma: Regime,
    params: DensityParams,
    h_plus: float,
    h_minus: float,
    *,
    tail_eps: float = 1e-10,
    max_terms: int = 200,
    quad_order: int = 400,
) -> float:
    """Moment-generating function of X(t) + ln kappa(t) at argument z.

    Sums kappa_{n,sigma}^z-weighted integrals of e^{zx} against p_n; stops on
    a per-term Poisson-type tail bound. Raises DivergenceError if the term
    ratio test fails within the term budget.
    """
    check_regime(sigma)
    if not t > 0:
        raise ValueError("t must be positive")
    lo, hi = params.c_minus * t, params.c_plus * t
    nodes, weights = gauss_legendre_nodes(lo, hi, quad_order)
    ezx = np.exp(z * nodes) * weights
    log_kap = log_kappa_sequence(max_terms, sigma, h_plus, h_minus)
    lam_max = max(params.lambda_plus, params.lambda_minus)
    z_sup = max(z * lo, z * hi)

    acc = math.exp(-params.lam(sigma) * t + z * params.c(sigma) * t)  # atom, n = 0
    for n in range(1, max_terms + 1):
        if z * log_kap[n] + z_sup > 700.0:
            raise DivergenceError(
                "mgf term overflow: jump factors outgrow the Poisson tail"
            )
        term = math.exp(z * log_kap[n]) * float(
            ezx @ p_n_continuous(nodes, t, n, sigma, params)
        )
        acc += term
        # sup over the support of e^{z x + z ln kappa_{n+1}} times a Poisson mass bound
        bound_log = (
            z * log_kap[min(n + 1, max_terms)]
            + z_sup
            + (n + 1) * math.log(lam_max * t)
            - math.lgamma(n + 2)
        )
        if bound_log > 700.0:
            continue
        bound = math.exp(bound_log)
        ratio = math.exp(z * (log_kap[min(n + 1, max_terms)] - log_kap[n])) * lam_max * t / (n + 2)
        if ratio < 0.5 and bound / (1.0 - ratio) < tail_eps * abs(acc):
            return acc
    raise DivergenceError("mgf series failed to converge within the term budget")


class ResidualReport(NamedTuple):
    max_residual: float
    dx: float
    dt: float


def kolmogorov_residual(
    params: DensityParams,
    n: int,
    sigma: Regime,
    t: float,
    x_grid: np.ndarray,
    dx: float,
    dt: float,
    *,
    perturb: float = 1.0,
) -> ResidualReport:
    """Central-difference residual of the per-n transport equation
    d_t p_n + c_s d_x p_n + lambda_s p_n - lambda_s p_{n-1}^{(-s)} on a grid
    strictly inside the support.

    ``perturb`` scales the p_n values only (negative-control hook).
    """
    if n < 1:
        raise ValueError("residual check defined for n >= 1")
    x_grid = np.asarray(x_grid, dtype=float)
    t_lo = t - dt
    if not t_lo > 0:
        raise ValueError("dt too large for the requested t")
    if np.any(x_grid - dx <= params.c_minus * t_lo) or np.any(
        x_grid + dx >= params.c_plus * t_lo
    ):
        raise ValueError("grid touches the support boundary; kernels are not smooth there")
    c_s = params.c(sigma)
    lam_s = params.lam(sigma)
    p_tp = p_n_continuous(x_grid, t + dt, n, sigma, params)
    p_tm = p_n_continuous(x_grid, t - dt, n, sigma, params)
    p_xp = p_n_continuous(x_grid + dx, t, n, sigma, params)
    p_xm = p_n_continuous(x_grid - dx, t, n, sigma, params)
    p_0 = p_n_continuous(x_grid, t, n, sigma, params)
    if n == 1:
        source = np.zeros_like(x_grid)  # p_0 of the flipped regime is a pure atom
    else:
        source = p_n_continuous(x_grid, t, n - 1, -sigma, params)
    resid = (
        perturb * (p_tp - p_tm) / (2.0 * dt)
        + c_s * perturb * (p_xp - p_xm) / (2.0 * dx)
        + lam_s * perturb * p_0
        - lam_s * source
    )
    return ResidualReport(float(np.max(np.abs(resid))), dx, dt)
