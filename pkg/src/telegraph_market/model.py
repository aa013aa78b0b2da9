"""Two-state regime process and the telegraph / jump / stochastic-exponential
processes built on it.

The regime is the state sigma in {+1, -1} of a continuous-time Markov chain
with switch intensities lambda_plus (out of +1) and lambda_minus (out of -1).
A path is stored event-driven: only the exact switch times are kept, so grid
evaluation introduces no discretization error.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

Regime = int  # +1 or -1

_UINT64_MASK = (1 << 64) - 1


def check_regime(sigma: int) -> int:
    if sigma not in (+1, -1):
        raise ValueError(f"regime must be +1 or -1, got {sigma!r}")
    return sigma


@dataclass(frozen=True)
class ModelParams:
    """Full market specification.

    Velocities c_{+/-} drive the telegraph log-trend, lambda_{+/-} are the
    regime switch intensities, h_{+/-} the relative price jumps at switches
    (indexed by the pre-switch regime), r_{+/-} the regime interest rates.
    """

    c_plus: float
    c_minus: float
    lambda_plus: float
    lambda_minus: float
    h_plus: float
    h_minus: float
    r_plus: float
    r_minus: float
    s0: float
    sigma0: Regime

    def __post_init__(self) -> None:
        check_regime(self.sigma0)
        if not (self.lambda_plus > 0 and self.lambda_minus > 0):
            raise ValueError("switch intensities must be positive")
        if not (self.h_plus > -1 and self.h_minus > -1):
            raise ValueError("jump sizes must exceed -1")
        if not self.c_minus <= self.c_plus:
            raise ValueError("c_minus must not exceed c_plus")
        if not (self.r_plus >= 0 and self.r_minus >= 0):
            raise ValueError("interest rates must be nonnegative")
        if not self.s0 > 0:
            raise ValueError("initial stock price must be positive")

    def c(self, sigma: Regime) -> float:
        return self.c_plus if sigma == +1 else self.c_minus

    def lam(self, sigma: Regime) -> float:
        return self.lambda_plus if sigma == +1 else self.lambda_minus

    def h(self, sigma: Regime) -> float:
        return self.h_plus if sigma == +1 else self.h_minus

    def r(self, sigma: Regime) -> float:
        return self.r_plus if sigma == +1 else self.r_minus


@dataclass(frozen=True)
class RegimePath:
    """One realization of the switching process on [0, horizon].

    The regime is right-continuous: it flips exactly at each switch time, and
    ``regime_at(path, tau_j)`` already reports the post-switch state.
    """

    sigma0: Regime
    switch_times: tuple[float, ...]
    horizon: float

    def __post_init__(self) -> None:
        check_regime(self.sigma0)
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        prev = 0.0
        for tau in self.switch_times:
            if not prev < tau <= self.horizon:
                raise ValueError("switch times must be strictly increasing in (0, horizon]")
            prev = tau


@dataclass(frozen=True)
class MomentConstants:
    """Aggregate constants driving the conditional-mean formulas."""

    H: float
    Lambda: float
    gamma_c: float
    g: float
    a_plus: float
    a_minus: float
    d_plus: float
    d_minus: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "MomentConstants":
        lam_p, lam_m = params.lambda_plus, params.lambda_minus
        c_p, c_m = params.c_plus, params.c_minus
        h_p, h_m = params.h_plus, params.h_minus
        big = lam_p + lam_m
        return cls(
            H=h_m + h_p,
            Lambda=big,
            gamma_c=lam_m * lam_p / big,
            g=(c_p * lam_m + c_m * lam_p) / big,
            a_plus=(lam_p * h_p - lam_m * h_m) / big,
            a_minus=(lam_m * h_m - lam_p * h_p) / big,
            d_plus=(c_p - c_m) / big,
            d_minus=(c_m - c_p) / big,
        )

    def a(self, sigma: Regime) -> float:
        return self.a_plus if sigma == +1 else self.a_minus

    def d(self, sigma: Regime) -> float:
        return self.d_plus if sigma == +1 else self.d_minus


def path_rng(seed: int, path_index: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, path_index).

    Philox streams for distinct keys are independent, so concurrent sampling
    with distinct path indices never shares state and results do not depend
    on worker count.
    """
    key = [int(seed) & _UINT64_MASK, int(path_index) & _UINT64_MASK]
    return np.random.Generator(np.random.Philox(key=key))


def sample_path(
    params: ModelParams,
    horizon: float,
    seed: int,
    path_index: int = 0,
) -> RegimePath:
    """Draw one regime path: independent exponential waits with the rate
    alternating lambda_{sigma0}, lambda_{-sigma0}, ...
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rng = path_rng(seed, path_index)
    times: list[float] = []
    sigma = params.sigma0
    t = 0.0
    while True:
        t += rng.exponential(1.0 / params.lam(sigma))
        if t > horizon:
            break
        times.append(t)
        sigma = -sigma
    return RegimePath(sigma0=params.sigma0, switch_times=tuple(times), horizon=horizon)


def _check_time(path: RegimePath, t: float) -> None:
    if not 0.0 <= t <= path.horizon:
        raise ValueError(f"time {t} outside [0, {path.horizon}]")


def switch_count(path: RegimePath, t: float) -> int:
    """Number of switches on [0, t]."""
    _check_time(path, t)
    return bisect_right(path.switch_times, t)


def regime_at(path: RegimePath, t: float) -> Regime:
    """Regime at time t (right-continuous at switch times)."""
    n = switch_count(path, t)
    return path.sigma0 if n % 2 == 0 else -path.sigma0


def telegraph_value(path: RegimePath, c_plus: float, c_minus: float, t: float) -> float:
    """Time-integral of the regime-indexed velocity up to t."""
    _check_time(path, t)
    c0 = c_plus if path.sigma0 == +1 else c_minus
    c1 = c_minus if path.sigma0 == +1 else c_plus
    total = 0.0
    prev = 0.0
    flipped = False
    for tau in path.switch_times:
        if tau > t:
            break
        total += (c1 if flipped else c0) * (tau - prev)
        prev = tau
        flipped = not flipped
    total += (c1 if flipped else c0) * (t - prev)
    return total


def jump_value(path: RegimePath, h_plus: float, h_minus: float, t: float) -> float:
    """Sum of jump sizes indexed by the pre-switch regime, over switches <= t."""
    n = switch_count(path, t)
    h0 = h_plus if path.sigma0 == +1 else h_minus
    h1 = h_minus if path.sigma0 == +1 else h_plus
    # jumps alternate h_{sigma0}, h_{-sigma0}, ...
    return h0 * ((n + 1) // 2) + h1 * (n // 2)


def kappa(n: int, sigma0: Regime, h_plus: float, h_minus: float) -> float:
    """Stochastic-exponential jump factor after n switches from sigma0.

    kappa_{2k} = (1+h_s)^k (1+h_{-s})^k, kappa_{2k+1} = (1+h_s)^{k+1} (1+h_{-s})^k.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    check_regime(sigma0)
    h0 = h_plus if sigma0 == +1 else h_minus
    h1 = h_minus if sigma0 == +1 else h_plus
    return (1.0 + h0) ** ((n + 1) // 2) * (1.0 + h1) ** (n // 2)


def log_kappa_sequence(
    n_max: int, sigma0: Regime, h_plus: float, h_minus: float
) -> np.ndarray:
    """log kappa_{n, sigma0} for n = 0..n_max (vectorized)."""
    check_regime(sigma0)
    h0 = h_plus if sigma0 == +1 else h_minus
    h1 = h_minus if sigma0 == +1 else h_plus
    n = np.arange(n_max + 1)
    return ((n + 1) // 2) * math.log1p(h0) + (n // 2) * math.log1p(h1)


def stock_price(path: RegimePath, params: ModelParams, t: float) -> float:
    """S(t) = S0 * exp(X(t)) * kappa_{N(t)}; strictly positive."""
    x = telegraph_value(path, params.c_plus, params.c_minus, t)
    n = switch_count(path, t)
    return params.s0 * math.exp(x) * kappa(n, path.sigma0, params.h_plus, params.h_minus)


def bond_price(path: RegimePath, params: ModelParams, t: float) -> float:
    """B(t) = exp of the time-integral of the regime-indexed rate."""
    return math.exp(telegraph_value(path, params.r_plus, params.r_minus, t))


def linear_transform_coeffs(
    c_plus: float, c_minus: float, c_tilde_plus: float, c_tilde_minus: float
) -> tuple[float, float]:
    """Coefficients (a, b) with a*c_{+/-} + b = c_tilde_{+/-}.

    Two telegraph processes on the same regime path are linearly connected;
    this solves the 2x2 system. Degenerate c_plus == c_minus is refused.
    """
    if c_plus == c_minus:
        raise ValueError("linear transform undefined for c_plus == c_minus")
    a = (c_tilde_plus - c_tilde_minus) / (c_plus - c_minus)
    b = (c_plus * c_tilde_minus - c_minus * c_tilde_plus) / (c_plus - c_minus)
    return a, b


def conditional_means(
    params: ModelParams, sigma_s: Regime, dt: float
) -> tuple[float, float]:
    """(E[J(s+dt) - J(s)], E[X(s+dt) - X(s)]) given the regime at s."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    mc = MomentConstants.from_params(params)
    lam = params.lam(sigma_s)
    decay = -math.expm1(-mc.Lambda * dt) / mc.Lambda  # (1 - e^{-Lambda dt}) / Lambda
    mean_dj = mc.gamma_c * mc.H * dt + lam * mc.a(sigma_s) * decay
    mean_dx = mc.g * dt + lam * mc.d(sigma_s) * decay
    return mean_dj, mean_dx


def martingale_defect(params: ModelParams) -> tuple[float, float]:
    """(lambda_- h_- + c_-, lambda_+ h_+ + c_+); both vanish iff X + J is a
    martingale under the physical measure."""
    return (
        params.lambda_minus * params.h_minus + params.c_minus,
        params.lambda_plus * params.h_plus + params.c_plus,
    )
