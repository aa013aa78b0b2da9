"""Shared numerical helpers: quadrature, bisection, series tail bounds."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _integrate

from .errors import TruncationError

QUAD_ABS_TOL = 1e-12


def integrate_interval(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    points: Sequence[float] | None = None,
    abs_tol: float = QUAD_ABS_TOL,
) -> float:
    """Adaptive Gauss-Kronrod integration of ``f`` over the finite interval [a, b].

    Interior break points (kinks, mild endpoint singularities) can be passed
    through ``points``; they are clipped to the open interval.
    """
    if not b > a:
        return 0.0
    brk = None
    if points is not None:
        brk = sorted({float(x) for x in points if a < x < b})
        if not brk:
            brk = None
    val, _err = _integrate.quad(
        f, a, b, points=brk, epsabs=abs_tol, epsrel=1e-11, limit=400
    )
    return val


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rtol: float = 1e-13,
    abs_tol: float = 0.0,
    max_iter: int = 200,
) -> float:
    """Root of a sign-changing continuous function on [lo, hi] by bisection."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError("bisect_root: no sign change on the bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
        if hi - lo <= rtol * max(abs(lo), abs(hi)) + abs_tol:
            return 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


def expand_bracket_up(
    f: Callable[[float], float],
    start: float,
    *,
    factor: float = 4.0,
    max_expand: int = 200,
) -> tuple[float, float] | None:
    """Geometric search for a sign change of ``f`` on [start * factor^k] upwards.

    Returns a bracketing pair or None if ``f`` keeps its sign throughout.
    """
    lo = start
    flo = f(lo)
    if flo == 0.0:
        return (lo, lo)
    hi = lo * factor
    for _ in range(max_expand):
        fhi = f(hi)
        if flo * fhi <= 0:
            return (lo, hi)
        lo, flo = hi, fhi
        hi *= factor
    return None


def expand_bracket_down(
    f: Callable[[float], float],
    start: float,
    *,
    factor: float = 4.0,
    max_expand: int = 200,
) -> tuple[float, float] | None:
    """Geometric search for a sign change on [start / factor^k, start]."""
    hi = start
    fhi = f(hi)
    if fhi == 0.0:
        return (hi, hi)
    lo = hi / factor
    for _ in range(max_expand):
        flo = f(lo)
        if flo * fhi <= 0:
            return (lo, hi)
        hi, fhi = lo, flo
        lo /= factor
    return None


def poisson_tail_bound(rate_t: float, n: int) -> float:
    """Upper bound on sum_{k > n} (rate_t)^k / k!.

    Uses the geometric-ratio bound on the Poisson-type tail; valid (and
    finite) once n + 2 > rate_t, else returns +inf.
    """
    if rate_t <= 0.0:
        return 0.0
    ratio = rate_t / (n + 2)
    if ratio >= 1.0:
        return math.inf
    log_head = (n + 1) * math.log(rate_t) - math.lgamma(n + 2)
    return math.exp(log_head) / (1.0 - ratio)


def pairwise_sum(terms: Sequence[np.ndarray | float]) -> np.ndarray | float:
    """Sum a list of term arrays with numpy's pairwise reduction."""
    if len(terms) == 0:
        return 0.0
    return np.sum(np.asarray(terms), axis=0)


def check_term_budget(n_terms: int, max_terms: int, what: str) -> None:
    if n_terms >= max_terms:
        raise TruncationError(f"{what}: term budget of {max_terms} exhausted")


def gauss_legendre_nodes(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights mapped to [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w
