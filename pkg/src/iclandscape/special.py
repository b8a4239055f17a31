"""Special functions used by the gradient bounds.

Everything here is built from elementary functions only: log-gamma via the
Lanczos approximation, erf/erfc via a positive power series and a Lentz
continued fraction, and the regularized incomplete beta function via its
continued-fraction expansion.
"""

from __future__ import annotations

import math

import numpy as np

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

_FPMIN = 1e-300
_CF_EPS = 1e-15
_CF_MAXIT = 20000


def ln_gamma(x: float) -> float:
    """Natural log of |Gamma(x)|, Lanczos approximation (g=7, 9 terms)."""
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"ln_gamma has poles at non-positive integers, got {x}")
    if x < 0.5:
        # reflection formula
        return math.log(math.pi / abs(math.sin(math.pi * x))) - ln_gamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _LN_SQRT_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


def ln_beta(a: float, b: float) -> float:
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)


def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)); all terms positive
    x2 = x * x
    term = x
    total = x
    n = 0
    while True:
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
        if term < 1e-17 * total:
            break
    return 2.0 / math.sqrt(math.pi) * math.exp(-x2) * total


def _erfc_cf(x: float) -> float:
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0
    f = x
    c = x
    d = 0.0
    k = 1
    while k < _CF_MAXIT:
        an = 0.5 * k
        d = x + an * d
        d = 1.0 / (d if abs(d) > _FPMIN else _FPMIN)
        c = x + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
        k += 1
    return math.exp(-x * x) / math.sqrt(math.pi) / f


def erf(x: float) -> float:
    if x < 0.0:
        return -erf(-x)
    if x == 0.0:
        return 0.0
    if x < 3.0:
        return _erf_series(x)
    return 1.0 - _erfc_cf(x)


def erfc(x: float) -> float:
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x < 0.5:
        return 1.0 - _erf_series(x) if x > 0.0 else 1.0
    return _erfc_cf(x)


def normal_cdf(z: float) -> float:
    """Standard normal CDF, evaluated through erfc for accurate tails."""
    return 0.5 * erfc(-z / math.sqrt(2.0))


def _betacf(x: float, a: float, b: float) -> float:
    """Continued fraction for I_x(a, b) (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def reg_incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I(x; a, b).

    Uses the continued fraction directly when ``x < (a+1)/(a+b+2)`` and the
    symmetry ``I(x; a, b) = 1 - I(1-x; b, a)`` otherwise.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = a * math.log(x) + b * math.log1p(-x) - ln_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(ln_front) * _betacf(x, a, b) / a
    return 1.0 - math.exp(ln_front) * _betacf(1.0 - x, b, a) / b


def reg_incomplete_beta_array(x, a: float, b: float) -> np.ndarray:
    """Vectorized :func:`reg_incomplete_beta` over an array of ``x``.

    Same algorithm, run as one Lentz iteration over all entries with a
    convergence mask. Intended for large samples (e.g. KS statistics).
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)) or np.any(np.isnan(x)):
        raise ValueError("x must lie in [0, 1]")
    out = np.empty_like(x)
    flat_x = x.ravel()
    flat_out = out.ravel()
    lower = flat_x == 0.0
    upper = flat_x == 1.0
    flat_out[lower] = 0.0
    flat_out[upper] = 1.0
    inner = ~(lower | upper)
    if not inner.any():
        return out

    xi = flat_x[inner]
    swap = xi >= (a + 1.0) / (a + b + 2.0)
    aa_ = np.where(swap, b, a)
    bb_ = np.where(swap, a, b)
    xx = np.where(swap, 1.0 - xi, xi)

    lnb = ln_beta(a, b)
    ln_front = a * np.log(xi) + b * np.log1p(-xi) - lnb
    cf = _betacf_array(xx, aa_, bb_)
    direct = np.exp(ln_front) * cf / aa_
    flat_out[inner] = np.where(swap, 1.0 - direct, direct)
    return out


def _betacf_array(x: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0

    def guard(v):
        return np.where(np.abs(v) < _FPMIN, _FPMIN, v)

    c = np.ones_like(x)
    d = 1.0 / guard(1.0 - qab * x / qap)
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d_new = 1.0 / guard(1.0 + aa * d)
        c_new = guard(1.0 + aa / c)
        h_new = h * d_new * c_new
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d_new = 1.0 / guard(1.0 + aa * d_new)
        c_new = guard(1.0 + aa / c_new)
        delta = d_new * c_new
        h_new = h_new * delta
        # frozen entries keep their converged value
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h_new, h)
        active &= np.abs(delta - 1.0) >= _CF_EPS
        if not active.any():
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")
