"""Bounds on the walk-averaged gradient norm from IC features.

``phi_m`` is the CDF of the projection of a gradient onto an isotropic unit
direction, written as a function of the ratio ``t = eps / ||grad C||_W``.
The MIC bound brackets the norm from ``(eps_M, H_M)``; the SIC bound gives
an upper estimate from ``(eps_S, eta)`` and is always available.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .special import normal_cdf, reg_incomplete_beta

LN6 = math.log(6.0)


class InapplicableBoundError(ValueError):
    """Raised when the MIC bound cannot be applied (``H_M <= 2 h(1/2)``)."""


def h(x: float) -> float:
    """Pair-entropy term ``-x log_6 x`` with ``h(0) = 0``."""
    if x <= 0.0:
        return 0.0
    return -x * math.log(x) / LN6


#: IC level below which the MIC bound does not apply; equals log_6 2.
MIC_THRESHOLD = 2.0 * h(0.5)


def phi_m(t: float, m: int) -> float:
    """CDF of ``grad C . delta`` at ratio ``t``, for dimension ``m >= 2``.

    The ratio lives in [-1, 1]; values outside are clamped to 0 or 1.
    """
    if m < 2:
        raise ValueError(f"phi_m needs m >= 2, got {m}")
    if t >= 1.0:
        return 1.0
    if t <= -1.0:
        return 0.0
    if t == 0.0:
        return 0.5
    tail = reg_incomplete_beta(t * t, 0.5, 0.5 * (m - 1))
    return 0.5 * (1.0 + math.copysign(tail, t))


def phi_m_inverse(p: float, m: int) -> float:
    """Ratio ``t`` with ``phi_m(t, m) = p``, by bisection on [-1, 1]."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    lo, hi = -1.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if phi_m(mid, m) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gaussian_phi(t: float, m: int) -> float:
    """Large-``m`` limit of :func:`phi_m`: the normal CDF at ``t * sqrt(m)``."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return normal_cdf(t * math.sqrt(m))


def mic_balance(x: float) -> float:
    """``4 h(x) + 2 h(1/2 - 2x)``, the IC of the least concentrated split."""
    return 4.0 * h(x) + 2.0 * h(0.5 - 2.0 * x)


def solve_q(H: float) -> float:
    """Root ``q`` in (0, 1/6] of ``mic_balance(q) = H``.

    ``mic_balance`` increases on [0, 1/6] from ``2 h(1/2)`` to 1; a second
    root above 1/6 exists for large ``H`` and is never returned.
    """
    if not MIC_THRESHOLD < H <= 1.0 + 1e-12:
        raise InapplicableBoundError(
            f"MIC bound needs 2h(1/2) = {MIC_THRESHOLD:.6f} < H <= 1, got H = {H}"
        )
    top = 1.0 / 6.0
    # the maximum is flat, so the root is ill-conditioned there; snap to it
    if H >= mic_balance(top):
        return top
    lo, hi = 0.0, top
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mic_balance(mid) < H:
            lo = mid
        else:
            hi = mid
    # pick whichever end has the smaller residual
    return lo if abs(mic_balance(lo) - H) <= abs(mic_balance(hi) - H) else hi


def bounds_from_mic(eps_M: float, H_M: float, m: int) -> tuple[float, float]:
    """Lower and upper bound on ``||grad C||_W`` from the MIC pair."""
    if eps_M <= 0.0:
        raise InapplicableBoundError(f"MIC bound needs eps_M > 0, got {eps_M}")
    q = solve_q(H_M)
    lower = -eps_M / phi_m_inverse(2.0 * q, m)
    upper = -eps_M / phi_m_inverse((1.0 - 2.0 * q) / 2.0, m)
    return lower, upper


def bound_from_sic(eps_S: float, eta: float, m: int) -> float:
    """Upper bound on ``||grad C||_W`` from the sensitivity ``eps_S``."""
    if not 0.0 < eta <= 1.0 / 6.0:
        raise ValueError(f"eta must lie in (0, 1/6], got {eta}")
    if eps_S < 0.0:
        raise ValueError(f"eps_S must be non-negative, got {eps_S}")
    return -eps_S / phi_m_inverse(1.5 * eta, m)


@dataclass
class GradientBounds:
    lower_mic: float | None
    upper_mic: float | None
    upper_sic: float
    q: float | None
    eps_M: float
    H_M: float
    eps_S: float
    eta: float
    m: int

    @property
    def applicable_mic(self) -> bool:
        return self.lower_mic is not None

    def to_dict(self) -> dict:
        return {
            "lower_mic": self.lower_mic,
            "upper_mic": self.upper_mic,
            "upper_sic": self.upper_sic,
            "q": self.q,
            "applicable_mic": self.applicable_mic,
        }

    def inputs(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in ("eps_M", "H_M", "eps_S", "eta", "m")}


def gradient_bounds(eps_M: float, H_M: float, eps_S: float, eta: float, m: int) -> GradientBounds:
    """Both bounds at once; an inapplicable MIC bound is reported as ``None``."""
    try:
        q = solve_q(H_M)
        lower, upper = bounds_from_mic(eps_M, H_M, m)
    except InapplicableBoundError:
        q = lower = upper = None
    return GradientBounds(
        lower_mic=lower,
        upper_mic=upper,
        upper_sic=bound_from_sic(eps_S, eta, m),
        q=q,
        eps_M=eps_M,
        H_M=H_M,
        eps_S=eps_S,
        eta=eta,
        m=m,
    )
