"""Closed-form theory for the ordered-prediction shrinkage problem.

Notation: ``g`` is the best-linear-predictor shrinkage coefficient
``gamma* = sigma_u^2 / (sigma_u^2 + sigma_e^2/n)`` and ``a = sqrt(g/(1-g))``.
Everything here is a pure function of scalars; the Monte-Carlo counterparts
live in :mod:`orderfx.risk` and are cross-checked against these in the test
suite.

The central primitive is ``psi(a) = int_0^inf t^2 Phi(a t) phi(t) dt``,
computed by adaptive quadrature to abs error <= 1e-9 (integrand decays like
t^2 phi(t); the tail beyond t = 40 is below 1e-300 and is dropped).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import ndtr

__all__ = [
    "FittedRangeWarning",
    "GammaBracket",
    "psi",
    "psi_envelope",
    "optimal_gamma_pair",
    "optimal_gamma_bracket",
    "bracket_upper",
    "optimal_gamma_approx",
    "dominance_gamma_lower",
    "always_dominates_threshold",
    "star_dominates_threshold",
    "pair_dominance_threshold",
    "cross_moment_bounds",
    "shrinkage_risk_gap",
    "pair_cross_moment_normal",
]


class FittedRangeWarning(RuntimeWarning):
    """Emitted when the fitted gamma approximation is used outside 2 <= m <= 30."""


def _check_gamma_star(g: float, *, allow_one: bool = True) -> float:
    g = float(g)
    hi_ok = g <= 1.0 if allow_one else g < 1.0
    if not (math.isfinite(g) and 0.0 <= g and hi_ok):
        hi = "1" if allow_one else "1 (exclusive)"
        raise ValueError(f"gamma* must be in [0, {hi}], got {g}")
    return g


def _check_m(m: int) -> int:
    m = int(m)
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    return m


def psi(a: float) -> float:
    """Quadrature value of int_0^inf t^2 Phi(a t) phi(t) dt.

    Nondecreasing in ``a``, from 1/4 at a = 0 to 1/2 as a -> inf
    (``a = math.inf`` is accepted and returns 0.5 exactly).
    """
    a = float(a)
    if math.isnan(a) or a < 0.0:
        raise ValueError(f"a must be >= 0, got {a}")
    if math.isinf(a):
        return 0.5

    def integrand(t: float) -> float:
        return t * t * ndtr(a * t) * math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)

    value, _ = quad(integrand, 0.0, 40.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    return value


def psi_envelope(a: float) -> tuple[float, float]:
    """Lower/upper closed-form envelope (rho1, rho2) of psi.

    rho1 = 1/4 + (1/(4 pi) + 1/8) * 1{a >= 1};
    rho2 = 1/4 * 1{a = 0} + (3/8 + a/(4 pi)) * 1{0 < a < pi/2} + 1/2 * 1{a >= pi/2}.
    Both touch psi at a = 0 and a = 1.
    """
    a = float(a)
    if math.isnan(a) or a < 0.0:
        raise ValueError(f"a must be >= 0, got {a}")
    rho1 = 0.25 + (0.25 / math.pi + 0.125) * (a >= 1.0)
    if a == 0.0:
        rho2 = 0.25
    elif a < math.pi / 2.0:
        rho2 = 0.375 + a / (4.0 * math.pi)
    else:
        rho2 = 0.5
    return rho1, rho2


def optimal_gamma_pair(gamma_star: float) -> float:
    """Exact risk-optimal shrinkage coefficient for two normal areas.

    gamma_opt = g (4 psi(a) - 1) + (1 - g) (2/pi) sqrt(g (1-g)), a = sqrt(g/(1-g)).
    Defined at g = 1 by continuity (returns 1).
    """
    g = _check_gamma_star(gamma_star)
    if g == 1.0:
        return 1.0
    a = math.sqrt(g / (1.0 - g))
    return g * (4.0 * psi(a) - 1.0) + (1.0 - g) * (2.0 / math.pi) * math.sqrt(g * (1.0 - g))


def bracket_upper(m: int, gamma_star: float) -> float:
    """Upper end of the optimal-gamma bracket: (m sqrt(g) - g) / (m - 1)."""
    m = _check_m(m)
    g = _check_gamma_star(gamma_star)
    return (m * math.sqrt(g) - g) / (m - 1.0)


@dataclass(frozen=True)
class GammaBracket:
    """Interval [low, high] guaranteed to contain the optimal shrinkage gamma."""

    low: float
    high: float

    def __contains__(self, gamma: float) -> bool:
        return self.low <= gamma <= self.high

    def inflated(self, delta: float) -> "GammaBracket":
        return GammaBracket(self.low - delta, self.high + delta)


def optimal_gamma_bracket(m: int, gamma_star: float) -> GammaBracket:
    """Bracket [g, (m sqrt(g) - g)/(m-1)] for the risk-optimal gamma.

    Collapses to a point at g in {0, 1}; the upper end tends to sqrt(g) as
    m -> inf.
    """
    g = _check_gamma_star(gamma_star)
    return GammaBracket(g, bracket_upper(m, g))


# Quadratic fit of the interpolation weight between the bracket ends,
# valid for 2 <= m <= 30.
_ALPHA_COEFFS = (0.8236, -0.0573, 0.0012)


def optimal_gamma_approx(m: int, gamma_star: float) -> float:
    """Polynomial approximation of the risk-optimal gamma for moderate m.

    Interpolates the bracket ends with weight alpha_m = 0.8236 - 0.0573 m
    + 0.0012 m^2, fitted over 2 <= m <= 30.  Outside that range the large-m
    limit sqrt(g) is returned and a FittedRangeWarning is emitted.
    """
    m = _check_m(m)
    g = _check_gamma_star(gamma_star)
    if m > 30:
        warnings.warn(
            f"approximation fitted for 2 <= m <= 30; returning sqrt(gamma*) for m={m}",
            FittedRangeWarning,
            stacklevel=2,
        )
        return math.sqrt(g)
    c0, c1, c2 = _ALPHA_COEFFS
    alpha = c0 + c1 * m + c2 * m * m
    return alpha * g + (1.0 - alpha) * bracket_upper(m, g)


def dominance_gamma_lower(m: int, gamma_star: float) -> float:
    """Smallest gamma guaranteed to beat the unshrunk ordered predictor.

    Value: (m (2 sqrt(g) - 1) - (2 g - 1)) / (m - 1).  Equals -1 at g = 0 and
    +1 at g = 1 (single final division keeps those endpoints exact); tends to
    2 sqrt(g) - 1 as m -> inf.
    """
    m = _check_m(m)
    g = _check_gamma_star(gamma_star)
    return (m * (2.0 * math.sqrt(g) - 1.0) - (2.0 * g - 1.0)) / (m - 1.0)


def always_dominates_threshold(m: int) -> float:
    """gamma* below which every gamma in [0, 1] beats the unshrunk predictor.

    Equals ((m - sqrt((m-1)^2 + 1)) / 2)^2, evaluated in the cancellation-free
    form ((m-1) / (m + sqrt((m-1)^2 + 1)))^2.  Tends to 1/4 as m -> inf.
    """
    m = _check_m(m)
    root = math.sqrt((m - 1.0) ** 2 + 1.0)
    ratio = (m - 1.0) / (m + root)
    return ratio * ratio


def star_dominates_threshold(m: int) -> float:
    """gamma* below which every gamma in [gamma*, 1] beats the unshrunk predictor.

    Equals (m-1)^2 / (m+1)^2.  Tends to 1 as m -> inf.
    """
    m = _check_m(m)
    return ((m - 1) * (m - 1)) / ((m + 1) * (m + 1))


def _dominance_quintic(a: float) -> float:
    """Increasing function of a whose unique positive root fixes the m=2
    normal-case dominance threshold."""
    return a**5 + a**3 - (math.pi / 2.0) * a * a + 2.0 * a - math.pi / 2.0


def pair_dominance_threshold() -> float:
    """gamma* threshold for two normal areas below which every gamma in [0, 1]
    beats the unshrunk predictor (~0.4119).

    Found as c = a^2 / (1 + a^2) at the unique positive root a of the
    dominance quintic, via bracketed root-finding to 1e-13.
    """
    a = brentq(_dominance_quintic, 0.0, 2.0, xtol=1e-13, rtol=8.9e-16)
    return a * a / (1.0 + a * a)


def cross_moment_bounds(
    m: int, mu: float, sigma_u2: float, sigma_e2_eff: float
) -> tuple[float, float]:
    """Bounds on E sum_i theta_(i) y_(i):

    m (sigma_u^2 + mu^2) <= E sum <= m sqrt((sigma_u^2 + mu^2)(sigma_u^2 + sigma_e^2 + mu^2)).

    The two ends coincide when sigma_e2_eff = 0.
    """
    m = _check_m(m)
    lo = m * (sigma_u2 + mu * mu)
    hi = m * math.sqrt((sigma_u2 + mu * mu) * (sigma_u2 + sigma_e2_eff + mu * mu))
    return lo, hi


def shrinkage_risk_gap(
    gamma: float, m: int, sigma_u2: float, sigma_e2_eff: float, cross_moment: float
) -> float:
    """Analytic risk(linear(gamma)) - risk(direct) given E sum theta_(i) y_(i).

    (1-gamma)^2 (s_u^2 + s_e^2)(m-1)
        - 2 (1-gamma) (m (s_u^2 + s_e^2) - s_e^2 - cross_moment).

    ``cross_moment`` is typically a Monte-Carlo estimate (see
    :func:`orderfx.risk.cross_moment`); the gap is 0 at gamma = 1.
    """
    m = _check_m(m)
    total = sigma_u2 + sigma_e2_eff
    one_minus = 1.0 - gamma
    return one_minus * one_minus * total * (m - 1) - 2.0 * one_minus * (
        m * total - sigma_e2_eff - cross_moment
    )


def pair_cross_moment_normal(gamma_star: float, sigma_u2: float, sigma_e2: float) -> float:
    """Closed-form E(theta_(2) y_(2)) for two normal areas with mu = 0:

    2 sigma_u^2 psi(a) + (sigma_e^2 / pi) sqrt(g (1-g)),  a = sqrt(g/(1-g)).

    By symmetry E(theta_(1) y_(1)) is equal, so the total cross moment is
    twice this value.
    """
    g = _check_gamma_star(gamma_star, allow_one=False)
    if g == 0.0:
        return 0.0
    a = math.sqrt(g / (1.0 - g))
    return 2.0 * sigma_u2 * psi(a) + (sigma_e2 / math.pi) * math.sqrt(g * (1.0 - g))
