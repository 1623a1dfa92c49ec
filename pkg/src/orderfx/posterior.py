"""Conditional laws of an area effect given its observation.

For observation y of one area (an area mean when n > 1), mu_hat the plug-in
grand mean, and s^2 the effective error variance, the three supported laws
are:

* ``normal-normal``: theta | y ~ N(g y + (1-g) mu_hat, g s^2) with g the
  shrinkage coefficient;
* ``laplace-normal`` (Laplace effects): a continuous two-piece Gaussian,
  kernels centered at y +- s^2/b (b = sigma_u / sqrt(2)) with piece weights
  exp(+-(y - mu_hat)/b), split at mu_hat;
* ``locexp-normal`` (location-exponential effects): a normal centered at
  y - s^2/sigma_u truncated to [mu_hat - sigma_u, inf).

All samplers are exact inverse-CDF constructions (piece choice by its exact
probability, then a one-sided truncated normal).  Normalizers and truncated
quantiles are evaluated in log space (``log_ndtr`` / ``ndtri_exp``) so far
tail truncations do not saturate.

The laws use the plug-in mean mu_hat = y-bar everywhere a prior center is
needed; this mirrors how the empirical predictors substitute the grand mean
for the unknown location.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri, ndtri_exp

__all__ = [
    "PosteriorKind",
    "PosteriorLaw",
    "normal_posterior",
    "laplace_posterior",
    "locexp_posterior",
    "posterior_pdf",
    "posterior_cdf",
    "sample_posterior",
    "uniforms_per_draw",
    "laplace_posterior_density",
    "locexp_posterior_density",
    "kella_conditional_means",
    "trunc_normal_below",
    "trunc_normal_above",
]

_U_FLOOR = 2.0**-54
_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class PosteriorKind(str, enum.Enum):
    NORMAL_NORMAL = "normal-normal"
    LAPLACE_NORMAL = "laplace-normal"
    LOCEXP_NORMAL = "locexp-normal"


@dataclass(frozen=True)
class PosteriorLaw:
    """Conditional law of one area effect given its observation.

    ``sigma_e2_eff`` is the error variance of the observation (sigma_e^2/n).
    ``gamma_star`` is set for the normal law; ``sigma_u`` (an sd) for the two
    non-normal laws.
    """

    kind: PosteriorKind
    y: float
    mu_hat: float
    sigma_e2_eff: float
    gamma_star: float | None = None
    sigma_u: float | None = None


def normal_posterior(
    y_i: float, mu_hat: float, gamma_star: float, sigma_e2_eff: float
) -> PosteriorLaw:
    """Normal law with mean g y + (1-g) mu_hat and variance g s^2.

    gamma_star = 0 gives a point mass at mu_hat (variance 0).
    """
    if not (math.isfinite(gamma_star) and 0.0 <= gamma_star <= 1.0):
        raise ValueError(f"gamma_star must be in [0, 1], got {gamma_star}")
    if not (math.isfinite(sigma_e2_eff) and sigma_e2_eff >= 0.0):
        raise ValueError(f"sigma_e2_eff must be finite and >= 0, got {sigma_e2_eff}")
    return PosteriorLaw(
        kind=PosteriorKind.NORMAL_NORMAL,
        y=float(y_i),
        mu_hat=float(mu_hat),
        sigma_e2_eff=float(sigma_e2_eff),
        gamma_star=float(gamma_star),
    )


def _check_scales(sigma_u: float, sigma_e: float) -> None:
    if not (math.isfinite(sigma_u) and sigma_u > 0.0):
        raise ValueError(f"sigma_u must be finite and > 0, got {sigma_u}")
    if not (math.isfinite(sigma_e) and sigma_e > 0.0):
        raise ValueError(f"sigma_e must be finite and > 0, got {sigma_e}")


def laplace_posterior(
    y_i: float, mu_hat: float, sigma_u: float, sigma_e2_eff: float
) -> PosteriorLaw:
    _check_scales(sigma_u, math.sqrt(sigma_e2_eff))
    return PosteriorLaw(
        kind=PosteriorKind.LAPLACE_NORMAL,
        y=float(y_i),
        mu_hat=float(mu_hat),
        sigma_e2_eff=float(sigma_e2_eff),
        sigma_u=float(sigma_u),
    )


def locexp_posterior(
    y_i: float, mu_hat: float, sigma_u: float, sigma_e2_eff: float
) -> PosteriorLaw:
    _check_scales(sigma_u, math.sqrt(sigma_e2_eff))
    return PosteriorLaw(
        kind=PosteriorKind.LOCEXP_NORMAL,
        y=float(y_i),
        mu_hat=float(mu_hat),
        sigma_e2_eff=float(sigma_e2_eff),
        sigma_u=float(sigma_u),
    )


# ---------------------------------------------------------------------------
# Two-piece (Laplace-effect) law internals.  Piece 1 covers t <= mu with kernel
# center c1 = y + s^2/b, piece 2 covers t > mu with center c2 = y - s^2/b;
# completing the square in the product of the Gaussian likelihood and the
# Laplace prior gives piece log-weights +-w with w = (y - mu)/b, which is what
# keeps the density continuous at mu.
# ---------------------------------------------------------------------------


def _laplace_parts(y, mu, sigma_u, sigma_e):
    b = np.asarray(sigma_u, dtype=float) / _SQRT2
    s = np.asarray(sigma_e, dtype=float)
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    shift = s * s / b
    c1 = y + shift
    c2 = y - shift
    w = (y - mu) / b
    log_mass1 = w + log_ndtr((mu - c1) / s)
    log_mass2 = -w + log_ndtr((c2 - mu) / s)
    log_norm = np.logaddexp(log_mass1, log_mass2)  # + log(s sqrt(2 pi)), common
    return c1, c2, w, log_mass1, log_mass2, log_norm


def laplace_posterior_logpdf(t, y, mu, sigma_u, sigma_e):
    c1, c2, w, _, _, log_norm = _laplace_parts(y, mu, sigma_u, sigma_e)
    t = np.asarray(t, dtype=float)
    s = np.asarray(sigma_e, dtype=float)
    z1 = (t - c1) / s
    z2 = (t - c2) / s
    body = np.where(t <= mu, w - 0.5 * z1 * z1, -w - 0.5 * z2 * z2)
    return body - log_norm - np.log(s) - _LOG_SQRT_2PI


def laplace_posterior_density(t, y, mu, sigma_u, sigma_e):
    """Density of the Laplace-effect conditional law at ``t``.

    Continuous at t = mu and normalized in closed form from normal CDFs.
    """
    _check_scales(sigma_u, sigma_e)
    out = np.exp(laplace_posterior_logpdf(t, y, mu, sigma_u, sigma_e))
    return out if out.ndim else float(out)


def locexp_posterior_logpdf(t, y, mu, sigma_u, sigma_e):
    s = np.asarray(sigma_e, dtype=float)
    c = np.asarray(y, dtype=float) - s * s / np.asarray(sigma_u, dtype=float)
    lower = np.asarray(mu, dtype=float) - sigma_u
    z = (t - c) / s
    log_tail = log_ndtr((c - lower) / s)
    body = -0.5 * z * z - np.log(s) - _LOG_SQRT_2PI - log_tail
    return np.where(np.asarray(t, dtype=float) >= lower, body, -np.inf)


def locexp_posterior_density(t, y, mu, sigma_u, sigma_e):
    """Density of the location-exponential-effect conditional law at ``t``:
    a normal kernel centered at y - sigma_e^2/sigma_u truncated to
    [mu - sigma_u, inf)."""
    _check_scales(sigma_u, sigma_e)
    out = np.exp(locexp_posterior_logpdf(t, y, mu, sigma_u, sigma_e))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Exact one-sided truncated-normal inversion.  Both directions map a uniform
# through the tail mass in log space, so truncation points 30+ sds into a tail
# still invert without saturating.
# ---------------------------------------------------------------------------


def trunc_normal_below(center, sd, upper, u):
    """Inverse-CDF draw from N(center, sd^2) conditioned on (-inf, upper]."""
    log_u = np.log(np.maximum(np.asarray(u, dtype=float), _U_FLOOR))
    return center + sd * ndtri_exp(log_u + log_ndtr((upper - center) / sd))


def trunc_normal_above(center, sd, lower, u):
    """Inverse-CDF draw from N(center, sd^2) conditioned on [lower, inf)."""
    log_u = np.log(np.maximum(np.asarray(u, dtype=float), _U_FLOOR))
    return center - sd * ndtri_exp(log_u + log_ndtr((center - lower) / sd))


def uniforms_per_draw(kind: PosteriorKind) -> int:
    """Uniform draws one posterior variate consumes (fixed per law kind)."""
    return 2 if PosteriorKind(kind) is PosteriorKind.LAPLACE_NORMAL else 1


def sample_posterior(law: PosteriorLaw, k: int, rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. exact draws from ``law``, consuming exactly
    ``k * uniforms_per_draw(law.kind)`` uniforms from ``rng``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    s = math.sqrt(law.sigma_e2_eff)
    if law.kind is PosteriorKind.NORMAL_NORMAL:
        var = law.gamma_star * law.sigma_e2_eff
        mean = law.gamma_star * law.y + (1.0 - law.gamma_star) * law.mu_hat
        u = rng.random(k)
        if var == 0.0:
            return np.full(k, mean)
        return mean + math.sqrt(var) * ndtri(np.maximum(u, _U_FLOOR))
    if law.kind is PosteriorKind.LAPLACE_NORMAL:
        c1, c2, w, log_mass1, _, log_norm = _laplace_parts(law.y, law.mu_hat, law.sigma_u, s)
        p1 = math.exp(float(log_mass1 - log_norm))
        u = rng.random((k, 2))
        left = trunc_normal_below(c1, s, law.mu_hat, u[:, 1])
        right = trunc_normal_above(c2, s, law.mu_hat, u[:, 1])
        return np.where(u[:, 0] < p1, left, right)
    # locexp-normal
    c = law.y - law.sigma_e2_eff / law.sigma_u
    lower = law.mu_hat - law.sigma_u
    return trunc_normal_above(c, s, lower, rng.random(k))


def posterior_pdf(law: PosteriorLaw, t):
    """Density of ``law`` at ``t`` (vectorized over t)."""
    s = math.sqrt(law.sigma_e2_eff)
    if law.kind is PosteriorKind.NORMAL_NORMAL:
        var = law.gamma_star * law.sigma_e2_eff
        if var == 0.0:
            raise ValueError("point-mass law (gamma_star = 0) has no density")
        mean = law.gamma_star * law.y + (1.0 - law.gamma_star) * law.mu_hat
        sd = math.sqrt(var)
        z = (np.asarray(t, dtype=float) - mean) / sd
        out = np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
        return out if out.ndim else float(out)
    if law.kind is PosteriorKind.LAPLACE_NORMAL:
        return laplace_posterior_density(t, law.y, law.mu_hat, law.sigma_u, s)
    return locexp_posterior_density(t, law.y, law.mu_hat, law.sigma_u, s)


def posterior_cdf(law: PosteriorLaw, t):
    """CDF of ``law`` at ``t`` (vectorized over t)."""
    t = np.asarray(t, dtype=float)
    s = math.sqrt(law.sigma_e2_eff)
    if law.kind is PosteriorKind.NORMAL_NORMAL:
        var = law.gamma_star * law.sigma_e2_eff
        mean = law.gamma_star * law.y + (1.0 - law.gamma_star) * law.mu_hat
        if var == 0.0:
            out = (t >= mean).astype(float)
            return out if out.ndim else float(out)
        out = ndtr((t - mean) / math.sqrt(var))
        return out if out.ndim else float(out)
    if law.kind is PosteriorKind.LAPLACE_NORMAL:
        c1, c2, w, log_mass1, _, log_norm = _laplace_parts(law.y, law.mu_hat, law.sigma_u, s)
        p1 = math.exp(float(log_mass1 - log_norm))
        # within-piece normal CDFs, glued at mu_hat
        left = p1 * np.minimum(
            ndtr((np.minimum(t, law.mu_hat) - c1) / s) / max(ndtr((law.mu_hat - c1) / s), 5e-324),
            1.0,
        )
        tail2 = max(ndtr((c2 - law.mu_hat) / s), 5e-324)
        right = (1.0 - p1) * np.clip(
            (ndtr((t - c2) / s) - ndtr((law.mu_hat - c2) / s)) / tail2, 0.0, 1.0
        )
        out = np.where(t <= law.mu_hat, left, p1 + right)
        return out if out.ndim else float(out)
    # locexp-normal: truncated-normal CDF
    c = law.y - law.sigma_e2_eff / law.sigma_u
    lower = law.mu_hat - law.sigma_u
    tail = max(ndtr((c - lower) / s), 5e-324)
    out = np.where(t < lower, 0.0, np.clip((ndtr((t - c) / s) - ndtr((lower - c) / s)) / tail, 0.0, 1.0))
    return out if out.ndim else float(out)


def kella_conditional_means(y1, y2, mu_hat, gamma_star, sigma_e2_eff):
    """Conditional means (E min, E max) of two ordered effects given (y1, y2)
    under the normal law with plug-in center mu_hat.

    With mu_i = g y_i + (1-g) mu_hat, s^2 = g * sigma_e2_eff and
    D = (mu_1 - mu_2) / (s sqrt(2)):

        E max = mu_1 Phi(D) + mu_2 Phi(-D) + s sqrt(2) phi(D)
        E min = mu_1 + mu_2 - E max.

    gamma_star = 0 degenerates to (mu_hat, mu_hat).  Vectorized over all
    arguments; returns floats for scalar input.
    """
    g = np.asarray(gamma_star, dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g < 0.0) or np.any(g > 1.0):
        raise ValueError("gamma_star must be in [0, 1]")
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    mu_hat = np.asarray(mu_hat, dtype=float)
    mu1 = g * y1 + (1.0 - g) * mu_hat
    mu2 = g * y2 + (1.0 - g) * mu_hat
    sigma = np.sqrt(g * np.asarray(sigma_e2_eff, dtype=float))
    spread = sigma * _SQRT2
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(spread > 0.0, (mu1 - mu2) / np.where(spread > 0.0, spread, 1.0), 0.0)
    phi = np.exp(-0.5 * delta * delta) / math.sqrt(2.0 * math.pi)
    hi = mu1 * ndtr(delta) + mu2 * ndtr(-delta) + spread * phi
    lo = mu1 + mu2 - hi
    if hi.ndim == 0:
        return float(lo), float(hi)
    return lo, hi
