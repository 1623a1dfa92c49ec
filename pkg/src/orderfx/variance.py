"""Method-of-moments estimation of the variance components.

Two plug-in estimators feed the empirical predictors:

* only the effect variance unknown: subtract the (effective) error variance
  from the between-area sample variance and clamp at zero;
* both unknown (needs within-area replication): the within-area mean square
  estimates the error variance, and the total mean square minus it, clamped
  at zero, estimates the effect variance.

`truncated` records whether the clamp engaged; the resulting shrinkage
coefficient is always in [0, 1], with 0/0 defined as 0 (total shrinkage, the
same degenerate behavior every predictor family has at gamma = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["VarianceEstimate", "estimate_sigma_u2", "estimate_both"]


@dataclass(frozen=True)
class VarianceEstimate:
    """Plug-in variance components and the implied shrinkage coefficient.

    ``sigma_e2_hat`` is per single observation; the shrinkage coefficient uses
    the effective (per area mean) value ``sigma_e2_hat / n``.
    """

    sigma_u2_hat: float
    sigma_e2_hat: float
    n: int
    gamma_star_hat: float
    truncated: bool

    @property
    def sigma_e2_eff_hat(self) -> float:
        return self.sigma_e2_hat / self.n


def _shrinkage(sigma_u2: float, sigma_e2_eff: float) -> float:
    denom = sigma_u2 + sigma_e2_eff
    if denom == 0.0:
        return 0.0
    return sigma_u2 / denom


def estimate_sigma_u2(y, sigma_e2: float, n: int = 1) -> VarianceEstimate:
    """Effect-variance estimate when the error variance is known.

    sigma_u2_hat = max(sample variance of the area means - sigma_e2 / n, 0).
    ``y`` holds the m area means; ``sigma_e2`` is the known per-observation
    error variance.
    """
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError(f"need >= 2 area means, got shape {arr.shape}")
    if not (math.isfinite(sigma_e2) and sigma_e2 > 0.0):
        raise ValueError(f"sigma_e2 must be finite and > 0, got {sigma_e2}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    raw = float(arr.var(ddof=1)) - sigma_e2 / n
    truncated = raw < 0.0
    u_hat = max(raw, 0.0)
    return VarianceEstimate(
        sigma_u2_hat=u_hat,
        sigma_e2_hat=float(sigma_e2),
        n=int(n),
        gamma_star_hat=_shrinkage(u_hat, sigma_e2 / n),
        truncated=truncated,
    )


def estimate_both(y_rep) -> VarianceEstimate:
    """Both variances from the m x n replicate matrix.

    sigma_e2_hat = (1/(m(n-1))) sum_ij (y_ij - ybar_i.)^2,
    sigma_u2_hat = max((1/(mn-1)) sum_ij (y_ij - ybar_..)^2 - sigma_e2_hat, 0),
    gamma_hat = sigma_u2_hat / (sigma_u2_hat + sigma_e2_hat / n).

    Within-area-constant data gives sigma_e2_hat = 0 and gamma_hat = 1
    whenever sigma_u2_hat > 0 (documented degenerate path); all-constant data
    gives gamma_hat = 0.
    """
    mat = np.asarray(y_rep, dtype=float)
    if mat.ndim != 2:
        raise ValueError(f"expected an m x n matrix, got shape {mat.shape}")
    m, n = mat.shape
    if m < 2:
        raise ValueError(f"need >= 2 areas, got {m}")
    if n < 2:
        raise ValueError(f"need >= 2 replicates per area, got {n}")
    within = mat - mat.mean(axis=1, keepdims=True)
    e_hat = float((within * within).sum() / (m * (n - 1)))
    total = mat - mat.mean()
    raw = float((total * total).sum() / (m * n - 1)) - e_hat
    truncated = raw < 0.0
    u_hat = max(raw, 0.0)
    return VarianceEstimate(
        sigma_u2_hat=u_hat,
        sigma_e2_hat=e_hat,
        n=n,
        gamma_star_hat=_shrinkage(u_hat, e_hat / n),
        truncated=truncated,
    )
