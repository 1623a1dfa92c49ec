"""Two-stage area-effect model: configuration, sampling, order statistics.

The generative model draws ``m`` area effects ``u_i`` from a centered
distribution F with variance ``sigma_u2``, sets ``theta_i = mu + u_i``, and
observes each area through additive noise from a centered distribution G with
variance ``sigma_e2`` (``n`` replicate observations per area; area means are
the sufficient reduction, with effective noise variance ``sigma_e2 / n``).

All samplers are inverse-CDF style transforms of uniform draws, so one model
replicate consumes exactly ``sample_uniform_budget(m, n)`` uniforms.  The
fixed budget is what lets the risk engine regenerate any replicate in
isolation and stay independent of worker count (see :mod:`orderfx.streams`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

__all__ = [
    "FDist",
    "GDist",
    "VarianceMode",
    "EffectDistribution",
    "ModelConfig",
    "Sample",
    "gamma_star",
    "draw_sample",
    "order_statistics",
    "sample_uniform_budget",
]

# Smallest uniform fed to log/ndtri transforms.  Generator.random() yields
# u in [0, 1); only the exact value 0 (probability 2^-53) needs the guard.
_U_FLOOR = 2.0**-54


class FDist(str, enum.Enum):
    """Effect distribution F (zero mean, configured variance)."""

    NORMAL = "normal"
    LAPLACE = "laplace"
    LOCEXP = "locexp"


class GDist(str, enum.Enum):
    """Sampling-error distribution G (zero mean, configured variance)."""

    NORMAL = "normal"
    LOCEXP = "locexp"


class VarianceMode(str, enum.Enum):
    """Which variance components the predictors must estimate from data."""

    KNOWN = "known"
    UNKNOWN_U = "unknown-u"
    UNKNOWN_BOTH = "unknown-both"


def _as_kind(kind: "str | FDist | GDist") -> str:
    value = kind.value if isinstance(kind, enum.Enum) else str(kind)
    if value not in ("normal", "laplace", "locexp"):
        raise ValueError(f"unknown distribution kind: {value!r}")
    return value


@dataclass(frozen=True)
class EffectDistribution:
    """A zero-mean distribution standardized to a target variance.

    Standardization conventions:

    * ``laplace``: scale b = sqrt(variance / 2);
    * ``locexp``: exponential with scale b = sqrt(variance), shifted by -b so
      the mean is 0 (support [-b, inf));
    * ``normal``: N(0, variance).

    ``transform_uniform`` maps u ~ U[0, 1) draws one-to-one to variates, so a
    caller controls the uniform budget exactly.
    """

    kind: str
    variance: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _as_kind(self.kind))
        if not (math.isfinite(self.variance) and self.variance >= 0.0):
            raise ValueError(f"variance must be finite and >= 0, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def transform_uniform(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        sd = self.std
        if sd == 0.0:
            return np.zeros_like(u)
        if self.kind == "normal":
            return sd * ndtri(np.maximum(u, _U_FLOOR))
        if self.kind == "laplace":
            b = sd / math.sqrt(2.0)
            uc = np.maximum(u, _U_FLOOR)
            return np.where(uc < 0.5, b * np.log(2.0 * uc), -b * np.log(2.0 * (1.0 - uc)))
        # locexp: -b*log(U) + a with U = 1 - u in (0, 1], a = -b
        return -sd * np.log1p(-u) - sd

    def sample(self, size, rng: np.random.Generator) -> np.ndarray:
        return self.transform_uniform(rng.random(size))


def gamma_star(sigma_u2: float, sigma_e2: float, n: int = 1) -> float:
    """Shrinkage coefficient of the best linear predictor.

    Returns sigma_u2 / (sigma_u2 + sigma_e2 / n), the coefficient that pulls
    each area mean toward the grand mean; 0 means total shrinkage, 1 none.
    """
    if not (math.isfinite(sigma_u2) and sigma_u2 >= 0.0):
        raise ValueError(f"sigma_u2 must be finite and >= 0, got {sigma_u2}")
    if not (math.isfinite(sigma_e2) and sigma_e2 > 0.0):
        raise ValueError(f"sigma_e2 must be finite and > 0, got {sigma_e2}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if sigma_u2 == 0.0:
        return 0.0
    return sigma_u2 / (sigma_u2 + sigma_e2 / n)


@dataclass(frozen=True)
class ModelConfig:
    """Full specification of one simulation scenario."""

    mu: float
    sigma_u2: float
    sigma_e2: float
    m: int
    n: int = 1
    f_dist: FDist = FDist.NORMAL
    g_dist: GDist = GDist.NORMAL
    variance_mode: VarianceMode = VarianceMode.KNOWN

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_dist", FDist(self.f_dist))
        object.__setattr__(self, "g_dist", GDist(self.g_dist))
        object.__setattr__(self, "variance_mode", VarianceMode(self.variance_mode))
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        if not (math.isfinite(self.sigma_u2) and self.sigma_u2 >= 0.0):
            raise ValueError(f"sigma_u2 must be finite and >= 0, got {self.sigma_u2}")
        if not (math.isfinite(self.sigma_e2) and self.sigma_e2 > 0.0):
            raise ValueError(f"sigma_e2 must be finite and > 0, got {self.sigma_e2}")
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.variance_mode is VarianceMode.UNKNOWN_BOTH and self.n < 2:
            raise ValueError("variance_mode 'unknown-both' needs n >= 2 replicates per area")

    @property
    def sigma_e2_eff(self) -> float:
        """Error variance of the per-area mean (sigma_e2 / n)."""
        return self.sigma_e2 / self.n

    @property
    def gamma_star_true(self) -> float:
        return gamma_star(self.sigma_u2, self.sigma_e2, self.n)


@dataclass(frozen=True)
class Sample:
    """One realized draw from the model.

    ``y`` always holds the m area means (equal to the single observations when
    n = 1); ``y_rep`` holds the m x n replicate matrix when n > 1.
    """

    theta: np.ndarray
    y: np.ndarray
    y_bar: float
    y_rep: np.ndarray | None = field(default=None)


def sample_uniform_budget(m: int, n: int = 1) -> int:
    """Uniform draws one model replicate consumes: m effects + m*n errors."""
    return m + m * n


def draw_sample(config: ModelConfig, rng: np.random.Generator) -> Sample:
    """Draw one replicate, consuming exactly ``sample_uniform_budget(m, n)``
    uniforms from ``rng`` (effects first, then errors area-by-area)."""
    f = EffectDistribution(config.f_dist, config.sigma_u2)
    g = EffectDistribution(config.g_dist, config.sigma_e2)
    theta = config.mu + f.transform_uniform(rng.random(config.m))
    if config.n == 1:
        y = theta + g.transform_uniform(rng.random(config.m))
        y_rep = None
    else:
        e = g.transform_uniform(rng.random((config.m, config.n)))
        y_rep = theta[:, None] + e
        y = y_rep.mean(axis=1)
    return Sample(theta=theta, y=y, y_bar=float(y.mean()), y_rep=y_rep)


def order_statistics(v) -> np.ndarray:
    """Nondecreasing rearrangement of ``v`` (stable, so ties keep input order)."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    if np.isnan(arr).any():
        raise ValueError("input contains NaN")
    return np.sort(arr, kind="stable")
