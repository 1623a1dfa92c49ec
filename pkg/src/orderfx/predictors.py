"""Predictor families for the ordered area effects.

Four families are supported, all emitting a nondecreasing m-vector that
predicts the sorted effects:

* ``direct``: the sorted observations themselves;
* ``linear``: gamma * y_(i) + (1 - gamma) * y_bar for a shrinkage coefficient
  gamma in [0, 1] (rules: a fixed value, the best-linear coefficient g, its
  square root, the fitted approximation of the risk-optimal value, or a
  Monte-Carlo search for the risk-optimal value);
* ``empirical_best``: the posterior expectation of each ordered effect,
  approximated by sampling one posterior draw per area, sorting the m-vector,
  and averaging over k such replicates (closed form replaces sampling for two
  normal areas);
* ``shen_louis``: quantiles of the averaged posterior CDF,
  U_j = Gbar^{-1}((2j-1)/(2m)), found by bracketed bisection.

CSV/CLI tokens: ``direct``, ``linear@star``, ``linear@sqrt_star``,
``linear@opt``, ``linear@approx``, ``linear@<gamma>``, ``empirical_best``,
``shen_louis``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

import numpy as np
from scipy.special import ndtr

from .posterior import (
    PosteriorKind,
    PosteriorLaw,
    kella_conditional_means,
    posterior_cdf,
    sample_posterior,
)

__all__ = [
    "Family",
    "GammaRule",
    "PosteriorAssumption",
    "PredictorSpec",
    "PredictionResult",
    "predict_direct",
    "predict_linear",
    "predict_empirical_best",
    "g_bar",
    "predict_shen_louis",
    "shen_louis_quantiles",
]

_RESIDUAL_TOL = 1e-8
_WIDTH_TARGET = 1e-10


class Family(str, enum.Enum):
    DIRECT = "direct"
    LINEAR = "linear"
    EMPIRICAL_BEST = "empirical_best"
    SHEN_LOUIS = "shen_louis"


class GammaRule(str, enum.Enum):
    FIXED = "fixed"
    STAR = "star"
    SQRT_STAR = "sqrt_star"
    APPROX = "approx"
    OPT = "opt"


class PosteriorAssumption(str, enum.Enum):
    MATCH_TRUE = "match"
    FORCE_NORMAL = "force-normal"


@dataclass(frozen=True)
class PredictorSpec:
    """Which predictor family to run and its parameters."""

    family: Family
    gamma_rule: GammaRule | None = None
    gamma_value: float | None = None
    posterior_assumption: PosteriorAssumption = PosteriorAssumption.MATCH_TRUE
    draws_k: int = 1000

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.gamma_rule is not None:
            object.__setattr__(self, "gamma_rule", GammaRule(self.gamma_rule))
        object.__setattr__(
            self, "posterior_assumption", PosteriorAssumption(self.posterior_assumption)
        )
        if self.family is Family.LINEAR:
            if self.gamma_rule is None:
                raise ValueError("linear predictor needs a gamma rule")
            if self.gamma_rule is GammaRule.FIXED:
                g = self.gamma_value
                if g is None or not (math.isfinite(g) and 0.0 <= g <= 1.0):
                    raise ValueError(f"fixed gamma must be in [0, 1], got {g}")
        elif self.gamma_rule is not None or self.gamma_value is not None:
            raise ValueError(f"gamma rule only applies to the linear family, not {self.family}")
        if self.draws_k < 1:
            raise ValueError(f"draws_k must be >= 1, got {self.draws_k}")

    @property
    def token(self) -> str:
        """The CSV/CLI name of this predictor."""
        if self.family is Family.LINEAR:
            if self.gamma_rule is GammaRule.FIXED:
                return f"linear@{self.gamma_value:g}"
            return f"linear@{self.gamma_rule.value}"
        return self.family.value

    @classmethod
    def from_token(
        cls,
        token: str,
        *,
        posterior_assumption: PosteriorAssumption | str = PosteriorAssumption.MATCH_TRUE,
        draws_k: int = 1000,
    ) -> "PredictorSpec":
        token = token.strip()
        assumption = PosteriorAssumption(posterior_assumption)
        if token == "direct":
            return cls(Family.DIRECT)
        if token == "empirical_best":
            return cls(
                Family.EMPIRICAL_BEST, posterior_assumption=assumption, draws_k=draws_k
            )
        if token == "shen_louis":
            return cls(Family.SHEN_LOUIS, posterior_assumption=assumption, draws_k=draws_k)
        if token.startswith("linear@"):
            arg = token.split("@", 1)[1]
            try:
                rule = GammaRule(arg)
            except ValueError:
                try:
                    value = float(arg)
                except ValueError:
                    raise ValueError(f"unknown predictor token: {token!r}") from None
                return cls(Family.LINEAR, GammaRule.FIXED, gamma_value=value)
            if rule is GammaRule.FIXED:
                raise ValueError(f"bad predictor token: {token!r}")
            return cls(Family.LINEAR, rule)
        raise ValueError(f"unknown predictor token: {token!r}")

    def with_assumption(self, assumption: PosteriorAssumption) -> "PredictorSpec":
        return replace(self, posterior_assumption=PosteriorAssumption(assumption))


@dataclass(frozen=True)
class PredictionResult:
    """A nondecreasing prediction of the sorted effects."""

    values: np.ndarray
    gamma_used: float | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)


def _as_obs(y) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a nonempty 1-D observation vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("observations must be finite")
    return arr


def predict_direct(y) -> PredictionResult:
    """Sorted observations as the predictor of the sorted effects."""
    return PredictionResult(values=np.sort(_as_obs(y)))


def predict_linear(y, gamma: float) -> PredictionResult:
    """gamma * y_(i) + (1 - gamma) * y_bar; nondecreasing since gamma >= 0."""
    if not (math.isfinite(gamma) and 0.0 <= gamma <= 1.0):
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    arr = _as_obs(y)
    y_bar = arr.mean()
    return PredictionResult(
        values=gamma * np.sort(arr) + (1.0 - gamma) * y_bar, gamma_used=float(gamma)
    )


def predict_empirical_best(
    y,
    law_builder: Callable[[float], PosteriorLaw],
    k: int,
    rng: np.random.Generator | None = None,
    *,
    use_closed_form: bool | None = None,
) -> PredictionResult:
    """Posterior expectation of each ordered effect.

    Protocol: per replicate draw one posterior value per area (independent
    across areas), sort the m-vector; the prediction is the coordinatewise
    average of the k sorted vectors.  Areas are processed in sorted-y order,
    which makes the result invariant under relabeling of areas.

    For two areas under the normal law the closed form replaces sampling
    exactly; pass ``use_closed_form=False`` to force the sampling route (the
    tests compare the two).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ys = np.sort(_as_obs(y))
    laws = [law_builder(float(v)) for v in ys]
    all_normal = all(law.kind is PosteriorKind.NORMAL_NORMAL for law in laws)
    if use_closed_form is None:
        use_closed_form = len(laws) == 2 and all_normal
    if use_closed_form:
        if not (len(laws) == 2 and all_normal):
            raise ValueError("closed form only available for two normal-law areas")
        lo, hi = kella_conditional_means(
            ys[0], ys[1], laws[0].mu_hat, laws[0].gamma_star, laws[0].sigma_e2_eff
        )
        return PredictionResult(
            values=np.array([lo, hi]), meta={"draws_k": 0, "closed_form": True}
        )
    if rng is None:
        raise ValueError("sampling route needs an rng")
    draws = np.empty((len(laws), k))
    for i, law in enumerate(laws):
        draws[i] = sample_posterior(law, k, rng)
    draws.sort(axis=0)
    return PredictionResult(values=draws.mean(axis=1), meta={"draws_k": k})


def g_bar(t, y, mu_hat: float, gamma_star: float, sigma_e2_eff: float):
    """Averaged posterior CDF under the normal assumption:
    (1/m) sum_i Phi((t - (g y_i + (1-g) mu_hat)) / sqrt(g s^2)).

    Strictly increasing in t; gamma_star = 0 would be a step function and is
    rejected.
    """
    if not (0.0 < gamma_star <= 1.0):
        raise ValueError(f"gamma_star must be in (0, 1], got {gamma_star}")
    arr = _as_obs(y)
    centers = gamma_star * arr + (1.0 - gamma_star) * mu_hat
    sd = math.sqrt(gamma_star * sigma_e2_eff)
    t = np.asarray(t, dtype=float)
    out = ndtr((t[..., None] - centers) / sd).mean(axis=-1)
    return out if out.ndim else float(out)


def _bisect_increasing(eval_fn, targets: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Roots of eval_fn(t) = targets for an increasing eval_fn, elementwise.

    Runs exactly ceil(log2(width / target-width)) halvings per element, so the
    result for one element never depends on which others share the batch.
    """
    width = hi - lo
    with np.errstate(divide="ignore"):
        steps = np.ceil(np.log2(np.maximum(width / _WIDTH_TARGET, 1.0))).astype(int)
    for step in range(int(steps.max(initial=0))):
        mid = 0.5 * (lo + hi)
        go_right = eval_fn(mid) < targets
        active = step < steps
        lo = np.where(active & go_right, mid, lo)
        hi = np.where(active & ~go_right, mid, hi)
    return 0.5 * (lo + hi)


def shen_louis_quantiles(centers: np.ndarray, sd) -> np.ndarray:
    """Batch solve Gbar(U_j) = (2j-1)/(2m) under the normal assumption.

    ``centers``: (R, m) posterior means; ``sd``: scalar or (R,) posterior sd.
    Returns (R, m) nondecreasing roots with residual <= 1e-8.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    n_rows, m = centers.shape
    sd_arr = np.broadcast_to(np.asarray(sd, dtype=float).reshape(-1, 1, 1), (n_rows, 1, 1))
    targets = np.broadcast_to((2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m), (n_rows, m))

    def gbar(t: np.ndarray) -> np.ndarray:
        return ndtr((t[:, :, None] - centers[:, None, :]) / sd_arr).mean(axis=2)

    sd_row = sd_arr[:, 0, 0]
    lo = np.broadcast_to((centers.min(axis=1) - 10.0 * sd_row)[:, None], (n_rows, m)).copy()
    hi = np.broadcast_to((centers.max(axis=1) + 10.0 * sd_row)[:, None], (n_rows, m)).copy()
    roots = _bisect_increasing(gbar, targets, lo, hi)
    residual = np.abs(gbar(roots) - targets)
    if residual.max(initial=0.0) > _RESIDUAL_TOL:
        raise RuntimeError(
            f"quantile inversion residual {residual.max():.3e} exceeds {_RESIDUAL_TOL:g}"
        )
    return roots


def predict_shen_louis(
    y,
    mu_hat: float,
    gamma_star: float,
    sigma_e2_eff: float,
    *,
    laws: "list[PosteriorLaw] | None" = None,
) -> PredictionResult:
    """Quantile predictor U_j = Gbar^{-1}((2j-1)/(2m)) of the sorted effects.

    By default Gbar is the normal-assumption average CDF (g_bar); passing
    ``laws`` averages those posterior CDFs instead (used for the match-true
    mode under non-normal effects).  gamma_star = 0 degenerates every family
    to the constant mu_hat vector and is returned as such.
    """
    arr = _as_obs(y)
    m = arr.size
    if gamma_star == 0.0:
        return PredictionResult(values=np.full(m, float(mu_hat)))
    if laws is None:
        centers = gamma_star * np.sort(arr) + (1.0 - gamma_star) * mu_hat
        sd = math.sqrt(gamma_star * sigma_e2_eff)
        values = shen_louis_quantiles(centers[None, :], sd)[0]
        return PredictionResult(values=values, meta={"assumption": "force-normal"})

    targets = (2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m)

    def gbar(t: np.ndarray) -> np.ndarray:
        flat = t[0]
        acc = np.zeros_like(flat)
        for law in laws:
            acc += posterior_cdf(law, flat)
        return (acc / len(laws))[None, :]

    sds = [math.sqrt(max(law.sigma_e2_eff, sigma_e2_eff)) for law in laws]
    lows = [law.y - 10.0 * s - (law.sigma_u or 0.0) for law, s in zip(laws, sds)]
    highs = [law.y + 10.0 * s + (law.sigma_u or 0.0) for law, s in zip(laws, sds)]
    lo = np.full((1, m), min(lows) + 0.0)
    hi = np.full((1, m), max(highs) + 0.0)
    # the heuristic bracket can miss for exotic law parameters; widen until it
    # straddles every target
    for _ in range(120):
        bad_lo = gbar(lo) >= targets[None, :]
        bad_hi = gbar(hi) <= targets[None, :]
        if not (bad_lo.any() or bad_hi.any()):
            break
        width = hi - lo
        lo = np.where(bad_lo, lo - width, lo)
        hi = np.where(bad_hi, hi + width, hi)
    roots = _bisect_increasing(gbar, targets[None, :], lo, hi)
    residual = np.abs(gbar(roots) - targets[None, :])
    if residual.max(initial=0.0) > _RESIDUAL_TOL:
        raise RuntimeError(
            f"quantile inversion residual {residual.max():.3e} exceeds {_RESIDUAL_TOL:g}"
        )
    return PredictionResult(values=roots[0], meta={"assumption": "match"})
