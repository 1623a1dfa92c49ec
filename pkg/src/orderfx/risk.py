"""Deterministic Monte-Carlo risk engine.

Estimates the risk E sum_i (pred_(i) - theta_(i))^2 of any predictor family
by averaging per-replicate losses.  Three properties are load-bearing:

* **Replicate isolation.**  Replicate k's model draws occupy a fixed window of
  a counter-based uniform stream (see :mod:`orderfx.streams`), so results are
  bit-identical for any worker count, and any replicate can be regenerated
  alone.
* **Common random numbers.**  The sample stream depends only on (seed,
  config), never on the predictor, so every predictor evaluated at the same
  seed sees identical samples; paired per-replicate differences then have far
  smaller variance than independent runs.  The optimal-gamma search shares the
  streams the same way.
* **Exact grid search.**  The per-replicate ordered loss of the fixed-gamma
  linear family is a quadratic in gamma, so the search accumulates the three
  per-replicate coefficients once and evaluates the whole gamma grid (and its
  standard errors, from the coefficient covariance) exactly.

When the scenario declares unknown variances, every replicate re-estimates
them from its own data before predicting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import log_ndtr, ndtri

from . import streams
from .model import EffectDistribution, FDist, ModelConfig, VarianceMode, sample_uniform_budget
from .posterior import (
    PosteriorKind,
    kella_conditional_means,
    laplace_posterior,
    locexp_posterior,
    trunc_normal_above,
    trunc_normal_below,
    uniforms_per_draw,
)
from .predictors import (
    Family,
    GammaRule,
    PosteriorAssumption,
    PredictorSpec,
    predict_shen_louis,
    shen_louis_quantiles,
)

__all__ = [
    "RiskEstimate",
    "GammaSearchResult",
    "LossTable",
    "ordered_loss",
    "per_replicate_losses",
    "estimate_risk",
    "mse_component",
    "search_gamma_opt",
    "cross_moment",
    "unordered_risk_known_mu",
    "TOTAL_LOSS",
    "MSE_MAX",
    "mse_metric",
]

TOTAL_LOSS = "total_ordered_loss"
MSE_MAX = "mse_max"

_BLOCK_ROWS = 1024
_DRAW_CHUNK_ELEMS = 2**23  # cap on posterior-draw array elements per slab
_U_FLOOR = 2.0**-54
_ALPHA_COEFFS = (0.8236, -0.0573, 0.0012)  # same fit as theory.optimal_gamma_approx


def mse_metric(i: int) -> str:
    """Metric key for the per-component MSE of the i-th ordered effect (1-based)."""
    return f"mse:{i}"


@dataclass(frozen=True)
class RiskEstimate:
    """Monte-Carlo mean loss with its standard error."""

    mean_loss: float
    std_error: float
    replications: int
    seed: int
    predictor: PredictorSpec | None
    metric: str


@dataclass(frozen=True)
class GammaSearchResult:
    """Outcome of the exhaustive gamma search for the linear family."""

    gamma_opt: float
    grid_step: float
    risk_at_opt: RiskEstimate
    risk_curve: np.ndarray  # (G, 2) columns: gamma, mean loss
    gamma_opt_std_error: float


def ordered_loss(pred, theta) -> float:
    """sum_i (pred_i - theta_(i))^2; ``pred`` must already be nondecreasing."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(theta, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError(f"shape mismatch: pred {p.shape} vs theta {t.shape}")
    d = p - np.sort(t)
    return float(d @ d)


# ---------------------------------------------------------------------------
# Block sampling and per-replicate variance plug-ins
# ---------------------------------------------------------------------------


@dataclass
class _Block:
    k_lo: int
    y_sorted: np.ndarray  # (R, m)
    theta_sorted: np.ndarray  # (R, m)
    y_bar: np.ndarray  # (R,)
    gamma: "float | np.ndarray"  # shrinkage coefficient (per replicate if estimated)
    sigma_e2_eff: "float | np.ndarray"
    sigma_u2_hat: "float | np.ndarray"
    theta: np.ndarray | None = None  # (R, m), kept only when a caller needs unsorted values
    y: np.ndarray | None = None


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0.0)
    return out


def _padded_uniforms(rng: np.random.Generator, rows: int, budget: int) -> np.ndarray:
    """(rows, budget) uniforms where row k occupies the same block-aligned
    window as ``streams.replicate_stream(..., k, budget)`` would read."""
    padded = streams.blocks_for(budget) * 4
    return rng.random((rows, padded))[:, :budget]


def _sample_block(
    config: ModelConfig, seed: int, k_lo: int, k_hi: int, *, keep_raw: bool = False
) -> _Block:
    m, n = config.m, config.n
    budget = sample_uniform_budget(m, n)
    rng = streams.stream(seed, streams.SAMPLE_SALT, k_lo * streams.blocks_for(budget))
    rows = k_hi - k_lo
    u_mat = _padded_uniforms(rng, rows, budget)
    f = EffectDistribution(config.f_dist, config.sigma_u2)
    g = EffectDistribution(config.g_dist, config.sigma_e2)
    theta = config.mu + f.transform_uniform(u_mat[:, :m])
    if n == 1:
        y = theta + g.transform_uniform(u_mat[:, m:])
        y_rep = None
    else:
        e = g.transform_uniform(u_mat[:, m:]).reshape(rows, m, n)
        y_rep = theta[:, :, None] + e
        y = y_rep.mean(axis=2)
    y_bar = y.mean(axis=1)

    mode = config.variance_mode
    if mode is VarianceMode.KNOWN:
        gamma = config.gamma_star_true
        sigma_e2_eff = config.sigma_e2_eff
        sigma_u2_hat = config.sigma_u2
    elif mode is VarianceMode.UNKNOWN_U:
        raw = y.var(axis=1, ddof=1) - config.sigma_e2_eff
        sigma_u2_hat = np.maximum(raw, 0.0)
        sigma_e2_eff = config.sigma_e2_eff
        gamma = _safe_ratio(sigma_u2_hat, sigma_u2_hat + sigma_e2_eff)
    else:  # UNKNOWN_BOTH
        within = y_rep - y[:, :, None]
        e_hat = (within * within).sum(axis=(1, 2)) / (m * (n - 1))
        grand = y_rep.reshape(rows, m * n).mean(axis=1)
        total = y_rep - grand[:, None, None]
        raw = (total * total).sum(axis=(1, 2)) / (m * n - 1) - e_hat
        sigma_u2_hat = np.maximum(raw, 0.0)
        sigma_e2_eff = e_hat / n
        gamma = _safe_ratio(sigma_u2_hat, sigma_u2_hat + sigma_e2_eff)

    return _Block(
        k_lo=k_lo,
        y_sorted=np.sort(y, axis=1),
        theta_sorted=np.sort(theta, axis=1),
        y_bar=y_bar,
        gamma=gamma,
        sigma_e2_eff=sigma_e2_eff,
        sigma_u2_hat=sigma_u2_hat,
        theta=theta if keep_raw else None,
        y=y if keep_raw else None,
    )


# ---------------------------------------------------------------------------
# Predictor evaluation on a block
# ---------------------------------------------------------------------------


def _approx_gamma_from(m: int, g) -> "float | np.ndarray":
    if m > 30:
        return np.sqrt(g)
    c0, c1, c2 = _ALPHA_COEFFS
    alpha = c0 + c1 * m + c2 * m * m
    return alpha * np.asarray(g) + (1.0 - alpha) * (m * np.sqrt(g) - np.asarray(g)) / (m - 1.0)


def _linear_gamma(spec: PredictorSpec, config: ModelConfig, block: _Block, resolved_opt):
    rule = spec.gamma_rule
    if rule is GammaRule.FIXED:
        return spec.gamma_value
    if rule is GammaRule.OPT:
        return resolved_opt
    g = block.gamma
    if rule is GammaRule.STAR:
        return g
    if rule is GammaRule.SQRT_STAR:
        return np.sqrt(g)
    if rule is GammaRule.APPROX:
        return _approx_gamma_from(config.m, g)
    raise AssertionError(f"unhandled gamma rule {rule}")


def _effective_kind(spec: PredictorSpec, config: ModelConfig) -> PosteriorKind:
    if (
        spec.posterior_assumption is PosteriorAssumption.FORCE_NORMAL
        or config.f_dist is FDist.NORMAL
    ):
        return PosteriorKind.NORMAL_NORMAL
    if config.f_dist is FDist.LAPLACE:
        return PosteriorKind.LAPLACE_NORMAL
    return PosteriorKind.LOCEXP_NORMAL


def _broadcast_rows(value, rows: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(rows, float(arr))
    return arr


def _eb_predictions(config: ModelConfig, spec: PredictorSpec, block: _Block, seed: int) -> np.ndarray:
    rows, m = block.y_sorted.shape
    kind = _effective_kind(spec, config)
    gamma = _broadcast_rows(block.gamma, rows)
    s2eff = _broadcast_rows(block.sigma_e2_eff, rows)
    if m == 2 and kind is PosteriorKind.NORMAL_NORMAL:
        lo, hi = kella_conditional_means(
            block.y_sorted[:, 0], block.y_sorted[:, 1], block.y_bar, gamma, s2eff
        )
        return np.stack([lo, hi], axis=1)

    k = spec.draws_k
    cpd = uniforms_per_draw(kind)
    budget = m * k * cpd
    blocks_per_rep = streams.blocks_for(budget)
    degenerate = gamma == 0.0
    sigma_u = np.sqrt(np.where(_broadcast_rows(block.sigma_u2_hat, rows) > 0.0,
                               _broadcast_rows(block.sigma_u2_hat, rows), 1.0))
    s = np.sqrt(s2eff)

    preds = np.empty((rows, m))
    sub = max(1, _DRAW_CHUNK_ELEMS // max(budget, 1))
    for r_lo in range(0, rows, sub):
        r_hi = min(r_lo + sub, rows)
        rng = streams.stream(
            seed, streams.POSTERIOR_SALT, (block.k_lo + r_lo) * blocks_per_rep
        )
        u = _padded_uniforms(rng, r_hi - r_lo, budget).reshape(r_hi - r_lo, m, k, cpd)
        ys = block.y_sorted[r_lo:r_hi]
        ybar = block.y_bar[r_lo:r_hi]
        gam = gamma[r_lo:r_hi]
        sd_obs = s[r_lo:r_hi]
        if kind is PosteriorKind.NORMAL_NORMAL:
            mean = gam[:, None] * ys + (1.0 - gam)[:, None] * ybar[:, None]
            sd_post = np.sqrt(gam * s2eff[r_lo:r_hi])
            draws = mean[:, :, None] + sd_post[:, None, None] * ndtri(
                np.maximum(u[..., 0], _U_FLOOR)
            )
        elif kind is PosteriorKind.LAPLACE_NORMAL:
            b = sigma_u[r_lo:r_hi] / math.sqrt(2.0)
            shift = (sd_obs * sd_obs / b)[:, None]
            c1 = ys + shift
            c2 = ys - shift
            w = (ys - ybar[:, None]) / b[:, None]
            lm1 = w + log_ndtr((ybar[:, None] - c1) / sd_obs[:, None])
            lm2 = -w + log_ndtr((c2 - ybar[:, None]) / sd_obs[:, None])
            p1 = np.exp(lm1 - np.logaddexp(lm1, lm2))
            left = trunc_normal_below(
                c1[:, :, None], sd_obs[:, None, None], ybar[:, None, None], u[..., 1]
            )
            right = trunc_normal_above(
                c2[:, :, None], sd_obs[:, None, None], ybar[:, None, None], u[..., 1]
            )
            draws = np.where(u[..., 0] < p1[:, :, None], left, right)
        else:  # LOCEXP_NORMAL
            su = sigma_u[r_lo:r_hi]
            c = ys - (sd_obs * sd_obs / su)[:, None]
            lower = (ybar - su)[:, None, None]
            draws = trunc_normal_above(c[:, :, None], sd_obs[:, None, None], lower, u[..., 0])
        draws = np.sort(np.swapaxes(draws, 1, 2), axis=2)  # (r, k, m) sorted per draw
        preds[r_lo:r_hi] = draws.mean(axis=1)

    if np.any(degenerate):
        preds[degenerate] = block.y_bar[degenerate, None]
    return preds


def _sl_predictions(config: ModelConfig, spec: PredictorSpec, block: _Block) -> np.ndarray:
    rows, m = block.y_sorted.shape
    kind = _effective_kind(spec, config)
    gamma = _broadcast_rows(block.gamma, rows)
    s2eff = _broadcast_rows(block.sigma_e2_eff, rows)
    degenerate = gamma == 0.0

    if kind is PosteriorKind.NORMAL_NORMAL:
        safe_gamma = np.where(degenerate, 1.0, gamma)
        centers = safe_gamma[:, None] * block.y_sorted + (1.0 - safe_gamma)[:, None] * block.y_bar[
            :, None
        ]
        sd = np.sqrt(safe_gamma * s2eff)
        preds = shen_louis_quantiles(centers, sd)
    else:
        # match-true mode under non-normal effects: exact posterior CDFs,
        # replicate by replicate (slow path, not used by the presets)
        sigma_u = np.sqrt(_broadcast_rows(block.sigma_u2_hat, rows))
        law_ctor = (
            laplace_posterior if kind is PosteriorKind.LAPLACE_NORMAL else locexp_posterior
        )
        preds = np.empty((rows, m))
        for r in range(rows):
            if degenerate[r]:
                continue
            laws = [
                law_ctor(float(v), float(block.y_bar[r]), float(sigma_u[r]), float(s2eff[r]))
                for v in block.y_sorted[r]
            ]
            preds[r] = predict_shen_louis(
                block.y_sorted[r],
                float(block.y_bar[r]),
                float(gamma[r]),
                float(s2eff[r]),
                laws=laws,
            ).values
    if np.any(degenerate):
        preds[degenerate] = block.y_bar[degenerate, None]
    return preds


def _block_predictions(
    config: ModelConfig,
    spec: PredictorSpec,
    block: _Block,
    seed: int,
    resolved_opt: float | None,
) -> np.ndarray:
    if spec.family is Family.DIRECT:
        return block.y_sorted
    if spec.family is Family.LINEAR:
        gamma = _linear_gamma(spec, config, block, resolved_opt)
        g = np.asarray(gamma, dtype=float)
        if g.ndim == 0:
            return g * block.y_sorted + (1.0 - g) * block.y_bar[:, None]
        return g[:, None] * block.y_sorted + (1.0 - g)[:, None] * block.y_bar[:, None]
    if spec.family is Family.EMPIRICAL_BEST:
        return _eb_predictions(config, spec, block, seed)
    if spec.family is Family.SHEN_LOUIS:
        return _sl_predictions(config, spec, block)
    raise AssertionError(f"unhandled family {spec.family}")


def _metric_values(preds: np.ndarray, theta_sorted: np.ndarray, metrics: Sequence[str]):
    diff = preds - theta_sorted
    out = {}
    for key in metrics:
        if key == TOTAL_LOSS:
            out[key] = (diff * diff).sum(axis=1)
        elif key == MSE_MAX:
            out[key] = diff[:, -1] ** 2
        elif key.startswith("mse:"):
            i = int(key.split(":", 1)[1])
            out[key] = diff[:, i - 1] ** 2
        else:
            raise ValueError(f"unknown metric {key!r}")
    return out


# ---------------------------------------------------------------------------
# Worker orchestration
# ---------------------------------------------------------------------------


def _block_bounds(replications: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + _BLOCK_ROWS, replications)) for lo in range(0, replications, _BLOCK_ROWS)]


def _run_blocks(replications: int, workers: int, fn: Callable[[int, int], dict]):
    bounds = _block_bounds(replications)
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: fn(*b), bounds))
    else:
        results = [fn(*b) for b in bounds]
    merged: dict = {}
    for key in results[0]:
        merged[key] = np.concatenate([r[key] for r in results])
    return merged


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


@dataclass(frozen=True)
class LossTable:
    """Per-replicate losses for several predictors on shared samples."""

    losses: Mapping[str, Mapping[str, np.ndarray]]  # token -> metric -> (R,)
    gamma_used: Mapping[str, float | None]
    replications: int
    seed: int

    def estimate(self, token: str, metric: str = TOTAL_LOSS) -> tuple[float, float]:
        mean, se = _mean_se(np.asarray(self.losses[token][metric]))
        return mean, se


def per_replicate_losses(
    config: ModelConfig,
    specs: Iterable[PredictorSpec],
    replications: int,
    seed: int,
    workers: int = 1,
    metrics: Sequence[str] = (TOTAL_LOSS,),
) -> LossTable:
    """Evaluate several predictors on the same replicate streams.

    The sample stream is a function of (seed, config) only, so predictors
    share identical samples (common random numbers) and their per-replicate
    loss differences are directly comparable.
    """
    spec_list = list(specs)
    if replications < 2:
        raise ValueError(f"replications must be >= 2, got {replications}")
    tokens = [spec.token for spec in spec_list]
    if len(set(tokens)) != len(tokens):
        raise ValueError(f"duplicate predictor tokens: {tokens}")
    gamma_used: dict[str, float | None] = {}
    resolved: dict[str, float | None] = {}
    for spec in spec_list:
        token = spec.token
        if spec.family is Family.LINEAR and spec.gamma_rule is GammaRule.OPT:
            search = search_gamma_opt(config, 0.001, replications, seed, workers=workers)
            resolved[token] = search.gamma_opt
            gamma_used[token] = search.gamma_opt
        elif spec.family is Family.LINEAR and spec.gamma_rule is GammaRule.FIXED:
            gamma_used[token] = spec.gamma_value
            resolved[token] = None
        elif (
            spec.family is Family.LINEAR
            and config.variance_mode is VarianceMode.KNOWN
        ):
            g = config.gamma_star_true
            fixed = {
                GammaRule.STAR: g,
                GammaRule.SQRT_STAR: math.sqrt(g),
                GammaRule.APPROX: float(_approx_gamma_from(config.m, g)),
            }[spec.gamma_rule]
            gamma_used[token] = fixed
            resolved[token] = None
        else:
            gamma_used[token] = None
            resolved[token] = None

    def eval_block(k_lo: int, k_hi: int) -> dict:
        block = _sample_block(config, seed, k_lo, k_hi)
        out = {}
        for spec in spec_list:
            preds = _block_predictions(config, spec, block, seed, resolved.get(spec.token))
            for key, vals in _metric_values(preds, block.theta_sorted, metrics).items():
                out[(spec.token, key)] = vals
        return out

    merged = _run_blocks(replications, workers, eval_block)
    losses: dict[str, dict[str, np.ndarray]] = {}
    for (token, key), vals in merged.items():
        losses.setdefault(token, {})[key] = vals
    return LossTable(losses=losses, gamma_used=gamma_used, replications=replications, seed=seed)


def estimate_risk(
    config: ModelConfig,
    spec: PredictorSpec,
    replications: int,
    seed: int,
    workers: int = 1,
) -> RiskEstimate:
    """Monte-Carlo mean and standard error of the total ordered loss."""
    table = per_replicate_losses(config, [spec], replications, seed, workers, (TOTAL_LOSS,))
    mean, se = table.estimate(spec.token, TOTAL_LOSS)
    return RiskEstimate(mean, se, replications, seed, spec, TOTAL_LOSS)


def mse_component(
    config: ModelConfig,
    spec: PredictorSpec,
    i: int,
    replications: int,
    seed: int,
    workers: int = 1,
) -> RiskEstimate:
    """Monte-Carlo MSE of predicting the i-th ordered effect (1-based)."""
    if not (1 <= i <= config.m):
        raise ValueError(f"component index must be in [1, {config.m}], got {i}")
    key = mse_metric(i)
    table = per_replicate_losses(config, [spec], replications, seed, workers, (key,))
    mean, se = table.estimate(spec.token, key)
    return RiskEstimate(mean, se, replications, seed, spec, key)


def search_gamma_opt(
    config: ModelConfig,
    grid_step: float = 0.001,
    replications: int = 1000,
    seed: int = 0,
    workers: int = 1,
    bracket: tuple[float, float] | None = None,
) -> GammaSearchResult:
    """Exhaustive search of the fixed-gamma linear family on a gamma grid.

    Uses common random numbers: every grid point is evaluated on the same
    replicate set, via the per-replicate quadratic coefficients of the loss
    (loss_r(gamma) = A_r gamma^2 + B_r gamma + C_r).  ``bracket`` optionally
    restricts the grid (intersected with [0, 1]).
    """
    if grid_step <= 0.0:
        raise ValueError(f"grid_step must be > 0, got {grid_step}")
    if replications < 2:
        raise ValueError(f"replications must be >= 2, got {replications}")

    def eval_block(k_lo: int, k_hi: int) -> dict:
        block = _sample_block(config, seed, k_lo, k_hi)
        dev = block.y_sorted - block.y_bar[:, None]  # gamma-facing direction
        base = block.y_bar[:, None] - block.theta_sorted
        return {
            "A": (dev * dev).sum(axis=1),
            "B": 2.0 * (dev * base).sum(axis=1),
            "C": (base * base).sum(axis=1),
        }

    coeffs = _run_blocks(replications, workers, eval_block)
    a, b, c = coeffs["A"], coeffs["B"], coeffs["C"]
    a_bar, b_bar, c_bar = a.mean(), b.mean(), c.mean()
    cov = np.cov(np.stack([a, b, c]))  # 3x3, ddof=1

    n_steps = int(round(1.0 / grid_step))
    grid = np.arange(n_steps + 1) * grid_step
    grid = np.minimum(grid, 1.0)
    if bracket is not None:
        lo = max(0.0, bracket[0])
        hi = min(1.0, bracket[1])
        keep = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
        if not keep.any():
            raise ValueError(f"bracket {bracket} leaves no grid points")
        grid = grid[keep]

    curve = a_bar * grid * grid + b_bar * grid + c_bar
    idx = int(np.argmin(curve))
    gamma_opt = float(grid[idx])

    w = np.array([gamma_opt * gamma_opt, gamma_opt, 1.0])
    var_at_opt = float(w @ cov @ w)
    se_at_opt = math.sqrt(max(var_at_opt, 0.0) / replications)

    if a_bar > 0.0:
        gmin = -b_bar / (2.0 * a_bar)
        grad = np.array([-gmin / a_bar, -1.0 / (2.0 * a_bar), 0.0])
        gamma_se = math.sqrt(max(float(grad @ cov @ grad), 0.0) / replications)
    else:
        gamma_se = math.inf

    risk_at_opt = RiskEstimate(
        mean_loss=float(curve[idx]),
        std_error=se_at_opt,
        replications=replications,
        seed=seed,
        predictor=PredictorSpec(Family.LINEAR, GammaRule.FIXED, gamma_value=gamma_opt),
        metric=TOTAL_LOSS,
    )
    return GammaSearchResult(
        gamma_opt=gamma_opt,
        grid_step=grid_step,
        risk_at_opt=risk_at_opt,
        risk_curve=np.column_stack([grid, curve]),
        gamma_opt_std_error=gamma_se,
    )


def cross_moment(
    config: ModelConfig,
    replications: int,
    seed: int,
    workers: int = 1,
    with_std_error: bool = False,
):
    """Monte-Carlo mean of sum_i theta_(i) y_(i) (optionally with its SE)."""
    if replications < 2:
        raise ValueError(f"replications must be >= 2, got {replications}")

    def eval_block(k_lo: int, k_hi: int) -> dict:
        block = _sample_block(config, seed, k_lo, k_hi)
        return {"cm": (block.theta_sorted * block.y_sorted).sum(axis=1)}

    values = _run_blocks(replications, workers, eval_block)["cm"]
    mean, se = _mean_se(values)
    return (mean, se) if with_std_error else mean


def unordered_risk_known_mu(
    config: ModelConfig, replications: int, seed: int, workers: int = 1
) -> RiskEstimate:
    """Risk of the known-location best linear predictor on the *unordered*
    problem: E sum_i (g y_i + (1-g) mu - theta_i)^2 with the true g and mu.

    This is the distribution-free baseline whose risk depends on the two
    variances only (analytic value m * g * sigma_e2_eff).
    """
    if replications < 2:
        raise ValueError(f"replications must be >= 2, got {replications}")
    g = config.gamma_star_true

    def eval_block(k_lo: int, k_hi: int) -> dict:
        block = _sample_block(config, seed, k_lo, k_hi, keep_raw=True)
        diff = g * block.y + (1.0 - g) * config.mu - block.theta
        return {"loss": (diff * diff).sum(axis=1)}

    values = _run_blocks(replications, workers, eval_block)["loss"]
    mean, se = _mean_se(values)
    return RiskEstimate(mean, se, replications, seed, None, "unordered_loss")
