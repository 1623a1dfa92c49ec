"""Reduced-scale invariant suite behind ``orderfx selftest``.

Each check prints one PASS/FAIL line; the whole run targets well under three
minutes.  These are smoke-level versions of the full pytest suite: constants,
normalization, closed-form vs Monte-Carlo agreement, bracket containment, and
worker-count determinism.
"""

from __future__ import annotations

import dataclasses
import math
import time
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import theory
from .experiments import get_scenario, run_scenario
from .model import FDist, ModelConfig
from .posterior import kella_conditional_means, laplace_posterior_density, normal_posterior, sample_posterior
from .predictors import Family, GammaRule, PredictorSpec
from .risk import cross_moment, per_replicate_losses, search_gamma_opt
from .variance import estimate_both

_CHECKS: list[tuple[str, Callable[[], None]]] = []


def _check(name: str):
    def deco(fn):
        _CHECKS.append((name, fn))
        return fn

    return deco


@_check("psi endpoints and closed-form envelope")
def _psi() -> None:
    assert abs(theory.psi(0.0) - 0.25) <= 1e-9
    target = 0.25 + 0.25 / math.pi + 0.125
    assert abs(theory.psi(1.0) - target) <= 1e-9
    for a in (0.0, 0.3, 1.0, 2.0, 5.0):
        lo, hi = theory.psi_envelope(a)
        val = theory.psi(a)
        assert lo - 1e-9 <= val <= hi + 1e-9, (a, lo, val, hi)


@_check("pair dominance threshold near 0.4119")
def _threshold() -> None:
    c = theory.pair_dominance_threshold()
    assert 0.4110 <= c <= 0.4128, c


@_check("dominance thresholds and endpoints")
def _thresholds() -> None:
    assert abs(theory.always_dominates_threshold(100) - 0.2475) <= 5e-5
    assert theory.star_dominates_threshold(2) == 1.0 / 9.0
    assert theory.dominance_gamma_lower(7, 0.0) == -1.0
    assert theory.dominance_gamma_lower(7, 1.0) == 1.0


@_check("posterior densities normalize to 1")
def _posterior_norm() -> None:
    total, _ = quad(lambda t: laplace_posterior_density(t, 1.2, 0.1, 1.0, 0.8), -30, 30, limit=200)
    assert abs(total - 1.0) <= 1e-6, total


@_check("pair conditional means match posterior sampling")
def _kella_mc() -> None:
    rng = np.random.default_rng(7)
    y1, y2, mu_hat, g, s2 = 0.4, -1.1, 0.2, 0.6, 1.5
    lo, hi = kella_conditional_means(y1, y2, mu_hat, g, s2)
    laws = [normal_posterior(v, mu_hat, g, s2) for v in (y1, y2)]
    draws = np.stack([sample_posterior(law, 200_000, rng) for law in laws])
    draws.sort(axis=0)
    est = draws.mean(axis=1)
    se = draws.std(axis=1, ddof=1) / math.sqrt(draws.shape[1])
    assert abs(est[0] - lo) <= 4 * se[0] and abs(est[1] - hi) <= 4 * se[1]


@_check("variance plug-in on a hand case")
def _variance() -> None:
    est = estimate_both([[0.0, 2.0], [1.0, 3.0]])
    assert est.sigma_e2_hat == 2.0 and est.sigma_u2_hat == 0.0 and est.gamma_star_hat == 0.0


@_check("searched gamma inside its bracket (m=10)")
def _bracket() -> None:
    config = ModelConfig(mu=0.0, sigma_u2=1.0, sigma_e2=1.0, m=10)
    res = search_gamma_opt(config, 0.001, replications=4000, seed=11)
    bracket = theory.optimal_gamma_bracket(10, 0.5)
    slack = res.grid_step + 3.0 * res.gamma_opt_std_error
    assert bracket.low - slack <= res.gamma_opt <= bracket.high + slack


@_check("cross moment inside analytic bounds")
def _cross() -> None:
    config = ModelConfig(mu=0.3, sigma_u2=1.0, sigma_e2=2.0, m=20)
    mean, se = cross_moment(config, 4000, seed=5, with_std_error=True)
    lo, hi = theory.cross_moment_bounds(20, 0.3, 1.0, 2.0)
    assert lo - 3 * se <= mean <= hi + 3 * se


@_check("risk engine worker-count determinism")
def _workers() -> None:
    config = ModelConfig(mu=0.0, sigma_u2=1.0, sigma_e2=1.0, m=25, f_dist=FDist.LAPLACE)
    specs = [
        PredictorSpec(Family.DIRECT),
        PredictorSpec(Family.LINEAR, GammaRule.SQRT_STAR),
        PredictorSpec(Family.EMPIRICAL_BEST, draws_k=50),
    ]
    tables = [
        per_replicate_losses(config, specs, 600, seed=3, workers=w) for w in (1, 4)
    ]
    for spec in specs:
        a = tables[0].losses[spec.token]["total_ordered_loss"]
        b = tables[1].losses[spec.token]["total_ordered_loss"]
        assert np.array_equal(a, b)


@_check("preset CSV rows complete and deterministic")
def _preset() -> None:
    scenario = dataclasses.replace(
        get_scenario("fig2S").scaled(0.02), gamma_star_grid=(0.3, 0.6)
    )
    rows_a = run_scenario(scenario, workers=1)
    rows_b = run_scenario(scenario, workers=2)
    assert len(rows_a) == len(scenario.variants) * 2 * len(scenario.predictors) * len(
        scenario.metrics
    )
    assert [r.as_csv() for r in rows_a] == [r.as_csv() for r in rows_b]


def run(verbose: bool = True) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    started = time.perf_counter()
    for name, fn in _CHECKS:
        t0 = time.perf_counter()
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures += 1
            status = f"FAIL ({exc})"
        else:
            status = "PASS"
        if verbose:
            print(f"[{time.perf_counter() - t0:6.2f}s] {status:4s}  {name}")
    if verbose:
        total = time.perf_counter() - started
        print(f"selftest: {len(_CHECKS) - failures}/{len(_CHECKS)} passed in {total:.1f}s")
    return failures
