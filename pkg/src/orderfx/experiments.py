"""Scenario presets and the CSV reproduction surface.

A scenario is a gamma* sweep: for each variant (m, n, F, G, variance mode)
and each grid value g, the error variance is back-solved from the fixed
effect variance (sigma_e2 = n * sigma_u2 * (1-g)/g), every declared predictor
is evaluated on common random numbers, and one CSV row is emitted per
(variant, g, predictor, metric).

CSV schema (UTF-8, header row, comma-separated, '.' decimal, no quoting):

    scenario,m,n,f_dist,g_dist,variance_mode,gamma_star,predictor,metric,
    value,std_error,replications,seed

predictor tokens: direct | linear@star | linear@sqrt_star | linear@opt |
linear@approx | linear@<gamma literal> | empirical_best | shen_louis;
metric tokens: total_ordered_loss | mse_max.

Output is a pure function of the scenario (master seed included): per-cell
seeds are derived from (master_seed, variant index, grid index), so re-runs
and different worker counts produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .model import FDist, GDist, ModelConfig, VarianceMode
from .predictors import Family, GammaRule, PosteriorAssumption, PredictorSpec
from .risk import MSE_MAX, TOTAL_LOSS, LossTable, mse_metric, per_replicate_losses

__all__ = [
    "CSV_COLUMNS",
    "ScenarioVariant",
    "Scenario",
    "ResultRow",
    "builtin_scenarios",
    "get_scenario",
    "run_scenario",
    "write_csv",
    "read_csv_rows",
]

CSV_COLUMNS = [
    "scenario",
    "m",
    "n",
    "f_dist",
    "g_dist",
    "variance_mode",
    "gamma_star",
    "predictor",
    "metric",
    "value",
    "std_error",
    "replications",
    "seed",
]


@dataclass(frozen=True)
class ScenarioVariant:
    """One curve family within a scenario (fixed m, n, distributions, mode)."""

    m: int
    n: int = 1
    f_dist: FDist = FDist.NORMAL
    g_dist: GDist = GDist.NORMAL
    variance_mode: VarianceMode = VarianceMode.KNOWN


@dataclass(frozen=True)
class Scenario:
    """A reproducible sweep over the gamma* grid."""

    id: str
    variants: tuple[ScenarioVariant, ...]
    gamma_star_grid: tuple[float, ...]
    predictors: tuple[PredictorSpec, ...]
    metrics: tuple[str, ...]
    replications: int
    master_seed: int
    mu: float = 0.0
    sigma_u2: float = 1.0

    def __post_init__(self) -> None:
        grid = tuple(float(g) for g in self.gamma_star_grid)
        if not grid or any(not (0.0 < g < 1.0) for g in grid):
            raise ValueError("gamma* grid values must lie strictly in (0, 1)")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("gamma* grid must be strictly increasing")
        object.__setattr__(self, "gamma_star_grid", grid)
        tokens = [p.token for p in self.predictors]
        if len(set(tokens)) != len(tokens):
            raise ValueError(f"duplicate predictors in scenario: {tokens}")

    def config_for(self, variant: ScenarioVariant, gamma: float) -> ModelConfig:
        sigma_e2 = variant.n * self.sigma_u2 * (1.0 - gamma) / gamma
        return ModelConfig(
            mu=self.mu,
            sigma_u2=self.sigma_u2,
            sigma_e2=sigma_e2,
            m=variant.m,
            n=variant.n,
            f_dist=variant.f_dist,
            g_dist=variant.g_dist,
            variance_mode=variant.variance_mode,
        )

    def cell_seed(self, variant_index: int, grid_index: int) -> int:
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed) & (2**64 - 1),
            spawn_key=(int(variant_index), int(grid_index)),
        )
        return int(ss.generate_state(1, np.uint64)[0])

    def scaled(self, scale: float) -> "Scenario":
        reps = max(2, int(round(self.replications * scale)))
        return replace(self, replications=reps)


@dataclass(frozen=True)
class ResultRow:
    """One emitted CSV row (plus the searched gamma when applicable)."""

    scenario: str
    m: int
    n: int
    f_dist: str
    g_dist: str
    variance_mode: str
    gamma_star: float
    predictor: str
    metric: str
    value: float
    std_error: float
    replications: int
    seed: int
    gamma_used: float | None = field(default=None, compare=False)

    def as_csv(self) -> list[str]:
        return [
            self.scenario,
            str(self.m),
            str(self.n),
            self.f_dist,
            self.g_dist,
            self.variance_mode,
            _fmt(self.gamma_star),
            self.predictor,
            self.metric,
            _fmt(self.value),
            _fmt(self.std_error),
            str(self.replications),
            str(self.seed),
        ]


def _fmt(x: float) -> str:
    return repr(float(x))


def default_grid(lo: float = 0.05, hi: float = 0.95, step: float = 0.05) -> tuple[float, ...]:
    n = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(n + 1))


def _linear(rule: GammaRule) -> PredictorSpec:
    return PredictorSpec(Family.LINEAR, rule)


def builtin_scenarios() -> list[Scenario]:
    """The six figure presets.

    fig1   both variances estimated from n = 15 replicates, normal effects
    fig2   heavy-tailed / skewed effects with matching exact posteriors
    fig3   robustness: non-normal data, prediction assumes normality
    fig1S  searched optimal gamma against its bracket, normal and skewed noise
    fig2S  known variances, normal effects (the baseline comparison)
    fig3S  only the effect variance estimated
    """
    grid = default_grid()
    star, sqrt_star, opt = (
        _linear(GammaRule.STAR),
        _linear(GammaRule.SQRT_STAR),
        _linear(GammaRule.OPT),
    )
    eb = PredictorSpec(Family.EMPIRICAL_BEST)
    both_metrics = (TOTAL_LOSS, MSE_MAX)

    scenarios = [
        Scenario(
            id="fig1",
            variants=(
                ScenarioVariant(m=100, n=15, variance_mode=VarianceMode.UNKNOWN_BOTH),
                ScenarioVariant(m=30, n=15, variance_mode=VarianceMode.UNKNOWN_BOTH),
            ),
            gamma_star_grid=grid,
            predictors=(star, sqrt_star, eb),
            metrics=both_metrics,
            replications=1000,
            master_seed=1001,
        ),
        Scenario(
            id="fig2",
            variants=(
                ScenarioVariant(m=100, f_dist=FDist.LAPLACE),
                ScenarioVariant(m=100, f_dist=FDist.LOCEXP),
            ),
            gamma_star_grid=grid,
            predictors=(star, opt, PredictorSpec(Family.EMPIRICAL_BEST, draws_k=100)),
            metrics=both_metrics,
            replications=100,
            master_seed=1002,
        ),
        Scenario(
            id="fig3",
            variants=(
                ScenarioVariant(m=100, f_dist=FDist.LAPLACE),
                ScenarioVariant(m=100, f_dist=FDist.LOCEXP),
            ),
            gamma_star_grid=grid,
            predictors=(
                PredictorSpec(
                    Family.SHEN_LOUIS, posterior_assumption=PosteriorAssumption.FORCE_NORMAL
                ),
                sqrt_star,
                PredictorSpec(
                    Family.EMPIRICAL_BEST,
                    posterior_assumption=PosteriorAssumption.FORCE_NORMAL,
                ),
            ),
            metrics=both_metrics,
            replications=1000,
            master_seed=1003,
        ),
        Scenario(
            id="fig1S",
            variants=tuple(
                ScenarioVariant(m=m, g_dist=g)
                for g in (GDist.NORMAL, GDist.LOCEXP)
                for m in (5, 10, 20, 100)
            ),
            gamma_star_grid=grid,
            predictors=(opt,),
            metrics=(TOTAL_LOSS,),
            replications=1000,
            master_seed=1004,
        ),
        Scenario(
            id="fig2S",
            variants=(ScenarioVariant(m=100), ScenarioVariant(m=30)),
            gamma_star_grid=grid,
            predictors=(star, opt, sqrt_star, eb),
            metrics=both_metrics,
            replications=1000,
            master_seed=1005,
        ),
        Scenario(
            id="fig3S",
            variants=(
                ScenarioVariant(m=100, variance_mode=VarianceMode.UNKNOWN_U),
                ScenarioVariant(m=30, variance_mode=VarianceMode.UNKNOWN_U),
            ),
            gamma_star_grid=grid,
            predictors=(star, sqrt_star, eb),
            metrics=both_metrics,
            replications=1000,
            master_seed=1006,
        ),
    ]
    return scenarios


def get_scenario(scenario_id: str) -> Scenario:
    for s in builtin_scenarios():
        if s.id == scenario_id:
            return s
    known = ", ".join(s.id for s in builtin_scenarios())
    raise KeyError(f"unknown scenario {scenario_id!r}; known: {known}")


def _metric_key(metric: str, m: int) -> str:
    return mse_metric(m) if metric == MSE_MAX else metric


def run_scenario(scenario: Scenario, workers: int = 1) -> list[ResultRow]:
    """Evaluate a scenario; one row per (variant, gamma*, predictor, metric).

    Deterministic for a fixed master seed: cell seeds depend only on scenario
    structure, and the engine is worker-count independent.
    """
    rows: list[ResultRow] = []
    for v_idx, variant in enumerate(scenario.variants):
        for g_idx, gamma in enumerate(scenario.gamma_star_grid):
            config = scenario.config_for(variant, gamma)
            seed = scenario.cell_seed(v_idx, g_idx)
            metric_keys = tuple(_metric_key(mt, config.m) for mt in scenario.metrics)
            table: LossTable = per_replicate_losses(
                config,
                scenario.predictors,
                scenario.replications,
                seed,
                workers=workers,
                metrics=metric_keys,
            )
            for spec in scenario.predictors:
                for metric, key in zip(scenario.metrics, metric_keys):
                    mean, se = table.estimate(spec.token, key)
                    rows.append(
                        ResultRow(
                            scenario=scenario.id,
                            m=config.m,
                            n=config.n,
                            f_dist=config.f_dist.value,
                            g_dist=config.g_dist.value,
                            variance_mode=config.variance_mode.value,
                            gamma_star=gamma,
                            predictor=spec.token,
                            metric=metric,
                            value=mean,
                            std_error=se,
                            replications=scenario.replications,
                            seed=seed,
                            gamma_used=table.gamma_used.get(spec.token),
                        )
                    )
    return rows


def write_csv(rows: Iterable[ResultRow], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv())


def read_csv_rows(path) -> list[dict]:
    """Parse a results CSV back into typed dicts (used by tests and tools)."""
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
        out = []
        for rec in reader:
            rec = dict(rec)
            for key in ("m", "n", "replications", "seed"):
                rec[key] = int(rec[key])
            for key in ("gamma_star", "value", "std_error"):
                rec[key] = float(rec[key])
            out.append(rec)
    return out
