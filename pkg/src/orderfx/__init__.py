"""orderfx: shrinkage prediction of ordered random effects in small-area models.

Subpackages
-----------
model        scenario configuration and exact samplers
posterior    conditional laws of an effect given its observation
predictors   the four predictor families
variance     method-of-moments variance plug-ins
theory       closed-form coefficients, brackets, and thresholds
risk         deterministic Monte-Carlo risk engine
experiments  figure presets and the CSV surface
cli          command-line front end (``orderfx``)
"""

from .model import (
    EffectDistribution,
    FDist,
    GDist,
    ModelConfig,
    Sample,
    VarianceMode,
    draw_sample,
    gamma_star,
    order_statistics,
)
from .posterior import (
    PosteriorKind,
    PosteriorLaw,
    kella_conditional_means,
    laplace_posterior,
    laplace_posterior_density,
    locexp_posterior,
    locexp_posterior_density,
    normal_posterior,
    posterior_cdf,
    posterior_pdf,
    sample_posterior,
)
from .predictors import (
    Family,
    GammaRule,
    PosteriorAssumption,
    PredictionResult,
    PredictorSpec,
    g_bar,
    predict_direct,
    predict_empirical_best,
    predict_linear,
    predict_shen_louis,
)
from .risk import (
    GammaSearchResult,
    LossTable,
    RiskEstimate,
    cross_moment,
    estimate_risk,
    mse_component,
    ordered_loss,
    per_replicate_losses,
    search_gamma_opt,
    unordered_risk_known_mu,
)
from .theory import (
    GammaBracket,
    always_dominates_threshold,
    cross_moment_bounds,
    dominance_gamma_lower,
    optimal_gamma_approx,
    optimal_gamma_bracket,
    optimal_gamma_pair,
    pair_cross_moment_normal,
    pair_dominance_threshold,
    psi,
    psi_envelope,
    shrinkage_risk_gap,
    star_dominates_threshold,
)
from .variance import VarianceEstimate, estimate_both, estimate_sigma_u2
from .experiments import (
    Scenario,
    ScenarioVariant,
    builtin_scenarios,
    get_scenario,
    run_scenario,
    write_csv,
)

__version__ = "0.1.0"
