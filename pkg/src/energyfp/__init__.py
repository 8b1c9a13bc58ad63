"""Cramér and Energy distances, Fokker--Planck solvers and decay experiments."""

from __future__ import annotations

__version__ = "0.1.0"

from .density import (
    BetaOpinion,
    Barenblatt,
    CdfCurve,
    DiracMixture,
    Exponential,
    GaussianMixture,
    GaussianND,
    Grid1D,
    GridDensity1D,
    GridDensityND,
    InverseGamma,
    SampleCloud,
    Uniform,
    cdf_from_density,
    mean_from_cdf,
    moment,
    quantile_cloud,
    rasterize,
    rasterize_nd,
)
from .errors import *  # noqa: F401,F403
from .exact import FullFP, GaussianState, Heat, Drift, LinearFlow, evolve_exact
from .exact import drift_decay_check, fp_decay_check, heat_decay_check
from .fp1d import ConstantDiffusion, Opinion, PorousMedium, SolverConfig, Snapshot, Wealth, evolve, step, steady_state
from .lab import RateFit, check_prediction, fit_rate, run_experiment
from .metrics import (
    DistanceValue,
    MetricConstants,
    cramer,
    cramer_cdf,
    cramer_expectation,
    cramer_fourier,
    d1_metric,
    energy_alpha,
    energy_alpha_fourier,
    energy_alpha_grid,
    energy_alpha_pairwise,
    energy_negative_order,
    gini,
    interpolation_bound,
    metric_constants,
    min_cdf,
)
from .traces import DecayTrace
