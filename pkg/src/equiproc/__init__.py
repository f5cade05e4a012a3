"""Monte Carlo diagnostics for empirical-process equicontinuity in nonlinear time series."""

__version__ = "0.1.0"

from .empproc import (
    ModulusReport,
    MomentScalingReport,
    ProbeReport,
    equicontinuity_probe,
    modulus_experiment,
    moment_scaling,
    nu_n,
)
from .errors import ConfigError, ContractionError, CoverCapError, ComplexityGateError
from .estimators import (
    DominanceResult,
    MEstimate,
    ModelQuantilogramOracle,
    QuantilogramResult,
    dominance_stat,
    m_estimate,
    sample_quantilogram,
)
from .families import (
    FAMILY_VARIANTS,
    BallCover,
    CensoredQR,
    DominancePair,
    DominanceResidual,
    Huber,
    Indicator,
    IntervalCover,
    MarginalInfo,
    Quantilogram,
    RhoMetricEstimate,
    Sign,
    box_grid,
    bracket_count_fn,
    bracketing_integral,
    bracketing_number,
    build_cover,
    rho,
    rho_matrix,
    verify_cover,
)
from .gmc import (
    DecayReport,
    IndicatorCouplingSpec,
    bracket_coupling_norm,
    coupling_norm,
    family_coupling_norm,
    grid_refinement_gap,
    indicator_coupling,
)
from .innovations import InnovationSpec, StreamKey
from .models import (
    AR1,
    ARCH1,
    GARCH11,
    MODEL_VARIANTS,
    QAR1,
    RCAR1,
    BivariateCopy,
    CensoredTriple,
    GaussianLaw,
    LagPair,
    RegressionAugment,
    StationaryLaw,
    Uniform01Law,
    bvn_cdf,
    simulate_batch,
    simulate_coupled,
    simulate_embedded_batch,
    stationary_marginal,
    stationary_mean_oracle,
)
from .runner import ExperimentConfig, RunManifest, parse_config, run, serialize_config, summarize

__all__ = [
    "AR1",
    "ARCH1",
    "BallCover",
    "BivariateCopy",
    "CensoredQR",
    "CensoredTriple",
    "ComplexityGateError",
    "ConfigError",
    "ContractionError",
    "CoverCapError",
    "DecayReport",
    "DominancePair",
    "DominanceResidual",
    "DominanceResult",
    "ExperimentConfig",
    "FAMILY_VARIANTS",
    "GARCH11",
    "GaussianLaw",
    "Huber",
    "Indicator",
    "IndicatorCouplingSpec",
    "InnovationSpec",
    "IntervalCover",
    "LagPair",
    "MEstimate",
    "MODEL_VARIANTS",
    "MarginalInfo",
    "ModelQuantilogramOracle",
    "ModulusReport",
    "MomentScalingReport",
    "ProbeReport",
    "QAR1",
    "Quantilogram",
    "QuantilogramResult",
    "RCAR1",
    "RegressionAugment",
    "RhoMetricEstimate",
    "RunManifest",
    "Sign",
    "StationaryLaw",
    "StreamKey",
    "Uniform01Law",
    "box_grid",
    "bracket_count_fn",
    "bracket_coupling_norm",
    "bracketing_integral",
    "bracketing_number",
    "build_cover",
    "bvn_cdf",
    "coupling_norm",
    "dominance_stat",
    "equicontinuity_probe",
    "family_coupling_norm",
    "grid_refinement_gap",
    "indicator_coupling",
    "m_estimate",
    "modulus_experiment",
    "moment_scaling",
    "nu_n",
    "parse_config",
    "rho",
    "rho_matrix",
    "run",
    "sample_quantilogram",
    "serialize_config",
    "simulate_batch",
    "simulate_coupled",
    "simulate_embedded_batch",
    "stationary_marginal",
    "stationary_mean_oracle",
    "summarize",
    "verify_cover",
]
