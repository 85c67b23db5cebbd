"""Numerics for trigonometric series with enormous frequency gaps.

The package covers, end to end: exact phase arithmetic for integer
frequencies of any bit length, truncated-series evaluation with
certified error bounds, empirical modulus-of-continuity estimation,
bilateral analytic bounds with fitted decay envelopes, a stationary
Gaussian random-series simulator with covariance verification, and a
heuristic convergence classifier for the continuity-criterion integral
int_0^inf sqrt(omega(exp(-x^2/2))) dx.
"""

__version__ = "0.1.0"

from .errors import NumericalContractError, UndefinedIndexError, ValidationError
from .frequencies import (
    DoubleExponentialFrequencies,
    ExplicitFrequencies,
    FrequencySequence,
    GeometricFrequencies,
    Lacunarity,
    LacunarityReport,
    ReducedPhase,
    ResidueCollisionWarning,
    TurnFraction,
    classify,
    family_double_exponential,
    family_explicit,
    family_geometric,
    frequencies_from_json,
    grid_phase,
    grid_residues,
    lattice_fraction,
    lattice_fraction_error,
    reduce_phase,
    residue_collisions,
)
from .series import (
    CoefficientEstimate,
    CoefficientSequence,
    EvaluatedValue,
    ExplicitCoefficients,
    GridFunction,
    PowerLawCoefficients,
    SeriesSpec,
    coefficients_from_json,
    eval_truncated,
    fourier_coefficient,
    lacunar_series,
    sample_grid,
    superlacunar_series,
)
from .modulus import (
    ModulusCurve,
    Provenance,
    empirical_modulus_grid,
    empirical_modulus_pairs,
    log_delta_ladder,
    loglog_delta_ladder,
    modulus_curve_from_json,
    monotone_envelope,
    window_size,
)
from .bounds import (
    BoundEvaluation,
    CoefficientBound,
    Envelope,
    FittedConstant,
    bounds_to_csv,
    bounds_to_curve,
    coefficient_lower_bound,
    envelope,
    envelope_curve,
    fit_envelope,
    sigma1,
    sigma2,
    upper_bound,
    upper_bound_curve,
)
from .gaussian import (
    CovarianceEstimate,
    CovarianceFunction,
    CovarianceValue,
    GaussianSpec,
    RoughnessTable,
    SamplePath,
    covariance_exact,
    covariance_mc,
    covariance_series,
    load_roughness_calibration,
    roughness_diagnostic,
    sample_path,
)
from .fernique import (
    CurveModulus,
    FerniqueReport,
    Verdict,
    classify_convergence,
    fernique_integrand,
    fernique_partial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
