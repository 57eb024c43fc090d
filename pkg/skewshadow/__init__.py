"""
skewshadow - shadowing of random pseudotrajectories of a linear skew product.

Computes the optimal shadowing radius of finite pseudo-orbits, estimates the
probability that a random pseudo-orbit is shadowable, and locates the
critical noise exponent c0 = 1/b through the ruin problem of the driving
random walk.
"""

__version__ = "0.1.0"

from skewshadow.asymptotics import (
    RateFunction,
    RuinSolution,
    chernoff_tail,
    critical_exponent,
    hgy_violated,
    rate_function,
    ruin_bounds,
    ruin_probability_mc,
    solve_ruin_exponent,
)
from skewshadow.instance import Instance, read_instance, write_instance
from skewshadow.logging import get_logger, setup_logging
from skewshadow.metrics import get_metrics
from skewshadow.model import ModelParams, NormalizedParams, normalize, validate
from skewshadow.montecarlo import (
    Estimate,
    SweepCell,
    estimate_p,
    estimate_s,
    phase_sweep,
    wilson_interval,
)
from skewshadow.shadow import (
    ShadowReport,
    k_fast,
    k_naive,
    oracle_radius,
    pairwise_b,
    shadow_report,
    upper_bound_d,
)
from skewshadow.utils.exceptions import (
    ConfigurationError,
    ConsistencyError,
    InstanceFormatError,
    ParameterError,
    SkewShadowError,
    SolverError,
)
from skewshadow.walk import (
    PhiloxStream,
    PseudoOrbit,
    ScaledSequence,
    ScriptedStream,
    WalkPath,
    compute_z,
    derive_stream,
    sample_noise,
    sample_walk,
    walk_from_symbols,
)

__all__ = [
    # Model
    "ModelParams",
    "NormalizedParams",
    "validate",
    "normalize",
    # Walk
    "WalkPath",
    "PseudoOrbit",
    "ScaledSequence",
    "PhiloxStream",
    "ScriptedStream",
    "derive_stream",
    "sample_walk",
    "sample_noise",
    "walk_from_symbols",
    "compute_z",
    "Instance",
    "read_instance",
    "write_instance",
    # Shadowing
    "ShadowReport",
    "pairwise_b",
    "k_naive",
    "k_fast",
    "upper_bound_d",
    "oracle_radius",
    "shadow_report",
    # Asymptotics
    "RuinSolution",
    "RateFunction",
    "solve_ruin_exponent",
    "critical_exponent",
    "rate_function",
    "ruin_probability_mc",
    "ruin_bounds",
    "chernoff_tail",
    "hgy_violated",
    # Monte Carlo
    "Estimate",
    "SweepCell",
    "estimate_s",
    "estimate_p",
    "phase_sweep",
    "wilson_interval",
    # Observability
    "setup_logging",
    "get_logger",
    "get_metrics",
    # Exceptions
    "SkewShadowError",
    "ParameterError",
    "ConfigurationError",
    "InstanceFormatError",
    "SolverError",
    "ConsistencyError",
]
