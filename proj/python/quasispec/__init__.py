"""Spectra and Lyapunov exponents of quasiperiodic Schrodinger operators."""

from ._core import (
    Approximant,
    ConfigError,
    ContinuedFraction,
    NumericalError,
    PreconditionError,
    SamplingFunction,
    det_truncated,
    discriminant,
    experiment_kinds,
    furman_gap,
    green_restricted,
    hausdorff,
    identity_residual,
    log_norm,
    lyapunov_estimate,
    lyapunov_profile,
    measure,
    normalize,
    run_experiment,
    setwise_gap,
    spectrum_rational,
    sup_distance,
)

__all__ = [name for name in dir() if not name.startswith("_")]
