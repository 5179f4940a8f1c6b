"""Pseudo-spectral solver for advected nonlocal semilinear heat equations on the torus."""

from ._nlsp import (
    CheckpointError,
    ConfigError,
    EquationForm,
    Flow,
    Grid,
    Scheme,
    SolverConfig,
    SpectralField,
    blowup_energy,
    blowup_threshold_amplitude,
    dissipation_time,
    enhanced_dissipation_fit,
    h1_seminorm,
    heat_semigroup,
    integrate,
    l2_norm,
    load_checkpoint,
    project_mean_zero,
    pure_transport_mixing,
    random_band_field,
    run_config,
    save_checkpoint,
    shear_decompose,
    smallness_threshold,
    sobolev_norm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
