"""Maximum-overlap Slater determinants of CI wave functions."""

from ._core import (
    CIWaveFunction,
    IterationRecord,
    ParseError,
    Report,
    ToleranceOptions,
    distances,
    generate_h2_model,
    h2_point,
    hubbard_dimer,
    hubbard_mean_field,
    optimize,
    orthonormalize,
    overlap,
    parse_wavefunction,
    plucker_residual,
    random_ci,
    random_stiefel,
    read_wavefunction,
    subspace_distance,
)

__all__ = [
    "CIWaveFunction",
    "IterationRecord",
    "ParseError",
    "Report",
    "ToleranceOptions",
    "distances",
    "generate_h2_model",
    "h2_point",
    "hubbard_dimer",
    "hubbard_mean_field",
    "optimize",
    "orthonormalize",
    "overlap",
    "parse_wavefunction",
    "plucker_residual",
    "random_ci",
    "random_stiefel",
    "read_wavefunction",
    "subspace_distance",
]
