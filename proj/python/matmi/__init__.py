"""2D magnetoacoustic tomography with magnetic induction.

Thin wrapper over the C++ core: meshes, forward model, wave simulation,
source and current recovery, conductivity inversion and noise sweeps.
"""

from ._matmi import (
    BoundaryRecord,
    ConfigError,
    DataError,
    Excitation,
    Medium,
    Mesh,
    ModelError,
    ParameterError,
    ScalarField,
    SolverError,
    VectorField,
    add_noise,
    current_density,
    ellipse_mesh,
    invert,
    lorentz_source,
    standard_excitation,
    phantom,
    read_mesh,
    read_record,
    read_scalar_field,
    read_vector_field,
    recover_current,
    recover_source,
    recover_stream,
    relative_error,
    rotational_excitation,
    simulate_wave,
    solve_potential,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
