"""Special-relativistic hydrodynamics: exact Riemann solutions with
tangential velocities and a 3D shock-capturing finite-volume evolution,
with corrugated initial data and perturbation-norm diagnostics."""

from .state import (
    EosSpec,
    PrimitiveState,
    ConservedState,
    FluxVector,
    SuperluminalError,
    RecoveryError,
    lorentz_factor,
    pressure,
    enthalpy,
    sound_speed,
    primitive_to_conserved,
    physical_flux,
    recover_primitive,
)
from .exact_riemann import (
    RiemannSolverError,
    VacuumError,
    WavePattern,
    ExactSolution,
    solve_star_state,
    classify_pattern,
    wave_curve_velocity,
    sample,
    sample_profile,
)
from .flux import (
    DecompositionError,
    CharacteristicDecomposition,
    eigenvalues,
    decompose,
    marquina_flux,
    hlle_flux,
)
from .reconstruction import minmod, ceno_faces, ceno_profile
from .initial_data import (
    RiemannProblemSpec,
    PerturbationSpec,
    table1_problem,
    sample_perturbations,
    corrugation_offset,
    initialize_grid,
)
from .evolution import (
    BoundarySpec,
    GridGeometry,
    GridField,
    Observer,
    EvolveStats,
    mol_rhs,
    rk_step,
    compute_timestep,
    evolve,
)
from .diagnostics import (
    NormTriple,
    FrontProfile,
    ReferenceSeries,
    conserved_energy_field,
    perturbation_norms,
    profile_energy,
    unperturbed_reference,
    front_profile,
    conservation_totals,
    write_norm_series,
)
from .config import ConfigError, RunConfig, parse_config
from .snapshots import (
    SnapshotError,
    write_snapshot,
    read_snapshot,
    write_slice_csv,
)

__version__ = "0.1.0"
