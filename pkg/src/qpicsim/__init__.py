"""qpicsim: exact Fock-space simulation of pulsed nonlinear polaritonic
photonic circuits and their photon-counting statistics."""

__version__ = "0.1.0"

from .fock import (
    CoherentInput,
    FockCutoff,
    MultiModeState,
    coherent_state,
    index_occupations,
    ladder_matrices,
    mode_index,
    product_state,
)
from .gates import (
    GateMatrix,
    GateParams,
    build_dielectric_bs,
    build_kerr,
    build_mzi_arm,
    build_nonlinear_coupler,
    build_phase,
    build_symmetric_bs,
    unitarity_defect,
)
from .loss import KrausSet, db_to_eta, kappa_from_rate, kraus_amplitude_damping
from .engine import (
    BranchEnumMode,
    CircuitLayout,
    Layer,
    LossSpec,
    SamplingMode,
    apply_gate,
    evolve_state,
    exact_density_evolution,
    run_ensemble,
    run_trajectory,
    sample_loss,
)
from .observables import ObservableReport, g2_entry, intensity, report, report_from_state
from .polariton import (
    DispersionModel,
    GateBudget,
    PolaritonParams,
    calibrate_dispersion,
    default_params,
    exciton_fraction,
    gate_budget,
    gate_budget_direct,
    group_velocity,
    lp_energy,
    nonlinear_rate,
    nonlinear_rate_direct,
)
from .gaussian import (
    BogoliubovMatrix,
    CumulantState,
    bogoliubov_matrix,
    evolve_cumulants,
    g2_alpha_invariance_check,
    g2_gaussian,
)
from .errors import ConfigError, ContractViolation
