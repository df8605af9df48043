"""Coherence monotones built from pure-state conversion, for finite-dimensional states."""

from .channels import (
    InstrumentOutcome,
    QuantumChannel,
    apply,
    build_dephasing_channel,
    build_N_channel,
    build_preparation_channel,
    build_T_channel,
    canonical_pure_state,
    classify,
    instrument,
    random_io,
    random_sio,
)
from .majorization import (
    CoherenceVector,
    Ensemble,
    aggregate_vector,
    coherence_vector,
    convertible_pure_to_ensemble,
    majorizes,
    pure_from_vector,
    sort_desc,
)
from .measures import (
    GEOMETRIC,
    L1,
    RELATIVE_ENTROPY,
    PureCoherenceFunctional,
    custom_functional,
    eval_geometric,
    eval_l1,
    eval_relative_entropy,
    get_functional,
    probe_functional,
)
from .solver import (
    DecompositionParam,
    GridSpec,
    SolveOptions,
    SolveReport,
    brute_force_cm,
    cf_estimate,
    cm_estimate,
    cm_geometric,
    decomposition_from_isometry,
    qubit_cm,
    qubit_optimal_decomposition,
)
from .states import (
    DensityMatrix,
    PureState,
    dephase,
    fidelity_pure_mixed,
    is_incoherent_state,
    mcs_state,
    validate_density,
    validate_pure,
)

__version__ = "0.1.0"
