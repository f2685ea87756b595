"""Ground-state sampling via fixed-node continuous-time Markov chains."""

from .hamiltonian import (
    AmplitudeOracle,
    BitConfiguration,
    ComplexTableOracle,
    NonRealHamiltonianError,
    PauliTerm,
    SignedLogAmplitude,
    SparseHamiltonian,
    TableOracle,
    ZeroAmplitudeError,
    load_term_list,
    real_embedding,
    save_term_list,
)
from .fixed_node import (
    FixedNodeChain,
    GeneratorRates,
    OracleInconsistencyError,
    SignClass,
    classify,
    fixed_node_row,
    generator_rates,
    ground_energy,
)
from .gillespie import (
    AbsorbingStateError,
    ErrorDeclared,
    Trajectory,
    make_rng,
    run,
    run_observables,
    run_truncated,
    step,
    time_average,
    verify_start_state,
)
from .haldane_shastry import (
    HSFastChain,
    HSModel,
    HSOracle,
    brute_zz,
    corrupt,
    exact_zz,
    half_filling_states,
    hs_hamiltonian,
    m_d,
    observable_m_d,
)
from .metropolis import (
    ProposalGraph,
    ProposalMode,
    hs_proposal_graph,
    mh_run,
    mh_step,
    pi_ratio_from_oracle,
)
from .diagnostics import (
    ChainDiagnostics,
    DiscreteSeries,
    diagnose,
    discretize,
    error_bar,
    split_rhat,
    tau_integrated,
    tau_normalized,
)
from . import exact_oracle

__version__ = "0.1.0"
