"""Hybrid oscillator-qubit simulation: composite pulses, bosonic state
preparation, and finite-energy GKP error correction."""

from .hilbert import (
    Convention,
    HybridState,
    OscillatorSpace,
    TruncationError,
    coherent_state,
    fidelity,
    fock_state,
    gaussian_width_estimate,
    operator_fidelity,
    oscillator_state,
    partial_trace,
    spin_profile,
    squeezed_coherent_state,
    squeezed_vacuum,
    vacuum,
    wigner,
)
from .gates import (
    BS,
    CD,
    Circuit,
    MeasureZ,
    PhaseRot,
    QubitReset,
    Rot,
    Squeeze,
    TMS,
    UncondDisp,
    ZRot,
    circuit_unitary,
    qubit_rotation_matrix,
    run_circuit,
)
from .qsp import (
    QspMetrics,
    QspScheme,
    UnsupportedSchemeError,
    analytic_metrics,
    binned_response,
    build_scheme,
    evaluate_scheme,
    phase_estimation,
    simulate_metrics,
)
from .prep import (
    AjcResult,
    DurationModel,
    PrepResult,
    SqueezeSchedule,
    ajc_trotter,
    cat_prep,
    fock_one_prep,
    four_cat_prep,
    gkp_prep,
    squeeze_protocol,
)
from .gkp import (
    GkpCode,
    GkpLattice,
    UnsupportedCodewordError,
    binomial_codeword,
    chain_depth,
    codeword,
    envelope_codeword,
    error_word,
    sbs_circuit,
    stabilize,
    stabilizer_expectation,
)

__version__ = "0.1.0"
