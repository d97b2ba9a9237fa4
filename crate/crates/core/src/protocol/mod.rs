//! Exact state-vector simulation of the messenger-mediated entanglement
//! protocol over three qubits and two molecular channels.

mod diagnostics;
mod pulses;
mod register;
mod run;

pub use diagnostics::{concurrence, concurrence_of, purity, reduced_density_1, reduced_density_2};
pub use pulses::{
    apply_bright_pulse, apply_pi_pulse, apply_pulse, apply_qubit_gate, apply_transport, entangle_step,
    entangle_step_with, rotation_matrix, single_qubit_rotation, Channel, EntangleStep, PulseErrors, PulseSpec,
    PRECONDITION_FIDELITY,
};
pub use register::{Level, LiSite, MolecularLevel, PairState, ProtocolRegister, Qubit, LEVELS};
pub use run::{
    error_injected_run, final_target, intermediate_target, run_protocol, trace_text, FidelityReport, KetTerm,
    ProtocolOutcome, SequenceErrors, TraceStep, PULSES, TRACE_THRESHOLD,
};
