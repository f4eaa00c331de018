//! Noisy random circuits: purity decay, reduced-state concentration and the
//! noisy-circuit hypothesis test.

pub mod circuit;
pub mod hypothesis;
pub mod purity;

pub use circuit::{
    apply_noisy_circuit, apply_noisy_circuit_traced, BlockKind, InputState, NoisyCircuit, NoisyCircuitSpec,
    MAX_NOISY_QUBITS,
};
pub use hypothesis::{hypothesis_test_sim, HypothesisReport};
pub use purity::{
    noise_parameter, purity_bound, purity_decay_check, purity_recursion, purity_step, r_bound, reduced_deviation_bound,
    reduced_deviation_exact, reduced_state_audit, PurityReport, ReducedStateAudit,
};
