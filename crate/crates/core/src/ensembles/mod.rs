//! Alternative-hypothesis ensembles, design certification and local
//! indistinguishability estimates.

pub mod circuits;
pub mod design;
pub mod ensemble;
pub mod hamiltonian;
pub mod local;
pub mod stabilizer;

pub use circuits::{make_circuit_ensemble, sample_brickwork, Architecture, CircuitSpec};
pub use design::{design_certify, monte_carlo_moment, DesignReport, MomentMode};
pub use ensemble::{Sample, StateEnsemble};
pub use hamiltonian::{gibbs_state, make_gibbs_ensemble, sample_gue, sample_rsps, HamiltonianKind, HamiltonianSpec};
pub use local::{local_indistinguishability, reduced_average, IndistinguishabilityEstimate, LocalQuery};
pub use stabilizer::{enumerate_stabilizer_states, make_stabilizer_ensemble, random_stabilizer_state};

use crate::error::Result;
use crate::qcore::QuditRegister;

pub fn make_haar_ensemble(register: QuditRegister) -> StateEnsemble {
    StateEnsemble::haar(register)
}

pub fn make_haar_qubits(n: usize) -> Result<StateEnsemble> {
    Ok(StateEnsemble::haar(QuditRegister::qubits(n)?).with_param("n", n))
}
