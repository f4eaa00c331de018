//! Registers, states, channels, permutation operators and measurements.

pub mod measure;
pub mod perm;
pub mod register;
pub mod state;

pub use measure::{born_probabilities, sample_outcome, OutcomeRecord, ProjectiveMeasurement};
pub use perm::{permutation_operator, permute_index, Permutation};
pub use register::{QuditRegister, DEFAULT_DIM_CAP};
pub use state::{
    apply_gate_density, apply_gate_vector, conjugate, depolarize_global, depolarize_sites, embed_gate,
    partial_trace, partial_trace_matrix, tensor_power, tensor_product, trace_distance, trace_norm, CMatrix,
    CVector, DensityOperator, PureState, C64,
};
