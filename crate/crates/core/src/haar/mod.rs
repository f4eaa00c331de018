//! Haar-random states and unitaries, exact moment operators and the rational
//! coefficients that appear in their centered expansions.

pub mod copy_moment;
pub mod moment;
pub mod rational;
pub mod sample;

pub use copy_moment::{copy_moment_bound, haar_copy_moment, haar_overlap_power, overlap_power_bound, worst_block};
pub use moment::{
    beta_series_check, centered_moment_operator, centered_moment_operator_subset_form, derangement_overlap_check,
    gamma_bound_check, mixed_overlap_moment, moment_operator, moment_trace_exact, DerangementCheck, GammaBoundRow,
    MomentOperator, SeriesCheck, GAMMA_CONSTANT,
};
pub use rational::{beta, beta_series_coefficient, gamma};
pub use sample::{haar_sample, haar_state, haar_unitary};
