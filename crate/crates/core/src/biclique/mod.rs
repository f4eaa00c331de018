//! Quantum planted biclique: samplers, readout simulation, detectors, exact
//! Fourier mass of the likelihood ratio and power experiments.

pub mod detect;
pub mod grid;
pub mod instance;
pub mod mass;
pub mod phase;

pub use detect::*;
pub use grid::{measure_grid, GridMarginals, LocalPlanGrid};
pub use instance::{
    expected_power, expected_power_direct, sample_copy, sample_secret, BicliqueInstance, PlantedSecret, EXPLICIT_CAP,
};
pub use mass::*;
pub use phase::*;
