//! Low-degree indistinguishability toolkit for ensembles of quantum states.

pub mod biclique;
pub mod cli;
pub mod ensembles;
pub mod error;
pub mod haar;
pub mod lowdeg;
pub mod mitigation;
pub mod qcore;
pub mod registry;
pub mod rng;

pub use error::{Error, Result};
