//! Fourier analysis of measurement-outcome likelihood ratios.

pub mod adaptive;
pub mod advantage;
pub mod audit;
pub mod engine;
pub mod fourier;
pub mod kllr;
pub mod plan;

pub use adaptive::*;
pub use advantage::*;
pub use engine::{compute, copy_transforms, history_distribution, Coefficients, Mode, MAX_HISTORIES};
pub use audit::{bound_audit, AuditInstance, AuditKind, AuditResult};
pub use fourier::*;
pub use kllr::{kllr, KllrOptions, KllrReport};
pub use plan::*;
