//! Acceptance suite for `ipec-core`.
//!
//! [`criteria`] holds one function per acceptance criterion, [`oracle`] the
//! high-precision reference math they compare against, and [`benchmark`]
//! the reference synthetic dataset they run on.

pub mod benchmark;
pub mod criteria;
pub mod oracle;

pub use criteria::{run_all, CriterionResult};
