//! Finite-truncation verification of Dirac-commutator bounds, Schur-multiplier
//! diagonal calculus, rapid-decay inequalities on free and free abelian
//! groups, and certified lower bounds for Connes-type metrics on states.

pub mod constants;
pub mod error;
pub mod haagerup;
pub mod metrics;
pub mod operators;
pub mod report;
pub mod sampling;
pub mod schur;
pub mod suite;
pub mod words;

pub use error::{Error, Result};
pub use report::{BoundReport, CheckContext, ReportFormat};
