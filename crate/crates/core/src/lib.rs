//! Symbolic variational calculus on jet bundles.

pub mod coeff;
pub mod constraints;
pub mod error;
pub mod modeldef;
pub mod models;
pub mod report;
pub mod symexpr;
pub mod symmetry;
pub mod varcalc;

pub use coeff::Q;
pub use error::{JetError, Result};
