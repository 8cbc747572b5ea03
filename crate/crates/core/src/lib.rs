//! Numerical laboratory for the inhomogeneous Khintchine–Groshev problem in
//! the plane: exact torus-set measures and overlaps, non-Liouville witnesses,
//! variance sums, and the counting function with its main term.

pub mod arith;
pub mod cli;
pub mod counting;
pub mod error;
pub mod gamma;
pub mod lattice;
pub mod psi;
pub mod report;
pub mod torus;
pub mod variance;

pub use error::{Error, Result};
