//! Out-of-time-order correlators as witnesses of topological phase
//! transitions in real-space tight-binding models.
//!
//! The pipeline is: build a Hamiltonian ([`lattice`]), choose an operator and
//! an initial state ([`operators`]), decompose once and sample `O(t)`
//! ([`dynamics`]), and reduce the series to a long-time observable. Closed
//! forms for the NN SSH chain live in [`analytic`]; [`ensemble`] and
//! [`sweep`] run the pipeline over disorder draws and parameter grids.

pub mod analytic;
pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod lattice;
pub mod operators;
pub mod plot;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use faer::c64;
