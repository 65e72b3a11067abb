//! Cluster-expansion engine for classical continuous gases: truncated and
//! partially truncated correlation functions, rooted-forest kernel
//! expansions, exact counting identities, and decay bounds.

pub mod bounds;
pub mod cli;
pub mod combinatorics;
pub mod configurations;
pub mod correlations;
pub mod error;
pub mod forests;
pub mod kernels;
pub mod potentials;
pub mod quadrature;

pub use error::{Error, Result};
