//! Exact and simulated avalanche-size distributions.
//!
//! The crate is organized bottom-up:
//!
//! - [`exact`]: big-integer and big-rational helpers.
//! - [`combinatorics`] and [`trees`]: integer compositions, the
//!   composition identity for `(n+1)^(n-1)`, and a Prüfer-sequence tree census
//!   that checks it term by term.
//! - [`distributions`]: closed-form avalanche, Abelian, conditional and
//!   large-`N` limit laws, plus tail, slope and mode analysis.
//! - [`urn`] and [`tower`]: two stochastic models whose avalanche statistic
//!   reproduces the closed forms, each with an exhaustive enumeration oracle
//!   and a seeded, sharded Monte Carlo sampler.
//! - [`stats`]: comparison of simulation output against exact PMFs.

pub mod combinatorics;
pub mod distributions;
pub mod error;
pub mod exact;
pub mod pmf;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod tower;
pub mod trees;
pub mod urn;

pub use error::{Error, Result};
pub use pmf::{Pmf, Probs, Scalar};
pub use sim::{SimModel, SimResult};

/// Caps on exhaustive enumerations. Exceeding a cap is a
/// [`Error::Resource`], never a silent truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Largest vertex count for the labeled-tree census.
    pub tree_vertices: usize,
    /// Largest `M^N` for the exhaustive urn oracle.
    pub urn_assignments: u64,
    /// Largest product of tower state-space sizes for the tower oracle.
    pub tower_states: u64,
    /// Largest coordinate count for the heterogeneous partition sum.
    pub general_coordinates: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            tree_vertices: 8,
            urn_assignments: 10_000_000,
            tower_states: 10_000_000,
            general_coordinates: 10,
        }
    }
}
