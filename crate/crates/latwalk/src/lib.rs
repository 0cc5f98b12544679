//! Discrete-spacetime stochastic simulator whose ensembles of local random
//! walks reproduce nonrelativistic quantum probability distributions.
//!
//! * [`lattice`] is the full model with a stateful sparse lattice.
//! * [`accelerated`] holds the trained and expected-value codes.
//! * [`entangle`] runs momentum-entangled pairs through a two-slit interferometer.
//! * [`oracles`] provides closed-form reference distributions.
//! * [`stats`] compares ensembles with the oracles.

pub mod accelerated;
pub mod entangle;
pub mod error;
pub mod forces;
pub mod lattice;
pub mod oracles;
pub mod output;
pub mod rng;
pub mod run;
pub mod scalar;
pub mod scenario;
pub mod sources;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
