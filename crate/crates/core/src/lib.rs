//! Simulation toolkit for noise-induced barren plateau analysis of
//! layered variational circuits.

pub mod bounds;
pub mod channel;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod gradient;
pub mod hamiltonian;
pub mod linalg;
pub mod pauli;
pub mod seeding;
pub mod trainer;

pub use error::{Error, Result};
