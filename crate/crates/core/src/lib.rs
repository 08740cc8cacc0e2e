//! Simulation and audit harness for an `(n, n)`-threshold quantum
//! secret-sharing scheme on which Clifford+T circuits can be evaluated
//! without decoding.
//!
//! The secret's qubits are spread across a grid of `N` rows and `n` columns,
//! one column per share. Cliffords act transversally; each `T` gate consumes
//! a pre-shared logical magic state by gate teleportation with a broadcast
//! parity correction.

pub mod acceptance;
pub mod audit;
pub mod backend;
pub mod circuit;
pub mod cli;
pub mod dense;
pub mod error;
pub mod evaluation;
pub mod pauli;
pub mod protocol;
pub mod serialize;
pub mod sparse;

pub use backend::Backend;
pub use dense::DenseOperator;
pub use error::{Error, Result};
pub use pauli::{Clifford1, CliffordOp, Pauli, PauliString, Phase};
pub use sparse::{MeasurementOutcome, PauliSumState};
