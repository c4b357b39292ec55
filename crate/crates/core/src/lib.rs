//! Two-spin XXZ toolkit: statevector simulation of the measurement protocols,
//! shot sampling, and exact analytics for the entanglement distance and the
//! speed of evolution.
//!
//! Conventions: ħ = 1; qubit 0 is the least significant bit of a basis index;
//! every rotation gate is `exp(−iθG/2)`.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod exec;
pub mod fitting;
pub mod fmt;
pub mod gates;
pub mod protocols;
pub mod sampling;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Execution;
pub use gates::{angles_from_model, GateAngles, ModelParams, PauliAxis};
pub use protocols::{Circuit, PrepAngles};
pub use sampling::{Estimate, RngSeed, ShotCounts};
pub use state::{StateVector, UnitaryMatrix};
