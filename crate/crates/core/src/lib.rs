//! Simulation of single-qubit teleportation through locally damped
//! entangled resources.
//!
//! The crate covers the state and channel primitives, the fully entangled
//! fraction, a circuit-level teleportation model, simulated tomography with
//! process-matrix fidelity extraction, and the parameter sweeps that tie them
//! together.

pub mod channels;
pub mod entanglement;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod sampling;
pub mod state;
pub mod teleport;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Pauli, C64};
pub use state::{DensityMatrix, PureState};
