//! Symmetric Clifford twirling of Pauli noise on non-Clifford gates.

pub mod budget;
pub mod channel;
pub mod circuit;
pub mod clifford;
pub mod config;
pub mod dense;
pub mod error;
pub mod pauli;
pub mod reports;
pub mod twirl;

pub use clifford::{CliffordOp, GateSpec};
pub use error::{Result, TwirlError};
pub use pauli::{Letter, PauliOp, Phase};
pub use channel::{Atom, Factor, FactorKind, Frame, PauliChannel, PauliEnsemble};
