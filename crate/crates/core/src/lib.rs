//! Simulation and verification toolkit for entanglement distribution through
//! an ancilla that stays separable from the parties it connects.
//!
//! * [`matcore`]: small dense complex linear algebra.
//! * [`qstate`]: density matrices, partial trace/transpose, negativity and
//!   separability certificates.
//! * [`contmodel`]: two qubits coupled through a qutrit ancilla, with its
//!   perturbative analysis, exact/effective/Trotter evolution and the
//!   feasibility sweep.
//! * [`protocol`]: the three-qubit send-the-ancilla protocol.
//! * [`channels`]: Kraus maps, Choi matrices and non-entangling audits.

pub mod channels;
pub mod contmodel;
pub mod error;
pub mod matcore;
pub mod protocol;
pub mod qstate;

pub use error::{Error, Result};
pub use matcore::{CMat, NormKind, C64};
pub use qstate::{Bipartition, DensityMatrix, SeparabilityVerdict};
