//! Retarded Green's functions of the two-site Fermi-Hubbard model, computed
//! the way a near-term quantum device would: a VQE-prepared ground state, an
//! equation-of-motion treatment of the charged excitations, and Lehmann
//! reconstruction of `G(omega)` — with an exact-diagonalization oracle to
//! validate every stage.

pub mod error;
pub mod exactdiag;
pub mod fermion;
pub mod greens;
pub mod linalg;
pub mod pauli;
pub mod qeom;
pub mod seeding;
pub mod simulator;
pub mod vqe;

#[cfg(test)]
pub(crate) mod testing;

pub use error::{Error, Result};
