//! Eigenvalue dynamics and Fock-space representations of two-step
//! generalized Heisenberg algebras.

pub mod admissibility;
pub mod algebra;
pub mod chain;
pub mod cli;
pub mod error;
pub mod linear_dynamics;
pub mod pq_numbers;
pub mod rep_builder;
pub mod spectrum;

pub use algebra::{
    CharacteristicFunctions, EigenPair, LadderSequence, LinearParams, Physicality, TruncatedRep,
    VacuumState,
};
pub use error::{GhaError, Result};
