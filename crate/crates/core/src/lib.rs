//! Numerical toolkit for isoclinic subspace families and their links to
//! quantum error correction and mutually unbiased measurements.
//!
//! * [`isoclinic`]: canonical angles and the `PᵢPⱼPᵢ = λPᵢ` family check
//! * [`kl`]: classic and generalized Knill–Laflamme conditions
//! * [`pauli`]: symplectic Pauli operators and stabilizer groups
//! * [`construct`]: anti-commuting, graph and ω-commuting constructions
//! * [`mum`]: mutually unbiased measurements and their canonical form
//! * [`io`]: `.cmat.json` matrices and bundle directories
//!
//! Pairwise loops run on rayon when the `parallel` feature is enabled
//! (default); every `*_with` entry point takes an explicit [`Execution`].

pub mod construct;
pub mod error;
pub mod exec;
pub mod io;
pub mod isoclinic;
pub mod kl;
pub mod linalg;
pub mod mum;
pub mod pauli;
pub mod sampling;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{ComplexMatrix, Subspace, Tolerance};
