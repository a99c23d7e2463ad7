//! Variances of quantum observables in Bloch-vector form and the
//! state-independent uncertainty relations that follow from the angle
//! geometry between state and observable vectors.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices and a Jacobi eigensolver
//! - [`basis`]: generalized Gell-Mann generators of SU(N) with `f`/`d` tensors
//! - [`bloch`]: states and observables as Bloch vectors
//! - [`variance`]: variances computed from matrices and from Bloch vectors, angles, pair geometry
//! - [`relations`]: every uncertainty/certainty relation, returned as graded verdicts
//! - [`sampling`]: seedable random states and observables
//! - [`fuzz`]: Monte-Carlo verification of a relation over many random draws
//! - [`regions`]: feasible variance regions and saturation search

pub mod basis;
pub mod bloch;
pub mod error;
pub mod fuzz;
pub mod linalg;
mod optimize;
pub mod parallel;
pub mod regions;
pub mod relations;
pub mod sampling;
pub mod variance;

pub use basis::{build_basis, GeneratorBasis};
pub use bloch::{Observable, QuantumState};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianMatrix};
pub use parallel::Exec;
pub use relations::{RelationId, RelationVerdict};
