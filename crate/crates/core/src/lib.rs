//! Quantum maps with intermediate spectral statistics.
//!
//! The map `U = e^{-2iπp̂²/N} e^{2iπαq̂}` on `N = 2^{n_q}` states, its gate
//! circuit, the random-phase ISRM ensemble, and the spectral and eigenvector
//! diagnostics used to classify them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod isrm;
pub mod linalg;
pub mod map_operator;
pub mod observables;
pub mod params;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Representation, StateVector, C64};
pub use params::{Alpha, MapSpec, PhaseModel, Variant};
