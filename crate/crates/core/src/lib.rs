//! Growth functions, their Legendre transforms, weight sequences and a
//! finite-dimensional model of the associated test-function spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod growth;
pub mod numeric;
pub mod parallel;
pub mod report;
pub mod scalar;
pub mod sequences;
pub mod suites;

pub use error::{Error, Result};
