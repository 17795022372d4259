//! Vector-valued multidimensional Z-transforms on integer lattices.
//!
//! The crate covers lattice domains and sequence tables, forward transforms with
//! rigorous tail bounds, contour inversion, the family of lattice convolutions,
//! Cesàro kernels and Weyl-type fractional differences, and solvers for linear
//! difference and Volterra-type equations built from operator pencils.

// `!(x >= 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolution;
pub mod document;
pub mod error;
pub mod fixtures;
pub mod fractional;
pub mod generators;
pub mod lattice;
pub mod linalg;
pub mod series;
pub mod sequence;
pub mod solver;
pub mod ztransform;

pub use error::{Error, Result};
pub use lattice::{AxisInterval, IndexBox, LatticeDomain, MultiIndex, Sign};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use sequence::{Envelope, SequenceTable, ValueKind};
