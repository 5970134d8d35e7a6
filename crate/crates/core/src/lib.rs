//! Exact lattice arithmetic for the boundary of orthogonal modular varieties
//! attached to `L_{2d} = 2U + <-6> + <-2d>`, with `d = p^2` and `d = 1`.
//!
//! Everything is computed over the integers or rationals; there is no
//! floating point in the algebra.

#![allow(clippy::needless_range_loop)]

pub mod arith;
pub mod boundary;
pub mod classnum;
pub mod error;
pub mod fp;
pub mod fqm;
pub mod hyperplane;
pub mod isometry;
pub mod lattice;
pub mod linalg;
pub mod sampling;
pub mod verify;

pub use boundary::{BoundaryCurve, BoundaryGraph, BoundaryPoint, CurveGroup, NormalForm, PointFamily};
pub use error::{Error, Result};
pub use fqm::{DiscElement, FiniteQuadraticModule, QValue};
pub use isometry::{Isometry, Mat2};
pub use lattice::{Discriminant, Lattice, Marks, Sublattice, Vector};
pub use linalg::{IntMatrix, RatMatrix, Smith};
