//! Convex polytope kernel.
//!
//! Half-space form is the working representation in every dimension. Sets in
//! dimension 1 and 2 also carry their vertices, which is what Minkowski sums,
//! images under arbitrary matrices and Hausdorff distances need.

mod json;
pub mod lp;
mod ops;
mod planar;
mod polytope;

pub use json::PolytopeJson;
pub use lp::{feasible, maximize, solve_lp, LinearProgram, LpError, LpSolution, LP_TOL};
pub use ops::{
    hausdorff_distance, hull, intersection, linear_image, minkowski_sum, point_distance, preimage, preimage_rows,
};
pub use polytope::{canonical_rows, Polytope, RadiiReport};

use nalgebra::DVector;
use thiserror::Error;

/// Default inclusion tolerance.
pub const DEFAULT_ETA: f64 = 1e-8;

/// Half-space `normal·x <= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: DVector<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn from_slice(normal: &[f64], offset: f64) -> Self {
        Self::new(DVector::from_row_slice(normal), offset)
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.normal.dot(x) <= self.offset + tol
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("set is empty")]
    EmptySet,
    #[error("set is unbounded")]
    Unbounded,
    #[error("points do not span a full-dimensional hull")]
    DegenerateHull,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation not supported in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("representation unavailable: {0}")]
    RepresentationUnavailable(&'static str),
    #[error("set is not a C-set (origin not strictly interior)")]
    NotCSet,
    #[error("invalid polytope: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected == found {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { expected, found })
    }
}
