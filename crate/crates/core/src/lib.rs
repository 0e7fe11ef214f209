//! Construction and analysis of the (q^n, q^m)-Frobenius nonclassical plane
//! curves over finite fields.
//!
//! The library builds the curve `F = D1 / D2` from the two Moore-type
//! determinants of Frobenius powers, verifies its degree and double
//! Frobenius nonclassicality, classifies its singular points, and decides
//! for candidate centers of projection whether the projection is a Galois
//! covering: positively by exhibiting a linear deck group whose order equals
//! the covering degree, negatively by exhibiting a concrete ramification
//! obstruction.
//!
//! Modules:
//! - [`field`]: exact GF(p^k) arithmetic with deterministic moduli.
//! - [`poly`]: sparse homogeneous trivariate polynomials and binary forms.
//! - [`geom`]: projective points and lines, incidence, fields of definition.
//! - [`fncurve`]: the curve family itself (determinants, division, the
//!   Frobenius nonclassicality identity, the PGL(3, F_q) action).
//! - [`local`]: multiplicities, tangent cones, and the singularity
//!   classification of the family.
//! - [`galois`]: projection analysis, deck groups, and the ramification
//!   obstruction engine.

// index loops mirror the convolution formulas; divisibility reads as `% == 0`
#![allow(clippy::needless_range_loop, clippy::manual_is_multiple_of)]

pub mod field;
pub mod fncurve;
pub mod galois;
pub mod geom;
pub mod local;
pub mod poly;

use thiserror::Error;

/// Unified error type for curve construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error("invalid curve parameters: {0}")]
    InvalidParams(String),
    #[error("{0} is not divisible by {1}")]
    NotDivisible(String, String),
    #[error("point {0} does not lie on the curve")]
    NotOnCurve(String),
    #[error("point {0} does not lie on line {1}")]
    NotOnLine(String, String),
    #[error("projective points coincide: {0}")]
    PointsEqual(String),
    #[error("zero binary form has no finite vanishing order")]
    InfiniteOrder,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("fiber over {line} does not split over GF({q}^{searched}); unsplit remainder of degree {leftover} needs an extension of degree {needed} over GF({q})")]
    UnsplitFiber { line: String, q: u64, searched: u32, leftover: u32, needed: u32 },
    #[error("extension degree {0} not available in the working field")]
    BadExtension(u32),
    #[error("engine consistency failure: {0}")]
    EngineInconsistency(String),
    #[error("enumeration of P^2(GF({q}^{j})) with {count} points exceeds the configured limit")]
    EnumerationTooLarge { q: u64, j: u32, count: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
