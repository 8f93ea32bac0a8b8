//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable index {var} out of range for {num_vars} variables")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("frame vectors are linearly dependent")]
    DependentFrame,
    #[error("degree-{0} polynomial has no roots to find")]
    DegreeTooLow(usize),
    #[error("root iteration did not converge after {iterations} iterations (max residual {max_residual:.3e})")]
    RootsDidNotConverge { iterations: usize, max_residual: f64 },
    #[error("resultant of a degenerate (zero or constant) polynomial")]
    DegenerateResultantInput,
    #[error("center lies on the hypersurface (residual {residual:.3e})")]
    CenterOnX { residual: f64 },
    #[error("degenerate section: {0}")]
    DegenerateSection(String),
    #[error("discriminant vanishes identically: the restricted curve is not square-free")]
    DiscriminantIdenticallyZero,
    #[error("point does not lie on the hypersurface")]
    PointNotOnX,
    #[error("branch points too close together (isolation {isolation:.3e}); re-randomize the chart")]
    OverlappingBranchPoints { isolation: f64 },
    #[error("could not build a non-crossing loop system: {0}")]
    LoopConstruction(String),
    #[error("path tracking failed on segment {segment}: {reason} (residual {residual:.3e})")]
    PathTrackingFailure { segment: usize, reason: String, residual: f64 },
    #[error("ambiguous fiber matching after loop transport")]
    AmbiguousMatching,
    #[error("cycle type {got:?} does not match intersection profile {expected:?} at branch point {index}")]
    CertificationMismatch { index: usize, got: Vec<usize>, expected: Vec<usize> },
    #[error("product of loop permutations is not the identity")]
    ProductNotIdentity,
    #[error("permutation group is not transitive")]
    NotTransitive,
    #[error("invalid permutation image list {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("degenerate line chart: hyperplanes dependent at the sample")]
    DegenerateChart,
    #[error("focal determinant vanishes identically at the sample")]
    IdenticallyZeroDeterminant,
    #[error("family line is not tangent at the sample: {0}")]
    NotTangent(String),
    #[error("sampled line does not pass through the given point (residual {0:.3e})")]
    PointNotOnLines(f64),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Config(String),
    #[error("exact coefficients required: {0}")]
    ExactRequired(String),
}

pub type Result<T> = std::result::Result<T, Error>;
