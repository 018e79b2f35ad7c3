use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rotation parameter lambda[{index}] = {value} must be strictly greater than 1")]
    InvalidLambda { index: usize, value: f64 },

    #[error("representation has real dimension 0")]
    EmptySpace,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("q out of range (-1,1): {0}")]
    QOutOfRange(f64),

    #[error("degree {degree} exceeds the admissible maximum {max}")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("oracle refuses n = {n}: limit is {limit}")]
    OracleLimit { n: usize, limit: usize },

    #[error("pair-partition enumeration refuses m = {m}: limit is {limit}")]
    PartitionLimit { m: usize, limit: usize },

    #[error("letter {letter} is outside the alphabet of size {alphabet}")]
    InvalidLetter { letter: usize, alphabet: usize },

    #[error("vector is not real (max imaginary part {max_imag:e})")]
    NotReal { max_imag: f64 },

    #[error("vector does not belong to H_R' (max |Im <x, f>_U| = {residual:e})")]
    NotInRealCommutant { residual: f64 },

    #[error("vector has components in several degrees: {degrees:?}")]
    MixedDegree { degrees: Vec<usize> },

    #[error("letter {index} has eigenvalue {beta} (a fixed vector with beta = 1 is required)")]
    NotFixedVector { index: usize, beta: f64 },

    #[error("letters {first} and {second} are not orthogonal (<.,.>_U = {overlap:e})")]
    NotOrthogonal {
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("the two generator letters coincide (index {0})")]
    SameVector(usize),

    #[error("conditional expectation of {which} is nonzero (norm {norm:e})")]
    ExpectationNonzero { which: &'static str, norm: f64 },

    #[error("truncation leaves {available} valid degrees, {requested} requested")]
    InsufficientDegrees { requested: usize, available: usize },

    #[error("truncated space has dimension {dim}, dense limit is {limit}")]
    SpaceTooLarge { dim: usize, limit: usize },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("operator mismatch: {0}")]
    OperatorMismatch(&'static str),
}
