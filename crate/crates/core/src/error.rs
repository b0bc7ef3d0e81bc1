use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, BergError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BergError {
    #[error("point {re} + {im}i is not in the right half-plane")]
    NotInHalfPlane { re: f64, im: f64 },

    #[error("weight parameter alpha = {0} must satisfy alpha > -1")]
    InvalidWeight(f64),

    #[error("invalid symbol parameters: {0}")]
    InvalidSymbol(String),

    #[error("symbol is not a self-map of the half-plane: Re phi({witness}) = {value} <= 0")]
    NotSelfMap { witness: Complex64, value: f64 },

    #[error("evaluation left the half-plane: phi({z}) = {value}")]
    Domain { z: Complex64, value: Complex64 },

    #[error("invalid sample grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("kernel matrices are built on different point sets")]
    PointSetMismatch,

    #[error("matrix is not Hermitian: defect {defect:e} exceeds tolerance {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("Gram matrix is singular: points {first} and {second} coincide")]
    SingularGram { first: Complex64, second: Complex64 },

    #[error("function is not in L2(mu_alpha): exponent beta = {beta} must exceed {bound}")]
    NotIntegrable { beta: f64, bound: f64 },

    #[error("Laplace transform diverges: exponent beta = {0} must exceed -1")]
    TransformDiverges(f64),

    #[error("non-finite value at quadrature node {0}")]
    NonFinite(Complex64),

    #[error("composed symbol coefficients overflow at iterate {0}")]
    Overflow(usize),

    #[error("{0} must be positive and finite, got {1}")]
    NotPositive(&'static str, f64),

    #[error("parse error: {0}")]
    Parse(String),
}
