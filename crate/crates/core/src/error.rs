use thiserror::Error;

/// Failures raised by the numerical pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finder did not converge for degree {degree} (residual {residual:e})")]
    RootNonConvergence { degree: usize, residual: f64 },

    #[error("trigonometric polynomial is not strictly positive on the circle (min {min:e})")]
    NotPositive { min: f64 },

    #[error("spectral factor roots could not be paired: {0}")]
    RootPairing(String),

    #[error("spectral factorization residual {residual:e} exceeds {tolerance:e}")]
    FactorizationResidual { residual: f64, tolerance: f64 },

    #[error("denominator has a zero at modulus {modulus} inside the closed unit disk")]
    UnstableDenominator { modulus: f64 },

    #[error("division by (z - {at}) left remainder {remainder:e} above {tolerance:e}")]
    InexactDivision {
        at: String,
        remainder: f64,
        tolerance: f64,
    },

    #[error("H2 series truncation did not certify within {terms} terms (bound {bound:e})")]
    TruncationCap { terms: usize, bound: f64 },

    #[error("Gram matrix is not positive definite (min eigenvalue {min_eig:e})")]
    GramNotPositive { min_eig: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("kernel coefficient matrix has negative eigenvalue {min_eig:e} (scale {scale:e})")]
    NotPsd { min_eig: f64, scale: f64 },

    #[error("kernel coefficient matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("integer overflow in exact binomial arithmetic")]
    DegreeOverflow,

    #[error("Dirichlet integral of a positive measure came out negative: {value:e}")]
    NegativeIntegral { value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
