use thiserror::Error;

/// Errors raised by constructors and analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("accuracy factors must be finite and non-negative, got {name} = {value}")]
    NegativeAccuracy { name: &'static str, value: f64 },

    #[error(
        "accuracy factors violate γ_X² + γ_Y² + γ_XY² ≤ 1 (got {sum:.17}); \
         the POVM elements would not be positive"
    )]
    AccuracyBound { sum: f64 },

    #[error("Bloch vector norm {norm:.17} exceeds 1; not a density operator")]
    InvalidState { norm: f64 },

    #[error("matrix is not Hermitian (max |A - A†| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("unsupported operator dimension {0}; expected 2 or 4")]
    Dimension(usize),

    #[error("conditional on y = {y} is undefined: p_Y(y) = {p_y:e} is below the denominator floor")]
    UndefinedConditional { y: i8, p_y: f64 },

    #[error("accuracy γ_X = {0} must be positive to solve for the conditional state")]
    DegenerateAccuracy(f64),

    #[error("noise inversion needs γ_X, γ_Y > 0, got γ_X = {gamma_x}, γ_Y = {gamma_y}")]
    InversionUndefined { gamma_x: f64, gamma_y: f64 },

    #[error("witness unavailable: {0}")]
    WitnessUnavailable(String),

    #[error("distribution invalid: {0}")]
    InvalidDistribution(String),

    #[error("state reduction undefined: normalization {0:e} below the denominator floor")]
    UndefinedReduction(f64),

    #[error("quadrature grid invalid: {0}")]
    InvalidGrid(String),

    #[error("sample run must contain at least one draw")]
    EmptyRun,
}

pub type Result<T> = std::result::Result<T, Error>;
