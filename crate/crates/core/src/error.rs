use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CesError {
    #[error("log-gamma pole at non-positive integer z = {0}")]
    GammaPole(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within {max_terms} terms ({what})")]
    NonConvergence { what: &'static str, max_terms: usize },

    #[error("contour abscissa c = {c} must lie right of all poles (c > {bound})")]
    ContourPlacement { c: f64, bound: f64 },

    #[error("Mellin-Barnes integral not converged: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Truncation { estimate: f64, tolerance: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("wavefunctions live on different grids")]
    GridMismatch,

    #[error("u(x) vanishes near x = {x:.6} (parameters outside the solvable window)")]
    NodeOfU { x: f64 },

    #[error("negative radicand {radicand} in structure constant at n = {n}")]
    NegativeRadicand { n: usize, radicand: f64 },

    #[error("operation requires the {expected} phase")]
    WrongPhase { expected: &'static str },

    #[error("normalization drift: |A†ψ| = {found}, expected sqrt(E) = {expected}")]
    NormalizationDrift { found: f64, expected: f64 },

    #[error("coherent-state truncation exceeded the cap of {cap} levels")]
    TruncationFailure { cap: usize },

    #[error("operator dimension {op} does not match state dimension {state}")]
    DimensionMismatch { op: usize, state: usize },
}

pub type Result<T> = std::result::Result<T, CesError>;
