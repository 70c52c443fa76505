use thiserror::Error;

/// Errors shared across the numerical modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("gamma pole: x = {x} is a nonpositive integer")]
    GammaPole { x: f64 },

    #[error("hypergeometric parameter pole: lower parameter {c} is a nonpositive integer")]
    ParameterPole { c: f64 },

    #[error("series does not converge: {0}")]
    NonConvergent(String),

    #[error("series budget exhausted after {terms} terms, last term {last_term:e}")]
    BudgetExceeded { terms: usize, last_term: f64 },

    #[error("series diverges at r = {r}: {reason}")]
    Divergence { r: f64, reason: String },

    #[error("denominator 2n+s-2k-d vanishes at n = {n}, k = {k}")]
    DenominatorPole { n: usize, k: usize },

    #[error("Coulomb endpoint s = d-2: {0}")]
    CoulombEndpoint(String),

    #[error("quadrature tolerance not met: requested {requested:e}, achieved {achieved:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("measure is not a valid density: min value {min:e} on [0,1] (allowed -{allowed:e})")]
    InvalidMeasure { min: f64, allowed: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
