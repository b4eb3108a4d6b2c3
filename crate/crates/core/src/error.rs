use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("representation error: {0}")]
    Representation(String),

    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    Improper { num: usize, den: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("jωI - A is singular at ω = {omega} rad/s (pole on the frequency grid)")]
    PoleOnGrid { omega: f64 },

    #[error("eigenvalue computation did not converge")]
    EigenNoConvergence,

    #[error("mass matrix is singular: m - Zw_dot = {0} must be positive")]
    SingularMass(f64),

    #[error("perturbation has effective rank > 1 (sigma2/sigma1 = {ratio:e})")]
    UnsupportedRank { ratio: f64 },

    #[error("system is not Hurwitz (max real part of eigenvalues = {max_real:e}): {context}")]
    NotHurwitz { max_real: f64, context: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("criterion unsound: system unstable at delta = {delta} inside the {criterion} interval")]
    Unsound { criterion: String, delta: f64 },

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error("plot data error: {0}")]
    PlotData(String),
}
