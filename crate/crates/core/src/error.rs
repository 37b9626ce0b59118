use thiserror::Error;

pub type Result<T> = std::result::Result<T, GhaError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GhaError {
    #[error("coefficient list for {0} is empty")]
    EmptyCoefficients(&'static str),

    #[error("non-finite value in {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The eigenvalue recursion left the finite reals.
    #[error("sequence truncated: first non-finite value at index {index}")]
    Truncation { index: usize },

    #[error("sequence is not physical: N_{index}^2 = {norm_sq} < 0")]
    NonPhysical { index: usize, norm_sq: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("region {region} admits no beta0 for alpha0 = {alpha0}")]
    NoAdmissibleBeta0 { region: String, alpha0: f64 },

    #[error("inadmissible vacuum (alpha0 = {alpha0}, beta0 = {beta0}): {detail}")]
    Inadmissible {
        alpha0: f64,
        beta0: f64,
        detail: String,
    },

    #[error("inflation word length cap {cap} exceeded; last completed step {last_completed}")]
    CapExceeded { cap: usize, last_completed: usize },

    #[error("invalid substitution rule: {0}")]
    InvalidRule(String),
}
