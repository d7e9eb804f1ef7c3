use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range (negative rate, empty mixture, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The net profit condition `λμ/c < 1` fails.
    #[error("net profit condition violated: lambda*mu/c = {modulus} >= 1")]
    NetProfit { modulus: f64 },

    /// A renewal operator is not a contraction (modulus outside (0, 1)).
    #[error("contraction violated: modulus {modulus} is not in (0, 1)")]
    Contraction { modulus: f64 },

    /// A hypothesis of a bound is not satisfied by the supplied models.
    #[error("hypothesis {name} not satisfied: {detail}")]
    Hypothesis { name: String, detail: String },

    /// The operation requires a specific claim-size family.
    #[error("unsupported claim distribution: expected {expected}")]
    WrongVariant { expected: &'static str },

    /// An improper integral could not be truncated below the requested threshold.
    #[error("truncation failure: {0}")]
    Truncation(String),

    /// Adaptive quadrature or root bracketing did not reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two grid functions do not share a step size.
    #[error("incompatible grids: step {0} vs {1}")]
    IncompatibleGrids(f64, f64),
}

impl Error {
    /// True for violations of mathematical preconditions (as opposed to
    /// malformed input or numerical breakdown).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NetProfit { .. }
                | Error::Contraction { .. }
                | Error::Hypothesis { .. }
                | Error::WrongVariant { .. }
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Truncation(_) | Error::Numerical(_) | Error::IncompatibleGrids(..)
        )
    }
}
