use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("t = {t} is outside the profile domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("non-finite integrand value at t = {t}")]
    NonFinite { t: f64 },

    #[error(
        "b(t) vanishes at t* = {t_star:.6} inside the horizon; clip the horizon to t <= {suggested:.6}"
    )]
    ValidityWindow { t_star: f64, suggested: f64 },

    #[error("b(t) = {b:e} is singular at t = {t}")]
    Singular { t: f64, b: f64 },

    #[error("invalid profile: {0}")]
    Profile(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("lambda window too small: edge contribution {ratio:e} of peak exceeds 1e-10")]
    WindowTooSmall { ratio: f64 },

    #[error("space grid does not cover the packet: boundary density {boundary:e}")]
    GridCoverage { boundary: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("propagation unstable at t = {t}: eta-norm drifted by {drift:e}")]
    Unstable { t: f64, drift: f64 },

    #[error("epsilon extrapolation did not converge: spread {spread:e}")]
    NonConvergence { spread: f64 },
}
