use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A coordinate or parameter lies outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate metric at t = {t}: warp value {f} is not positive")]
    DegenerateMetric { t: f64, f: f64 },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The torsion function cannot stay positive (e.g. a spherical cap reaching the equator).
    #[error("positivity error: {0}")]
    Positivity(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    /// The operator `Δ + nk` has (numerically) nontrivial kernel on the domain.
    #[error("resonance: {0}")]
    Resonance(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// A boundary integrand with `1/H` met a vanishing mean curvature.
    #[error("pole in boundary integrand: {0}")]
    Pole(String),
}

impl Error {
    /// True for errors that come from a numerical solve rather than from bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SolverFailure(_) | Error::Resonance(_) | Error::Positivity(_)
        )
    }
}
