use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition on the inputs does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A contour family fails its nesting invariants.
    #[error("invalid contour: {0}")]
    InvalidContour(String),
    /// A quadrature node came too close to a pole of the integrand.
    #[error("pole proximity: {0}")]
    PoleProximity(String),
    /// An iterative or refining computation did not reach its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),
    /// A least-squares fit had no usable data.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0, 1), got {q}")))
    }
}
