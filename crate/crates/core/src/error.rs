use thiserror::Error;

/// Errors produced by the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The internal energy does not lie strictly inside the spectrum.
    #[error("internal energy {u} outside (0, {e_max})")]
    EnergyOutOfRange { u: f64, e_max: f64 },

    /// A spectrum definition violates its invariants.
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    /// No feasible point satisfies the constraints.
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    /// The root finder could not establish a sign change.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// Iteration limit reached before the tolerance was met.
    #[error("no convergence after {iterations} iterations (bracket width {width:e})")]
    NoConvergence { iterations: u32, width: f64 },

    /// The structural parameter is zero, so the temperature is infinite.
    #[error("infinite temperature (beta = 0)")]
    InfiniteTemperature,

    /// A level sum over an unbounded spectrum does not converge.
    #[error("divergent level sum: {0}")]
    Divergent(String),

    /// A level sum could not be evaluated to the required accuracy.
    #[error("inaccurate level sum: {0}")]
    Accuracy(String),

    /// Not enough data to fit a power law.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A request would materialize more levels than allowed.
    #[error("{levels} levels is too many to materialize (limit {limit})")]
    TooLarge { levels: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by invalid input rather than numerical trouble.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::EnergyOutOfRange { .. }
                | Error::InvalidSpectrum(_)
                | Error::Infeasible(_)
                | Error::TooLarge { .. }
                | Error::InfiniteTemperature
        )
    }

    /// True for root-finding and convergence failures.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Error::BracketFailure(_)
                | Error::NoConvergence { .. }
                | Error::Divergent(_)
                | Error::Accuracy(_)
        )
    }
}
