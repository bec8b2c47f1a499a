//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or violated precondition; the request itself is bad.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Collocation matrix could not be factorized.
    #[error("singular collocation matrix (pivot {pivot:.3e} against scale {scale:.3e})")]
    SingularMatrix { pivot: f64, scale: f64 },

    /// Fixed-point iteration ran out of iterations.
    #[error("fixed-point iteration did not converge after {iterations} iterations (last relative change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    /// The squared amplitude must stay positive; a non-positive value means
    /// the mesh is too coarse for the problem.
    #[error("squared amplitude is not positive (y = {value:.3e} at rho = {rho:.6e}); mesh too coarse")]
    NonPositiveAmplitude { rho: f64, value: f64 },

    /// No sign change of the regular solution was found.
    #[error("no root of the regular solution found below r = {r_end:.6}")]
    RootNotFound { r_end: f64 },

    /// The reference integrator could not certify its own accuracy.
    #[error("oracle error: {0}")]
    Oracle(String),

    /// Error in a named stage of a multi-stage computation.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Error attributed to a specific mesh element.
    #[error("element {index}: {source}")]
    Element {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach the name of the pipeline stage that produced the error.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Attach the index of the mesh element that produced the error.
    pub fn on_element(self, index: usize) -> Self {
        Error::Element {
            index,
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 for configuration/precondition problems,
    /// 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Stage { source, .. } | Error::Element { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
