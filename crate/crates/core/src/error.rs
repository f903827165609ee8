//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Quadruple is degenerate or not in strict counterclockwise order.
    #[error("invalid box of geodesics: {0}")]
    InvalidBox(String),

    /// Image points of a circle map collided at the sampling resolution.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A quadrature or solver budget ran out before reaching the requested
    /// tolerance. Carries the best estimate obtained so far.
    #[error("accuracy budget exceeded: best estimate {best_estimate}, error ~{error_estimate}")]
    Accuracy {
        best_estimate: f64,
        error_estimate: f64,
    },

    /// Trajectory integration exhausted its step budget before reaching the
    /// boundary shell (insufficient budget or a leaf of infinite length).
    #[error("non-terminating trajectory: {steps} steps from seed {seed_re}+{seed_im}i")]
    NonTerminatingTrajectory {
        steps: usize,
        seed_re: f64,
        seed_im: f64,
    },

    /// The natural chart produced a self-intersecting boundary polyline.
    #[error("chart injectivity violated: {0}")]
    ChartInjectivity(String),

    /// A parameter lies outside its admissible domain (boundary inputs, etc).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Differential failed its construction checks.
    #[error("invalid quadratic differential: {0}")]
    InvalidDifferential(String),

    /// Malformed configuration. Carries the offending path or key.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
