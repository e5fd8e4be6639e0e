//! Crate-wide error type.
//!
//! Errors split into two families that callers treat differently:
//! configuration problems (bad input, unknown keys, out-of-range parameters)
//! and numerical failures (events with zero probability, truncation overflow,
//! optimizer breakdown). [`Error::is_numerical`] exposes the distinction so a
//! front end can map them to separate exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The Fock cutoff is too small for the requested state: too much
    /// probability mass falls beyond the basis.
    #[error("basis cutoff nmax={nmax} too small: truncated tail mass {tail_mass:.3e} exceeds {limit:.0e}; raise nmax")]
    InsufficientCutoff {
        nmax: usize,
        tail_mass: f64,
        limit: f64,
    },

    /// A squeeze conjugation pushed more trace past the padded cutoff than
    /// the accuracy budget allows.
    #[error("squeeze conjugation lost trace {trace_loss:.3e} (limit {limit:.0e}); raise the cutoff or reduce the squeezing parameter")]
    TruncationOverflow { trace_loss: f64, limit: f64 },

    /// Every point of the witness anti-squeezing grid overflowed the padded
    /// basis, so no witness value can be reported.
    #[error("witness evaluation failed: squeeze conjugation overflowed at every grid point s = {failing_s:?}")]
    WitnessGridOverflow { failing_s: Vec<f64> },

    /// Conditioning on an event of zero probability.
    #[error("conditioning on a zero-probability event: {0}")]
    NoEvent(String),

    /// The requested herald outcome cannot occur under the given detector.
    #[error("herald outcome m={m} has zero probability under this detector and input state")]
    ImpossibleHerald { m: usize },

    /// Measured variances or efficiencies outside their physical domain.
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    /// A calibration formula is evaluated too close to a singular point.
    #[error("ill-conditioned measurement: {0}")]
    IllConditionedMeasurement(String),

    /// Calibration inputs that contradict each other (e.g. a loss split that
    /// would require a negative impurity).
    #[error("inconsistent calibration: {0}")]
    InconsistentCalibration(String),

    /// The one-dimensional boundary optimizer could not certify its result.
    #[error("boundary search failed: {0}")]
    BoundarySearch(String),

    /// A configuration file or parameter set is invalid. `path` identifies
    /// the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// No detector preset with this name exists.
    #[error("unknown detector preset `{0}` (run the preset listing to see available names)")]
    UnknownPreset(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (zero-probability conditioning,
    /// truncation overflow, optimizer breakdown) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InsufficientCutoff { .. }
                | Error::TruncationOverflow { .. }
                | Error::WitnessGridOverflow { .. }
                | Error::NoEvent(_)
                | Error::ImpossibleHerald { .. }
                | Error::IllConditionedMeasurement(_)
                | Error::BoundarySearch(_)
        )
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
