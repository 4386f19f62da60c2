use std::io;

use crate::types::EventLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: parse error: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: schema error: {message}")]
    Schema { line: usize, message: String },

    #[error("no onset: no time step satisfies the onset trigger")]
    NoOnset,

    #[error("segment too short: onset at step {onset} needs {needed} frames but only {available} are recorded")]
    TooShort {
        onset: usize,
        needed: usize,
        available: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no windows could be extracted (window length exceeds every channel's derivative length)")]
    EmptyFeature,

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn degenerate_pair(a: EventLabel, b: EventLabel, detail: &str) -> Self {
        Error::DegenerateLabels(format!("pair ({a}, {b}): {detail}"))
    }

    /// True for errors that come from a parameter choice starving the
    /// pipeline (no windows, too few points), as opposed to bad input data.
    pub fn is_degenerate_pipeline(&self) -> bool {
        matches!(
            self,
            Error::EmptyFeature
                | Error::InsufficientData(_)
                | Error::DegenerateLabels(_)
                | Error::Config(_)
        )
    }

    /// True for segmentation failures, which experiments skip and report.
    pub fn is_segmentation_failure(&self) -> bool {
        matches!(self, Error::NoOnset | Error::TooShort { .. })
    }
}
