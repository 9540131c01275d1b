//! Error type shared by every module in the crate.

use thiserror::Error;

/// Unified error for simulator operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A frequency fell outside the absorption table's tabulated band.
    #[error("frequency {f_hz:.6e} Hz is outside the tabulated band [{lo_hz:.6e}, {hi_hz:.6e}] Hz")]
    OutOfBand {
        /// Offending frequency (Hz).
        f_hz: f64,
        /// Lower band edge (Hz).
        lo_hz: f64,
        /// Upper band edge (Hz).
        hi_hz: f64,
    },

    /// A configuration value is inconsistent or physically impossible.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A data file failed validation while being read.
    #[error("{path}: row {row}: {reason}")]
    Ingestion {
        /// File being ingested.
        path: String,
        /// 1-based row number (header included in the count).
        row: usize,
        /// What was wrong with the row.
        reason: String,
    },

    /// Two alphabet symbols have overlapping half-power bands.
    #[error(
        "alphabet invalid: half-power bands of the {lower_hz:.6e} Hz and {upper_hz:.6e} Hz \
         symbols overlap"
    )]
    AlphabetOverlap {
        /// Center frequency of the lower symbol in the colliding pair (Hz).
        lower_hz: f64,
        /// Center frequency of the upper symbol in the colliding pair (Hz).
        upper_hz: f64,
    },

    /// A caller violated a numerical contract (e.g. a non-Hermitian matrix
    /// was passed to the Hermitian eigensolver).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An input was degenerate in a way that leaves the result undefined
    /// (e.g. an all-zero power spectrum has no centroid).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An I/O operation failed; the path is always included.
    #[error("{path}: {source}")]
    Io {
        /// File or directory involved.
        path: String,
        /// Underlying OS error.
        source: std::io::Error,
    },
}

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
