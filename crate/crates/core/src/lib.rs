//! Frequency-domain simulator of single-pulse event localization and
//! classification for terahertz-band nano-IoT receivers.
//!
//! A nanosensor signals an event by radiating a single nth-derivative
//! Gaussian pulse whose center frequency identifies the event class. A
//! gateway equipped with one or two uniform linear arrays (ULAs) receives
//! the pulse through a molecular-absorption channel, forms per-frequency-bin
//! snapshots, localizes the source with incoherent MUSIC, recovers the pulse
//! power spectrum along the estimated bearing, and classifies the event by
//! spectral centroid.
//!
//! The crate is organized along that pipeline:
//!
//! - [`channel`] — absorption tables, channel frequency response, and
//!   molecular-absorption noise PSDs;
//! - [`pulse`] — Gaussian-derivative pulse spectra, center-frequency
//!   algebra, energy normalization, and the event alphabet;
//! - [`array`] — ULA geometry, frequency-bin layout, steering vectors, and
//!   snapshot simulation;
//! - [`doa`] — per-bin sample covariances, Hermitian eigendecomposition,
//!   and the incoherent-MUSIC bearing estimator;
//! - [`classifier`] — PSD recovery along a bearing, spectral centroid, and
//!   nearest-center classification;
//! - [`harness`] — Monte-Carlo experiment orchestration and metric reports;
//! - [`config`] — JSON experiment configuration (the CLI and browser demo
//!   boundary).
//!
//! All quantities are SI internally (Hz, m, s, J, W); presentation units
//! (THz, aJ, ps, degrees) appear only at the [`config`] boundary and in
//! emitted reports.

pub mod array;
pub mod channel;
pub mod classifier;
pub mod config;
pub mod doa;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pulse;

pub use error::{Error, Result};
