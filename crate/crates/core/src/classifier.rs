//! Event classification from the localized source's estimated power
//! spectrum.
//!
//! After DOA estimation, each bin's sample covariance is projected onto the
//! steering vector at the estimated bearing, `Ŝ(f_b) = Re(âᴴ R̂ â)/N²`,
//! giving a matched estimate of the received squared spectrum. The spectral
//! centroid of `Ŝ` then picks the nearest event-symbol center frequency.

use crate::array::{steering_vector, UlaConfig};
use crate::error::{Error, Result};
use crate::linalg::{cdot, CMat};
use crate::pulse::EventAlphabet;

/// Estimated received power spectrum over the bin grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedPsd {
    /// Bin frequencies (Hz).
    pub bins: Vec<f64>,
    /// Nonnegative spectrum estimate per bin.
    pub values: Vec<f64>,
}

/// Project each bin's covariance onto the steering vector at the estimated
/// bearing: `Ŝ(f_b) = max(0, Re(â(f_b)ᴴ R̂(f_b) â(f_b)) / N²)`.
pub fn estimate_psd(
    covs: &[(f64, CMat)],
    ula: &UlaConfig,
    theta_hat_deg: f64,
) -> Result<EstimatedPsd> {
    let n = ula.n_elements;
    let n2 = (n * n) as f64;
    let mut bins = Vec::with_capacity(covs.len());
    let mut values = Vec::with_capacity(covs.len());
    for (f_b, cov) in covs {
        if cov.rows() != n || cov.cols() != n {
            return Err(Error::Contract(format!(
                "covariance at {f_b} Hz is {}x{}, expected {n}x{n}",
                cov.rows(),
                cov.cols()
            )));
        }
        let a = steering_vector(*f_b, theta_hat_deg, n, ula.spacing);
        let ra = cov.matvec(&a);
        let power = cdot(&a, &ra).re / n2;
        bins.push(*f_b);
        values.push(power.max(0.0));
    }
    Ok(EstimatedPsd { bins, values })
}

/// Power-weighted mean frequency `Σ f·Ŝ(f) / Σ Ŝ(f)`.
///
/// Fails with [`Error::Degenerate`] when the spectrum carries no mass.
pub fn spectral_centroid(psd: &EstimatedPsd) -> Result<f64> {
    if psd.bins.is_empty() || psd.bins.len() != psd.values.len() {
        return Err(Error::Degenerate("spectrum is empty or ragged".into()));
    }
    let mut mass = 0.0;
    let mut moment = 0.0;
    for (f, s) in psd.bins.iter().zip(psd.values.iter()) {
        mass += s;
        moment += f * s;
    }
    if !(mass > 0.0) {
        return Err(Error::Degenerate(
            "spectral centroid undefined: estimated spectrum has zero mass".into(),
        ));
    }
    Ok(moment / mass)
}

/// Index of the alphabet symbol whose center frequency is nearest to the
/// measured centroid; ties resolve to the lower index.
pub fn classify(f_centroid: f64, alphabet: &EventAlphabet) -> usize {
    assert!(!alphabet.is_empty(), "classification needs a non-empty alphabet");
    let mut best = 0usize;
    let mut best_err = (f_centroid - alphabet.symbols()[0].f_c).abs();
    for (i, sym) in alphabet.symbols().iter().enumerate().skip(1) {
        let err = (f_centroid - sym.f_c).abs();
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    best
}
