//! nth-derivative Gaussian pulse spectra and the event symbol alphabet.
//!
//! Events are encoded as single pulses shaped like the nth derivative of a
//! Gaussian. In the frequency domain,
//!
//! ```text
//! P_n(f) = a_n · (j 2π f)ⁿ · exp(−(2π σ f)² / 2)
//! ```
//!
//! whose magnitude peaks at the center frequency `f_c = √n / (2π σ)`. An
//! event alphabet assigns each event class its own center frequency with
//! non-overlapping half-power bands, all pulses carrying the same energy.
//!
//! `|P_n(f)|²` is an energy spectral density (J/Hz): the normalization
//! constant `a_n` is chosen so that the two-sided energy sum over the
//! receiver's bin grid equals the configured pulse energy (the time-domain
//! pulse is real, hence the factor 2 on the positive-frequency sum).

use num_complex::Complex64;

use crate::array::bins_for_band;
use crate::error::{Error, Result};

/// One transmit-pulse shape: Gaussian-derivative order, width, and energy
/// normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Derivative order `n ≥ 1`.
    pub n: u32,
    /// Gaussian standard deviation σ (s).
    pub sigma: f64,
    /// Spectral normalization constant (units such that `|P_n(f)|²` is
    /// J/Hz).
    pub a_n: f64,
    /// Total pulse energy (J) that `a_n` was normalized to.
    pub energy: f64,
}

/// Pulse duration under the `T_p = 10σ` convention (contains essentially
/// all pulse energy).
pub fn pulse_duration(sigma: f64) -> f64 {
    10.0 * sigma
}

/// Center frequency `√n / (2π σ)` — the magnitude peak of the spectrum.
pub fn center_frequency(n: u32, sigma: f64) -> f64 {
    (n as f64).sqrt() / (2.0 * std::f64::consts::PI * sigma)
}

/// Gaussian width giving center frequency `f_c`: `σ = √n / (2π f_c)`.
/// Round-trips with [`center_frequency`] to machine precision.
pub fn sigma_for_center(n: u32, f_c: f64) -> f64 {
    (n as f64).sqrt() / (2.0 * std::f64::consts::PI * f_c)
}

/// Complex pulse spectrum `P_n(f)` at `f ≥ 0`.
///
/// The magnitude is evaluated in log space, so large orders and far-out
/// frequencies never overflow; underflow to zero far from the passband is
/// benign.
pub fn pulse_spectrum(spec: &PulseSpec, f: f64) -> Complex64 {
    debug_assert!(f >= 0.0, "spectrum is defined on non-negative frequencies");
    if f == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = 2.0 * std::f64::consts::PI * f;
    let gauss_arg = 2.0 * std::f64::consts::PI * spec.sigma * f;
    let log_mag = spec.n as f64 * w.ln() - 0.5 * gauss_arg * gauss_arg;
    let mag = spec.a_n * log_mag.exp();
    // (j)^n cycles with period 4.
    match spec.n % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Normalization constant `a_n` such that the two-sided pulse energy on the
/// receiver bin grid equals `target_energy`:
///
/// ```text
/// 2 · Σ_bins |P_n(f_b)|² · Δf = target_energy
/// ```
///
/// The sum runs over the same bin layout the receiver uses
/// ([`bins_for_band`]), so simulated per-bin signal energy is exactly
/// consistent with the declared pulse energy.
pub fn normalize_energy(
    n: u32,
    sigma: f64,
    target_energy: f64,
    band: (f64, f64),
    bin_width: f64,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidConfig("pulse derivative order must be >= 1".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!("pulse sigma must be > 0, got {sigma}")));
    }
    if !(target_energy > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "pulse energy must be > 0, got {target_energy}"
        )));
    }
    if !(band.0 < band.1) || !(bin_width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "degenerate normalization band {:?} with bin width {bin_width}",
            band
        )));
    }
    let bins = bins_for_band(band.0, band.1, bin_width);
    if bins.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "normalization band {band:?} contains no bins at width {bin_width}"
        )));
    }
    let unit = PulseSpec { n, sigma, a_n: 1.0, energy: target_energy };
    let sum: f64 = bins.iter().map(|&f| pulse_spectrum(&unit, f).norm_sqr()).sum();
    if sum == 0.0 {
        return Err(Error::InvalidConfig(format!(
            "pulse centered at {:.3e} Hz has no energy inside band {band:?}",
            center_frequency(n, sigma)
        )));
    }
    Ok((target_energy / (2.0 * sum * bin_width)).sqrt())
}

/// Half-power band edges `(f_l, f_h)`: the two frequencies where
/// `|P_n(f)|²` falls to half its peak value.
///
/// Solved by bisection in the scale-free variable `x = f/f_c` to 10⁻⁶
/// relative tolerance, so the edges scale exactly linearly with `f_c` at
/// fixed order.
pub fn half_power_band(n: u32, sigma: f64) -> (f64, f64) {
    let f_c = center_frequency(n, sigma);
    let nf = n as f64;
    // log |P(x·f_c)|² − log |P(f_c)|² + log 2 = 2n ln x − n x² + n + ln 2;
    // roots bracket x = 1 where the expression equals ln 2 > 0.
    let g = |x: f64| 2.0 * nf * x.ln() - nf * x * x + nf + std::f64::consts::LN_2;
    let bisect = |mut lo: f64, mut hi: f64| -> f64 {
        // Invariant maintained by the caller: g(lo) and g(hi) have opposite
        // signs, with g > 0 on the side nearer x = 1.
        let rising = g(lo) < 0.0;
        loop {
            let mid = 0.5 * (lo + hi);
            if (hi - lo) <= 1e-6 * mid {
                return mid;
            }
            if (g(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    };
    // g(10⁻³) < 0 < g(1) and g(2) < 0 for every n ≥ 1.
    let x_lo = bisect(1e-3, 1.0);
    let x_hi = bisect(1.0, 2.0);
    (x_lo * f_c, x_hi * f_c)
}

// ---------------------------------------------------------------------------
// Event alphabet
// ---------------------------------------------------------------------------

/// One event class of the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSymbol {
    /// 0-based event index (alphabet order = ascending center frequency).
    pub id: usize,
    /// Center frequency (Hz).
    pub f_c: f64,
    /// Pulse shape with energy normalization applied.
    pub spec: PulseSpec,
    /// Half-power band `(f_l, f_h)` (Hz).
    pub half_power: (f64, f64),
}

/// Ordered set of event symbols with non-overlapping half-power bands.
#[derive(Debug, Clone, PartialEq)]
pub struct EventAlphabet {
    symbols: Vec<EventSymbol>,
}

impl EventAlphabet {
    /// Symbols in ascending center-frequency order.
    pub fn symbols(&self) -> &[EventSymbol] {
        &self.symbols
    }

    /// Number of event classes.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// True when the alphabet has no symbols (never constructible through
    /// [`build_alphabet`]).
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Center frequencies (Hz) in symbol order.
    pub fn centers(&self) -> Vec<f64> {
        self.symbols.iter().map(|s| s.f_c).collect()
    }
}

/// Build an alphabet with every symbol normalized on the same band.
///
/// See [`build_alphabet_with_bands`] for per-symbol normalization bands
/// (used by dual-array receivers where each symbol is observed by the array
/// covering its center frequency).
pub fn build_alphabet(
    n: u32,
    center_frequencies: &[f64],
    energy: f64,
    band: (f64, f64),
    bin_width: f64,
) -> Result<EventAlphabet> {
    build_alphabet_with_bands(n, center_frequencies, energy, |_| band, bin_width)
}

/// Build an alphabet where symbol `i`'s energy normalization runs over
/// `band_for(f_c_i)`.
///
/// Validates ascending center frequencies and pairwise non-overlap of
/// half-power bands, naming the first colliding pair.
pub fn build_alphabet_with_bands(
    n: u32,
    center_frequencies: &[f64],
    energy: f64,
    band_for: impl Fn(f64) -> (f64, f64),
    bin_width: f64,
) -> Result<EventAlphabet> {
    if center_frequencies.is_empty() {
        return Err(Error::InvalidConfig("alphabet needs at least one center frequency".into()));
    }
    for (i, &f_c) in center_frequencies.iter().enumerate() {
        if !(f_c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alphabet center frequencies must be > 0, got {f_c} Hz"
            )));
        }
        if i > 0 && f_c <= center_frequencies[i - 1] {
            return Err(Error::InvalidConfig(format!(
                "alphabet center frequencies must be strictly increasing \
                 ({f_c} Hz after {} Hz)",
                center_frequencies[i - 1]
            )));
        }
    }
    let mut symbols = Vec::with_capacity(center_frequencies.len());
    for (id, &f_c) in center_frequencies.iter().enumerate() {
        let sigma = sigma_for_center(n, f_c);
        let a_n = normalize_energy(n, sigma, energy, band_for(f_c), bin_width)?;
        let spec = PulseSpec { n, sigma, a_n, energy };
        symbols.push(EventSymbol { id, f_c, spec, half_power: half_power_band(n, sigma) });
    }
    for pair in symbols.windows(2) {
        if pair[0].half_power.1 > pair[1].half_power.0 {
            return Err(Error::AlphabetOverlap {
                lower_hz: pair[0].f_c,
                upper_hz: pair[1].f_c,
            });
        }
    }
    Ok(EventAlphabet { symbols })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference alphabet parameters used throughout the test suite.
    pub(crate) const REFERENCE_CENTERS_HZ: [f64; 6] =
        [0.5e12, 1.0e12, 1.65e12, 2.75e12, 4.7e12, 7.7e12];
    const ORDER: u32 = 6;
    const ENERGY_J: f64 = 1e-18;
    const DELTA_T: f64 = 9e-12;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
    }

    fn reference_spec(f_c: f64) -> PulseSpec {
        let sigma = sigma_for_center(ORDER, f_c);
        let a_n =
            normalize_energy(ORDER, sigma, ENERGY_J, (0.1e12, 10.0e12), 1.0 / DELTA_T).unwrap();
        PulseSpec { n: ORDER, sigma, a_n, energy: ENERGY_J }
    }

    // --- spectrum shape ------------------------------------------------------

    #[test]
    fn zero_at_dc() {
        let spec = reference_spec(4.7e12);
        assert_eq!(pulse_spectrum(&spec, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn magnitude_peaks_at_center_frequency() {
        let spec = reference_spec(4.7e12);
        let peak = pulse_spectrum(&spec, 4.7e12).norm();
        for &f in &bins_for_band(0.1e12, 10.0e12, 1.0 / DELTA_T) {
            assert!(pulse_spectrum(&spec, f).norm() <= peak);
        }
        // Local check right around the analytic maximum.
        assert!(peak >= pulse_spectrum(&spec, 4.7e12 - 1e9).norm());
        assert!(peak >= pulse_spectrum(&spec, 4.7e12 + 1e9).norm());
    }

    #[test]
    fn spectrum_phase_follows_j_to_the_n() {
        let sigma = sigma_for_center(1, 1.0e12);
        for (n, expect_axis) in [(1u32, (0.0, 1.0)), (2, (-1.0, 0.0)), (3, (0.0, -1.0)), (4, (1.0, 0.0))] {
            let spec = PulseSpec { n, sigma, a_n: 1e-80, energy: 1.0 };
            let v = pulse_spectrum(&spec, 0.9e12);
            let unit = v / v.norm();
            assert!(close(unit.re, expect_axis.0, 1e-12) || (unit.re - expect_axis.0).abs() < 1e-12);
            assert!((unit.im - expect_axis.1).abs() < 1e-12);
        }
    }

    // --- center-frequency algebra ---------------------------------------------

    #[test]
    fn center_frequency_from_duration_reference_point() {
        // T_p = 0.82 ps ⇒ σ = 82 fs ⇒ f_c ≈ 4.75 THz, within 2% of 4.7 THz.
        let f_c = center_frequency(6, 82e-15);
        assert!(close(f_c, 4.7e12, 0.02), "got {f_c}");
    }

    #[test]
    fn unit_normalization_order_one() {
        let f_c = center_frequency(1, 1.0 / (2.0 * std::f64::consts::PI));
        assert!(close(f_c, 1.0, 1e-15));
    }

    #[test]
    fn quadrupling_order_doubles_center() {
        let sigma = 1e-13;
        assert!(close(center_frequency(8, sigma), 2.0 * center_frequency(2, sigma), 1e-15));
    }

    #[test]
    fn sigma_inverts_center_frequency() {
        for &f_c in &REFERENCE_CENTERS_HZ {
            let sigma = sigma_for_center(ORDER, f_c);
            assert!(close(center_frequency(ORDER, sigma), f_c, 1e-14));
        }
    }

    #[test]
    fn pulse_durations_match_reference_values() {
        // Independently computed T_p = 10σ for the six reference symbols (ps).
        let expected_ps = [7.7970, 3.8985, 2.3627, 1.4176, 0.8295, 0.5063];
        for (&f_c, &tp) in REFERENCE_CENTERS_HZ.iter().zip(&expected_ps) {
            let sigma = sigma_for_center(ORDER, f_c);
            assert!(
                close(pulse_duration(sigma) * 1e12, tp, 2e-4),
                "f_c = {f_c}: got {} ps, expected {tp} ps",
                pulse_duration(sigma) * 1e12
            );
        }
    }

    // --- energy normalization ---------------------------------------------------

    #[test]
    fn doubling_energy_scales_normalization_by_sqrt2() {
        let sigma = sigma_for_center(ORDER, 4.7e12);
        let a1 = normalize_energy(ORDER, sigma, 1e-18, (2e12, 10e12), 1.0 / DELTA_T).unwrap();
        let a2 = normalize_energy(ORDER, sigma, 2e-18, (2e12, 10e12), 1.0 / DELTA_T).unwrap();
        assert!(close(a2, a1 * 2.0f64.sqrt(), 1e-12));
    }

    #[test]
    fn normalization_satisfies_defining_energy_sum() {
        let sigma = sigma_for_center(ORDER, 4.7e12);
        let bin_width = 1.0 / DELTA_T;
        let a_n = normalize_energy(ORDER, sigma, ENERGY_J, (2e12, 10e12), bin_width).unwrap();
        let spec = PulseSpec { n: ORDER, sigma, a_n, energy: ENERGY_J };
        let sum: f64 = bins_for_band(2e12, 10e12, bin_width)
            .iter()
            .map(|&f| pulse_spectrum(&spec, f).norm_sqr())
            .sum();
        assert!(close(2.0 * sum * bin_width, ENERGY_J, 1e-12));
    }

    #[test]
    fn coarse_grid_normalization_matches_fine_quadrature() {
        let sigma = sigma_for_center(ORDER, 4.7e12);
        let coarse = normalize_energy(ORDER, sigma, ENERGY_J, (2e12, 10e12), 1.0 / DELTA_T).unwrap();
        let fine =
            normalize_energy(ORDER, sigma, ENERGY_J, (2e12, 10e12), 1.0 / DELTA_T / 100.0).unwrap();
        assert!(close(coarse, fine, 0.005), "coarse {coarse} vs fine {fine}");
    }

    #[test]
    fn degenerate_band_rejected() {
        let sigma = sigma_for_center(ORDER, 4.7e12);
        assert!(matches!(
            normalize_energy(ORDER, sigma, ENERGY_J, (2e12, 2e12), 1.0 / DELTA_T),
            Err(Error::InvalidConfig(_))
        ));
    }

    // --- half-power band -----------------------------------------------------

    #[test]
    fn half_power_edges_match_reference_values() {
        // Independently computed edges for the six reference symbols (THz).
        let expected_thz =
            [(0.3850, 0.6246), (0.7701, 1.2492), (1.2707, 2.0612), (2.1178, 3.4354), (3.6195, 5.8714), (5.9298, 9.6191)];
        for (&f_c, &(lo, hi)) in REFERENCE_CENTERS_HZ.iter().zip(&expected_thz) {
            let (l, h) = half_power_band(ORDER, sigma_for_center(ORDER, f_c));
            assert!(close(l / 1e12, lo, 2e-4), "f_c={f_c}: lower edge {l}");
            assert!(close(h / 1e12, hi, 2e-4), "f_c={f_c}: upper edge {h}");
        }
    }

    #[test]
    fn edges_really_are_half_power() {
        let spec = reference_spec(1.65e12);
        let (lo, hi) = half_power_band(ORDER, spec.sigma);
        let peak = pulse_spectrum(&spec, center_frequency(ORDER, spec.sigma)).norm_sqr();
        for f in [lo, hi] {
            let ratio = pulse_spectrum(&spec, f).norm_sqr() / peak;
            assert!(close(ratio, 0.5, 1e-4), "ratio {ratio} at {f}");
        }
    }

    #[test]
    fn half_power_band_scales_linearly_with_center() {
        let (l1, h1) = half_power_band(ORDER, sigma_for_center(ORDER, 2.0e12));
        let (l2, h2) = half_power_band(ORDER, sigma_for_center(ORDER, 1.0e12));
        assert!(close(l1, 2.0 * l2, 1e-12));
        assert!(close(h1, 2.0 * h2, 1e-12));
    }

    // --- alphabet -----------------------------------------------------------

    #[test]
    fn reference_six_symbol_alphabet_is_valid() {
        let alphabet = build_alphabet(
            ORDER,
            &REFERENCE_CENTERS_HZ,
            ENERGY_J,
            (0.1e12, 10.0e12),
            1.0 / DELTA_T,
        )
        .unwrap();
        assert_eq!(alphabet.len(), 6);
        let centers = alphabet.centers();
        assert!(centers.windows(2).all(|w| w[0] < w[1]));
        for s in alphabet.symbols() {
            assert!(s.spec.a_n > 0.0);
            assert!(s.half_power.0 < s.f_c && s.f_c < s.half_power.1);
        }
    }

    #[test]
    fn overlapping_bands_rejected_with_pair_names() {
        let err = build_alphabet(ORDER, &[1.0e12, 1.05e12], ENERGY_J, (0.1e12, 10.0e12), 1.0 / DELTA_T)
            .unwrap_err();
        match err {
            Error::AlphabetOverlap { lower_hz, upper_hz } => {
                assert_eq!(lower_hz, 1.0e12);
                assert_eq!(upper_hz, 1.05e12);
            }
            other => panic!("expected overlap error, got {other:?}"),
        }
    }

    #[test]
    fn single_symbol_alphabet_always_valid() {
        let alphabet =
            build_alphabet(ORDER, &[1.0e12], ENERGY_J, (0.1e12, 10.0e12), 1.0 / DELTA_T).unwrap();
        assert_eq!(alphabet.len(), 1);
    }

    // --- closed-form centroid oracle -------------------------------------------

    #[test]
    fn fine_grid_centroid_matches_gamma_ratio() {
        // ∫f|P_n|²df / ∫|P_n|²df = Γ(n+1)/(Γ(n+½)·2πσ); Γ(7) = 720,
        // Γ(6.5) = 287.88527781504433.
        let spec = reference_spec(4.7e12);
        let expected = 720.0 / (287.885_277_815_044_33 * 2.0 * std::f64::consts::PI * spec.sigma);
        let bins = bins_for_band(0.1e12, 10.0e12, 1.0 / DELTA_T / 100.0);
        let mut num = 0.0;
        let mut den = 0.0;
        for &f in &bins {
            let p = pulse_spectrum(&spec, f).norm_sqr();
            num += f * p;
            den += p;
        }
        let centroid = num / den;
        assert!(close(centroid, expected, 1e-3), "centroid {centroid} vs {expected}");
    }
}
