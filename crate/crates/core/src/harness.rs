//! Monte-Carlo experiment harness: event routing, per-trial pipeline,
//! seeded trial fan-out, metric aggregation, and report emission.
//!
//! One trial runs the full receive chain for a drawn event:
//! snapshot simulation → per-bin sample covariance → incoherent MUSIC →
//! bearing estimate → matched spectrum estimate → spectral centroid →
//! nearest-center classification. Trials are independently seeded from a
//! master seed by a counter-mixing fold, so any subset of the sweep can be
//! reproduced in isolation and parallel execution cannot change results.

use std::fmt;
use std::fs;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{simulate_snapshot, SourceTruth, UlaConfig};
use crate::channel::{channel_response, noise_psd, AbsorptionTable, ChannelParams};
use crate::classifier::{classify, estimate_psd, spectral_centroid, EstimatedPsd};
use crate::doa::{
    default_angle_grid, estimate_doa, estimate_doa_refined, imusic_spectrum, sample_covariance,
    ImusicSpectrum,
};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::pulse::{pulse_spectrum, EventAlphabet};

/// Receiver front-end layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UlaMode {
    /// One array observes the full band.
    Single,
    /// Two arrays split the band at [`ExperimentOptions::split_hz`]; each
    /// event is received by the array whose band holds its center.
    Dual,
}

impl fmt::Display for UlaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UlaMode::Single => "single",
            UlaMode::Dual => "dual",
        })
    }
}

/// Tunable estimator options with sensible defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOptions {
    /// Angle-grid step (degrees).
    pub grid_step_deg: f64,
    /// When set, bins whose matched signal-to-noise ratio
    /// `|H·P|²/σ²` falls below the threshold are dropped from the
    /// bearing estimate (the spectrum estimate always uses every bin).
    pub snr_threshold: Option<f64>,
    /// Refine the bearing with a three-point parabolic fit.
    pub parabolic_refinement: bool,
    /// Signal-subspace dimension assumed by MUSIC.
    pub num_sources: usize,
    /// Snapshot count per trial (single-pulse operation uses 1).
    pub k_snapshots: usize,
    /// Dual-mode routing split (Hz): centers below go to the first array,
    /// centers at or above to the second.
    pub split_hz: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            grid_step_deg: 0.05,
            snr_threshold: None,
            parabolic_refinement: false,
            num_sources: 1,
            k_snapshots: 1,
            split_hz: 2.0e12,
        }
    }
}

/// A full Monte-Carlo sweep specification.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: UlaMode,
    /// One array for [`UlaMode::Single`], two (low band, high band) for
    /// [`UlaMode::Dual`].
    pub ulas: Vec<UlaConfig>,
    pub alphabet: EventAlphabet,
    /// True source bearing (degrees).
    pub theta_true_deg: f64,
    /// Link distances to sweep (m).
    pub distances: Vec<f64>,
    /// Trials per (event, distance) cell.
    pub n_runs: usize,
    pub master_seed: u64,
    pub medium: AbsorptionTable,
    /// System temperature (K).
    pub t0: f64,
    /// Event centers (THz) excluded from the "excluding" overall
    /// true-positive rate, for symbols deliberately placed on absorption
    /// features.
    pub exclude_centers_thz: Vec<f64>,
    pub options: ExperimentOptions,
}

impl ExperimentConfig {
    /// Index of the array that receives an event centered at `f_c`.
    pub fn route_ula(&self, f_c: f64) -> Result<usize> {
        let idx = match self.mode {
            UlaMode::Single => 0,
            UlaMode::Dual => {
                if f_c < self.options.split_hz {
                    0
                } else {
                    1
                }
            }
        };
        let ula = self.ulas.get(idx).ok_or_else(|| {
            Error::InvalidConfig(format!("no array at route index {idx} ({} mode)", self.mode))
        })?;
        if f_c < ula.f_lo || f_c > ula.f_hi {
            return Err(Error::InvalidConfig(format!(
                "event center {:.4} THz falls outside the routed array band \
                 [{:.4}, {:.4}] THz",
                f_c / 1e12,
                ula.f_lo / 1e12,
                ula.f_hi / 1e12
            )));
        }
        Ok(idx)
    }

    /// Check cross-field invariants before a sweep.
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            UlaMode::Single if self.ulas.len() != 1 => {
                return Err(Error::InvalidConfig(format!(
                    "single mode needs exactly 1 array, got {}",
                    self.ulas.len()
                )));
            }
            UlaMode::Dual if self.ulas.len() != 2 => {
                return Err(Error::InvalidConfig(format!(
                    "dual mode needs exactly 2 arrays, got {}",
                    self.ulas.len()
                )));
            }
            _ => {}
        }
        if self.mode == UlaMode::Dual {
            let (hi0, lo1) = (self.ulas[0].f_hi, self.ulas[1].f_lo);
            if (hi0 - lo1).abs() > 1e-9 * lo1.abs() {
                return Err(Error::InvalidConfig(format!(
                    "dual arrays must share a band edge: low array ends at \
                     {:.4} THz, high array starts at {:.4} THz",
                    hi0 / 1e12,
                    lo1 / 1e12
                )));
            }
        }
        if self.alphabet.is_empty() {
            return Err(Error::InvalidConfig("alphabet has no symbols".into()));
        }
        for sym in self.alphabet.symbols() {
            self.route_ula(sym.f_c)?;
        }
        let (med_lo, med_hi) = self.medium.band();
        for (i, ula) in self.ulas.iter().enumerate() {
            if ula.f_lo < med_lo || ula.f_hi > med_hi {
                return Err(Error::InvalidConfig(format!(
                    "absorption table covers [{:.4}, {:.4}] THz but array {i} \
                     needs [{:.4}, {:.4}] THz",
                    med_lo / 1e12,
                    med_hi / 1e12,
                    ula.f_lo / 1e12,
                    ula.f_hi / 1e12
                )));
            }
        }
        if !(self.theta_true_deg > -90.0 && self.theta_true_deg < 90.0) {
            return Err(Error::InvalidConfig(format!(
                "true bearing must lie strictly inside (-90°, 90°), got {}°",
                self.theta_true_deg
            )));
        }
        if self.distances.is_empty() || self.distances.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::InvalidConfig(
                "distance sweep must be non-empty with positive distances".into(),
            ));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("trial count must be >= 1".into()));
        }
        let o = &self.options;
        if !(o.grid_step_deg > 0.0 && o.grid_step_deg <= 90.0) {
            return Err(Error::InvalidConfig(format!(
                "angle-grid step must lie in (0, 90], got {}",
                o.grid_step_deg
            )));
        }
        if o.k_snapshots == 0 {
            return Err(Error::InvalidConfig("snapshot count must be >= 1".into()));
        }
        let n_min = self.ulas.iter().map(|u| u.n_elements).min().unwrap_or(0);
        if o.num_sources == 0 || o.num_sources >= n_min {
            return Err(Error::InvalidConfig(format!(
                "source count must lie in 1..{n_min}, got {}",
                o.num_sources
            )));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive the per-trial RNG seed from the master seed and the trial's
/// `(event, distance, trial)` indices.
///
/// Each coordinate is folded through a SplitMix64 finalizer with a distinct
/// odd multiplier, so distinct index tuples map to distinct, well-spread
/// seeds and the sweep can be re-run cell by cell.
pub fn trial_seed(master_seed: u64, event: usize, d_idx: usize, trial: usize) -> u64 {
    let mut s = mix(master_seed ^ 0x9e3779b97f4a7c15);
    s = mix(s ^ (event as u64).wrapping_mul(0xff51afd7ed558ccd));
    s = mix(s ^ (d_idx as u64).wrapping_mul(0xc4ceb9fe1a85ec53));
    mix(s ^ (trial as u64).wrapping_mul(0x9e3779b97f4a7c15))
}

/// Outcome of one simulated transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Transmitted event index.
    pub event_true: usize,
    /// Classified event index.
    pub event_est: usize,
    /// Estimated bearing (degrees).
    pub theta_hat_deg: f64,
    /// Measured spectral centroid (Hz).
    pub f_cen_hz: f64,
    /// Link distance (m).
    pub d_r: f64,
    /// RNG seed the trial ran with.
    pub seed: u64,
}

/// Run the full pipeline for one transmission.
pub fn run_trial(
    cfg: &ExperimentConfig,
    event_id: usize,
    d_r: f64,
    seed: u64,
) -> Result<TrialResult> {
    run_trial_detailed(cfg, event_id, d_r, seed).map(|(trial, _, _)| trial)
}

/// [`run_trial`], additionally returning the bearing pseudo-spectrum and the
/// estimated power spectral density the decision was made from.
pub fn run_trial_detailed(
    cfg: &ExperimentConfig,
    event_id: usize,
    d_r: f64,
    seed: u64,
) -> Result<(TrialResult, ImusicSpectrum, EstimatedPsd)> {
    let sym = cfg.alphabet.symbols().get(event_id).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "event index {event_id} is outside the {}-symbol alphabet",
            cfg.alphabet.len()
        ))
    })?;
    let ula = &cfg.ulas[cfg.route_ula(sym.f_c)?];
    let truth = SourceTruth { theta_deg: cfg.theta_true_deg, d_r, event_id };
    let snaps = simulate_snapshot(
        ula,
        &sym.spec,
        &cfg.medium,
        cfg.t0,
        &truth,
        cfg.options.k_snapshots,
        seed,
    )?;
    let covs: Vec<(f64, CMat)> = snaps.iter().map(|s| (s.f_hz, sample_covariance(s))).collect();

    // Optional SNR gating for the bearing stage only.
    let doa_covs: Vec<(f64, CMat)> = match cfg.options.snr_threshold {
        None => covs.clone(),
        Some(thr) => {
            let params = ChannelParams::with_temperature(d_r, sym.f_c, cfg.t0)?;
            let mut kept = Vec::new();
            for (f_b, cov) in &covs {
                let hp = (channel_response(&params, &cfg.medium, *f_b)?
                    * pulse_spectrum(&sym.spec, *f_b))
                .norm_sqr();
                let psd = pulse_spectrum(&sym.spec, *f_b).norm_sqr() / ula.delta_t;
                let sigma2 = noise_psd(&params, &cfg.medium, psd, *f_b)? * ula.delta_t;
                if sigma2 == 0.0 || hp / sigma2 >= thr {
                    kept.push((*f_b, cov.clone()));
                }
            }
            if kept.is_empty() {
                return Err(Error::Degenerate(
                    "SNR threshold removed every frequency bin".into(),
                ));
            }
            kept
        }
    };

    let grid = default_angle_grid(cfg.options.grid_step_deg);
    let spectrum = imusic_spectrum(&doa_covs, ula, &grid, cfg.options.num_sources)?;
    let theta_hat = if cfg.options.parabolic_refinement {
        estimate_doa_refined(&spectrum)?
    } else {
        estimate_doa(&spectrum)?
    };
    let psd = estimate_psd(&covs, ula, theta_hat)?;
    let f_cen = spectral_centroid(&psd)?;
    let event_est = classify(f_cen, &cfg.alphabet);
    let trial = TrialResult {
        event_true: event_id,
        event_est,
        theta_hat_deg: theta_hat,
        f_cen_hz: f_cen,
        d_r,
        seed,
    };
    Ok((trial, spectrum, psd))
}

/// Per-(event, distance) aggregate metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub event_id: usize,
    pub f_c_hz: f64,
    pub d_r_m: f64,
    /// RMS bearing error (degrees) over the cell's trials.
    pub rmse_doa_deg: f64,
    /// RMS centroid error (Hz) against the true center, on the raw
    /// centroid (not the classified center).
    pub rmse_fc_hz: f64,
    /// Fraction of trials classified as the transmitted event.
    pub tpr: f64,
    pub n_runs: usize,
}

/// Confusion counts for one distance: `counts[est][true]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub d_r_m: f64,
    pub counts: Vec<Vec<usize>>,
}

/// Overall true-positive rates for one distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallRow {
    pub d_r_m: f64,
    /// Over every event.
    pub tpr_all: f64,
    /// Over events whose centers are not in the exclusion list.
    pub tpr_excluding: f64,
}

/// Everything a sweep produced.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub mode: UlaMode,
    /// Alphabet centers (Hz), indexing the confusion matrices.
    pub centers_hz: Vec<f64>,
    pub rows: Vec<MetricRow>,
    pub confusion: Vec<ConfusionMatrix>,
    pub overall: Vec<OverallRow>,
    pub trials: Vec<TrialResult>,
}

fn is_excluded(f_c_hz: f64, exclude_centers_thz: &[f64]) -> bool {
    exclude_centers_thz
        .iter()
        .any(|&ex| (f_c_hz / 1e12 - ex).abs() <= 1e-9 * ex.abs().max(1.0))
}

/// Run the full sweep: every alphabet event × distance × trial.
///
/// Trials are seeded by [`trial_seed`] and aggregated in fixed index order,
/// so the report is identical whether or not the `parallel` feature is
/// enabled.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let n_events = cfg.alphabet.len();
    let n_dist = cfg.distances.len();
    let n_runs = cfg.n_runs;

    let mut tasks = Vec::with_capacity(n_events * n_dist * n_runs);
    for event in 0..n_events {
        for d_idx in 0..n_dist {
            for trial in 0..n_runs {
                tasks.push((event, d_idx, trial));
            }
        }
    }

    let run_one = |&(event, d_idx, trial): &(usize, usize, usize)| -> Result<TrialResult> {
        run_trial(
            cfg,
            event,
            cfg.distances[d_idx],
            trial_seed(cfg.master_seed, event, d_idx, trial),
        )
    };

    #[cfg(feature = "parallel")]
    let trials: Vec<TrialResult> = tasks.par_iter().map(run_one).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let trials: Vec<TrialResult> = tasks.iter().map(run_one).collect::<Result<_>>()?;

    let cell = |event: usize, d_idx: usize| -> &[TrialResult] {
        let start = (event * n_dist + d_idx) * n_runs;
        &trials[start..start + n_runs]
    };

    let mut rows = Vec::with_capacity(n_events * n_dist);
    let mut confusion = Vec::with_capacity(n_dist);
    let mut overall = Vec::with_capacity(n_dist);
    for (d_idx, &d_r) in cfg.distances.iter().enumerate() {
        let mut counts = vec![vec![0usize; n_events]; n_events];
        let mut correct_all = 0usize;
        let mut correct_excl = 0usize;
        let mut total_excl = 0usize;
        for (event, sym) in cfg.alphabet.symbols().iter().enumerate() {
            let cell_trials = cell(event, d_idx);
            let mut se_doa = 0.0;
            let mut se_fc = 0.0;
            let mut hits = 0usize;
            for t in cell_trials {
                se_doa += (t.theta_hat_deg - cfg.theta_true_deg).powi(2);
                se_fc += (t.f_cen_hz - sym.f_c).powi(2);
                if t.event_est == t.event_true {
                    hits += 1;
                }
                counts[t.event_est][t.event_true] += 1;
            }
            rows.push(MetricRow {
                event_id: event,
                f_c_hz: sym.f_c,
                d_r_m: d_r,
                rmse_doa_deg: (se_doa / n_runs as f64).sqrt(),
                rmse_fc_hz: (se_fc / n_runs as f64).sqrt(),
                tpr: hits as f64 / n_runs as f64,
                n_runs,
            });
            correct_all += hits;
            if !is_excluded(sym.f_c, &cfg.exclude_centers_thz) {
                correct_excl += hits;
                total_excl += n_runs;
            }
        }
        confusion.push(ConfusionMatrix { d_r_m: d_r, counts });
        overall.push(OverallRow {
            d_r_m: d_r,
            tpr_all: correct_all as f64 / (n_events * n_runs) as f64,
            tpr_excluding: if total_excl > 0 {
                correct_excl as f64 / total_excl as f64
            } else {
                f64::NAN
            },
        });
    }

    Ok(MetricsReport {
        mode: cfg.mode,
        centers_hz: cfg.alphabet.centers(),
        rows,
        confusion,
        overall,
        trials,
    })
}

/// On-disk report format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// `metrics.csv`, `overall.csv`, and one `confusion_<d>m.csv` per
    /// distance.
    Csv,
    /// A single `report.json` with the entire [`MetricsReport`].
    Json,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file =
        fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Write a report into `out_dir` (created if missing); returns the paths
/// written. Emission is deterministic: equal reports produce byte-identical
/// files.
pub fn emit_report(
    report: &MetricsReport,
    format: ReportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Json => {
            let path = out_dir.join("report.json");
            let mut text = serde_json::to_string_pretty(report)
                .map_err(|e| Error::InvalidConfig(format!("report serialization failed: {e}")))?;
            text.push('\n');
            write_file(&path, &text)?;
            written.push(path);
        }
        ReportFormat::Csv => {
            let mut metrics = String::from("ula_mode,f_c_thz,d_r_m,metric,value\n");
            for r in &report.rows {
                let head = format!("{},{},{}", report.mode, r.f_c_hz / 1e12, r.d_r_m);
                metrics.push_str(&format!("{head},rmse_doa_deg,{}\n", r.rmse_doa_deg));
                metrics.push_str(&format!("{head},rmse_fc_thz,{}\n", r.rmse_fc_hz / 1e12));
                metrics.push_str(&format!("{head},tpr,{}\n", r.tpr));
            }
            let path = out_dir.join("metrics.csv");
            write_file(&path, &metrics)?;
            written.push(path);

            let mut overall = String::from("ula_mode,d_r_m,tpr_all,tpr_excluding\n");
            for o in &report.overall {
                overall.push_str(&format!(
                    "{},{},{},{}\n",
                    report.mode, o.d_r_m, o.tpr_all, o.tpr_excluding
                ));
            }
            let path = out_dir.join("overall.csv");
            write_file(&path, &overall)?;
            written.push(path);

            for cm in &report.confusion {
                let mut text = String::from("estimated_fc_thz");
                for &c in &report.centers_hz {
                    text.push_str(&format!(",true_{}", c / 1e12));
                }
                text.push('\n');
                for (est, row_counts) in cm.counts.iter().enumerate() {
                    text.push_str(&format!("{}", report.centers_hz[est] / 1e12));
                    for &n in row_counts {
                        text.push_str(&format!(",{n}"));
                    }
                    text.push('\n');
                }
                text.push_str("tpr");
                for j in 0..report.centers_hz.len() {
                    let col_total: usize = cm.counts.iter().map(|row| row[j]).sum();
                    let tpr = if col_total > 0 {
                        cm.counts[j][j] as f64 / col_total as f64
                    } else {
                        f64::NAN
                    };
                    text.push_str(&format!(",{tpr}"));
                }
                text.push('\n');
                let path = out_dir.join(format!("confusion_{}m.csv", cm.d_r_m));
                write_file(&path, &text)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Write every trial as one JSON object per line.
pub fn emit_trials_jsonl(report: &MetricsReport, path: &Path) -> Result<()> {
    let mut text = String::new();
    for t in &report.trials {
        let line = serde_json::to_string(t)
            .map_err(|e| Error::InvalidConfig(format!("trial serialization failed: {e}")))?;
        text.push_str(&line);
        text.push('\n');
    }
    write_file(path, &text)
}
