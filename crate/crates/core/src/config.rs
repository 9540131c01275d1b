//! JSON experiment configuration: human units in, validated SI out.
//!
//! A configuration file carries five optional sections — `medium`, `pulse`,
//! `alphabet`, `ulas`, `experiment` — each falling back to the shipped
//! defaults, so `{}` is a complete dual-array configuration. Quantities use
//! bench units (THz, ps, µm, aJ, degrees, meters) and are converted to SI
//! when the [`FileConfig`] is built into an
//! [`ExperimentConfig`](crate::harness::ExperimentConfig).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{bins_for_band, UlaConfig};
use crate::channel::{default_medium, load_absorption_csv, synth_absorption, AbsorptionTable};
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, ExperimentOptions, UlaMode};
use crate::pulse::build_alphabet_with_bands;

/// Where the absorption table comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MediumSection {
    /// The shipped synthetic medium.
    Default,
    /// A `frequency_hz,k_per_m` CSV file; relative paths resolve against
    /// the configuration file's directory.
    Csv { path: String },
    /// Baseline plus Lorentzian resonances sampled on a uniform grid.
    Synthetic {
        baseline_per_m: f64,
        #[serde(default)]
        peaks: Vec<PeakSpec>,
        grid: GridSpec,
    },
}

impl Default for MediumSection {
    fn default() -> Self {
        MediumSection::Default
    }
}

/// One synthetic absorption resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakSpec {
    pub center_thz: f64,
    pub amplitude_per_m: f64,
    pub halfwidth_thz: f64,
}

/// Uniform sampling grid for a synthetic medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo_thz: f64,
    pub hi_thz: f64,
    pub step_thz: f64,
}

/// Transmitted pulse shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    /// Gaussian derivative order.
    pub order: u32,
    /// Pulse energy (attojoules).
    pub energy_aj: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection { order: 6, energy_aj: 1.0 }
    }
}

/// Event symbol set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphabetSection {
    /// Symbol center frequencies (THz), ascending.
    pub centers_thz: Vec<f64>,
}

impl Default for AlphabetSection {
    fn default() -> Self {
        AlphabetSection { centers_thz: vec![0.5, 1.0, 1.65, 2.75, 4.7, 7.7] }
    }
}

/// One array of the receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    /// Element count (default 8).
    #[serde(default = "default_elements")]
    pub elements: usize,
    /// Element spacing (µm).
    pub spacing_um: f64,
    /// Observed band `[lo, hi]` (THz).
    pub band_thz: [f64; 2],
    /// Optional forced bin count (see
    /// [`UlaConfig::new`](crate::array::UlaConfig::new)).
    #[serde(default)]
    pub bins_override: Option<usize>,
}

fn default_elements() -> usize {
    8
}

/// Receiver front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UlaSection {
    pub mode: UlaMode,
    /// Observation window (ps).
    pub delta_t_ps: f64,
    /// Arrays, low band first; empty means the mode's shipped geometry.
    pub arrays: Vec<ArraySpec>,
}

impl Default for UlaSection {
    fn default() -> Self {
        UlaSection { mode: UlaMode::Dual, delta_t_ps: 9.0, arrays: Vec::new() }
    }
}

/// Monte-Carlo sweep parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub theta_true_deg: f64,
    pub distances_m: Vec<f64>,
    pub n_runs: usize,
    pub master_seed: u64,
    /// Centers (THz) excluded from the "excluding" overall TPR.
    pub exclude_centers_thz: Vec<f64>,
    pub grid_step_deg: f64,
    pub parabolic_refinement: bool,
    /// Optional SNR gate for the bearing stage.
    pub snr_threshold: Option<f64>,
    pub temperature_k: f64,
    /// Also write per-trial results (`trials.jsonl`).
    pub dump_trials: bool,
    /// Dual-mode routing split (THz).
    pub split_thz: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            theta_true_deg: -18.525,
            distances_m: vec![0.005, 0.05, 0.1, 0.2, 0.5, 1.0],
            n_runs: 100,
            master_seed: 1,
            exclude_centers_thz: vec![2.75],
            grid_step_deg: 0.05,
            parabolic_refinement: false,
            snr_threshold: None,
            temperature_k: 296.0,
            dump_trials: false,
            split_thz: 2.0,
        }
    }
}

/// A complete configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub medium: MediumSection,
    pub pulse: PulseSection,
    pub alphabet: AlphabetSection,
    pub ulas: UlaSection,
    pub experiment: ExperimentSection,
}

impl FileConfig {
    /// Parse a JSON configuration.
    pub fn parse(json: &str) -> Result<FileConfig> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidConfig(format!("configuration parse error: {e}")))
    }

    /// The shipped dual-array configuration (identical to parsing `{}`).
    pub fn default_dual() -> FileConfig {
        FileConfig::default()
    }

    /// The shipped single-array configuration: one 8-element, 15 µm array
    /// observing 0.1–10 THz.
    pub fn default_single() -> FileConfig {
        let mut cfg = FileConfig::default();
        cfg.ulas.mode = UlaMode::Single;
        cfg
    }

    /// Convert to SI, build every component, and cross-validate.
    ///
    /// `base_dir` anchors relative medium CSV paths — pass the directory
    /// the configuration file was read from.
    pub fn build(&self, base_dir: &Path) -> Result<ExperimentConfig> {
        let medium = self.build_medium(base_dir)?;
        let delta_t = self.ulas.delta_t_ps * 1e-12;
        if !(delta_t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "observation window must be > 0, got {} ps",
                self.ulas.delta_t_ps
            )));
        }

        let array_specs: Vec<ArraySpec> = if self.ulas.arrays.is_empty() {
            match self.ulas.mode {
                UlaMode::Single => vec![ArraySpec {
                    elements: 8,
                    spacing_um: 15.0,
                    band_thz: [0.1, 10.0],
                    bins_override: None,
                }],
                UlaMode::Dual => vec![
                    ArraySpec {
                        elements: 8,
                        spacing_um: 75.0,
                        band_thz: [0.2, 2.0],
                        bins_override: None,
                    },
                    ArraySpec {
                        elements: 8,
                        spacing_um: 15.0,
                        band_thz: [2.0, 10.0],
                        bins_override: None,
                    },
                ],
            }
        } else {
            self.ulas.arrays.clone()
        };
        let ulas: Vec<UlaConfig> = array_specs
            .iter()
            .map(|a| {
                UlaConfig::new(
                    a.elements,
                    a.spacing_um * 1e-6,
                    a.band_thz[0] * 1e12,
                    a.band_thz[1] * 1e12,
                    delta_t,
                    a.bins_override,
                )
            })
            .collect::<Result<_>>()?;

        let split_hz = self.experiment.split_thz * 1e12;
        let centers_hz: Vec<f64> =
            self.alphabet.centers_thz.iter().map(|t| t * 1e12).collect();
        let band_for = |f_c: f64| -> (f64, f64) {
            let ula = match self.ulas.mode {
                UlaMode::Single => &ulas[0],
                UlaMode::Dual => {
                    if f_c < split_hz {
                        &ulas[0]
                    } else {
                        &ulas[ulas.len() - 1]
                    }
                }
            };
            (ula.f_lo, ula.f_hi)
        };
        let alphabet = build_alphabet_with_bands(
            self.pulse.order,
            &centers_hz,
            self.pulse.energy_aj * 1e-18,
            band_for,
            1.0 / delta_t,
        )?;

        let cfg = ExperimentConfig {
            mode: self.ulas.mode,
            ulas,
            alphabet,
            theta_true_deg: self.experiment.theta_true_deg,
            distances: self.experiment.distances_m.clone(),
            n_runs: self.experiment.n_runs,
            master_seed: self.experiment.master_seed,
            medium,
            t0: self.experiment.temperature_k,
            exclude_centers_thz: self.experiment.exclude_centers_thz.clone(),
            options: ExperimentOptions {
                grid_step_deg: self.experiment.grid_step_deg,
                snr_threshold: self.experiment.snr_threshold,
                parabolic_refinement: self.experiment.parabolic_refinement,
                num_sources: 1,
                k_snapshots: 1,
                split_hz,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Build just the absorption table.
    pub fn build_medium(&self, base_dir: &Path) -> Result<AbsorptionTable> {
        match &self.medium {
            MediumSection::Default => Ok(default_medium()),
            MediumSection::Csv { path } => {
                let p = Path::new(path);
                let resolved = if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
                load_absorption_csv(&resolved)
            }
            MediumSection::Synthetic { baseline_per_m, peaks, grid } => {
                if !(grid.step_thz > 0.0 && grid.hi_thz > grid.lo_thz && grid.lo_thz > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "synthetic medium grid needs 0 < lo < hi and step > 0, got \
                         lo {} THz, hi {} THz, step {} THz",
                        grid.lo_thz, grid.hi_thz, grid.step_thz
                    )));
                }
                let grid_hz =
                    bins_for_band(grid.lo_thz * 1e12, grid.hi_thz * 1e12, grid.step_thz * 1e12);
                let peaks_si: Vec<(f64, f64, f64)> = peaks
                    .iter()
                    .map(|p| (p.center_thz * 1e12, p.amplitude_per_m, p.halfwidth_thz * 1e12))
                    .collect();
                synth_absorption(&peaks_si, *baseline_per_m, &grid_hz)
            }
        }
    }
}
