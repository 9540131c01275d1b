//! Browser bindings for the terapulse simulator.
//!
//! Three operations back the static demo page in `www/`:
//! - [`alphabet_info`]: event-symbol table plus plot-ready pulse PSD curves,
//! - [`medium_channel_info`]: absorption, received signal level, and per-bin
//!   SNR over the array band that serves one symbol,
//! - [`run_single_trial`]: one full receive-chain trial with its bearing
//!   pseudo-spectrum and estimated PSD.
//!
//! Every function returns a JSON string; failures return `{"error": "..."}`
//! so the page can surface the message without unwinding across the FFI
//! boundary. All computation is deterministic for equal inputs.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use terapulse::array::{noise_coefficient_variance, UlaConfig};
use terapulse::channel::{absorption_at, channel_response, ChannelParams};
use terapulse::config::FileConfig;
use terapulse::harness::{run_trial_detailed, UlaMode};
use terapulse::pulse::{build_alphabet, pulse_duration, pulse_spectrum};

/// Shared frequency grid for the alphabet plot (THz).
const PLOT_LO_THZ: f64 = 0.05;
const PLOT_HI_THZ: f64 = 10.5;
const PLOT_POINTS: usize = 480;

/// Floor for logarithmic displays, well under any physical level.
const DB_FLOOR: f64 = -400.0;

fn to_json(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Build the default experiment for a mode, at a demo-friendly grid step.
fn demo_config(mode: &str) -> Result<terapulse::harness::ExperimentConfig, String> {
    let mut file = match mode {
        "single" => FileConfig::default_single(),
        "dual" => FileConfig::default_dual(),
        other => return Err(format!("unknown ULA mode {other:?}; use \"single\" or \"dual\"")),
    };
    // 0.25 degrees keeps the in-browser scan fast while staying far finer
    // than the arrays' beamwidths.
    file.experiment.grid_step_deg = 0.25;
    file.build(std::path::Path::new(".")).map_err(|e| e.to_string())
}

fn parse_centers(centers_csv: &str) -> Result<Vec<f64>, String> {
    let centers: Result<Vec<f64>, String> = centers_csv
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| format!("{s:?} is not a number"))
        })
        .collect();
    let centers = centers?;
    if centers.is_empty() {
        return Err("no center frequencies given".into());
    }
    Ok(centers)
}

/// Event-alphabet table and normalized pulse PSD curves on a shared grid.
///
/// `order` is the pulse derivative order, `energy_aj` the per-pulse energy in
/// attojoules, `centers_csv` comma-separated center frequencies in THz.
#[wasm_bindgen]
pub fn alphabet_info(order: u32, energy_aj: f64, centers_csv: &str) -> String {
    to_json(alphabet_info_impl(order, energy_aj, centers_csv))
}

fn alphabet_info_impl(order: u32, energy_aj: f64, centers_csv: &str) -> Result<Value, String> {
    if !(1..=12).contains(&order) {
        return Err(format!("pulse order {order} is outside 1..=12"));
    }
    if !(energy_aj > 0.0) {
        return Err(format!("pulse energy must be positive, got {energy_aj} aJ"));
    }
    let centers_hz: Vec<f64> = parse_centers(centers_csv)?.iter().map(|c| c * 1e12).collect();
    let alphabet = build_alphabet(
        order,
        &centers_hz,
        energy_aj * 1e-18,
        (PLOT_LO_THZ * 1e12, PLOT_HI_THZ * 1e12),
        1.0 / 9e-12,
    )
    .map_err(|e| e.to_string())?;

    let f_thz: Vec<f64> = (0..PLOT_POINTS)
        .map(|i| {
            PLOT_LO_THZ + (PLOT_HI_THZ - PLOT_LO_THZ) * i as f64 / (PLOT_POINTS - 1) as f64
        })
        .collect();
    let symbols: Vec<Value> = alphabet
        .symbols()
        .iter()
        .map(|sym| {
            let psd: Vec<f64> =
                f_thz.iter().map(|f| pulse_spectrum(&sym.spec, f * 1e12).norm_sqr()).collect();
            let peak = psd.iter().cloned().fold(0.0f64, f64::max);
            let psd: Vec<f64> =
                psd.iter().map(|v| if peak > 0.0 { v / peak } else { 0.0 }).collect();
            json!({
                "id": sym.id,
                "f_c_thz": sym.f_c / 1e12,
                "t_p_ps": pulse_duration(sym.spec.sigma) * 1e12,
                "band_thz": [sym.half_power.0 / 1e12, sym.half_power.1 / 1e12],
                "psd": psd,
            })
        })
        .collect();
    Ok(json!({ "f_thz": f_thz, "symbols": symbols }))
}

/// Absorption, received signal level, and per-bin coefficient SNR across the
/// array band serving `event_index`, for the built-in medium at `distance_m`.
#[wasm_bindgen]
pub fn medium_channel_info(distance_m: f64, event_index: usize) -> String {
    to_json(medium_channel_info_impl(distance_m, event_index))
}

fn medium_channel_info_impl(distance_m: f64, event_index: usize) -> Result<Value, String> {
    if !(distance_m > 0.0) {
        return Err(format!("distance must be positive, got {distance_m} m"));
    }
    let cfg = demo_config("dual")?;
    let sym = cfg
        .alphabet
        .symbols()
        .get(event_index)
        .ok_or_else(|| format!("event index {event_index} is outside the alphabet"))?;
    let ula: &UlaConfig = &cfg.ulas[cfg.route_ula(sym.f_c).map_err(|e| e.to_string())?];
    let params =
        ChannelParams::with_temperature(distance_m, sym.f_c, cfg.t0).map_err(|e| e.to_string())?;

    let mut f_thz = Vec::with_capacity(ula.num_bins());
    let mut k_per_m = Vec::with_capacity(ula.num_bins());
    let mut signal_db = Vec::with_capacity(ula.num_bins());
    let mut snr_db = Vec::with_capacity(ula.num_bins());
    for &f_b in &ula.bins {
        let k = absorption_at(&cfg.medium, f_b).map_err(|e| e.to_string())?;
        let h = channel_response(&params, &cfg.medium, f_b).map_err(|e| e.to_string())?;
        let signal = (h * pulse_spectrum(&sym.spec, f_b)).norm_sqr();
        let sigma2 = noise_coefficient_variance(&params, &cfg.medium, &sym.spec, f_b, ula.delta_t)
            .map_err(|e| e.to_string())?;
        f_thz.push(f_b / 1e12);
        k_per_m.push(k);
        signal_db.push(db(signal));
        snr_db.push(if sigma2 > 0.0 { db(signal / sigma2) } else { DB_FLOOR });
    }
    Ok(json!({
        "event": sym.id,
        "f_c_thz": sym.f_c / 1e12,
        "distance_m": distance_m,
        "f_thz": f_thz,
        "k_per_m": k_per_m,
        "signal_db": signal_db,
        "snr_db": snr_db,
    }))
}

/// One full receive-chain trial: simulate, localize, classify. Returns the
/// decision plus the bearing pseudo-spectrum and estimated PSD for plotting.
#[wasm_bindgen]
pub fn run_single_trial(mode: &str, event_index: usize, distance_m: f64, seed: u32) -> String {
    to_json(run_single_trial_impl(mode, event_index, distance_m, seed))
}

fn run_single_trial_impl(
    mode: &str,
    event_index: usize,
    distance_m: f64,
    seed: u32,
) -> Result<Value, String> {
    if !(distance_m > 0.0) {
        return Err(format!("distance must be positive, got {distance_m} m"));
    }
    let cfg = demo_config(mode)?;
    if event_index >= cfg.alphabet.len() {
        return Err(format!("event index {event_index} is outside the alphabet"));
    }
    let (trial, spectrum, psd) =
        run_trial_detailed(&cfg, event_index, distance_m, seed as u64).map_err(|e| e.to_string())?;
    let centers: Vec<f64> = cfg.alphabet.centers().iter().map(|c| c / 1e12).collect();
    Ok(json!({
        "mode": match cfg.mode { UlaMode::Single => "single", UlaMode::Dual => "dual" },
        "event_true": trial.event_true,
        "event_est": trial.event_est,
        "correct": trial.event_est == trial.event_true,
        "theta_true_deg": cfg.theta_true_deg,
        "theta_hat_deg": trial.theta_hat_deg,
        "centroid_thz": trial.f_cen_hz / 1e12,
        "centers_thz": centers,
        "spectrum": { "theta_deg": spectrum.grid, "p_imusic": spectrum.values },
        "psd": {
            "f_thz": psd.bins.iter().map(|f| f / 1e12).collect::<Vec<f64>>(),
            "s_hat": psd.values,
        },
    }))
}
