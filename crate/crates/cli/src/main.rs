//! Command-line front end for the terapulse simulator.
//!
//! Subcommands:
//! - `simulate`: run a seeded Monte-Carlo sweep and write metric reports.
//! - `spectrum`: run one trial and dump its bearing pseudo-spectrum and
//!   estimated power spectral density as plot-ready CSV.
//! - `medium-info`: tabulate the absorption medium over each event symbol's
//!   half-power band.
//!
//! Exit codes: 0 success (including `--help`/`--version`), 1 configuration
//! error, 2 runtime error. Errors go to stderr. All outputs are deterministic
//! under a fixed seed.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use terapulse::channel::absorption_at;
use terapulse::config::{FileConfig, MediumSection};
use terapulse::harness::{
    emit_report, emit_trials_jsonl, run_experiment, run_trial_detailed, ReportFormat, UlaMode,
};

/// Write one line to stdout, tolerating a closed pipe (e.g. `| head`).
macro_rules! say {
    ($($arg:tt)*) => {
        { let _ = writeln!(std::io::stdout(), $($arg)*); }
    };
}

#[derive(Parser)]
#[command(
    name = "terapulse",
    version,
    about = "Terahertz single-pulse localization and classification simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write metric reports (CSV)
    Simulate(SimulateArgs),
    /// Run one trial and dump its bearing pseudo-spectrum and estimated PSD
    Spectrum(SpectrumArgs),
    /// Tabulate medium absorption over each event symbol's half-power band
    MediumInfo(MediumInfoArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (JSON). Defaults to the built-in setup.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for emitted files
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Medium override: an absorption CSV path, or "synthetic" for the
    /// built-in synthetic table
    #[arg(long, value_name = "CSV|synthetic")]
    medium: Option<String>,

    /// Receiver layout override
    #[arg(long, value_enum, value_name = "single|dual")]
    ula_mode: Option<ModeArg>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Master seed override
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    /// Trials per (event, distance) point override
    #[arg(long, value_name = "N")]
    runs: Option<usize>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Event symbol index (0-based into the alphabet)
    #[arg(long, value_name = "IDX")]
    event: usize,

    /// Link distance in metres
    #[arg(long, value_name = "M")]
    distance: f64,

    /// Trial seed
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MediumInfoArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Single,
    Dual,
}

impl From<ModeArg> for UlaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => UlaMode::Single,
            ModeArg::Dual => UlaMode::Dual,
        }
    }
}

/// Which phase an error belongs to, deciding the exit code.
enum Phase {
    Config,
    Run,
}

struct CliError {
    phase: Phase,
    message: String,
}

fn config_err(e: impl Display) -> CliError {
    CliError { phase: Phase::Config, message: e.to_string() }
}

fn run_err(e: impl Display) -> CliError {
    CliError { phase: Phase::Run, message: e.to_string() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(std::io::stdout(), "{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::MediumInfo(args) => cmd_medium_info(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(match e.phase {
                Phase::Config => 1,
                Phase::Run => 2,
            })
        }
    }
}

/// Load the file configuration and apply command-line overrides. Returns the
/// configuration and the directory relative medium paths resolve against.
fn load_config(common: &CommonArgs) -> Result<(FileConfig, PathBuf), CliError> {
    let (mut file, base) = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            (FileConfig::parse(&text).map_err(config_err)?, base)
        }
        None => (FileConfig::default_dual(), PathBuf::from(".")),
    };
    if let Some(mode) = common.ula_mode {
        file.ulas.mode = mode.into();
    }
    if let Some(medium) = &common.medium {
        file.medium = if medium == "synthetic" {
            MediumSection::Default
        } else {
            // Resolve against the invocation directory, not the config file.
            let path = std::path::absolute(Path::new(medium))
                .map_err(|e| config_err(format!("{medium}: {e}")))?;
            MediumSection::Csv { path: path.display().to_string() }
        };
    }
    Ok((file, base))
}

fn prepare_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| config_err(format!("{}: {e}", out.display())))
}

fn write_csv(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| run_err(format!("{}: {e}", path.display())))?;
    say!("wrote {}", path.display());
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (mut file, base) = load_config(&args.common)?;
    if let Some(seed) = args.seed {
        file.experiment.master_seed = seed;
    }
    if let Some(runs) = args.runs {
        file.experiment.n_runs = runs;
    }
    let dump_trials = file.experiment.dump_trials;
    let cfg = file.build(&base).map_err(config_err)?;
    prepare_out_dir(&args.common.out)?;

    let report = run_experiment(&cfg).map_err(run_err)?;
    let paths = emit_report(&report, ReportFormat::Csv, &args.common.out).map_err(run_err)?;
    for path in &paths {
        say!("wrote {}", path.display());
    }
    if dump_trials {
        let path = args.common.out.join("trials.jsonl");
        emit_trials_jsonl(&report, &path).map_err(run_err)?;
        say!("wrote {}", path.display());
    }
    for row in &report.overall {
        say!(
            "{} d_r={} m: tpr_all={} tpr_excluding={}",
            report.mode, row.d_r_m, row.tpr_all, row.tpr_excluding
        );
    }
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let (file, base) = load_config(&args.common)?;
    let cfg = file.build(&base).map_err(config_err)?;
    let n_symbols = cfg.alphabet.len();
    if args.event >= n_symbols {
        return Err(config_err(format!(
            "event index {} is out of range; the alphabet has {n_symbols} symbols (0..={})",
            args.event,
            n_symbols - 1
        )));
    }
    if !(args.distance > 0.0) {
        return Err(config_err(format!("distance must be positive, got {}", args.distance)));
    }
    prepare_out_dir(&args.common.out)?;

    let (trial, spectrum, psd) =
        run_trial_detailed(&cfg, args.event, args.distance, args.seed).map_err(run_err)?;

    let mut imusic = String::from("theta_deg,p_imusic\n");
    for (theta, value) in spectrum.grid.iter().zip(spectrum.values.iter()) {
        imusic.push_str(&format!("{theta},{value}\n"));
    }
    write_csv(&args.common.out.join("imusic.csv"), &imusic)?;

    let mut psd_csv = String::from("bin_hz,s_hat\n");
    for (f, value) in psd.bins.iter().zip(psd.values.iter()) {
        psd_csv.push_str(&format!("{f},{value}\n"));
    }
    write_csv(&args.common.out.join("psd.csv"), &psd_csv)?;

    say!("bearing_deg={}", trial.theta_hat_deg);
    say!("centroid_hz={}", trial.f_cen_hz);
    say!("event_true={}", trial.event_true);
    say!("event_est={}", trial.event_est);
    Ok(())
}

/// Samples per half-power band in the medium-info dump.
const BAND_SAMPLES: usize = 201;

fn cmd_medium_info(args: MediumInfoArgs) -> Result<(), CliError> {
    let (file, base) = load_config(&args.common)?;
    let cfg = file.build(&base).map_err(config_err)?;
    prepare_out_dir(&args.common.out)?;

    let mut absorption = String::from("symbol,frequency_hz,k_per_m\n");
    let mut stats = String::from(
        "symbol,f_c_thz,band_lo_thz,band_hi_thz,k_min_per_m,k_max_per_m,k_peak_hz\n",
    );
    for sym in cfg.alphabet.symbols() {
        let (lo, hi) = sym.half_power;
        let mut k_min = f64::INFINITY;
        let mut k_max = f64::NEG_INFINITY;
        let mut k_peak_hz = lo;
        for i in 0..BAND_SAMPLES {
            let f = lo + (hi - lo) * i as f64 / (BAND_SAMPLES - 1) as f64;
            let k = absorption_at(&cfg.medium, f).map_err(run_err)?;
            absorption.push_str(&format!("{},{f},{k}\n", sym.id));
            k_min = k_min.min(k);
            if k > k_max {
                k_max = k;
                k_peak_hz = f;
            }
        }
        stats.push_str(&format!(
            "{},{},{},{},{k_min},{k_max},{k_peak_hz}\n",
            sym.id,
            sym.f_c / 1e12,
            lo / 1e12,
            hi / 1e12
        ));
        say!(
            "symbol {}: f_c={} THz, half-power band {:.4}-{:.4} THz, k in [{:.4e}, {:.4e}] 1/m, peak at {:.4} THz",
            sym.id,
            sym.f_c / 1e12,
            lo / 1e12,
            hi / 1e12,
            k_min,
            k_max,
            k_peak_hz / 1e12
        );
    }
    write_csv(&args.common.out.join("absorption.csv"), &absorption)?;
    write_csv(&args.common.out.join("band_stats.csv"), &stats)?;
    Ok(())
}
