//! `tvws-shaper` — command-line front end for the TVHT pulse-shaping
//! toolkit.
//!
//! Subcommands:
//! - `run <preset>` executes one of the standard experiments (fig2..fig5)
//!   and writes CSVs, an SVG plot and a JSON summary.
//! - `psd <iq-file>` estimates and plots the spectrum of a stored burst.
//! - `window` inspects a window design.
//! - `tx` generates a shaped burst as an I/Q file.
//!
//! Exit codes: 0 on success, 1 when `--assert` is set and a summary
//! assertion fails (or on a runtime failure), 2 on a usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use tvws_core::{
    estimate_psd, make_window, read_iq, run_pipeline_taps, validate_profile, write_iq, Bcu,
    Constellation, Method, WindowFamily,
};

use tvws_shaper::artifacts::{atomic_write, config_hash, CsvTable, CsvValue};
use tvws_shaper::experiments::{run_preset, Preset, RunConfig};
use tvws_shaper::plot::{Chart, Curve};

#[derive(Parser)]
#[command(
    name = "tvws-shaper",
    version,
    about = "IEEE 802.11af TVHT pulse-shaping simulator and spectrum toolkit"
)]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores). Results
    /// are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset: fig2, fig3, fig4 or fig5.
    Run(RunArgs),
    /// Estimate and plot the PSD of a stored I/Q burst.
    Psd(PsdArgs),
    /// Inspect a window design: coefficients and edge properties.
    Window(WindowArgs),
    /// Generate a shaped I/Q burst file for offline analysis.
    Tx(TxArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Preset name: fig2, fig3, fig4 or fig5.
    preset: String,
    /// Profile as <method>-<bcu>, e.g. pro-8mhz. Presets that compare all
    /// schemes take the BCU (and overrides) from here.
    #[arg(long, default_value = "pro-8mhz")]
    profile: String,
    /// Override one profile field, e.g. --set fir_len_final=48 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed for payload bits and noise.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Exit with status 1 if any summary assertion fails.
    #[arg(long)]
    assert: bool,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// OFDM symbols per burst for the spectrum presets.
    #[arg(long, default_value_t = 100)]
    symbols: usize,
    /// Welch segment length (samples).
    #[arg(long, default_value_t = 4096)]
    segment: usize,
    /// Welch segment overlap fraction (0 to 0.9).
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
}

#[derive(Args)]
struct PsdArgs {
    /// Input burst in the toolkit's I/Q file format (see `tx`).
    iq_file: PathBuf,
    /// Output directory; defaults to the input file's directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    segment: usize,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
}

#[derive(Args)]
struct WindowArgs {
    /// Window family: rect, rc, vs or asym.
    #[arg(long)]
    window: String,
    /// Edge transition length in samples at the windowing rate.
    #[arg(long)]
    beta_samples: usize,
    /// Total symbol length the window extends (defaults to the profile's
    /// CP-extended symbol length).
    #[arg(long)]
    len: Option<usize>,
    #[arg(long, default_value = "pro-8mhz")]
    profile: String,
    /// Print coefficients to stdout.
    #[arg(long)]
    dump: bool,
    /// Write coefficients to this CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TxArgs {
    #[arg(long, default_value = "pro-8mhz")]
    profile: String,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// OFDM symbols in the burst.
    #[arg(long, default_value_t = 16)]
    symbols: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Pipeline stage to export: windowed, stuffed or filtered.
    #[arg(long, default_value = "filtered")]
    stage: String,
    /// Output I/Q file path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Build the global worker pool once; a failure here only means a
        // pool already exists, which is equally fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Report a bad invocation and return the usage exit code.
fn usage_error(err: anyhow::Error) -> Result<ExitCode> {
    eprintln!("error: {err:#}");
    Ok(ExitCode::from(2))
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Psd(args) => cmd_psd(args),
        Command::Window(args) => cmd_window(args),
        Command::Tx(args) => cmd_tx(args),
    }
}

/// Parse "<method>-<bcu>" (e.g. "pro-8mhz").
fn parse_profile(text: &str) -> Result<(Method, Bcu)> {
    let (method, bcu) = text
        .split_once('-')
        .ok_or_else(|| anyhow!("profile '{text}' is not of the form <method>-<bcu>"))?;
    Ok((Method::parse(method)?, Bcu::parse(bcu)?))
}

/// Parse repeated `--set key=value` arguments.
fn parse_overrides(set: &[String]) -> Result<Vec<(String, String)>> {
    set.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| anyhow!("--set '{kv}' is not of the form key=value"))
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let preset = match Preset::parse(&args.preset) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let (method, bcu) = match parse_profile(&args.profile) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let overrides = match parse_overrides(&args.set) {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };

    let mut cfg = RunConfig::new(method, bcu, &args.out);
    cfg.overrides = overrides;
    cfg.seed = args.seed;
    cfg.n_symbols = args.symbols;
    cfg.segment_len = args.segment;
    cfg.overlap = args.overlap;

    // Reject bad override keys/values before doing any work; these are
    // command-line mistakes, not runtime failures.
    if let Err(e) = cfg.base_profile() {
        return usage_error(e);
    }

    let summary = run_preset(preset, &cfg)?;
    println!(
        "preset {}  config {}  seed {}  out {}",
        summary.preset,
        summary.config_hash,
        summary.seed,
        args.out.display()
    );
    for a in &summary.assertions {
        let tag = if a.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", a.name, a.detail);
    }
    println!("artifacts: {}", summary.artifacts.join(" "));
    if args.assert && !summary.all_assertions_pass {
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_psd(args: PsdArgs) -> Result<ExitCode> {
    let burst = read_iq(&args.iq_file)
        .with_context(|| format!("reading {}", args.iq_file.display()))?;
    let psd = estimate_psd(&burst, args.segment, args.overlap)?;

    let stem = args
        .iq_file
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("burst");
    let out_dir = match &args.out {
        Some(dir) => dir.clone(),
        None => args
            .iq_file
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };

    let config = format!(
        "input={stem}\nrate_hz={}\nn_samples={}\nstages={}\nwelch_segment={}\nwelch_overlap={}\n",
        burst.rate_hz,
        burst.samples.len(),
        burst.provenance.stage_list(),
        args.segment,
        args.overlap
    );
    let hash = config_hash(&config);

    let csv_path = out_dir.join(format!("{stem}_psd.csv"));
    let mut table = CsvTable::new(&hash, &["freq_hz", "psd_dbr"]);
    table.comment(&format!("source {}", args.iq_file.display()));
    table.comment(&format!("stages {}", burst.provenance.stage_list()));
    for (&f, &p) in psd.freq_hz.iter().zip(&psd.power_db) {
        table.row(&[CsvValue::Float(f), CsvValue::Float(p)]);
    }
    table.write(&csv_path)?;

    let mut chart = Chart::new(
        &format!("PSD of {stem} ({} segments)", psd.n_segments),
        "frequency (MHz)",
        "PSD (dBr)",
    );
    chart.y_range = Some((-120.0, 10.0));
    chart.curves.push(Curve::new(
        stem,
        psd.freq_hz
            .iter()
            .zip(&psd.power_db)
            .map(|(&f, &p)| (f / 1e6, p))
            .collect(),
    ));
    let svg_path = out_dir.join(format!("{stem}_psd.svg"));
    atomic_write(
        &svg_path,
        format!("<!-- config {hash} -->\n{}", chart.render()).as_bytes(),
    )?;

    println!(
        "{}: {} samples at {} Hz, {} Welch segments of {}, resolution {:.1} Hz",
        args.iq_file.display(),
        burst.samples.len(),
        burst.rate_hz,
        psd.n_segments,
        psd.segment_len,
        psd.resolution_hz()
    );
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_window(args: WindowArgs) -> Result<ExitCode> {
    let family = match WindowFamily::parse(&args.window) {
        Ok(f) => f,
        Err(e) => return usage_error(e.into()),
    };
    let (method, bcu) = match parse_profile(&args.profile) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let profile = tvws_core::load_profile(method, bcu);
    let total_len = args.len.unwrap_or_else(|| profile.extended_symbol_len());
    let spec = match make_window(family, args.beta_samples, total_len) {
        Ok(s) => s,
        Err(e) => return usage_error(e.into()),
    };

    let rising = spec.rising();
    let falling = spec.falling();
    let worst_sum = rising
        .iter()
        .zip(falling.iter())
        .map(|(r, f)| (r + f - 1.0).abs())
        .fold(0.0f64, f64::max);
    println!(
        "window {} beta {} total_len {} edge-complementarity max |rise+fall-1| = {:.3e}",
        args.window, args.beta_samples, total_len, worst_sum
    );
    if args.beta_samples > 0 {
        println!(
            "rise[0] = {:.6}, rise[beta-1] = {:.6}",
            rising.first().copied().unwrap_or(1.0),
            rising.last().copied().unwrap_or(1.0)
        );
    }

    if args.dump {
        println!("index,coefficient");
        for (i, c) in spec.coeffs.iter().enumerate() {
            println!("{i},{c}");
        }
    }
    if let Some(path) = &args.out {
        let config = format!(
            "window={}\nbeta={}\ntotal_len={total_len}\n",
            args.window, args.beta_samples
        );
        let mut table = CsvTable::new(&config_hash(&config), &["index", "coefficient"]);
        for (i, c) in spec.coeffs.iter().enumerate() {
            table.row(&[CsvValue::Int(i as i64), CsvValue::Float(*c)]);
        }
        table.write(path)?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_tx(args: TxArgs) -> Result<ExitCode> {
    let (method, bcu) = match parse_profile(&args.profile) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let overrides = match parse_overrides(&args.set) {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };
    let profile = match tvws_core::load_profile(method, bcu).with_overrides(&overrides) {
        Ok(p) => p,
        Err(e) => return usage_error(e.into()),
    };
    validate_profile(&profile)?;

    let n_data = profile.subcarrier_map().data_indices().len();
    let bits: Vec<u8> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
        (0..args.symbols * n_data * 2)
            .map(|_| rng.random_range(0..=1u8))
            .collect()
    };
    let taps = run_pipeline_taps(&bits, &profile, method, Constellation::Qpsk)?;
    let burst = match args.stage.as_str() {
        "windowed" => taps.windowed,
        "stuffed" => taps.stuffed,
        "filtered" => taps.filtered,
        other => {
            return usage_error(anyhow!(
                "unknown stage '{other}' (expected windowed, stuffed or filtered)"
            ))
        }
    };
    write_iq(&args.out, &burst)?;
    println!(
        "wrote {} samples at {} Hz ({}) to {}",
        burst.samples.len(),
        burst.rate_hz,
        burst.provenance.stage_list(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
