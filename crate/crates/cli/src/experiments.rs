//! Experiment presets: four standard comparisons of the shaping schemes,
//! each emitting CSVs (the machine contract), an SVG plot (the human view)
//! and a JSON summary with metrics and pass/fail assertions.
//!
//! - `fig2` — spectra of windowed OFDM before interpolation, across window
//!   families and transition lengths.
//! - `fig3` — spectra after zero-stuffing but before the interpolation
//!   filter, exposing the spectral images each scheme must remove.
//! - `fig4` — fully filtered spectra of the three schemes against the
//!   default emission mask.
//! - `fig5` — symbol-error-rate sweep of the three schemes over AWGN with
//!   a closed-form QPSK reference curve.
//!
//! All presets derive payload bits and Monte Carlo seeds from one master
//! seed, and artifacts carry the configuration hash, so re-running a preset
//! with the same seed reproduces byte-identical CSVs regardless of thread
//! count.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use tvws_core::{
    check_sem, compare_spectra, default_mask, estimate_psd, first_image_gap_hz, ifft_modulate,
    image_bands, image_spacing_hz, load_profile, make_window, map_payload, measure_noiseless_evm,
    measure_noiseless_ser, qpsk_ser_theory, run_pipeline_taps, run_ser_sweep, shape_and_overlap,
    Bcu, Chain, Constellation, LinkResult, Method, PsdEstimate, SemMask, ShapedBurst, StopRule,
    TimeSymbol, TvhtProfile, WindowFamily,
};

use crate::artifacts::{atomic_write, config_hash, CsvTable, CsvValue};
use crate::plot::{Chart, Curve};

/// Near stopband in subcarrier spacings: from just past the occupied edge
/// (ten spacings out, clearing the edge subcarrier's main lobe and its
/// estimator leakage) to twice the occupied edge. Edge-transition shape
/// dominates the spectrum here.
const NEAR_STOPBAND_DF: (f64, f64) = (68.0, 116.0);
/// Far stopband in subcarrier spacings: two to four occupied bandwidths
/// out, where the asymptotic decay of the window family dominates.
const FAR_STOPBAND_DF: (f64, f64) = (116.0, 232.0);

/// Mask-check tolerance granted to the winning scheme: desk-scale Welch
/// estimates of a 100-symbol burst wobble by a couple of dB.
const MASK_TOLERANCE_DB: f64 = 3.0;


/// One experiment preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            other => bail!("unknown preset '{other}' (expected fig2, fig3, fig4 or fig5)"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }
}

/// Everything that influences a run's artifacts. Hashing the rendered
/// config text yields the artifact header hash.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub bcu: Bcu,
    pub overrides: Vec<(String, String)>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub segment_len: usize,
    pub overlap: f64,
    pub n_symbols: usize,
    pub snr_grid_db: Vec<f64>,
    pub stop: StopRule,
    /// Symbols for the fig5 noiseless error-floor count; the default is
    /// enough to resolve a floor at the 1e-4 level.
    pub noiseless_symbols: usize,
}

impl RunConfig {
    pub fn new(method: Method, bcu: Bcu, out_dir: &Path) -> Self {
        RunConfig {
            method,
            bcu,
            overrides: Vec::new(),
            seed: 1,
            out_dir: out_dir.to_path_buf(),
            segment_len: 4096,
            overlap: 0.5,
            n_symbols: 100,
            snr_grid_db: vec![0.0, 2.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0],
            stop: StopRule::default(),
            noiseless_symbols: 48_000,
        }
    }

    /// The profile selected on the command line, with overrides applied.
    pub fn base_profile(&self) -> Result<TvhtProfile> {
        Ok(load_profile(self.method, self.bcu).with_overrides(&self.overrides)?)
    }

    /// Profile for one of the compared schemes, sharing this run's BCU and
    /// overrides.
    fn method_profile(&self, method: Method) -> Result<TvhtProfile> {
        Ok(load_profile(method, self.bcu).with_overrides(&self.overrides)?)
    }

    /// Deterministic, human-readable description of the full run
    /// configuration; its hash stamps every artifact.
    fn config_lines(&self, preset: Preset) -> Result<Vec<String>> {
        let profile = self.base_profile()?;
        let mut lines = vec![format!("preset={}", preset.name())];
        lines.extend(profile.to_config_string().lines().map(String::from));
        lines.push(format!("seed={}", self.seed));
        lines.push(format!("welch_segment={}", self.segment_len));
        lines.push(format!("welch_overlap={}", self.overlap));
        lines.push(format!("n_symbols={}", self.n_symbols));
        let grid: Vec<String> = self.snr_grid_db.iter().map(|s| s.to_string()).collect();
        lines.push(format!("snr_grid_db={}", grid.join(",")));
        lines.push(format!("stop_min_errors={}", self.stop.min_errors));
        lines.push(format!("stop_max_symbols={}", self.stop.max_symbols));
        lines.push(format!("noiseless_symbols={}", self.noiseless_symbols));
        for (k, v) in &self.overrides {
            lines.push(format!("set.{k}={v}"));
        }
        Ok(lines)
    }
}

/// One named pass/fail check recorded in the summary.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Assertion {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

/// Machine-readable run summary, written as `<preset>_summary.json`.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub preset: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: Vec<String>,
    pub metrics: serde_json::Value,
    pub assertions: Vec<Assertion>,
    pub all_assertions_pass: bool,
    pub artifacts: Vec<String>,
}

/// Run one preset, writing all artifacts into `cfg.out_dir`.
pub fn run_preset(preset: Preset, cfg: &RunConfig) -> Result<Summary> {
    let config = cfg.config_lines(preset)?;
    let hash = config_hash(&(config.join("\n") + "\n"));
    let (metrics, assertions, artifacts) = match preset {
        Preset::Fig2 => run_fig2(cfg, &hash)?,
        Preset::Fig3 => run_fig3(cfg, &hash)?,
        Preset::Fig4 => run_fig4(cfg, &hash)?,
        Preset::Fig5 => run_fig5(cfg, &hash)?,
    };
    let mut artifacts = artifacts;
    let all_pass = assertions.iter().all(|a| a.pass);
    let summary_name = format!("{}_summary.json", preset.name());
    let mut summary = Summary {
        preset: preset.name().to_string(),
        config_hash: hash,
        seed: cfg.seed,
        config,
        metrics,
        assertions,
        all_assertions_pass: all_pass,
        artifacts: Vec::new(),
    };
    artifacts.push(summary_name.clone());
    summary.artifacts = artifacts;
    let text = serde_json::to_string_pretty(&summary).context("serializing summary")?;
    atomic_write(&cfg.out_dir.join(&summary_name), (text + "\n").as_bytes())?;
    Ok(summary)
}

/// Random payload bits for `n_symbols` OFDM symbols of QPSK on the data
/// subcarriers, derived from the master seed.
fn payload_bits(p: &TvhtProfile, n_symbols: usize, seed: u64) -> Vec<u8> {
    let n_data = p.subcarrier_map().data_indices().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_symbols * n_data * 2)
        .map(|_| rng.random_range(0..=1u8))
        .collect()
}

fn modulated_symbols(p: &TvhtProfile, bits: &[u8]) -> Result<Vec<TimeSymbol>> {
    let freq = map_payload(bits, &p.subcarrier_map(), Constellation::Qpsk, p.n_fft())?;
    Ok(freq.iter().map(|x| ifft_modulate(x, p)).collect())
}

/// Write one PSD CSV whose first column is the shared frequency grid.
fn write_psd_csv(
    path: &Path,
    hash: &str,
    comments: &[String],
    labels: &[&str],
    psds: &[&PsdEstimate],
    extra: Option<(&str, &dyn Fn(f64) -> f64)>,
) -> Result<()> {
    let freq = &psds[0].freq_hz;
    for p in psds {
        if p.freq_hz.len() != freq.len() {
            bail!("PSD grids differ; curves were estimated with different settings");
        }
    }
    let mut columns: Vec<&str> = vec!["freq_hz"];
    columns.extend_from_slice(labels);
    if let Some((name, _)) = extra {
        columns.push(name);
    }
    let mut table = CsvTable::new(hash, &columns);
    for c in comments {
        table.comment(c);
    }
    for (i, &f) in freq.iter().enumerate() {
        let mut row = vec![CsvValue::Float(f)];
        for p in psds {
            row.push(CsvValue::Float(p.power_db[i]));
        }
        if let Some((_, func)) = extra {
            row.push(CsvValue::Float(func(f)));
        }
        table.row(&row);
    }
    table.write(path)
}

/// Render a chart to `path` with the config hash embedded as a leading
/// XML comment, honoring the every-artifact-carries-its-hash invariant.
fn write_svg(path: &Path, hash: &str, chart: &Chart) -> Result<()> {
    let text = format!("<!-- config {hash} -->\n{}", chart.render());
    atomic_write(path, text.as_bytes())
}

fn spectrum_chart(title: &str, labels: &[&str], psds: &[&PsdEstimate], floor_db: f64) -> Chart {
    let mut chart = Chart::new(title, "frequency (MHz)", "PSD (dBr)");
    chart.y_range = Some((floor_db, 10.0));
    for (label, psd) in labels.iter().zip(psds) {
        let pts = psd
            .freq_hz
            .iter()
            .zip(&psd.power_db)
            .map(|(&f, &p)| (f / 1e6, p))
            .collect();
        chart.curves.push(Curve::new(label, pts));
    }
    chart
}

// ---------------------------------------------------------------------------
// fig2: windowed spectra before interpolation
// ---------------------------------------------------------------------------

/// Window variants compared by the fig2 preset: family and edge transition
/// length in windowing-rate samples.
const FIG2_WINDOWS: [(WindowFamily, usize, &str); 5] = [
    (WindowFamily::RaisedCosine, 4, "rc_b4"),
    (WindowFamily::RaisedCosine, 16, "rc_b16"),
    (WindowFamily::VestigialSymmetry, 16, "vs_b16"),
    (WindowFamily::Asymmetric, 16, "as_b16"),
    (WindowFamily::Asymmetric, 64, "as_b64"),
];

fn run_fig2(cfg: &RunConfig, hash: &str) -> Result<(serde_json::Value, Vec<Assertion>, Vec<String>)> {
    let p = cfg.base_profile()?;
    let df = p.subcarrier_spacing_hz();
    let bits = payload_bits(&p, cfg.n_symbols, cfg.seed);
    let time = modulated_symbols(&p, &bits)?;

    let mut bursts: Vec<(String, ShapedBurst)> = Vec::new();
    for (family, beta, label) in FIG2_WINDOWS {
        let w = make_window(family, beta, p.extended_symbol_len())?;
        bursts.push((label.to_string(), shape_and_overlap(&time, &w, &p)?));
    }
    let psds: Vec<PsdEstimate> = bursts
        .iter()
        .map(|(_, b)| estimate_psd(b, cfg.segment_len, cfg.overlap))
        .collect::<tvws_core::Result<_>>()?;

    let named: Vec<(String, &ShapedBurst)> =
        bursts.iter().map(|(l, b)| (l.clone(), b)).collect();
    let near_hz = (NEAR_STOPBAND_DF.0 * df, NEAR_STOPBAND_DF.1 * df);
    let far_hz = (FAR_STOPBAND_DF.0 * df, FAR_STOPBAND_DF.1 * df);
    let near = compare_spectra(&named, near_hz, cfg.segment_len, cfg.overlap)?;
    let far = compare_spectra(&named, far_hz, cfg.segment_len, cfg.overlap)?;
    let max_of = |cmp: &tvws_core::SpectraComparison, label: &str| -> Result<f64> {
        Ok(cmp
            .stats(label)
            .ok_or_else(|| anyhow!("missing curve {label}"))?
            .stopband_max_dbr)
    };

    let rc_b4_far = max_of(&far, "rc_b4")?;
    let rc_b16_near = max_of(&near, "rc_b16")?;
    let rc_b16_far = max_of(&far, "rc_b16")?;
    let as_b16_near = max_of(&near, "as_b16")?;
    let as_b64_near = max_of(&near, "as_b64")?;

    let assertions = vec![
        Assertion::new(
            "long-asymmetric-beats-rc-b16-near-by-10db",
            as_b64_near <= rc_b16_near - 10.0,
            format!("as_b64 near max {as_b64_near:.2} dBr vs rc_b16 {rc_b16_near:.2} dBr"),
        ),
        Assertion::new(
            "asymmetric-tracks-rc-at-equal-beta-near-within-3db",
            (as_b16_near - rc_b16_near).abs() <= 3.0,
            format!("as_b16 near max {as_b16_near:.2} dBr vs rc_b16 {rc_b16_near:.2} dBr"),
        ),
        Assertion::new(
            "rc-b16-beats-rc-b4-far-by-10db",
            rc_b16_far <= rc_b4_far - 10.0,
            format!("rc_b16 far max {rc_b16_far:.2} dBr vs rc_b4 {rc_b4_far:.2} dBr"),
        ),
    ];

    let stat_json = |cmp: &tvws_core::SpectraComparison| {
        let mut map = serde_json::Map::new();
        for c in &cmp.curves {
            map.insert(
                c.label.clone(),
                json!({"max_dbr": c.stopband_max_dbr, "mean_dbr": c.stopband_mean_dbr}),
            );
        }
        serde_json::Value::Object(map)
    };
    let metrics = json!({
        "near_stopband_hz": [near_hz.0, near_hz.1],
        "far_stopband_hz": [far_hz.0, far_hz.1],
        "near_stopband": stat_json(&near),
        "far_stopband": stat_json(&far),
    });

    let labels: Vec<&str> = FIG2_WINDOWS.iter().map(|(_, _, l)| *l).collect();
    let psd_refs: Vec<&PsdEstimate> = psds.iter().collect();
    let csv_name = "fig2_psd.csv";
    write_psd_csv(
        &cfg.out_dir.join(csv_name),
        hash,
        &[
            format!("windowed OFDM spectra before interpolation, {} symbols", cfg.n_symbols),
            "power in dBr relative to the occupied-band mean".to_string(),
        ],
        &labels,
        &psd_refs,
        None,
    )?;
    let chart = spectrum_chart(
        "Windowed OFDM spectra before interpolation",
        &labels,
        &psd_refs,
        -120.0,
    );
    let svg_name = "fig2_plot.svg";
    write_svg(&cfg.out_dir.join(svg_name), hash, &chart)?;
    Ok((metrics, assertions, vec![csv_name.into(), svg_name.into()]))
}

// ---------------------------------------------------------------------------
// fig3: zero-stuffed spectra before the interpolation filter
// ---------------------------------------------------------------------------

fn run_fig3(cfg: &RunConfig, hash: &str) -> Result<(serde_json::Value, Vec<Assertion>, Vec<String>)> {
    let mut bursts: Vec<(String, ShapedBurst)> = Vec::new();
    let mut profiles: Vec<TvhtProfile> = Vec::new();
    for m in Method::ALL {
        let pm = cfg.method_profile(m)?;
        let bits = payload_bits(&pm, cfg.n_symbols, cfg.seed);
        let taps = run_pipeline_taps(&bits, &pm, m, Constellation::Qpsk)?;
        bursts.push((m.to_string(), taps.stuffed));
        profiles.push(pm);
    }
    let rate = bursts[0].1.rate_hz;
    if bursts.iter().any(|(_, b)| (b.rate_hz - rate).abs() > 1e-6) {
        bail!("fig3 requires all schemes to share one final sample rate; adjust overrides");
    }
    let psds: Vec<PsdEstimate> = bursts
        .iter()
        .map(|(_, b)| estimate_psd(b, cfg.segment_len, cfg.overlap))
        .collect::<tvws_core::Result<_>>()?;

    let spacing: Vec<f64> = profiles.iter().map(image_spacing_hz).collect();
    let gap: Vec<f64> = profiles.iter().map(first_image_gap_hz).collect();
    let (asp_idx, pro_idx) = (0usize, 2usize);
    let spacing_ratio = spacing[pro_idx] / spacing[asp_idx];
    let expected_ratio =
        profiles[asp_idx].interpolation_l() as f64 / profiles[pro_idx].interpolation_l() as f64;
    let gap_ratio = gap[pro_idx] / gap[asp_idx];

    let assertions = vec![
        Assertion::new(
            "image-spacing-follows-interpolation-factors",
            (spacing_ratio - expected_ratio).abs() < 1e-9,
            format!("spacing ratio pro/asp {spacing_ratio} vs interpolation ratio {expected_ratio}"),
        ),
        Assertion::new(
            "asp-first-image-at-least-4x-closer",
            gap[pro_idx] >= 4.0 * gap[asp_idx],
            format!(
                "first image gap: asp {:.0} Hz, pro {:.0} Hz (ratio {gap_ratio:.1})",
                gap[asp_idx], gap[pro_idx]
            ),
        ),
    ];

    let mut per_method = serde_json::Map::new();
    for (i, m) in Method::ALL.iter().enumerate() {
        let bands: Vec<[f64; 2]> = image_bands(&profiles[i]).iter().map(|&(a, b)| [a, b]).collect();
        per_method.insert(
            m.to_string(),
            json!({
                "image_spacing_hz": spacing[i],
                "first_image_gap_hz": gap[i],
                "image_bands_hz": bands,
            }),
        );
    }
    let metrics = json!({
        "per_method": serde_json::Value::Object(per_method),
        "image_spacing_ratio_pro_over_asp": spacing_ratio,
        "first_image_gap_ratio_pro_over_asp": gap_ratio,
    });

    let labels: Vec<&str> = bursts.iter().map(|(l, _)| l.as_str()).collect();
    let psd_refs: Vec<&PsdEstimate> = psds.iter().collect();
    let csv_name = "fig3_psd.csv";
    write_psd_csv(
        &cfg.out_dir.join(csv_name),
        hash,
        &[
            format!("zero-stuffed spectra before the interpolation filter, {} symbols", cfg.n_symbols),
            "power in dBr relative to the occupied-band mean".to_string(),
        ],
        &labels,
        &psd_refs,
        None,
    )?;
    let chart = spectrum_chart(
        "Zero-stuffed spectra before interpolation filtering",
        &labels,
        &psd_refs,
        -100.0,
    );
    let svg_name = "fig3_plot.svg";
    write_svg(&cfg.out_dir.join(svg_name), hash, &chart)?;
    Ok((metrics, assertions, vec![csv_name.into(), svg_name.into()]))
}

// ---------------------------------------------------------------------------
// fig4: filtered spectra against the default emission mask
// ---------------------------------------------------------------------------

fn run_fig4(cfg: &RunConfig, hash: &str) -> Result<(serde_json::Value, Vec<Assertion>, Vec<String>)> {
    let mask = default_mask(&cfg.base_profile()?);
    let mut labels: Vec<String> = Vec::new();
    let mut psds: Vec<PsdEstimate> = Vec::new();
    let mut reports = Vec::new();
    for m in Method::ALL {
        let pm = cfg.method_profile(m)?;
        let bits = payload_bits(&pm, cfg.n_symbols, cfg.seed);
        let taps = run_pipeline_taps(&bits, &pm, m, Constellation::Qpsk)?;
        let psd = estimate_psd(&taps.filtered, cfg.segment_len, cfg.overlap)?;
        reports.push(check_sem(&psd, &mask)?);
        labels.push(m.to_string());
        psds.push(psd);
    }

    let worst = |i: usize| reports[i].worst_margin_db;
    let assertions = vec![
        Assertion::new(
            "pro-within-mask-tolerance",
            worst(2) >= -MASK_TOLERANCE_DB,
            format!("pro worst margin {:.2} dB at {:.0} Hz", worst(2), reports[2].worst_freq_hz),
        ),
        Assertion::new(
            "asp-fails-mask",
            worst(0) < -MASK_TOLERANCE_DB,
            format!("asp worst margin {:.2} dB at {:.0} Hz", worst(0), reports[0].worst_freq_hz),
        ),
        Assertion::new(
            "soa-fails-mask",
            worst(1) < -MASK_TOLERANCE_DB,
            format!("soa worst margin {:.2} dB at {:.0} Hz", worst(1), reports[1].worst_freq_hz),
        ),
    ];

    let mut per_method = serde_json::Map::new();
    for (i, m) in Method::ALL.iter().enumerate() {
        let segs: Vec<serde_json::Value> = reports[i]
            .segments
            .iter()
            .map(|s| json!({"lo_hz": s.lo_hz, "hi_hz": s.hi_hz, "min_margin_db": s.min_margin_db}))
            .collect();
        per_method.insert(
            m.to_string(),
            json!({
                "pass": reports[i].pass,
                "worst_margin_db": reports[i].worst_margin_db,
                "worst_freq_hz": reports[i].worst_freq_hz,
                "segments": segs,
            }),
        );
    }
    let breakpoints: Vec<[f64; 2]> = mask.breakpoints().iter().map(|&(o, l)| [o, l]).collect();
    let metrics = json!({
        "mask_breakpoints_offset_hz_limit_dbr": breakpoints,
        "mask_tolerance_db": MASK_TOLERANCE_DB,
        "per_method": serde_json::Value::Object(per_method),
    });

    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let psd_refs: Vec<&PsdEstimate> = psds.iter().collect();
    let csv_name = "fig4_psd.csv";
    let limit_fn = |f: f64| mask.limit_at(f.abs());
    write_psd_csv(
        &cfg.out_dir.join(csv_name),
        hash,
        &[
            format!("filtered spectra vs default emission mask, {} symbols", cfg.n_symbols),
            "mask_limit_dbr clamps to the nearest breakpoint outside the mask span".to_string(),
        ],
        &label_refs,
        &psd_refs,
        Some(("mask_limit_dbr", &limit_fn)),
    )?;

    let mut chart = spectrum_chart(
        "Filtered spectra vs default emission mask",
        &label_refs,
        &psd_refs,
        -100.0,
    );
    chart.curves.push(Curve::dashed("mask", mask_polyline(&mask)));
    let svg_name = "fig4_plot.svg";
    write_svg(&cfg.out_dir.join(svg_name), hash, &chart)?;
    Ok((metrics, assertions, vec![csv_name.into(), svg_name.into()]))
}

/// Two-sided polyline of a mask for plotting, in MHz: the mirrored
/// breakpoints plus a flat continuation to 1.5× the outermost offset.
fn mask_polyline(mask: &SemMask) -> Vec<(f64, f64)> {
    let bps = mask.breakpoints();
    let (end_off, end_limit) = *bps.last().expect("mask has breakpoints");
    let reach = 1.5 * end_off;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    pts.push((-reach / 1e6, end_limit));
    for &(off, limit) in bps.iter().rev() {
        pts.push((-off / 1e6, limit));
    }
    for &(off, limit) in bps.iter() {
        pts.push((off / 1e6, limit));
    }
    pts.push((reach / 1e6, end_limit));
    pts
}

// ---------------------------------------------------------------------------
// fig5: symbol-error-rate sweep
// ---------------------------------------------------------------------------

fn run_fig5(cfg: &RunConfig, hash: &str) -> Result<(serde_json::Value, Vec<Assertion>, Vec<String>)> {
    let grid = &cfg.snr_grid_db;
    if grid.is_empty() {
        bail!("fig5 needs a non-empty SNR grid");
    }
    let mut sweeps: Vec<Vec<LinkResult>> = Vec::new();
    let mut evm = Vec::new();
    let mut floors = Vec::new();
    for m in Method::ALL {
        let pm = cfg.method_profile(m)?;
        let chain = Chain::Shaped(m);
        sweeps.push(run_ser_sweep(chain, &pm, grid, cfg.stop, cfg.seed)?);
        evm.push(measure_noiseless_evm(chain, &pm, 256, cfg.seed)?);
        floors.push(measure_noiseless_ser(chain, &pm, cfg.noiseless_symbols, cfg.seed)?);
    }

    // SNR at which each scheme crosses SER = 1e-2, log-interpolated.
    let crossings: Vec<Option<f64>> = sweeps.iter().map(|s| snr_at_ser(s, 1e-2)).collect();
    let (asp, soa, pro) = (0usize, 1usize, 2usize);

    let gap_assert = match (crossings[pro], crossings[soa]) {
        (Some(cp), Some(cs)) => Assertion::new(
            "pro-soa-gap-at-1e-2-within-half-db",
            (cp - cs).abs() <= 0.5,
            format!("crossings: pro {cp:.3} dB, soa {cs:.3} dB, gap {:.3} dB", (cp - cs).abs()),
        ),
        _ => Assertion::new(
            "pro-soa-gap-at-1e-2-within-half-db",
            false,
            "a curve never crosses SER 1e-2 on this grid".to_string(),
        ),
    };

    // Beyond the crossing, the longer-window scheme must not pay a penalty
    // versus the short-filter scheme. Points with very few errors carry no
    // evidence and are skipped; the comparison allows the joint 95%
    // counting-noise halfwidth, so a desk-scale run is judged against what
    // its own sample sizes can resolve.
    let beyond = |snr: f64| crossings[pro].is_some_and(|c| snr >= c);
    let mut compared = 0usize;
    let mut ordering_ok = true;
    let mut ordering_detail = String::new();
    for (i, &snr) in grid.iter().enumerate() {
        let (rp, ra) = (&sweeps[pro][i], &sweeps[asp][i]);
        if !beyond(snr) || rp.n_symbol_errors < 50 || ra.n_symbol_errors < 50 {
            continue;
        }
        compared += 1;
        let slack = rp.confidence_halfwidth + ra.confidence_halfwidth;
        if rp.ser > ra.ser + slack {
            ordering_ok = false;
            ordering_detail = format!(
                "at {snr} dB: pro {} vs asp {} (allowed slack {slack:.3e})",
                rp.ser, ra.ser
            );
            break;
        }
    }
    if ordering_ok {
        ordering_detail =
            format!("pro <= asp within joint 95% halfwidths at all {compared} compared points");
    }
    let ordering_assert = Assertion::new(
        "pro-at-or-below-asp-beyond-crossing",
        ordering_ok && compared > 0,
        ordering_detail,
    );

    let (floor_errors, floor_sent) = floors[pro];
    let floor_ser = floor_errors as f64 / floor_sent as f64;
    let floor_assert = Assertion::new(
        "pro-noiseless-floor-below-1e-4",
        floor_ser < 1e-4,
        format!("{floor_errors} errors over {floor_sent} noiseless symbols"),
    );
    let assertions = vec![gap_assert, ordering_assert, floor_assert];

    let mut per_method = serde_json::Map::new();
    for (i, m) in Method::ALL.iter().enumerate() {
        per_method.insert(
            m.to_string(),
            json!({
                "noiseless_evm": evm[i],
                "noiseless_floor": {"errors": floors[i].0, "symbols": floors[i].1},
                "snr_at_ser_1e-2_db": crossings[i],
            }),
        );
    }
    let metrics = json!({
        "per_method": serde_json::Value::Object(per_method),
        "stop_rule": {"min_errors": cfg.stop.min_errors, "max_symbols": cfg.stop.max_symbols},
    });

    // CSV: one row per SNR point with theory and per-scheme results.
    let mut columns: Vec<String> = vec!["snr_db".into(), "theory_ser".into()];
    for m in Method::ALL {
        for field in ["ser", "errors", "symbols", "censored"] {
            columns.push(format!("{m}_{field}"));
        }
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = CsvTable::new(hash, &column_refs);
    table.comment("QPSK over AWGN; theory is the closed-form QPSK symbol error probability");
    for (i, &snr) in grid.iter().enumerate() {
        let mut row = vec![CsvValue::Float(snr), CsvValue::Float(qpsk_ser_theory(snr))];
        for s in &sweeps {
            let r = &s[i];
            row.push(CsvValue::Float(r.ser));
            row.push(CsvValue::Int(r.n_symbol_errors as i64));
            row.push(CsvValue::Int(r.n_symbols_sent as i64));
            row.push(CsvValue::Bool(r.censored));
        }
        table.row(&row);
    }
    let csv_name = "fig5_ser.csv";
    table.write(&cfg.out_dir.join(csv_name))?;

    let mut chart = Chart::new("Symbol error rate over AWGN", "Es/N0 (dB)", "symbol error rate");
    chart.log_y = true;
    chart.curves.push(Curve::dashed(
        "theory (QPSK)",
        grid.iter().map(|&s| (s, qpsk_ser_theory(s))).collect(),
    ));
    for (i, m) in Method::ALL.iter().enumerate() {
        chart.curves.push(Curve::new(
            &m.to_string(),
            sweeps[i].iter().map(|r| (r.snr_db, r.ser)).collect(),
        ));
    }
    let svg_name = "fig5_plot.svg";
    write_svg(&cfg.out_dir.join(svg_name), hash, &chart)?;
    Ok((metrics, assertions, vec![csv_name.into(), svg_name.into()]))
}

/// SNR at which a measured curve crosses `target`, log-linear in SER
/// between the first straddling pair of grid points.
pub fn snr_at_ser(results: &[LinkResult], target: f64) -> Option<f64> {
    for w in results.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ser > 0.0 && b.ser > 0.0 && a.ser >= target && b.ser <= target {
            let (la, lb, lt) = (a.ser.log10(), b.ser.log10(), target.log10());
            if (la - lb).abs() < 1e-12 {
                return Some(a.snr_db);
            }
            let t = (la - lt) / (la - lb);
            return Some(a.snr_db + t * (b.snr_db - a.snr_db));
        }
    }
    None
}
