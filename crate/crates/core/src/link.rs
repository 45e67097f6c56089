//! Link-level measurement: channel models, a genie-equalized receiver, and
//! deterministic Monte Carlo symbol-error-rate sweeps.
//!
//! SNR is defined as Es/N0 per occupied subcarrier *after* the receiver
//! FFT. That convention makes the closed-form QPSK error probability an
//! exact oracle for the unshaped chain and keeps comparisons fair across
//! chains with different oversampling factors: the required time-domain
//! noise density is derived from the expected post-FFT bin energy stamped
//! in each burst's provenance.
//!
//! The receiver is deliberately omniscient: it knows the frame timing and
//! the composite transmit-filter response per subcarrier, so what remains
//! in the measured error rate is exactly the self-interference and noise
//! enhancement each shaping chain causes — the effect under study — rather
//! than estimator error.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fft;
use crate::params::{Method, TvhtProfile};
use crate::shaping::{design_fir, receiver_alignment, run_pipeline_taps, run_reference};
use crate::tx_chain::{Constellation, FreqSymbol};
use crate::windowing::ShapedBurst;

/// Transmit chain selector for link measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chain {
    /// Plain CP-OFDM, rectangular window, no interpolation or FIR — the
    /// analytic baseline.
    Reference,
    /// One of the full shaping pipelines.
    Shaped(Method),
}

impl Chain {
    fn interpolation(self, p: &TvhtProfile) -> usize {
        match self {
            Chain::Reference => 1,
            Chain::Shaped(_) => p.interpolation_l(),
        }
    }

    /// Canonical receiver sampling offset for this chain, in samples at the
    /// chain's output rate.
    pub fn known_delay(self, p: &TvhtProfile) -> usize {
        match self {
            Chain::Reference => 0,
            Chain::Shaped(_) => receiver_alignment(p),
        }
    }
}

impl std::fmt::Display for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Chain::Reference => write!(f, "reference"),
            Chain::Shaped(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Awgn,
    Multipath,
}

/// Channel between transmitter and receiver. `snr_db` is Es/N0 per occupied
/// subcarrier; `+∞` disables noise entirely.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub snr_db: f64,
    /// Final-rate impulse response, unit total power (Multipath only).
    pub cir_taps: Vec<Complex64>,
    pub seed: u64,
}

impl ChannelModel {
    pub fn awgn(snr_db: f64, seed: u64) -> Self {
        ChannelModel {
            kind: ChannelKind::Awgn,
            snr_db,
            cir_taps: Vec::new(),
            seed,
        }
    }

    pub fn noiseless() -> Self {
        Self::awgn(f64::INFINITY, 0)
    }

    /// Exponentially decaying multipath profile spanning the profile's CIR
    /// bound, with seed-controlled tap phases and unit total power.
    pub fn multipath(snr_db: f64, seed: u64, p: &TvhtProfile) -> Self {
        let len = p.cir_len_final();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d70_7468); // tap draw stream
        let decay = 3.0 / len as f64;
        let mut taps: Vec<Complex64> = (0..len)
            .map(|t| {
                let amp = (-decay * t as f64 / 2.0).exp();
                Complex64::from_polar(amp, rng.random::<f64>() * std::f64::consts::TAU)
            })
            .collect();
        normalize_power(&mut taps);
        ChannelModel {
            kind: ChannelKind::Multipath,
            snr_db,
            cir_taps: taps,
            seed,
        }
    }

    /// Multipath with caller-provided taps (normalized to unit power).
    pub fn with_cir(snr_db: f64, seed: u64, mut taps: Vec<Complex64>, p: &TvhtProfile) -> Result<Self> {
        if taps.is_empty() || taps.len() > p.cir_len_final() {
            return Err(Error::config(format!(
                "channel impulse response must have 1..={} taps, got {}",
                p.cir_len_final(),
                taps.len()
            )));
        }
        normalize_power(&mut taps);
        Ok(ChannelModel {
            kind: ChannelKind::Multipath,
            snr_db,
            cir_taps: taps,
            seed,
        })
    }
}

fn normalize_power(taps: &mut [Complex64]) {
    let power: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
    assert!(power > 0.0, "impulse response must carry power");
    let scale = power.sqrt().recip();
    for t in taps.iter_mut() {
        *t *= scale;
    }
}

/// Pass a burst through the channel: optional CIR convolution, then white
/// Gaussian noise calibrated so the post-FFT, post-equalizer Es/N0 on
/// occupied subcarriers equals `snr_db`. Deterministic for a given seed.
pub fn apply_channel(burst: &ShapedBurst, ch: &ChannelModel) -> Vec<Complex64> {
    let mut out = match ch.kind {
        ChannelKind::Awgn => burst.samples.clone(),
        ChannelKind::Multipath => convolve(&burst.samples, &ch.cir_taps),
    };
    if ch.snr_db.is_finite() {
        let gamma = 10f64.powf(ch.snr_db / 10.0);
        let prov = &burst.provenance;
        assert!(
            prov.fft_len > 0 && prov.rx_bin_energy > 0.0,
            "burst provenance lacks receiver calibration; noise power is undefined"
        );
        // Post-FFT bin noise power is fft_len * sigma^2, and the expected
        // bin signal power is rx_bin_energy, so the per-sample variance
        // that realizes Es/N0 = gamma is:
        let sigma2 = prov.rx_bin_energy / (prov.fft_len as f64 * gamma);
        let per_component = Normal::new(0.0, (sigma2 / 2.0).sqrt()).expect("valid sigma");
        let mut rng = ChaCha8Rng::seed_from_u64(ch.seed);
        for v in &mut out {
            *v += Complex64::new(per_component.sample(&mut rng), per_component.sample(&mut rng));
        }
    }
    out
}

fn convolve(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, &xv) in x.iter().enumerate() {
        for (j, &hv) in h.iter().enumerate() {
            out[i + j] += xv * hv;
        }
    }
    out
}

/// Per-data-and-pilot-bin equalizer table: `M * C(k)` where `C(k)` is the
/// composite response of every filter between the IFFT and the receiver
/// FFT, evaluated through the stuff-filter-decimate cascade.
struct Equalizer {
    l: usize,
    delay: usize,
    /// Denominators indexed by occupied subcarrier, ascending.
    denominators: Vec<(i32, Complex64)>,
}

fn tone_response(taps: &[Complex64], l: usize, d0: usize, shift: f64, cycles: f64) -> Complex64 {
    let w = std::f64::consts::TAU * cycles;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut r = 0usize;
    while l * r + d0 < taps.len() {
        acc += taps[l * r + d0] * Complex64::from_polar(1.0, -w * r as f64);
        r += 1;
    }
    acc * Complex64::from_polar(1.0, w * shift)
}

fn build_equalizer(
    chain: Chain,
    p: &TvhtProfile,
    known_delay: usize,
    cir: Option<&[Complex64]>,
) -> Result<Equalizer> {
    let l = chain.interpolation(p);
    // Total filter between transmit IFFT output and receive decimation, at
    // the chain's output rate.
    let total: Vec<Complex64> = match chain {
        Chain::Reference => {
            let fir = vec![Complex64::new(1.0, 0.0)];
            match cir {
                Some(h) => convolve(&fir, h),
                None => fir,
            }
        }
        Chain::Shaped(_) => {
            let fir: Vec<Complex64> = design_fir(p)?
                .taps
                .iter()
                .map(|&t| Complex64::new(t, 0.0))
                .collect();
            match cir {
                Some(h) => convolve(&fir, h),
                None => fir,
            }
        }
    };
    let d0 = known_delay % l;
    let shift = ((known_delay - d0) / l) as f64;
    let m = p.guard_extension_m() as f64;
    let n_fft = p.n_fft() as f64;
    let map = p.subcarrier_map();
    let mut denominators = Vec::with_capacity(map.occupied_count());
    for &k in map.data_indices().iter().chain(map.pilot_indices()) {
        let c = tone_response(&total, l, d0, shift, k as f64 / n_fft);
        if c.norm() < 1e-6 {
            return Err(Error::config(format!(
                "composite response vanishes on subcarrier {k}; cannot equalize"
            )));
        }
        denominators.push((k, c * m));
    }
    denominators.sort_by_key(|&(k, _)| k);
    Ok(Equalizer {
        l,
        delay: known_delay,
        denominators,
    })
}

/// Demodulate a received sample stream: align to `known_delay`, decimate to
/// the IFFT rate, strip each symbol's cyclic prefix, FFT, and one-tap
/// equalize the occupied bins with the known composite response. Returns
/// one [`FreqSymbol`] per complete OFDM symbol found in the stream.
///
/// Pass the channel's impulse response as `cir` when the burst went through
/// a multipath channel, so the equalizer can include it.
pub fn receive(
    rx: &[Complex64],
    chain: Chain,
    p: &TvhtProfile,
    known_delay: usize,
    cir: Option<&[Complex64]>,
) -> Result<Vec<FreqSymbol>> {
    let eq = build_equalizer(chain, p, known_delay, cir)?;
    receive_with(rx, p, &eq)
}

fn receive_with(rx: &[Complex64], p: &TvhtProfile, eq: &Equalizer) -> Result<Vec<FreqSymbol>> {
    let n_fft = p.n_fft();
    let cp = p.cp_len();
    let nt_prime = p.extended_symbol_len();
    let l = eq.l;
    let d = eq.delay;

    // Highest symbol index whose final body sample is still inside rx.
    let last_needed = |s: usize| l * (s * nt_prime + cp + n_fft - 1) + d;
    if rx.len() <= last_needed(0) {
        return Err(Error::Length {
            what: "received stream (need one aligned OFDM symbol)".into(),
            expected: last_needed(0) + 1,
            actual: rx.len(),
        });
    }
    let mut n_symbols = 0;
    while rx.len() > last_needed(n_symbols) {
        n_symbols += 1;
    }

    let mut out = Vec::with_capacity(n_symbols);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n_fft];
    for s in 0..n_symbols {
        let body = s * nt_prime + cp;
        for (j, v) in scratch.iter_mut().enumerate() {
            *v = rx[l * (body + j) + d];
        }
        fft::forward(&mut scratch);
        let mut sym = FreqSymbol::new_zeroed(n_fft);
        for &(k, denom) in &eq.denominators {
            let i = sym.bin_index(k);
            sym.set(k, scratch[i] / denom);
        }
        out.push(sym);
    }
    Ok(out)
}

/// Stopping rule for one SER sweep point: stop after `min_errors` symbol
/// errors, or flag the point censored once `max_symbols` have been sent.
#[derive(Debug, Clone, Copy)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_symbols: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: 200,
            max_symbols: 2_000_000,
        }
    }
}

/// Measured error rate at one SNR point. A "symbol" is one constellation
/// symbol on one data subcarrier (108 per OFDM symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub snr_db: f64,
    pub n_symbols_sent: u64,
    pub n_symbol_errors: u64,
    pub ser: f64,
    /// 95% confidence halfwidth under the normal approximation.
    pub confidence_halfwidth: f64,
    /// True when the point stopped on `max_symbols` before reaching
    /// `min_errors`.
    pub censored: bool,
}

/// OFDM symbols transmitted per Monte Carlo trial.
const TRIAL_OFDM_SYMBOLS: usize = 16;
/// Trials dispatched per parallel batch; results are merged in trial-index
/// order so the outcome is independent of thread scheduling.
const TRIAL_BATCH: u64 = 8;

fn splitmix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-trial seed derived from (master seed, SNR index, trial index) so any
/// trial can run on any thread in any order with identical results.
fn trial_seed(master: u64, snr_index: u64, trial_index: u64) -> u64 {
    let a = splitmix(master.wrapping_add(snr_index.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    splitmix(a ^ trial_index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn run_trial(
    chain: Chain,
    p: &TvhtProfile,
    eq: &Equalizer,
    snr_db: f64,
    seed: u64,
) -> Result<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = p.subcarrier_map();
    let n_data = map.data_indices().len();
    let bits: Vec<u8> = (0..TRIAL_OFDM_SYMBOLS * n_data * 2)
        .map(|_| rng.random_range(0..=1u8))
        .collect();
    let burst = match chain {
        Chain::Reference => run_reference(&bits, p, Constellation::Qpsk)?,
        Chain::Shaped(method) => {
            run_pipeline_taps(&bits, p, method, Constellation::Qpsk)?.filtered
        }
    };
    let noise_seed = rng.random::<u64>();
    let rx = apply_channel(&burst, &ChannelModel::awgn(snr_db, noise_seed));
    let symbols = receive_with(&rx, p, eq)?;

    let mut errors = 0u64;
    let mut sent = 0u64;
    for (s, sym) in symbols.iter().take(TRIAL_OFDM_SYMBOLS).enumerate() {
        for (i, &k) in map.data_indices().iter().enumerate() {
            let b0 = bits[(s * n_data + i) * 2];
            let b1 = bits[(s * n_data + i) * 2 + 1];
            let tx_index = ((b0 as usize) << 1) | b1 as usize;
            if Constellation::Qpsk.hard_demap(sym.get(k)) != tx_index {
                errors += 1;
            }
            sent += 1;
        }
    }
    Ok((errors, sent))
}

/// Monte Carlo SER sweep over an SNR grid in an AWGN channel.
///
/// Trials are independent and identically seeded from
/// `(master_seed, snr index, trial index)`; batches of trials run in
/// parallel but are merged in trial order, so results are byte-identical
/// across thread counts.
pub fn run_ser_sweep(
    chain: Chain,
    p: &TvhtProfile,
    snr_grid_db: &[f64],
    stop: StopRule,
    master_seed: u64,
) -> Result<Vec<LinkResult>> {
    if stop.min_errors == 0 || stop.max_symbols == 0 {
        return Err(Error::config("stop rule must demand at least one error and symbol"));
    }
    let eq = build_equalizer(chain, p, chain.known_delay(p), None)?;
    let mut results = Vec::with_capacity(snr_grid_db.len());
    for (snr_index, &snr_db) in snr_grid_db.iter().enumerate() {
        let mut errors = 0u64;
        let mut sent = 0u64;
        let mut trial = 0u64;
        while errors < stop.min_errors && sent < stop.max_symbols {
            let batch: Result<Vec<(u64, u64)>> = (trial..trial + TRIAL_BATCH)
                .into_par_iter()
                .map(|t| {
                    run_trial(
                        chain,
                        p,
                        &eq,
                        snr_db,
                        trial_seed(master_seed, snr_index as u64, t),
                    )
                })
                .collect();
            for (e, s) in batch? {
                errors += e;
                sent += s;
            }
            trial += TRIAL_BATCH;
        }
        let ser = errors as f64 / sent as f64;
        let confidence_halfwidth = 1.96 * (ser * (1.0 - ser) / sent as f64).sqrt();
        results.push(LinkResult {
            snr_db,
            n_symbols_sent: sent,
            n_symbol_errors: errors,
            ser,
            confidence_halfwidth,
            censored: errors < stop.min_errors,
        });
    }
    Ok(results)
}

/// Root-mean-square error-vector magnitude of a noiseless loopback,
/// relative to unit symbol energy. Quantifies the self-interference floor
/// of a shaping chain.
pub fn measure_noiseless_evm(
    chain: Chain,
    p: &TvhtProfile,
    n_symbols: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = p.subcarrier_map();
    let n_data = map.data_indices().len();
    let bits: Vec<u8> = (0..n_symbols * n_data * 2)
        .map(|_| rng.random_range(0..=1u8))
        .collect();
    let burst = match chain {
        Chain::Reference => run_reference(&bits, p, Constellation::Qpsk)?,
        Chain::Shaped(method) => {
            run_pipeline_taps(&bits, p, method, Constellation::Qpsk)?.filtered
        }
    };
    let symbols = receive(&burst.samples, chain, p, chain.known_delay(p), None)?;

    let mut acc = 0.0;
    let mut count = 0usize;
    for (s, sym) in symbols.iter().take(n_symbols).enumerate() {
        for (i, &k) in map.data_indices().iter().enumerate() {
            let b0 = bits[(s * n_data + i) * 2];
            let b1 = bits[(s * n_data + i) * 2 + 1];
            let tx = Constellation::Qpsk.map_bits(&[b0, b1]);
            acc += (sym.get(k) - tx).norm_sqr();
            count += 1;
        }
    }
    Ok((acc / count as f64).sqrt())
}

/// Count hard-decision QPSK symbol errors through a noiseless chain.
///
/// Returns `(symbol_errors, symbols_sent)`. Any nonzero count exposes a
/// self-interference floor: with no noise, every error is caused by the
/// chain's own residual ISI/ICI. Work is chunked so memory stays bounded
/// regardless of `n_symbols`.
pub fn measure_noiseless_ser(
    chain: Chain,
    p: &TvhtProfile,
    n_symbols: usize,
    seed: u64,
) -> Result<(u64, u64)> {
    const CHUNK: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = p.subcarrier_map();
    let n_data = map.data_indices().len();
    let mut errors = 0u64;
    let mut sent = 0u64;
    let mut remaining = n_symbols;
    while remaining > 0 {
        let chunk = remaining.min(CHUNK);
        let bits: Vec<u8> = (0..chunk * n_data * 2)
            .map(|_| rng.random_range(0..=1u8))
            .collect();
        let burst = match chain {
            Chain::Reference => run_reference(&bits, p, Constellation::Qpsk)?,
            Chain::Shaped(method) => {
                run_pipeline_taps(&bits, p, method, Constellation::Qpsk)?.filtered
            }
        };
        let symbols = receive(&burst.samples, chain, p, chain.known_delay(p), None)?;
        for (s, sym) in symbols.iter().take(chunk).enumerate() {
            for (i, &k) in map.data_indices().iter().enumerate() {
                let b0 = bits[(s * n_data + i) * 2];
                let b1 = bits[(s * n_data + i) * 2 + 1];
                let tx_index = ((b0 as usize) << 1) | b1 as usize;
                if Constellation::Qpsk.hard_demap(sym.get(k)) != tx_index {
                    errors += 1;
                }
                sent += 1;
            }
        }
        remaining -= chunk;
    }
    Ok((errors, sent))
}

/// Closed-form QPSK symbol error probability over AWGN with per-symbol
/// Es/N0 `gamma`: `2Q(sqrt(gamma)) - Q(sqrt(gamma))^2`.
pub fn qpsk_ser_theory(snr_db: f64) -> f64 {
    let gamma = 10f64.powf(snr_db / 10.0);
    let q = 0.5 * erfc((gamma.sqrt()) / std::f64::consts::SQRT_2);
    2.0 * q - q * q
}
