//! Guard-band extension pipelines: zero-stuffing interpolation, windowed-sinc
//! image-rejection FIR design, and the complete per-method transmit chains.
//!
//! Every chain ends at the same final rate `U *` base. What differs is how
//! the spectrum images land before filtering: zero-stuffing by `L` tiles the
//! spectrum with period `final_rate / L`, so a large `L` (base-rate IFFT)
//! leaves the first image only a few subcarriers away from the occupied
//! band, while a guard-extended IFFT (`M > 1`, small `L`) pushes it `M`
//! times further out. The FIR cutoff sits midway across the resulting gap —
//! at `final_rate / (2L)` — so chains with a wider gap get away with a much
//! easier filter.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{Method, TvhtProfile};
use crate::tx_chain::{ifft_modulate, map_payload, Constellation, TimeSymbol};
use crate::windowing::{make_window, shape_and_overlap, ShapedBurst, WindowFamily};

/// Linear-phase lowpass designed for a specific sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub design_rate_hz: f64,
    pub design_cutoff_hz: f64,
}

impl FirFilter {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Group delay in samples at the design rate; fractional for even tap
    /// counts.
    pub fn group_delay(&self) -> f64 {
        (self.taps.len() as f64 - 1.0) / 2.0
    }

    /// Complex frequency response at `f_hz` (DTFT at the design rate).
    pub fn response_at(&self, f_hz: f64) -> Complex64 {
        let w = std::f64::consts::TAU * f_hz / self.design_rate_hz;
        self.taps
            .iter()
            .enumerate()
            .map(|(i, &t)| Complex64::from_polar(t, -w * i as f64))
            .sum()
    }

    /// Response of the stuff-filter-decimate cascade seen by a tone.
    ///
    /// When a zero-stuffed-by-`l` signal is filtered and then read back at
    /// every `l`-th output sample with phase `phase`, only the polyphase
    /// branch `taps[l*r + phase]` contributes. `cycles` is the tone
    /// frequency in cycles per *decimated* sample.
    pub fn decimated_response(&self, l: usize, phase: usize, cycles: f64) -> Complex64 {
        assert!(l >= 1 && phase < l, "decimation phase must be below l");
        let w = std::f64::consts::TAU * cycles;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut r = 0usize;
        while l * r + phase < self.taps.len() {
            acc += Complex64::from_polar(self.taps[l * r + phase], -w * r as f64);
            r += 1;
        }
        acc
    }
}

/// Insert `l - 1` zeros after every sample, multiplying the rate by `l`.
///
/// The DFT of the result tiles the input spectrum `l` times; total energy is
/// unchanged.
pub fn zero_stuff(burst: &ShapedBurst, l: usize) -> ShapedBurst {
    assert!(l >= 1, "stuffing factor must be at least 1");
    let mut samples = vec![Complex64::new(0.0, 0.0); burst.samples.len() * l];
    for (i, &v) in burst.samples.iter().enumerate() {
        samples[i * l] = v;
    }
    let mut provenance = burst.provenance.clone();
    provenance.stages.push(format!("stuff{l}"));
    ShapedBurst {
        samples,
        rate_hz: burst.rate_hz * l as f64,
        n_symbols: burst.n_symbols,
        provenance,
    }
}

/// Design the image-rejection lowpass for a profile: a Hamming-windowed
/// sinc of `fir_len_final` taps at the final rate, cut off at the arithmetic
/// midpoint of the gap between the occupied band edge and the first image
/// edge — which is `final_rate / (2L)` — and normalized to a DC gain of `L`
/// so interpolation preserves sample amplitude.
pub fn design_fir(p: &TvhtProfile) -> Result<FirFilter> {
    let rate = p.final_rate_hz();
    let l = p.interpolation_l();
    let len = p.fir_len_final();
    let cutoff_hz = rate / (2.0 * l as f64);
    if cutoff_hz >= rate / 2.0 {
        return Err(Error::config(
            "FIR cutoff reaches Nyquist; interpolation factor must be at least 2",
        ));
    }
    let center = (len as f64 - 1.0) / 2.0;
    let omega = std::f64::consts::TAU * cutoff_hz / rate;

    let mut taps = vec![0.0; len];
    // Build one half and mirror so linear phase is exact in f64.
    for i in 0..len.div_ceil(2) {
        let x = i as f64 - center;
        let ideal = if x == 0.0 {
            omega / std::f64::consts::PI
        } else {
            (omega * x).sin() / (std::f64::consts::PI * x)
        };
        let hamming =
            0.54 - 0.46 * (std::f64::consts::TAU * i as f64 / (len as f64 - 1.0)).cos();
        taps[i] = ideal * hamming;
        taps[len - 1 - i] = taps[i];
    }
    let sum: f64 = taps.iter().sum();
    let scale = l as f64 / sum;
    for t in &mut taps {
        *t *= scale;
    }
    Ok(FirFilter {
        taps,
        design_rate_hz: rate,
        design_cutoff_hz: cutoff_hz,
    })
}

/// Full (non-truncated) convolution with a real-tap FIR.
///
/// Output length is `input + taps - 1`; the filter's group delay of
/// `(taps - 1) / 2` samples is recorded via the provenance stage list and
/// accounted for by the receiver's alignment.
pub fn apply_fir(burst: &ShapedBurst, fir: &FirFilter) -> Result<ShapedBurst> {
    if burst.rate_hz != fir.design_rate_hz {
        return Err(Error::RateMismatch(burst.rate_hz, fir.design_rate_hz));
    }
    let n = burst.samples.len();
    let t = fir.taps.len();
    if n <= t {
        return Err(Error::config(format!(
            "input of {n} samples must be longer than the {t}-tap filter"
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n + t - 1];
    for (i, &x) in burst.samples.iter().enumerate() {
        if x.re == 0.0 && x.im == 0.0 {
            continue; // zero-stuffed inputs are mostly zeros
        }
        for (j, &h) in fir.taps.iter().enumerate() {
            out[i + j] += x * h;
        }
    }
    let mut provenance = burst.provenance.clone();
    provenance.stages.push(format!("fir{t}"));
    Ok(ShapedBurst {
        samples: out,
        rate_hz: burst.rate_hz,
        n_symbols: burst.n_symbols,
        provenance,
    })
}

/// Edge-window family each method applies.
pub fn window_family_for(method: Method) -> WindowFamily {
    match method {
        Method::Asp | Method::Pro => WindowFamily::Asymmetric,
        Method::SoA => WindowFamily::RaisedCosine,
    }
}

/// Intermediate stage outputs of one pipeline run, each tagged with its own
/// rate and provenance: after windowing (IFFT rate), after zero-stuffing
/// (final rate, images intact), and after the FIR (final rate, images
/// suppressed).
#[derive(Debug, Clone)]
pub struct PipelineTaps {
    pub windowed: ShapedBurst,
    pub stuffed: ShapedBurst,
    pub filtered: ShapedBurst,
}

/// Run a method's complete transmit chain on QPSK payload bits spanning
/// exactly `n_symbols` OFDM symbols.
pub fn run_pipeline(
    payload_bits: &[u8],
    p: &TvhtProfile,
    method: Method,
    n_symbols: usize,
) -> Result<ShapedBurst> {
    let per_symbol = p.subcarrier_map().data_indices().len()
        * Constellation::Qpsk.bits_per_symbol();
    if payload_bits.len() != n_symbols * per_symbol {
        return Err(Error::Length {
            what: "payload bits for requested symbol count".into(),
            expected: n_symbols * per_symbol,
            actual: payload_bits.len(),
        });
    }
    Ok(run_pipeline_taps(payload_bits, p, method, Constellation::Qpsk)?.filtered)
}

/// Like [`run_pipeline`] but keeps every intermediate stage, with a
/// selectable constellation; symbol count follows from the bit count.
pub fn run_pipeline_taps(
    payload_bits: &[u8],
    p: &TvhtProfile,
    method: Method,
    constellation: Constellation,
) -> Result<PipelineTaps> {
    match method {
        Method::Asp if p.guard_extension_m() != 1 => {
            return Err(Error::config(
                "the aspired chain runs a base-length IFFT; profile must have guard extension 1",
            ));
        }
        Method::SoA | Method::Pro if p.guard_extension_m() < 2 => {
            return Err(Error::config(
                "guard-extended chains need a guard extension factor of at least 2",
            ));
        }
        _ => {}
    }
    let map = p.subcarrier_map();
    let freq = map_payload(payload_bits, &map, constellation, p.n_fft())?;
    let time: Vec<TimeSymbol> = freq.iter().map(|x| ifft_modulate(x, p)).collect();
    let w = make_window(window_family_for(method), p.beta_nt(), p.extended_symbol_len())?;
    let windowed = shape_and_overlap(&time, &w, p)?;
    let stuffed = zero_stuff(&windowed, p.interpolation_l());
    let fir = design_fir(p)?;
    let mut filtered = apply_fir(&stuffed, &fir)?;
    filtered.provenance.rx_bin_energy = rx_bin_energy(p)?;
    Ok(PipelineTaps {
        windowed,
        stuffed,
        filtered,
    })
}

/// Reference chain without shaping: plain CP-OFDM at the IFFT rate (no
/// window edge, no interpolation, no FIR). Used for loopback checks and as
/// the analytic-AWGN baseline.
pub fn run_reference(
    payload_bits: &[u8],
    p: &TvhtProfile,
    constellation: Constellation,
) -> Result<ShapedBurst> {
    let map = p.subcarrier_map();
    let freq = map_payload(payload_bits, &map, constellation, p.n_fft())?;
    let time: Vec<TimeSymbol> = freq.iter().map(|x| ifft_modulate(x, p)).collect();
    let w = make_window(WindowFamily::Rectangular, 0, p.extended_symbol_len())?;
    shape_and_overlap(&time, &w, p)
}

/// Receiver sampling offset (in final-rate samples) that centers the FIR
/// group delay: `round((taps - 1) / 2)`.
pub fn receiver_alignment(p: &TvhtProfile) -> usize {
    ((p.fir_len_final() as f64 - 1.0) / 2.0).round() as usize
}

/// Composite per-data-bin response of the stuff-filter-decimate chain at
/// the canonical alignment `known_delay`, in ascending data-index order.
///
/// For signed subcarrier `k`, the receiver that samples every `L`-th
/// final-rate sample at offset `known_delay` sees the tone scaled by
/// `exp(j*2*pi*k*shift/N_fft) * P_d0(k/N_fft)`, where `d0 = known_delay % L`
/// selects the polyphase branch and `shift = (known_delay - d0) / L` is the
/// whole-sample part of the delay at the decimated rate.
pub fn chain_bin_response(
    p: &TvhtProfile,
    known_delay: usize,
) -> Result<Vec<(i32, Complex64)>> {
    let fir = design_fir(p)?;
    let l = p.interpolation_l();
    let d0 = known_delay % l;
    let shift = ((known_delay - d0) / l) as f64;
    let n_fft = p.n_fft() as f64;
    let map = p.subcarrier_map();
    Ok(map
        .data_indices()
        .iter()
        .map(|&k| {
            let cycles = k as f64 / n_fft;
            let branch = fir.decimated_response(l, d0, cycles);
            let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * cycles * shift);
            (k, branch * phase)
        })
        .collect())
}

/// Expected post-FFT data-bin power for a unit-energy constellation symbol
/// after a method's full chain, `M^2 * mean|C(k)|^2`. Stamped into burst
/// provenance so channel noise can be calibrated to a per-subcarrier Es/N0.
pub fn rx_bin_energy(p: &TvhtProfile) -> Result<f64> {
    let m = p.guard_extension_m() as f64;
    let resp = chain_bin_response(p, receiver_alignment(p))?;
    let mean: f64 =
        resp.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>() / resp.len() as f64;
    Ok(m * m * mean)
}

/// Spacing between spectrum images created by zero-stuffing: the pre-stuff
/// rate `final_rate / L`.
pub fn image_spacing_hz(p: &TvhtProfile) -> f64 {
    p.final_rate_hz() / p.interpolation_l() as f64
}

/// Width of the empty band between the occupied edge and the first image's
/// lower edge, before filtering.
pub fn first_image_gap_hz(p: &TvhtProfile) -> f64 {
    image_spacing_hz(p) - 2.0 * p.occupied_edge_hz()
}

/// Positive-frequency image bands `(lo_hz, hi_hz)` present after
/// zero-stuffing, clipped to the final Nyquist range.
pub fn image_bands(p: &TvhtProfile) -> Vec<(f64, f64)> {
    let nyquist = p.final_rate_hz() / 2.0;
    let occ = p.occupied_edge_hz();
    let spacing = image_spacing_hz(p);
    let mut bands = Vec::new();
    let mut center = spacing;
    while center - occ < nyquist {
        bands.push((center - occ, (center + occ).min(nyquist)));
        center += spacing;
    }
    bands
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{load_profile, Bcu, Method};
    use crate::windowing::ShapedBurst;
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_burst(n: usize, rate: f64, seed: u64) -> ShapedBurst {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        ShapedBurst::from_samples(samples, rate, rate / 4.0, 0.0)
    }

    /// Direct O(n^2) DFT used as the oracle for spectral properties.
    fn direct_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(m, &v)| v * Complex64::from_polar(1.0, -TAU * (k * m) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    // ---- zero stuffing -----------------------------------------------------

    #[test]
    fn zero_stuff_places_samples_every_l() {
        let burst = random_burst(10, 1000.0, 1);
        let out = zero_stuff(&burst, 4);
        assert_eq!(out.len(), 40);
        assert_eq!(out.rate_hz, 4000.0);
        for i in 0..40 {
            if i % 4 == 0 {
                assert_eq!(out.samples[i], burst.samples[i / 4]);
            } else {
                assert_eq!(out.samples[i], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn zero_stuff_tiles_the_spectrum() {
        // DFT(stuffed)[k] = DFT(original)[k mod n]: the image property that
        // motivates the whole filtering stage.
        let burst = random_burst(16, 1000.0, 2);
        let l = 3;
        let out = zero_stuff(&burst, l);
        let base = direct_dft(&burst.samples);
        let tiled = direct_dft(&out.samples);
        for k in 0..out.len() {
            let diff = (tiled[k] - base[k % 16]).norm();
            assert!(diff < 1e-9, "bin {k}: {diff}");
        }
    }

    #[test]
    fn zero_stuff_preserves_energy() {
        let burst = random_burst(64, 1000.0, 3);
        let out = zero_stuff(&burst, 8);
        let e_in: f64 = burst.samples.iter().map(|v| v.norm_sqr()).sum();
        let e_out: f64 = out.samples.iter().map(|v| v.norm_sqr()).sum();
        assert_eq!(e_in, e_out);
    }

    // ---- FIR design ----------------------------------------------------------

    #[test]
    fn fir_matches_profile_dimensions() {
        let pro = design_fir(&load_profile(Method::Pro, Bcu::Mhz8)).unwrap();
        assert_eq!(pro.len(), 40);
        let asp = design_fir(&load_profile(Method::Asp, Bcu::Mhz8)).unwrap();
        assert_eq!(asp.len(), 72);
    }

    #[test]
    fn fir_cutoff_is_the_transition_midpoint() {
        // Midway between the occupied edge and the first image edge is
        // exactly the pre-stuffing Nyquist, final_rate / (2L).
        for method in Method::ALL {
            let p = load_profile(method, Bcu::Mhz8);
            let fir = design_fir(&p).unwrap();
            let occ = p.occupied_edge_hz();
            let image_lo = image_spacing_hz(&p) - occ;
            let midpoint = 0.5 * (occ + image_lo);
            assert!(
                (fir.design_cutoff_hz - midpoint).abs() < 1e-6,
                "{method}: cutoff {} vs midpoint {midpoint}",
                fir.design_cutoff_hz
            );
        }
    }

    #[test]
    fn fir_is_exactly_symmetric_with_dc_gain_l() {
        for method in Method::ALL {
            let p = load_profile(method, Bcu::Mhz8);
            let fir = design_fir(&p).unwrap();
            for i in 0..fir.len() / 2 {
                assert_eq!(
                    fir.taps[i],
                    fir.taps[fir.len() - 1 - i],
                    "{method} tap {i} not mirrored"
                );
            }
            let dc = fir.response_at(0.0).norm();
            assert!(
                (dc - p.interpolation_l() as f64).abs() < 1e-12,
                "{method}: DC gain {dc}"
            );
        }
    }

    #[test]
    fn fir_is_half_amplitude_at_cutoff() {
        for method in Method::ALL {
            let p = load_profile(method, Bcu::Mhz8);
            let fir = design_fir(&p).unwrap();
            let there = fir.response_at(fir.design_cutoff_hz).norm() / p.interpolation_l() as f64;
            assert!(
                (0.44..=0.56).contains(&there),
                "{method}: |H(fc)|/L = {there}"
            );
        }
    }

    #[test]
    fn pro_fir_attenuates_its_image_band_deeply() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let fir = design_fir(&p).unwrap();
        let l = p.interpolation_l() as f64;
        let (lo, hi) = image_bands(&p)[0];
        let worst = (0..=200)
            .map(|i| {
                let f = lo + (hi - lo) * i as f64 / 200.0;
                20.0 * (fir.response_at(f).norm() / l).log10()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst < -45.0, "image-band attenuation only {worst} dB");
    }

    // ---- convolution -----------------------------------------------------------

    #[test]
    fn apply_fir_matches_direct_convolution() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let fir = design_fir(&p).unwrap();
        let burst = random_burst(50, p.final_rate_hz(), 4);
        let out = apply_fir(&burst, &fir).unwrap();
        assert_eq!(out.len(), 50 + fir.len() - 1);
        for n in 0..out.len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..fir.len() {
                if n >= j && n - j < 50 {
                    acc += burst.samples[n - j] * fir.taps[j];
                }
            }
            assert!((out.samples[n] - acc).norm() < 1e-12, "sample {n}");
        }
    }

    #[test]
    fn apply_fir_rejects_rate_mismatch() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let fir = design_fir(&p).unwrap();
        let burst = random_burst(50, p.application_rate_hz(), 5);
        assert!(matches!(
            apply_fir(&burst, &fir),
            Err(Error::RateMismatch(_, _))
        ));
    }

    #[test]
    fn even_length_fir_peaks_across_the_center_pair() {
        let fir = design_fir(&load_profile(Method::Pro, Bcu::Mhz8)).unwrap();
        assert_eq!(fir.taps[19], fir.taps[20]);
        assert_eq!(fir.group_delay(), 19.5);
    }

    // ---- pipelines ---------------------------------------------------------------

    fn qpsk_bits(n_symbols: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_symbols * 216)
            .map(|_| rng.random_range(0..=1) as u8)
            .collect()
    }

    #[test]
    fn pro_pipeline_stage_lengths_and_rates() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let taps = run_pipeline_taps(&qpsk_bits(10, 6), &p, Method::Pro, Constellation::Qpsk)
            .unwrap();
        // 10 extended symbols of 576 plus a 64-sample edge, then x2, then
        // the FIR transient of 39 samples.
        assert_eq!(taps.windowed.len(), 10 * 576 + 64);
        assert_eq!(taps.stuffed.len(), 2 * (10 * 576 + 64));
        assert_eq!(taps.filtered.len(), 2 * (10 * 576 + 64) + 39);
        assert_eq!(taps.windowed.rate_hz, p.application_rate_hz());
        assert_eq!(taps.stuffed.rate_hz, p.final_rate_hz());
        assert_eq!(taps.filtered.rate_hz, p.final_rate_hz());
        assert_eq!(taps.filtered.n_symbols, 10);
    }

    #[test]
    fn pro_pipeline_provenance_stage_list() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let burst = run_pipeline(&qpsk_bits(2, 7), &p, Method::Pro, 2).unwrap();
        assert_eq!(
            burst.provenance.stages,
            vec!["ifft512", "cp", "cs", "asym-window", "stuff2", "fir40"]
        );
    }

    #[test]
    fn soa_uses_raised_cosine_and_asp_uses_asymmetric() {
        let p_soa = load_profile(Method::SoA, Bcu::Mhz8);
        let b_soa = run_pipeline(&qpsk_bits(2, 8), &p_soa, Method::SoA, 2).unwrap();
        assert!(b_soa.provenance.stages.contains(&"rc-window".to_string()));

        let p_asp = load_profile(Method::Asp, Bcu::Mhz8);
        let b_asp = run_pipeline(&qpsk_bits(2, 8), &p_asp, Method::Asp, 2).unwrap();
        assert!(b_asp.provenance.stages.contains(&"asym-window".to_string()));
        assert!(b_asp.provenance.stages.contains(&"ifft128".to_string()));
        assert!(b_asp.provenance.stages.contains(&"stuff8".to_string()));
        assert!(b_asp.provenance.stages.contains(&"fir72".to_string()));
    }

    #[test]
    fn all_methods_land_on_the_same_final_rate() {
        let bits = qpsk_bits(3, 9);
        let mut rates = Vec::new();
        for method in Method::ALL {
            let p = load_profile(method, Bcu::Mhz8);
            rates.push(run_pipeline(&bits, &p, method, 3).unwrap().rate_hz);
        }
        assert_eq!(rates[0], rates[1]);
        assert_eq!(rates[1], rates[2]);
    }

    #[test]
    fn chain_passband_response_is_near_unity() {
        // The composite stuff-filter-decimate response on occupied bins
        // should be around 1: the wide-gap chains nearly flat, the Asp chain
        // a bit dented toward the band edge by its tight filter.
        for method in Method::ALL {
            let p = load_profile(method, Bcu::Mhz8);
            let resp = chain_bin_response(&p, receiver_alignment(&p)).unwrap();
            let mean: f64 =
                resp.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>() / resp.len() as f64;
            assert!(
                (0.5..=1.2).contains(&mean),
                "{method}: mean |C|^2 = {mean}"
            );
            let energy = rx_bin_energy(&p).unwrap();
            let m2 = (p.guard_extension_m() * p.guard_extension_m()) as f64;
            assert!((energy / m2 - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn wide_gap_chains_have_flat_passband() {
        for method in [Method::SoA, Method::Pro] {
            let p = load_profile(method, Bcu::Mhz8);
            for (k, c) in chain_bin_response(&p, receiver_alignment(&p)).unwrap() {
                assert!(
                    (c.norm() - 1.0).abs() < 0.01,
                    "{method} bin {k}: |C| = {}",
                    c.norm()
                );
            }
        }
    }

    // ---- image-band geometry ------------------------------------------------------

    #[test]
    fn image_geometry_matches_the_grid() {
        let asp = load_profile(Method::Asp, Bcu::Mhz8);
        let pro = load_profile(Method::Pro, Bcu::Mhz8);
        let df = asp.subcarrier_spacing_hz();

        // Asp: images every 128 subcarriers; first gap 128 - 2*58 = 12.
        assert!((image_spacing_hz(&asp) - 128.0 * df).abs() < 1e-6);
        assert!((first_image_gap_hz(&asp) - 12.0 * df).abs() < 1e-6);

        // Pro: images every 512 subcarriers; first gap 512 - 2*58 = 396.
        assert!((image_spacing_hz(&pro) - 512.0 * df).abs() < 1e-6);
        assert!((first_image_gap_hz(&pro) - 396.0 * df).abs() < 1e-6);

        // The guard-extended chain multiplies the image spacing by exactly
        // M_pro / M_asp = 4 and widens the edge-to-edge gap even more.
        assert_eq!(image_spacing_hz(&pro) / image_spacing_hz(&asp), 4.0);
        assert!(first_image_gap_hz(&pro) >= 4.0 * first_image_gap_hz(&asp));
    }

    #[test]
    fn image_bands_enumerate_within_nyquist() {
        let asp = load_profile(Method::Asp, Bcu::Mhz8);
        let df = asp.subcarrier_spacing_hz();
        let bands = image_bands(&asp);
        assert_eq!(bands.len(), 4, "images at 128, 256, 384, 512 subcarriers");
        assert!((bands[0].0 - 70.0 * df).abs() < 1e-6);
        assert!((bands[0].1 - 186.0 * df).abs() < 1e-6);
        // The last image is centered on Nyquist and clips there.
        assert!((bands[3].1 - 512.0 * df).abs() < 1e-6);

        let pro = load_profile(Method::Pro, Bcu::Mhz8);
        let bands = image_bands(&pro);
        assert_eq!(bands.len(), 1);
        assert!((bands[0].0 - 454.0 * df).abs() < 1e-6);
    }

    #[test]
    fn design_fir_rejects_unit_interpolation() {
        let p = load_profile(Method::Pro, Bcu::Mhz8)
            .with_overrides(&[
                ("guard_extension_m".to_string(), "8".to_string()),
                ("interpolation_l".to_string(), "1".to_string()),
            ])
            .unwrap();
        assert!(design_fir(&p).is_err(), "cutoff at Nyquist must be rejected");
    }

    #[test]
    fn apply_fir_rejects_input_shorter_than_filter() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let fir = design_fir(&p).unwrap();
        let burst = random_burst(fir.len(), p.final_rate_hz(), 11);
        assert!(apply_fir(&burst, &fir).is_err());
    }

    #[test]
    fn run_pipeline_validates_symbol_count_and_method() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let bits = qpsk_bits(2, 12);
        assert!(matches!(
            run_pipeline(&bits, &p, Method::Pro, 3),
            Err(Error::Length { .. })
        ));
        // An Asp run on a guard-extended profile is a config mismatch.
        assert!(run_pipeline(&bits, &p, Method::Asp, 2).is_err());
    }

    #[test]
    fn reference_chain_has_no_shaping_stages() {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let burst = run_reference(&qpsk_bits(2, 10), &p, Constellation::Qpsk).unwrap();
        assert_eq!(burst.provenance.stages, vec!["ifft512", "cp", "rect-window"]);
        assert_eq!(burst.rate_hz, p.application_rate_hz());
        assert_eq!(burst.len(), 2 * p.extended_symbol_len());
    }
}
