//! Time-domain edge windows and overlap-add symbol framing.
//!
//! Each CP-extended symbol is lengthened by a cyclic suffix of `beta_nt`
//! samples (a copy of the first body samples, continuing the periodic
//! structure past the symbol end), multiplied by a window whose rising edge
//! covers the start of the cyclic prefix and whose falling edge covers the
//! suffix, and overlap-added with its successor. Symbol spacing stays at the
//! extended symbol length, so the framing adds no rate overhead; smoothing
//! costs only the part of the prefix consumed by the rising edge.
//!
//! Three edge shapes are implemented besides the rectangular reference:
//!
//! * raised cosine — `sin^2` edge, the conventional choice;
//! * vestigial symmetry — a flatter `1/2 + (9/16)cos - (1/16)cos(3..)` edge;
//! * asymmetric — a `cos(pi*(m - bNT) / (2*(bNT - 1)))` rising edge whose
//!   falling counterpart is its pointwise complement. The denominator puts
//!   an exact zero at the second edge sample; the first sample sits slightly
//!   below zero at `-sin(pi / (2*(bNT - 1)))`, which is kept as defined
//!   rather than clamped.
//!
//! Every non-rectangular family satisfies exact edge complementarity
//! (`rising[k] + falling[k] = 1`), so back-to-back symbols of identical
//! content pass through the overlap region unperturbed.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::TvhtProfile;
use crate::tx_chain::TimeSymbol;

/// Edge-window family applied around each OFDM symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowFamily {
    Rectangular,
    RaisedCosine,
    VestigialSymmetry,
    Asymmetric,
}

impl WindowFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(WindowFamily::Rectangular),
            "rc" | "raised-cosine" => Ok(WindowFamily::RaisedCosine),
            "vs" | "vestigial" => Ok(WindowFamily::VestigialSymmetry),
            "asym" | "asymmetric" => Ok(WindowFamily::Asymmetric),
            other => Err(Error::Parse {
                what: "window family",
                detail: format!("unknown window '{other}' (expected rect, rc, vs, or asym)"),
            }),
        }
    }

    /// Short label used in provenance stage lists and artifact names.
    pub fn label(self) -> &'static str {
        match self {
            WindowFamily::Rectangular => "rect",
            WindowFamily::RaisedCosine => "rc",
            WindowFamily::VestigialSymmetry => "vs",
            WindowFamily::Asymmetric => "asym",
        }
    }
}

impl fmt::Display for WindowFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A concrete window: rising edge, flat top, falling edge on a
/// `[0, total_len)` grid where `total_len = symbol_len + beta_nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub family: WindowFamily,
    /// Smoothing-edge length in samples at the rate the window applies to.
    pub beta_nt: usize,
    /// `symbol_len + beta_nt`.
    pub total_len: usize,
    pub coeffs: Vec<f64>,
}

impl WindowSpec {
    /// Rising-edge samples (first `beta_nt` coefficients).
    pub fn rising(&self) -> &[f64] {
        &self.coeffs[..self.beta_nt]
    }

    /// Falling-edge samples (last `beta_nt` coefficients).
    pub fn falling(&self) -> &[f64] {
        &self.coeffs[self.total_len - self.beta_nt..]
    }
}

/// Build a window for a CP-extended symbol of `symbol_len` samples.
///
/// The rising edge occupies coefficients `[0, beta_nt)`, the flat top
/// (identically 1) `[beta_nt, symbol_len)`, and the falling edge
/// `[symbol_len, symbol_len + beta_nt)`. `Rectangular` requires
/// `beta_nt == 0` and returns all-ones of length `symbol_len`; a zero
/// `beta_nt` degenerates every family to that same rectangle.
pub fn make_window(
    family: WindowFamily,
    beta_nt: usize,
    symbol_len: usize,
) -> Result<WindowSpec> {
    if symbol_len == 0 {
        return Err(Error::config("window symbol_len must be positive"));
    }
    if family == WindowFamily::Rectangular && beta_nt != 0 {
        return Err(Error::config(format!(
            "rectangular window has no smoothing edge; beta_nt must be 0 (got {beta_nt})"
        )));
    }
    if family == WindowFamily::Asymmetric && beta_nt == 1 {
        return Err(Error::config(
            "asymmetric window needs beta_nt >= 2 (edge formula divides by beta_nt - 1)",
        ));
    }
    if beta_nt >= symbol_len {
        return Err(Error::config(format!(
            "smoothing edge must be shorter than the symbol (beta_nt {beta_nt} \
             >= symbol_len {symbol_len})"
        )));
    }
    let total_len = symbol_len + beta_nt;
    let mut coeffs = vec![1.0; total_len];
    let b = beta_nt as f64;
    for i in 0..beta_nt {
        let (rise, fall) = match family {
            WindowFamily::Rectangular => unreachable!("beta_nt is 0 for rectangular"),
            WindowFamily::RaisedCosine => {
                let r = (std::f64::consts::FRAC_PI_2 * i as f64 / b).sin().powi(2);
                let f = (std::f64::consts::FRAC_PI_2 * i as f64 / b).cos().powi(2);
                (r, f)
            }
            WindowFamily::VestigialSymmetry => {
                let up = std::f64::consts::PI * (1.0 - i as f64 / b);
                let down = std::f64::consts::PI * i as f64 / b;
                let r = 0.5 + (9.0 / 16.0) * up.cos() - (1.0 / 16.0) * (3.0 * up).cos();
                let f = 0.5 + (9.0 / 16.0) * down.cos() - (1.0 / 16.0) * (3.0 * down).cos();
                (r, f)
            }
            WindowFamily::Asymmetric => {
                let r = (std::f64::consts::PI * (i as f64 - b) / (2.0 * (b - 1.0))).cos();
                (r, 1.0 - r)
            }
        };
        coeffs[i] = rise;
        coeffs[symbol_len + i] = fall;
    }
    Ok(WindowSpec {
        family,
        beta_nt,
        total_len,
        coeffs,
    })
}

/// How a burst was produced: stage labels plus the grid facts downstream
/// consumers need (PSD normalization band, receiver FFT calibration).
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    /// Processing stages applied so far, e.g.
    /// `["ifft512", "cp", "cs", "asym-window", "stuff2", "fir40"]`.
    pub stages: Vec<String>,
    pub subcarrier_spacing_hz: f64,
    /// Outermost occupied subcarrier frequency; the PSD 0 dBr reference is
    /// the mean power inside this band.
    pub occupied_edge_hz: f64,
    /// Expected post-FFT bin power at the receiver for a unit-energy data
    /// symbol; together with `fft_len` this calibrates channel noise to a
    /// requested per-subcarrier Es/N0.
    pub rx_bin_energy: f64,
    /// Receiver FFT size (`M * N`).
    pub fft_len: usize,
}

impl Provenance {
    pub fn stage_list(&self) -> String {
        self.stages.join(",")
    }
}

/// A windowed, overlap-added sample stream at a known rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedBurst {
    pub samples: Vec<Complex64>,
    pub rate_hz: f64,
    pub n_symbols: usize,
    pub provenance: Provenance,
}

impl ShapedBurst {
    /// Wrap raw samples (synthetic signals, file imports). `occupied_edge_hz`
    /// sets the 0 dBr normalization band for PSD estimates.
    pub fn from_samples(
        samples: Vec<Complex64>,
        rate_hz: f64,
        occupied_edge_hz: f64,
        subcarrier_spacing_hz: f64,
    ) -> Self {
        ShapedBurst {
            samples,
            rate_hz,
            n_symbols: 0,
            provenance: Provenance {
                stages: vec!["raw".to_string()],
                subcarrier_spacing_hz,
                occupied_edge_hz,
                rx_bin_energy: 1.0,
                fft_len: 0,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }
}

/// Window each symbol and overlap-add the sequence into one burst.
///
/// Each input symbol must be a CP-extended symbol of
/// `p.extended_symbol_len()` samples. It is extended with a cyclic suffix of
/// `w.beta_nt` samples copied from the start of its body, multiplied by the
/// window, and added at a spacing of one extended symbol, so consecutive
/// falling/rising edges overlap over exactly `beta_nt` samples. The result
/// has `n_symbols * extended_symbol_len + beta_nt` samples at the profile's
/// windowing rate.
pub fn shape_and_overlap(
    symbols: &[TimeSymbol],
    w: &WindowSpec,
    p: &TvhtProfile,
) -> Result<ShapedBurst> {
    if symbols.is_empty() {
        return Err(Error::config("shape_and_overlap needs at least one symbol"));
    }
    let n_tp = p.extended_symbol_len();
    if w.total_len != n_tp + w.beta_nt {
        return Err(Error::Length {
            what: "window length (must be extended symbol + beta_nt)",
            expected: n_tp + w.beta_nt,
            actual: w.total_len,
        });
    }
    if w.beta_nt > p.cp_len() {
        return Err(Error::config(format!(
            "smoothing edge must fit inside the cyclic prefix (beta_nt {} > CP {})",
            w.beta_nt,
            p.cp_len()
        )));
    }
    for s in symbols {
        if s.len() != n_tp {
            return Err(Error::Length {
                what: "time symbol",
                expected: n_tp,
                actual: s.len(),
            });
        }
    }

    let beta = w.beta_nt;
    let out_len = symbols.len() * n_tp + beta;
    let mut out = vec![Complex64::new(0.0, 0.0); out_len];
    for (l, sym) in symbols.iter().enumerate() {
        let start = l * n_tp;
        // CP-extended symbol followed by its cyclic suffix: the body starts
        // at cp_len, so the suffix repeats body samples [0, beta).
        for i in 0..w.total_len {
            let v = if i < n_tp {
                sym.samples[i]
            } else {
                sym.samples[p.cp_len() + (i - n_tp)]
            };
            out[start + i] += v * w.coeffs[i];
        }
    }

    let mut stages = vec![format!("ifft{}", p.n_fft()), "cp".to_string()];
    if beta > 0 {
        stages.push("cs".to_string());
    }
    stages.push(format!("{}-window", w.family.label()));

    Ok(ShapedBurst {
        samples: out,
        rate_hz: p.application_rate_hz(),
        n_symbols: symbols.len(),
        provenance: Provenance {
            stages,
            subcarrier_spacing_hz: p.subcarrier_spacing_hz(),
            occupied_edge_hz: p.occupied_edge_hz(),
            rx_bin_energy: (p.guard_extension_m() as f64).powi(2),
            fft_len: p.n_fft(),
        },
    })
}
