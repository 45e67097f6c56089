//! OFDM transmit chain: constellation mapping, guard-extended IFFT with
//! cyclic prefix, and the matching demodulator.
//!
//! The modulator realizes
//!
//! ```text
//! x(m) = (1/N) * sum_k X(k) * exp(j*2*pi*(k/N_fft)*(m - N_cp,fft)),   0 <= m < N_T
//! ```
//!
//! where `N` is the base IFFT size and `N_fft = M * N` the guard-extended
//! size. Keeping the `1/N` scale for every `M` makes the per-sample symbol
//! power independent of the guard-band extension, so method comparisons see
//! identical transmit power. The first `M * N_cp` output samples are the
//! cyclic prefix, i.e. a copy of the last `M * N_cp` body samples.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::params::{SubcarrierMap, TvhtProfile, DATA_SUBCARRIERS};

/// Constellation used on the data subcarriers. All mappings are Gray-coded
/// and scaled to unit average symbol energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Bpsk,
    Qpsk,
    Qam16,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Bpsk => 1,
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
        }
    }

    /// Number of constellation points.
    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Map `bits_per_symbol` bits (values 0/1) to a constellation point.
    pub fn map_bits(self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        match self {
            Constellation::Bpsk => Complex64::new(bpsk_level(bits[0]), 0.0),
            Constellation::Qpsk => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                Complex64::new(bpsk_level(bits[0]) * s, bpsk_level(bits[1]) * s)
            }
            Constellation::Qam16 => {
                let s = 1.0 / 10.0_f64.sqrt();
                Complex64::new(
                    pam4_level(bits[0], bits[1]) * s,
                    pam4_level(bits[2], bits[3]) * s,
                )
            }
        }
    }

    /// Point for a packed symbol index (bits MSB-first).
    pub fn point(self, index: usize) -> Complex64 {
        let bps = self.bits_per_symbol();
        let bits: Vec<u8> = (0..bps)
            .map(|i| ((index >> (bps - 1 - i)) & 1) as u8)
            .collect();
        self.map_bits(&bits)
    }

    /// Hard-decision demapping to a packed symbol index (bits MSB-first).
    pub fn hard_demap(self, v: Complex64) -> usize {
        match self {
            Constellation::Bpsk => usize::from(v.re < 0.0),
            Constellation::Qpsk => (usize::from(v.re < 0.0) << 1) | usize::from(v.im < 0.0),
            Constellation::Qam16 => {
                let (i0, i1) = pam4_slice(v.re * 10.0_f64.sqrt());
                let (q0, q1) = pam4_slice(v.im * 10.0_f64.sqrt());
                (usize::from(i0) << 3) | (usize::from(i1) << 2) | (usize::from(q0) << 1)
                    | usize::from(q1)
            }
        }
    }
}

fn bpsk_level(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Gray-coded 4-PAM: 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3.
fn pam4_level(b0: u8, b1: u8) -> f64 {
    match (b0, b1) {
        (0, 0) => 3.0,
        (0, 1) => 1.0,
        (1, 1) => -1.0,
        (1, 0) => -3.0,
        _ => panic!("payload bits must be 0 or 1"),
    }
}

/// Inverse of `pam4_level` by nearest level (thresholds at 0 and +/-2).
fn pam4_slice(level: f64) -> (u8, u8) {
    if level >= 2.0 {
        (0, 0)
    } else if level >= 0.0 {
        (0, 1)
    } else if level >= -2.0 {
        (1, 1)
    } else {
        (1, 0)
    }
}

/// Frequency-domain OFDM symbol on the guard-extended grid.
///
/// Bins are stored in FFT order; accessors take signed subcarrier indices
/// (DC at 0, negative indices wrapping to the top half).
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSymbol {
    bins: Vec<Complex64>,
}

impl FreqSymbol {
    pub fn new_zeroed(n_fft: usize) -> Self {
        FreqSymbol {
            bins: vec![Complex64::new(0.0, 0.0); n_fft],
        }
    }

    pub fn from_bins(bins: Vec<Complex64>) -> Self {
        FreqSymbol { bins }
    }

    pub fn n_fft(&self) -> usize {
        self.bins.len()
    }

    /// FFT-order bin position of signed subcarrier `k`.
    pub fn bin_index(&self, k: i32) -> usize {
        bin_for_subcarrier(k, self.bins.len())
    }

    pub fn get(&self, k: i32) -> Complex64 {
        self.bins[self.bin_index(k)]
    }

    pub fn set(&mut self, k: i32, v: Complex64) {
        let i = self.bin_index(k);
        self.bins[i] = v;
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }
}

/// FFT-order position of signed subcarrier `k` on an `n_fft`-point grid.
pub fn bin_for_subcarrier(k: i32, n_fft: usize) -> usize {
    let n = n_fft as i32;
    (((k % n) + n) % n) as usize
}

/// Time-domain OFDM symbol: cyclic prefix followed by the IFFT body.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSymbol {
    pub samples: Vec<Complex64>,
}

impl TimeSymbol {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Map payload bits onto frequency-domain symbols.
///
/// Bits fill the 108 data subcarriers in ascending signed-index order,
/// `bits_per_symbol` at a time, MSB first. Pilots are set to +1 and every
/// null index stays exactly zero. The bit count must be a multiple of
/// `108 * bits_per_symbol`.
pub fn map_payload(
    bits: &[u8],
    map: &SubcarrierMap,
    constellation: Constellation,
    n_fft: usize,
) -> Result<Vec<FreqSymbol>> {
    let per_symbol = DATA_SUBCARRIERS * constellation.bits_per_symbol();
    if bits.is_empty() || bits.len() % per_symbol != 0 {
        return Err(Error::config(format!(
            "payload length must be a nonzero multiple of {per_symbol} bits \
             (108 data subcarriers x {} bits); got {}",
            constellation.bits_per_symbol(),
            bits.len()
        )));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::config(format!(
            "payload bits must be 0 or 1; got {b}"
        )));
    }
    let bps = constellation.bits_per_symbol();
    let mut symbols = Vec::with_capacity(bits.len() / per_symbol);
    for chunk in bits.chunks(per_symbol) {
        let mut sym = FreqSymbol::new_zeroed(n_fft);
        for (&k, sym_bits) in map.data_indices().iter().zip(chunk.chunks(bps)) {
            sym.set(k, constellation.map_bits(sym_bits));
        }
        for &k in map.pilot_indices() {
            sym.set(k, Complex64::new(1.0, 0.0));
        }
        symbols.push(sym);
    }
    Ok(symbols)
}

/// Inverse transform with cyclic prefix.
///
/// Output length is `M * (N + N_cp)`; the scale is `1/N` regardless of the
/// guard-band extension so symbol power does not depend on `M`.
pub fn ifft_modulate(x: &FreqSymbol, p: &TvhtProfile) -> TimeSymbol {
    assert_eq!(
        x.n_fft(),
        p.n_fft(),
        "frequency symbol grid must match the profile IFFT size"
    );
    let mut body = x.bins.clone();
    fft::inverse(&mut body);
    let scale = 1.0 / p.n_base() as f64;
    for v in &mut body {
        *v *= scale;
    }
    let cp_len = p.cp_len();
    let mut samples = Vec::with_capacity(cp_len + body.len());
    samples.extend_from_slice(&body[body.len() - cp_len..]);
    samples.extend_from_slice(&body);
    TimeSymbol { samples }
}

/// Strip the cyclic prefix and undo [`ifft_modulate`]'s transform exactly.
pub fn demodulate(y: &TimeSymbol, p: &TvhtProfile) -> FreqSymbol {
    assert_eq!(
        y.len(),
        p.extended_symbol_len(),
        "time symbol length must match the profile's extended symbol"
    );
    let mut body = y.samples[p.cp_len()..].to_vec();
    fft::forward(&mut body);
    let scale = 1.0 / p.guard_extension_m() as f64;
    for v in &mut body {
        *v *= scale;
    }
    FreqSymbol { bins: body }
}
