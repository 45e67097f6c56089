//! TVHT PHY numerology and shaping-chain parameter sets.
//!
//! IEEE 802.11af reuses the 802.11ac waveform inside a TV white-space basic
//! channel unit (BCU) of 6, 7, or 8 MHz. A 144-slot subcarrier grid (168 for
//! the 7 MHz BCU) carries 108 data and 6 pilot subcarriers on signed indices
//! -58..+58, with DC and the two adjacent bins left empty. All pulse-shaping
//! chains in this crate share that numerology and differ only in how the
//! base-rate symbol is brought to the common output rate: by an extended
//! IFFT (`guard_extension_m`), by zero-stuffing (`interpolation_l`), and by
//! an image-rejection FIR. The product `M * L` always equals the upsampling
//! factor `U`, so every method emits samples at the same final rate.

use std::fmt;

use crate::error::{Error, Result};

/// Highest occupied signed subcarrier index (data band edge).
pub const MAX_OCCUPIED_INDEX: i32 = 58;

/// Number of data subcarriers per OFDM symbol.
pub const DATA_SUBCARRIERS: usize = 108;

/// Number of pilot subcarriers per OFDM symbol.
pub const PILOT_SUBCARRIERS: usize = 6;

/// Pilot positions on the signed subcarrier grid.
pub const PILOT_INDICES: [i32; PILOT_SUBCARRIERS] = [-53, -25, -11, 11, 25, 53];

/// Basic channel unit bandwidth of the TV white-space channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bcu {
    Mhz6,
    Mhz7,
    Mhz8,
}

impl Bcu {
    /// Channel bandwidth in Hz.
    pub fn bandwidth_hz(self) -> f64 {
        match self {
            Bcu::Mhz6 => 6.0e6,
            Bcu::Mhz7 => 7.0e6,
            Bcu::Mhz8 => 8.0e6,
        }
    }

    /// Number of subcarrier slots the BCU is divided into. The 7 MHz BCU
    /// uses a 168-slot grid; 6 and 8 MHz use 144 slots. The occupied set is
    /// the same 114 indices in every case.
    pub fn total_subcarrier_slots(self) -> usize {
        match self {
            Bcu::Mhz6 | Bcu::Mhz8 => 144,
            Bcu::Mhz7 => 168,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "6mhz" | "6" => Ok(Bcu::Mhz6),
            "7mhz" | "7" => Ok(Bcu::Mhz7),
            "8mhz" | "8" => Ok(Bcu::Mhz8),
            other => Err(Error::Parse {
                what: "bcu",
                detail: format!("unknown BCU '{other}' (expected 6mhz, 7mhz, or 8mhz)"),
            }),
        }
    }
}

impl fmt::Display for Bcu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bcu::Mhz6 => write!(f, "6mhz"),
            Bcu::Mhz7 => write!(f, "7mhz"),
            Bcu::Mhz8 => write!(f, "8mhz"),
        }
    }
}

/// Pulse-shaping method under comparison.
///
/// * `Asp` — asymmetric windowing at the base IFFT rate followed by a high
///   interpolation factor and a long image-rejection FIR.
/// * `SoA` — raised-cosine windowing on a guard-extended IFFT with a short
///   FIR (the conventional transmit chain).
/// * `Pro` — asymmetric windowing on the guard-extended IFFT, combining the
///   long smoothing edge of `Asp` with the wide image gap of `SoA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Asp,
    SoA,
    Pro,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Asp, Method::SoA, Method::Pro];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asp" => Ok(Method::Asp),
            "soa" => Ok(Method::SoA),
            "pro" => Ok(Method::Pro),
            other => Err(Error::Parse {
                what: "method",
                detail: format!("unknown method '{other}' (expected asp, soa, or pro)"),
            }),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Asp => write!(f, "asp"),
            Method::SoA => write!(f, "soa"),
            Method::Pro => write!(f, "pro"),
        }
    }
}

/// Signed-index subcarrier allocation for one OFDM symbol.
///
/// Indices run from `-(total_slots/2)` to `total_slots/2 - 1`. Data occupies
/// -58..-2 and +2..+58 except for the six pilot positions; DC and the two
/// bins beside it are null, as is everything beyond +/-58.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcarrierMap {
    total_slots: usize,
    data: Vec<i32>,
    pilots: Vec<i32>,
}

impl SubcarrierMap {
    /// Build the allocation for a grid of `total_slots` slots.
    pub fn for_slots(total_slots: usize) -> Self {
        let pilots: Vec<i32> = PILOT_INDICES.to_vec();
        let mut data = Vec::with_capacity(DATA_SUBCARRIERS);
        for k in -MAX_OCCUPIED_INDEX..=MAX_OCCUPIED_INDEX {
            if k.abs() < 2 || pilots.contains(&k) {
                continue;
            }
            data.push(k);
        }
        debug_assert_eq!(data.len(), DATA_SUBCARRIERS);
        SubcarrierMap {
            total_slots,
            data,
            pilots,
        }
    }

    pub fn total_slots(&self) -> usize {
        self.total_slots
    }

    /// Data subcarrier indices in ascending order.
    pub fn data_indices(&self) -> &[i32] {
        &self.data
    }

    /// Pilot subcarrier indices in ascending order.
    pub fn pilot_indices(&self) -> &[i32] {
        &self.pilots
    }

    /// Number of occupied (data + pilot) subcarriers.
    pub fn occupied_count(&self) -> usize {
        self.data.len() + self.pilots.len()
    }

    pub fn is_data(&self, k: i32) -> bool {
        self.data.binary_search(&k).is_ok()
    }

    pub fn is_pilot(&self, k: i32) -> bool {
        self.pilots.contains(&k)
    }

    pub fn is_null(&self, k: i32) -> bool {
        !self.is_data(k) && !self.is_pilot(k)
    }

    /// Signed index range covered by the grid: `[lo, hi]` inclusive.
    pub fn index_range(&self) -> (i32, i32) {
        let half = (self.total_slots / 2) as i32;
        (-half, half - 1)
    }

    /// All null indices on the grid (everything not data and not pilot).
    pub fn null_indices(&self) -> Vec<i32> {
        let (lo, hi) = self.index_range();
        (lo..=hi).filter(|&k| self.is_null(k)).collect()
    }
}

/// One fully-resolved parameter set: BCU numerology plus the shaping-chain
/// dimensions of a particular method.
///
/// Profiles are immutable after construction; experiment overrides go
/// through [`TvhtProfile::with_overrides`], which builds and re-validates a
/// new profile rather than mutating in place.
#[derive(Debug, Clone, PartialEq)]
pub struct TvhtProfile {
    bcu_bandwidth_hz: f64,
    n_base: usize,
    n_cp_base: usize,
    subcarrier_spacing_hz: f64,
    total_subcarrier_slots: usize,
    base_sample_rate_hz: f64,
    upsample_factor_u: usize,
    guard_extension_m: usize,
    interpolation_l: usize,
    fir_len_final: usize,
    beta_nt_final: usize,
    cir_len_final: usize,
}

/// Keys accepted by the plain-text profile config and by `--set` overrides.
const PROFILE_KEYS: [&str; 12] = [
    "bcu_bandwidth_hz",
    "n_base",
    "n_cp_base",
    "subcarrier_spacing_hz",
    "total_subcarrier_slots",
    "base_sample_rate_hz",
    "upsample_factor_u",
    "guard_extension_m",
    "interpolation_l",
    "fir_len_final",
    "beta_nt_final",
    "cir_len_final",
];

/// Build the shipped profile for a method/BCU combination.
///
/// The 8 MHz sets follow the published TVHT numerology directly; the 6 and
/// 7 MHz sets reuse the same sample counts, so their guard durations come
/// out at 3.0 us on the slower base rates (they are extrapolations of the
/// 8 MHz design, marked as such in the CLI docs).
pub fn load_profile(method: Method, bcu: Bcu) -> TvhtProfile {
    let u = 8usize;
    let (m, l, fir_len_final, beta_nt_final) = match method {
        // base-rate IFFT, x8 interpolation, long FIR, long smoothing edge
        Method::Asp => (1, 8, 9 * u, 16 * u),
        // guard-extended IFFT, x2 interpolation, short FIR, short edge
        Method::SoA => (4, 2, 5 * u, 4 * u),
        // guard-extended IFFT, x2 interpolation, short FIR, long edge
        Method::Pro => (4, 2, 5 * u, 16 * u),
    };
    let slots = bcu.total_subcarrier_slots();
    let spacing = bcu.bandwidth_hz() / slots as f64;
    let p = TvhtProfile {
        bcu_bandwidth_hz: bcu.bandwidth_hz(),
        n_base: 128,
        n_cp_base: 16,
        subcarrier_spacing_hz: spacing,
        total_subcarrier_slots: slots,
        base_sample_rate_hz: 128.0 * spacing,
        upsample_factor_u: u,
        guard_extension_m: m,
        interpolation_l: l,
        fir_len_final,
        beta_nt_final,
        cir_len_final: 7 * u,
    };
    debug_assert!(validate_profile(&p).is_ok());
    p
}

/// Check every profile invariant; the error message names the violated one.
pub fn validate_profile(p: &TvhtProfile) -> Result<()> {
    let fail = |violation: String| Err(Error::Config { violation });

    if p.guard_extension_m * p.interpolation_l != p.upsample_factor_u {
        return fail(format!(
            "guard_extension_m * interpolation_l must equal upsample_factor_u \
             (got {} * {} != {})",
            p.guard_extension_m, p.interpolation_l, p.upsample_factor_u
        ));
    }
    if p.n_base == 0 || !p.n_base.is_power_of_two() {
        return fail(format!("n_base must be a power of two (got {})", p.n_base));
    }
    if p.guard_extension_m == 0 || !p.guard_extension_m.is_power_of_two() {
        return fail(format!(
            "guard_extension_m must be a power of two (got {})",
            p.guard_extension_m
        ));
    }
    if p.n_cp_base == 0 || p.n_cp_base >= p.n_base {
        return fail(format!(
            "n_cp_base must be positive and smaller than n_base (got {} vs {})",
            p.n_cp_base, p.n_base
        ));
    }
    if !(p.bcu_bandwidth_hz.is_finite() && p.bcu_bandwidth_hz > 0.0) {
        return fail(format!(
            "bcu_bandwidth_hz must be positive (got {})",
            p.bcu_bandwidth_hz
        ));
    }
    if p.total_subcarrier_slots <= 2 * MAX_OCCUPIED_INDEX as usize {
        return fail(format!(
            "total_subcarrier_slots must exceed the occupied span of {} (got {})",
            2 * MAX_OCCUPIED_INDEX,
            p.total_subcarrier_slots
        ));
    }
    // The grid must tile the BCU exactly; for the shipped slot counts the
    // quotient round-trips in f64 without error.
    if p.subcarrier_spacing_hz * p.total_subcarrier_slots as f64 != p.bcu_bandwidth_hz {
        return fail(format!(
            "subcarrier_spacing_hz * total_subcarrier_slots must equal bcu_bandwidth_hz \
             (got {} * {} = {})",
            p.subcarrier_spacing_hz,
            p.total_subcarrier_slots,
            p.subcarrier_spacing_hz * p.total_subcarrier_slots as f64
        ));
    }
    if p.base_sample_rate_hz != p.n_base as f64 * p.subcarrier_spacing_hz {
        return fail(format!(
            "base_sample_rate_hz must equal n_base * subcarrier_spacing_hz (got {} vs {})",
            p.base_sample_rate_hz,
            p.n_base as f64 * p.subcarrier_spacing_hz
        ));
    }
    if p.beta_nt_final % p.interpolation_l != 0 {
        return fail(format!(
            "beta_nt_final must be divisible by interpolation_l so the smoothing edge \
             is integral at the windowing rate (got {} % {} != 0)",
            p.beta_nt_final, p.interpolation_l
        ));
    }
    if p.beta_nt_final / p.interpolation_l > p.guard_extension_m * p.n_cp_base {
        return fail(format!(
            "smoothing edge must fit inside the cyclic prefix: beta_nt_final / interpolation_l \
             <= guard_extension_m * n_cp_base (got {} > {})",
            p.beta_nt_final / p.interpolation_l,
            p.guard_extension_m * p.n_cp_base
        ));
    }
    if p.fir_len_final < 2 {
        return fail(format!(
            "fir_len_final must be at least 2 (got {})",
            p.fir_len_final
        ));
    }
    if p.cir_len_final == 0 || p.cir_len_final > p.n_cp_base * p.upsample_factor_u {
        return fail(format!(
            "cir_len_final must be positive and no longer than the final-rate cyclic \
             prefix of {} (got {})",
            p.n_cp_base * p.upsample_factor_u,
            p.cir_len_final
        ));
    }
    Ok(())
}

impl TvhtProfile {
    // ---- stored fields -------------------------------------------------

    pub fn bcu_bandwidth_hz(&self) -> f64 {
        self.bcu_bandwidth_hz
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn n_cp_base(&self) -> usize {
        self.n_cp_base
    }

    pub fn subcarrier_spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_hz
    }

    pub fn total_subcarrier_slots(&self) -> usize {
        self.total_subcarrier_slots
    }

    pub fn base_sample_rate_hz(&self) -> f64 {
        self.base_sample_rate_hz
    }

    pub fn upsample_factor_u(&self) -> usize {
        self.upsample_factor_u
    }

    pub fn guard_extension_m(&self) -> usize {
        self.guard_extension_m
    }

    pub fn interpolation_l(&self) -> usize {
        self.interpolation_l
    }

    pub fn fir_len_final(&self) -> usize {
        self.fir_len_final
    }

    pub fn beta_nt_final(&self) -> usize {
        self.beta_nt_final
    }

    pub fn cir_len_final(&self) -> usize {
        self.cir_len_final
    }

    // ---- derived quantities --------------------------------------------

    /// IFFT size after guard-band extension: `M * n_base`.
    pub fn n_fft(&self) -> usize {
        self.guard_extension_m * self.n_base
    }

    /// Sample rate at the IFFT output / windowing stage: `M *` base rate.
    pub fn application_rate_hz(&self) -> f64 {
        self.guard_extension_m as f64 * self.base_sample_rate_hz
    }

    /// Common output rate of every shaping chain: `U *` base rate.
    pub fn final_rate_hz(&self) -> f64 {
        self.upsample_factor_u as f64 * self.base_sample_rate_hz
    }

    /// Cyclic-prefix length at the windowing rate.
    pub fn cp_len(&self) -> usize {
        self.guard_extension_m * self.n_cp_base
    }

    /// Cyclic-prefix length at the final rate.
    pub fn cp_len_final(&self) -> usize {
        self.upsample_factor_u * self.n_cp_base
    }

    /// CP-extended symbol length at the windowing rate: `M * (N + N_CP)`.
    pub fn extended_symbol_len(&self) -> usize {
        self.guard_extension_m * (self.n_base + self.n_cp_base)
    }

    /// Smoothing-edge length at the windowing rate.
    pub fn beta_nt(&self) -> usize {
        self.beta_nt_final / self.interpolation_l
    }

    /// Guard-interval duration in seconds, computed from exact integer
    /// products so the shipped profiles evaluate without rounding error.
    pub fn guard_interval_s(&self) -> f64 {
        (self.n_cp_base * self.total_subcarrier_slots) as f64
            / (self.n_base as f64 * self.bcu_bandwidth_hz)
    }

    /// IFFT/FFT period in seconds (`1 / subcarrier_spacing`).
    pub fn fft_period_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }

    /// Frequency of the outermost occupied subcarrier, i.e. the occupied
    /// band edge used by the spectrum analyses.
    pub fn occupied_edge_hz(&self) -> f64 {
        MAX_OCCUPIED_INDEX as f64 * self.subcarrier_spacing_hz
    }

    /// Subcarrier allocation for this profile's grid.
    pub fn subcarrier_map(&self) -> SubcarrierMap {
        SubcarrierMap::for_slots(self.total_subcarrier_slots)
    }

    // ---- config-file serialization ---------------------------------------

    /// Render as the plain-text `key = value` config format.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        s.push_str("# TVHT shaping-chain profile\n");
        let kv: [(&str, String); 12] = [
            ("bcu_bandwidth_hz", self.bcu_bandwidth_hz.to_string()),
            ("n_base", self.n_base.to_string()),
            ("n_cp_base", self.n_cp_base.to_string()),
            (
                "subcarrier_spacing_hz",
                self.subcarrier_spacing_hz.to_string(),
            ),
            (
                "total_subcarrier_slots",
                self.total_subcarrier_slots.to_string(),
            ),
            ("base_sample_rate_hz", self.base_sample_rate_hz.to_string()),
            ("upsample_factor_u", self.upsample_factor_u.to_string()),
            ("guard_extension_m", self.guard_extension_m.to_string()),
            ("interpolation_l", self.interpolation_l.to_string()),
            ("fir_len_final", self.fir_len_final.to_string()),
            ("beta_nt_final", self.beta_nt_final.to_string()),
            ("cir_len_final", self.cir_len_final.to_string()),
        ];
        for (k, v) in kv {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }

    /// Parse the plain-text config format and validate the result.
    pub fn from_config_str(text: &str) -> Result<TvhtProfile> {
        let mut pairs = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                what: "profile config",
                detail: format!("line {}: expected 'key = value', got '{line}'", ln + 1),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        // Require every key exactly once.
        for key in PROFILE_KEYS {
            let n = pairs.iter().filter(|(k, _)| k == key).count();
            if n != 1 {
                return Err(Error::Parse {
                    what: "profile config",
                    detail: format!("key '{key}' must appear exactly once (found {n})"),
                });
            }
        }
        let get = |key: &str| -> &str {
            &pairs
                .iter()
                .find(|(k, _)| k == key)
                .expect("key presence checked above")
                .1
        };
        let parse_usize = |key: &str| -> Result<usize> {
            get(key).parse().map_err(|_| Error::Parse {
                what: "profile config",
                detail: format!("key '{key}': '{}' is not a valid integer", get(key)),
            })
        };
        let parse_f64 = |key: &str| -> Result<f64> {
            get(key).parse().map_err(|_| Error::Parse {
                what: "profile config",
                detail: format!("key '{key}': '{}' is not a valid number", get(key)),
            })
        };
        for (k, _) in &pairs {
            if !PROFILE_KEYS.contains(&k.as_str()) {
                return Err(Error::Parse {
                    what: "profile config",
                    detail: format!("unknown key '{k}'"),
                });
            }
        }
        let p = TvhtProfile {
            bcu_bandwidth_hz: parse_f64("bcu_bandwidth_hz")?,
            n_base: parse_usize("n_base")?,
            n_cp_base: parse_usize("n_cp_base")?,
            subcarrier_spacing_hz: parse_f64("subcarrier_spacing_hz")?,
            total_subcarrier_slots: parse_usize("total_subcarrier_slots")?,
            base_sample_rate_hz: parse_f64("base_sample_rate_hz")?,
            upsample_factor_u: parse_usize("upsample_factor_u")?,
            guard_extension_m: parse_usize("guard_extension_m")?,
            interpolation_l: parse_usize("interpolation_l")?,
            fir_len_final: parse_usize("fir_len_final")?,
            beta_nt_final: parse_usize("beta_nt_final")?,
            cir_len_final: parse_usize("cir_len_final")?,
        };
        validate_profile(&p)?;
        Ok(p)
    }

    /// Build a new profile with `key=value` overrides applied, re-deriving
    /// the dependent rate fields and re-validating. Overriding a derived
    /// field directly (spacing or base rate) is allowed but must still pass
    /// validation afterwards.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<TvhtProfile> {
        let mut p = self.clone();
        // Apply raw field writes first, tracking whether the caller pinned
        // the derived fields explicitly.
        let mut spacing_set = false;
        let mut base_rate_set = false;
        for (k, v) in overrides {
            let bad_num = |detail: String| Error::Parse {
                what: "profile override",
                detail,
            };
            let as_usize = || -> Result<usize> {
                v.parse()
                    .map_err(|_| bad_num(format!("'{k}={v}': not a valid integer")))
            };
            let as_f64 = || -> Result<f64> {
                v.parse()
                    .map_err(|_| bad_num(format!("'{k}={v}': not a valid number")))
            };
            match k.as_str() {
                "bcu_bandwidth_hz" => p.bcu_bandwidth_hz = as_f64()?,
                "n_base" => p.n_base = as_usize()?,
                "n_cp_base" => p.n_cp_base = as_usize()?,
                "subcarrier_spacing_hz" => {
                    p.subcarrier_spacing_hz = as_f64()?;
                    spacing_set = true;
                }
                "total_subcarrier_slots" => p.total_subcarrier_slots = as_usize()?,
                "base_sample_rate_hz" => {
                    p.base_sample_rate_hz = as_f64()?;
                    base_rate_set = true;
                }
                "upsample_factor_u" => p.upsample_factor_u = as_usize()?,
                "guard_extension_m" => p.guard_extension_m = as_usize()?,
                "interpolation_l" => p.interpolation_l = as_usize()?,
                "fir_len_final" => p.fir_len_final = as_usize()?,
                "beta_nt_final" => p.beta_nt_final = as_usize()?,
                "cir_len_final" => p.cir_len_final = as_usize()?,
                other => {
                    return Err(Error::Parse {
                        what: "profile override",
                        detail: format!(
                            "unknown key '{other}' (expected one of {})",
                            PROFILE_KEYS.join(", ")
                        ),
                    })
                }
            }
        }
        if !spacing_set {
            p.subcarrier_spacing_hz = p.bcu_bandwidth_hz / p.total_subcarrier_slots as f64;
        }
        if !base_rate_set {
            p.base_sample_rate_hz = p.n_base as f64 * p.subcarrier_spacing_hz;
        }
        validate_profile(&p)?;
        Ok(p)
    }
}
