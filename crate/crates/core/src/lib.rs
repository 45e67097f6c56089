//! Baseband pulse-shaping study library for IEEE 802.11af TVHT.
//!
//! The crate models the transmit side of a TV white-space OFDM PHY and the
//! measurements used to compare pulse-shaping strategies:
//!
//! * [`params`] — channel numerology and per-method chain dimensions;
//! * [`tx_chain`] — constellation mapping, guard-extended IFFT, cyclic
//!   prefix, and the matching demodulator;
//! * [`windowing`] — time-domain edge windows and overlap-add framing;
//! * [`shaping`] — zero-stuffing interpolation, image-rejection FIR design,
//!   and the complete per-method pipelines;
//! * [`analysis`] — Welch PSD estimation, spectral-mask checking, and
//!   multi-curve stopband comparison;
//! * [`link`] — AWGN/multipath channel, genie-equalized receiver, and
//!   Monte-Carlo symbol-error-rate sweeps;
//! * [`io`] — I/Q burst export/import.

pub mod analysis;
pub mod error;
mod fft;
pub mod io;
pub mod link;
pub mod params;
pub mod shaping;
pub mod tx_chain;
pub mod windowing;

pub use analysis::{
    check_sem, compare_spectra, default_mask, estimate_psd, CurveStats, PsdEstimate,
    SegmentMargin, SemMask, SemReport, SpectraComparison,
};
pub use error::{Error, Result};
pub use io::{read_iq, write_iq};
pub use link::{
    apply_channel, measure_noiseless_evm, measure_noiseless_ser, qpsk_ser_theory, receive,
    run_ser_sweep, Chain, ChannelKind, ChannelModel, LinkResult, StopRule,
};
pub use params::{load_profile, validate_profile, Bcu, Method, SubcarrierMap, TvhtProfile};
pub use shaping::{
    apply_fir, chain_bin_response, design_fir, first_image_gap_hz, image_bands,
    image_spacing_hz, receiver_alignment, run_pipeline, run_pipeline_taps, run_reference,
    rx_bin_energy, window_family_for, zero_stuff, FirFilter, PipelineTaps,
};
pub use tx_chain::{demodulate, ifft_modulate, map_payload, Constellation, FreqSymbol, TimeSymbol};
pub use windowing::{make_window, shape_and_overlap, Provenance, ShapedBurst, WindowFamily, WindowSpec};
