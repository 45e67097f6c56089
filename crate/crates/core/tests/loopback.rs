//! Cross-module link checks: every shaping scheme must be transparent at
//! every channel bandwidth when no noise is present, and the Monte Carlo
//! sweep must behave like a measurement — repeatable bit-for-bit and
//! monotone in SNR up to counting noise.

use tvws_core::{
    load_profile, measure_noiseless_ser, run_ser_sweep, Bcu, Chain, Method, StopRule,
};

#[test]
fn every_scheme_is_transparent_without_noise_at_every_bandwidth() {
    for bcu in [Bcu::Mhz6, Bcu::Mhz7, Bcu::Mhz8] {
        for m in Method::ALL {
            let p = load_profile(m, bcu);
            let n_symbols = 24;
            let (errors, sent) = measure_noiseless_ser(Chain::Shaped(m), &p, n_symbols, 11)
                .expect("noiseless run must succeed");
            let n_data = p.subcarrier_map().data_indices().len() as u64;
            assert_eq!(
                sent,
                n_symbols as u64 * n_data,
                "{m} at {bcu:?} must demodulate every transmitted symbol"
            );
            assert_eq!(errors, 0, "{m} at {bcu:?} must be error-free without noise");
        }
    }
}

#[test]
fn repeated_sweeps_reproduce_identical_results() {
    let p = load_profile(Method::Pro, Bcu::Mhz8);
    let stop = StopRule {
        min_errors: 150,
        max_symbols: 300_000,
    };
    let a = run_ser_sweep(Chain::Shaped(Method::Pro), &p, &[8.0], stop, 5).expect("first sweep");
    let b = run_ser_sweep(Chain::Shaped(Method::Pro), &p, &[8.0], stop, 5).expect("second sweep");
    assert_eq!(a.len(), b.len(), "same grid must yield same point count");
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.n_symbols_sent, y.n_symbols_sent, "symbol counts must match");
        assert_eq!(x.n_symbol_errors, y.n_symbol_errors, "error counts must match");
        assert_eq!(
            x.ser.to_bits(),
            y.ser.to_bits(),
            "rates must match to the last bit"
        );
        assert_eq!(x.censored, y.censored, "stopping decisions must match");
    }
}

#[test]
fn measured_ser_is_monotone_in_snr_within_confidence() {
    let p = load_profile(Method::Pro, Bcu::Mhz8);
    let stop = StopRule {
        min_errors: 300,
        max_symbols: 500_000,
    };
    let results = run_ser_sweep(Chain::Shaped(Method::Pro), &p, &[6.0, 8.0, 10.0], stop, 3)
        .expect("sweep must succeed");
    for pair in results.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        assert!(
            hi.ser <= lo.ser + lo.confidence_halfwidth + hi.confidence_halfwidth,
            "SER must not grow with SNR beyond counting noise: {} at {} dB vs {} at {} dB",
            lo.ser,
            lo.snr_db,
            hi.ser,
            hi.snr_db
        );
    }
}
