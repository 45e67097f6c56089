//! Burst import/export as interleaved float32 I/Q with a small text header.
//!
//! Layout: UTF-8 header lines (`key value`), one per metadata field,
//! terminated by a line containing only `data`, followed by the samples as
//! little-endian float32 pairs (I then Q). The header carries everything
//! needed to re-analyze the capture: sample rate, symbol count, subcarrier
//! spacing, occupied-band edge, receiver calibration, and the processing
//! stage list.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::windowing::{Provenance, ShapedBurst};

const MAGIC: &str = "tvws-iq 1";

/// Serialize a burst. The file is written to a temporary sibling and
/// renamed into place, so readers never observe a partial file.
pub fn write_iq(path: &Path, burst: &ShapedBurst) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::config(format!("{} has no file name", path.display())))?;
    let tmp_path = dir.join(format!(".{}.tmp", name.to_string_lossy()));

    {
        let mut w = BufWriter::new(fs::File::create(&tmp_path)?);
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "rate_hz {}", burst.rate_hz)?;
        writeln!(w, "n_samples {}", burst.samples.len())?;
        writeln!(w, "n_symbols {}", burst.n_symbols)?;
        writeln!(w, "subcarrier_spacing_hz {}", burst.provenance.subcarrier_spacing_hz)?;
        writeln!(w, "occupied_edge_hz {}", burst.provenance.occupied_edge_hz)?;
        writeln!(w, "rx_bin_energy {}", burst.provenance.rx_bin_energy)?;
        writeln!(w, "fft_len {}", burst.provenance.fft_len)?;
        writeln!(w, "stages {}", burst.provenance.stage_list())?;
        writeln!(w, "data")?;
        for v in &burst.samples {
            w.write_all(&(v.re as f32).to_le_bytes())?;
            w.write_all(&(v.im as f32).to_le_bytes())?;
        }
        w.flush()?;
    }
    fs::rename(&tmp_path, path)?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T> {
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Parse {
            what: "I/Q header".into(),
            detail: format!("expected `{key} <value>`, got {line:?}"),
        })?;
    rest.trim().parse().map_err(|_| Error::Parse {
        what: "I/Q header".into(),
        detail: format!("bad value for {key}: {rest:?}"),
    })
}

/// Read a burst written by [`write_iq`].
pub fn read_iq(path: &Path) -> Result<ShapedBurst> {
    let bytes = fs::read(path)?;
    // The header is ASCII; find the `data` sentinel line.
    let mut offset = 0usize;
    let mut lines: Vec<String> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse {
                what: "I/Q header".into(),
                detail: "missing `data` sentinel".into(),
            })?;
        let line = std::str::from_utf8(&bytes[offset..offset + end]).map_err(|_| Error::Parse {
            what: "I/Q header".into(),
            detail: "header is not UTF-8".into(),
        })?;
        offset += end + 1;
        if line == "data" {
            break;
        }
        lines.push(line.to_string());
        if lines.len() > 64 {
            return Err(Error::Parse {
                what: "I/Q header".into(),
                detail: "header too long; `data` sentinel not found".into(),
            });
        }
    }
    if lines.len() != 9 || lines[0] != MAGIC {
        return Err(Error::Parse {
            what: "I/Q header".into(),
            detail: format!(
                "expected {MAGIC} header with 8 fields, got {} lines starting {:?}",
                lines.len(),
                lines.first()
            ),
        });
    }
    let rate_hz: f64 = parse_field(&lines[1], "rate_hz")?;
    let n_samples: usize = parse_field(&lines[2], "n_samples")?;
    let n_symbols: usize = parse_field(&lines[3], "n_symbols")?;
    let subcarrier_spacing_hz: f64 = parse_field(&lines[4], "subcarrier_spacing_hz")?;
    let occupied_edge_hz: f64 = parse_field(&lines[5], "occupied_edge_hz")?;
    let rx_bin_energy: f64 = parse_field(&lines[6], "rx_bin_energy")?;
    let fft_len: usize = parse_field(&lines[7], "fft_len")?;
    let stages: Vec<String> = lines[8]
        .strip_prefix("stages")
        .map(|r| {
            r.trim()
                .split(',')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .ok_or_else(|| Error::Parse {
            what: "I/Q header".into(),
            detail: format!("expected `stages <list>`, got {:?}", lines[8]),
        })?;

    let payload = &bytes[offset..];
    if payload.len() != n_samples * 8 {
        return Err(Error::Length {
            what: "I/Q payload bytes".into(),
            expected: n_samples * 8,
            actual: payload.len(),
        });
    }
    let mut samples = Vec::with_capacity(n_samples);
    let mut cursor = payload;
    let mut buf = [0u8; 4];
    for _ in 0..n_samples {
        cursor.read_exact(&mut buf)?;
        let re = f32::from_le_bytes(buf) as f64;
        cursor.read_exact(&mut buf)?;
        let im = f32::from_le_bytes(buf) as f64;
        samples.push(Complex64::new(re, im));
    }

    Ok(ShapedBurst {
        samples,
        rate_hz,
        n_symbols,
        provenance: Provenance {
            stages,
            subcarrier_spacing_hz,
            occupied_edge_hz,
            rx_bin_energy,
            fft_len,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{load_profile, Bcu, Method};
    use crate::shaping::run_pipeline;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_burst() -> ShapedBurst {
        let p = load_profile(Method::Pro, Bcu::Mhz8);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let bits: Vec<u8> = (0..2 * 216).map(|_| rng.random_range(0..=1u8)).collect();
        run_pipeline(&bits, &p, Method::Pro, 2).unwrap()
    }

    #[test]
    fn roundtrip_preserves_metadata_and_f32_samples() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("burst.iq");
        let burst = sample_burst();
        write_iq(&path, &burst).unwrap();
        let back = read_iq(&path).unwrap();

        assert_eq!(back.rate_hz, burst.rate_hz);
        assert_eq!(back.n_symbols, burst.n_symbols);
        assert_eq!(back.provenance.stages, burst.provenance.stages);
        assert_eq!(
            back.provenance.subcarrier_spacing_hz,
            burst.provenance.subcarrier_spacing_hz
        );
        assert_eq!(back.provenance.occupied_edge_hz, burst.provenance.occupied_edge_hz);
        assert_eq!(back.provenance.rx_bin_energy, burst.provenance.rx_bin_energy);
        assert_eq!(back.provenance.fft_len, burst.provenance.fft_len);
        assert_eq!(back.samples.len(), burst.samples.len());
        for (a, b) in back.samples.iter().zip(&burst.samples) {
            assert_eq!(a.re, b.re as f32 as f64, "storage is float32");
            assert_eq!(a.im, b.im as f32 as f64);
        }
    }

    #[test]
    fn second_write_replaces_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("burst.iq");
        let burst = sample_burst();
        write_iq(&path, &burst).unwrap();
        write_iq(&path, &burst).unwrap();
        assert!(read_iq(&path).is_ok());
        // No stray temp file remains.
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();

        let bad_magic = dir.path().join("magic.iq");
        fs::write(&bad_magic, b"not-iq 1\ndata\n").unwrap();
        assert!(read_iq(&bad_magic).is_err());

        let no_sentinel = dir.path().join("nosentinel.iq");
        fs::write(&no_sentinel, b"tvws-iq 1\nrate_hz 1000\n").unwrap();
        assert!(read_iq(&no_sentinel).is_err());

        let path = dir.path().join("truncated.iq");
        write_iq(&path, &sample_burst()).unwrap();
        let full = fs::read(&path).unwrap();
        fs::write(&path, &full[..full.len() - 3]).unwrap();
        assert!(matches!(read_iq(&path), Err(Error::Length { .. })));
    }
}
