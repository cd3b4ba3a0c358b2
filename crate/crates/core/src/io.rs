//! Bit-exact grid file formats plus viewable exports.
//!
//! Phase grids (`FPG1`): magic, width and height as little-endian u32, one
//! kind byte (0 wrapped, 1 unwrapped), then row-major binary32 values.
//! Label grids (`LBG1`): magic, width, height, domain size as little-endian
//! u32, then row-major signed 32-bit labels. Readers validate payload
//! lengths before allocating and never trust the header.

use crate::error::{Error, Result};
use crate::grid::{GridKind, LabelGrid, PhaseGrid};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const PHASE_MAGIC: &[u8; 4] = b"FPG1";
const LABEL_MAGIC: &[u8; 4] = b"LBG1";

/// Readers refuse payloads above 2^31 bytes.
const PAYLOAD_CAP: u64 = 1 << 31;

fn format_err(offset: u64, msg: impl Into<String>) -> Error {
    Error::Format { offset, msg: msg.into() }
}

fn read_exact_at(r: &mut impl Read, buf: &mut [u8], offset: u64, what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| format_err(offset, format!("truncated {what}")))
}

fn check_dims(width: u32, height: u32, header_len: u64, remaining: u64) -> Result<usize> {
    let pixels = u64::from(width) * u64::from(height);
    if pixels == 0 {
        return Err(format_err(4, "zero width or height"));
    }
    let expected = pixels * 4;
    if expected > PAYLOAD_CAP {
        return Err(format_err(4, format!("payload of {expected} bytes exceeds cap")));
    }
    if remaining != expected {
        return Err(format_err(
            header_len,
            format!("expected {expected} payload bytes, found {remaining}"),
        ));
    }
    Ok(pixels as usize)
}

/// Writes a phase grid; values are narrowed to binary32.
pub fn write_phase(grid: &PhaseGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(PHASE_MAGIC)?;
    w.write_all(&(grid.width() as u32).to_le_bytes())?;
    w.write_all(&(grid.height() as u32).to_le_bytes())?;
    w.write_all(&[match grid.kind() {
        GridKind::Wrapped => 0u8,
        GridKind::Unwrapped => 1u8,
    }])?;
    for &v in grid.values() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_phase(path: impl AsRef<Path>) -> Result<PhaseGrid> {
    let file = File::open(path)?;
    let total = file.metadata()?.len();
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact_at(&mut r, &mut magic, 0, "header")?;
    if &magic != PHASE_MAGIC {
        return Err(format_err(0, format!("bad magic {magic:?}, expected \"FPG1\"")));
    }
    let mut word = [0u8; 4];
    read_exact_at(&mut r, &mut word, 4, "header")?;
    let width = u32::from_le_bytes(word);
    read_exact_at(&mut r, &mut word, 8, "header")?;
    let height = u32::from_le_bytes(word);
    let mut kind_byte = [0u8; 1];
    read_exact_at(&mut r, &mut kind_byte, 12, "header")?;
    let kind = match kind_byte[0] {
        0 => GridKind::Wrapped,
        1 => GridKind::Unwrapped,
        k => return Err(format_err(12, format!("unknown kind byte {k}"))),
    };
    let pixels = check_dims(width, height, 13, total.saturating_sub(13))?;

    let mut values = Vec::with_capacity(pixels);
    for i in 0..pixels {
        let offset = 13 + 4 * i as u64;
        read_exact_at(&mut r, &mut word, offset, "payload")?;
        let v = f64::from(f32::from_le_bytes(word));
        if !v.is_finite() {
            return Err(format_err(offset, format!("non-finite value {v}")));
        }
        if kind == GridKind::Wrapped && !(v > -PI - 1e-6 && v <= PI + 1e-6) {
            return Err(format_err(offset, format!("value {v} outside the wrapped range")));
        }
        values.push(v);
    }
    PhaseGrid::new(width as usize, height as usize, values, kind)
        .map_err(|e| format_err(13, e.to_string()))
}

pub fn write_labels(grid: &LabelGrid, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(LABEL_MAGIC)?;
    w.write_all(&(grid.width() as u32).to_le_bytes())?;
    w.write_all(&(grid.height() as u32).to_le_bytes())?;
    w.write_all(&(grid.domain_size() as u32).to_le_bytes())?;
    for &k in grid.labels() {
        w.write_all(&k.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelGrid> {
    let file = File::open(path)?;
    let total = file.metadata()?.len();
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    read_exact_at(&mut r, &mut magic, 0, "header")?;
    if &magic != LABEL_MAGIC {
        return Err(format_err(0, format!("bad magic {magic:?}, expected \"LBG1\"")));
    }
    let mut word = [0u8; 4];
    read_exact_at(&mut r, &mut word, 4, "header")?;
    let width = u32::from_le_bytes(word);
    read_exact_at(&mut r, &mut word, 8, "header")?;
    let height = u32::from_le_bytes(word);
    read_exact_at(&mut r, &mut word, 12, "header")?;
    let domain_size = u32::from_le_bytes(word);
    let pixels = check_dims(width, height, 16, total.saturating_sub(16))?;

    let mut labels = Vec::with_capacity(pixels);
    for i in 0..pixels {
        let offset = 16 + 4 * i as u64;
        read_exact_at(&mut r, &mut word, offset, "payload")?;
        let k = i32::from_le_bytes(word);
        if k < 0 || k as u32 >= domain_size {
            return Err(format_err(offset, format!("label {k} outside domain 0..{domain_size}")));
        }
        labels.push(k);
    }
    LabelGrid::new(width as usize, height as usize, labels, domain_size as usize)
        .map_err(|e| format_err(16, e.to_string()))
}

/// Writes an 8-bit binary PGM preview. Unwrapped grids map [min, max] to
/// [0, 255] (constant grids become mid-grey); wrapped grids use the fixed
/// endpoints (-pi, pi].
pub fn export_pgm(grid: &PhaseGrid, path: impl AsRef<Path>) -> Result<()> {
    let (lo, hi) = match grid.kind() {
        GridKind::Wrapped => (-PI, PI),
        GridKind::Unwrapped => {
            let lo = grid.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = grid.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let span = hi - lo;
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", grid.width(), grid.height())?;
    for &v in grid.values() {
        let byte = if span <= 0.0 {
            128u8
        } else {
            (((v - lo) / span * 255.0).round()).clamp(0.0, 255.0) as u8
        };
        w.write_all(&[byte])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a rectangular CSV of numbers into a phase grid. The grid is
/// flagged wrapped when every value already lies in (-pi, pi].
pub fn import_csv(path: impl AsRef<Path>) -> Result<PhaseGrid> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row_idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col_idx, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: row_idx + 1,
                col: col_idx + 1,
                msg: format!("not a number: {:?}", cell.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: row_idx + 1,
                    col: col_idx + 1,
                    msg: "non-finite value".into(),
                });
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    row: row_idx + 1,
                    col: row.len(),
                    msg: format!("ragged row: {} values, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { row: 1, col: 1, msg: "empty input".into() });
    }
    let width = rows[0].len();
    let height = rows.len();
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let wrapped = values.iter().all(|&v| v > -PI - 1e-6 && v <= PI + 1e-6);
    let kind = if wrapped { GridKind::Wrapped } else { GridKind::Unwrapped };
    PhaseGrid::new(width, height, values, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::wrap_raw;
    use rand::Rng;
    use rand::SeedableRng;
    use tempfile::tempdir;

    fn random_phase_grid(w: usize, h: usize, kind: GridKind, seed: u64) -> PhaseGrid {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..w * h)
            .map(|_| {
                // Generate at binary32 precision so the round-trip is lossless.
                let v: f64 = rng.gen_range(-40.0..40.0);
                let v = if kind == GridKind::Wrapped { wrap_raw(v) } else { v };
                f64::from(v as f32)
            })
            .collect();
        PhaseGrid::new(w, h, values, kind).unwrap()
    }

    #[test]
    fn phase_round_trip_is_bitwise() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.fpg");
        for (i, kind) in [GridKind::Wrapped, GridKind::Unwrapped].into_iter().enumerate() {
            let g = random_phase_grid(7, 3, kind, i as u64);
            write_phase(&g, &path).unwrap();
            let back = read_phase(&path).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn label_round_trip_is_bitwise() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.lbg");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let labels: Vec<i32> = (0..21).map(|_| rng.gen_range(0..5)).collect();
        let g = LabelGrid::new(7, 3, labels, 5).unwrap();
        write_labels(&g, &path).unwrap();
        assert_eq!(read_labels(&path).unwrap(), g);
    }

    #[test]
    fn wrapped_boundary_survives_binary32() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("pi.fpg");
        let g = PhaseGrid::new(1, 1, vec![f64::from(PI as f32)], GridKind::Wrapped).unwrap();
        write_phase(&g, &path).unwrap();
        assert_eq!(read_phase(&path).unwrap(), g);
    }

    #[test]
    fn truncated_payload_reports_expected_length() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.fpg");
        let g = random_phase_grid(4, 4, GridKind::Unwrapped, 3);
        write_phase(&g, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        match read_phase(&path) {
            Err(Error::Format { msg, .. }) => {
                assert!(msg.contains("expected 64"), "{msg}");
                assert!(msg.contains("59"), "{msg}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.fpg");
        let g = random_phase_grid(2, 2, GridKind::Unwrapped, 4);
        write_phase(&g, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_phase(&path), Err(Error::Format { offset: 0, .. })));

        // A label file is not a phase file.
        let labels = LabelGrid::zeros(2, 2, 4).unwrap();
        write_labels(&labels, &path).unwrap();
        assert!(matches!(read_phase(&path), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn out_of_range_wrapped_payload_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("r.fpg");
        let g = PhaseGrid::new(1, 1, vec![2.0], GridKind::Unwrapped).unwrap();
        write_phase(&g, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[12] = 0; // flip kind byte to wrapped; value 2.0 is fine
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_phase(&path).is_ok());
        // Now a value outside (-pi, pi].
        bytes[13..17].copy_from_slice(&4.0f32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_phase(&path), Err(Error::Format { offset: 13, .. })));
    }

    #[test]
    fn bad_label_domain_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.lbg");
        let g = LabelGrid::new(2, 1, vec![0, 3], 4).unwrap();
        write_labels(&g, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[16..20].copy_from_slice(&9i32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_labels(&path), Err(Error::Format { offset: 16, .. })));
    }

    #[test]
    fn pgm_header_and_constant_grid() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let g = PhaseGrid::new(3, 2, vec![1.5; 6], GridKind::Unwrapped).unwrap();
        export_pgm(&g, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(&bytes[11..], &[128u8; 6]);
    }

    #[test]
    fn pgm_wrapped_ramp_is_monotone() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ramp.pgm");
        let n = 32;
        let values: Vec<f64> = (1..=n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect();
        let g = PhaseGrid::new(n, 1, values, GridKind::Wrapped).unwrap();
        export_pgm(&g, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header_len = b"P5\n32 1\n255\n".len();
        let pixels = &bytes[header_len..];
        assert!(pixels.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*pixels.last().unwrap(), 255);
    }

    #[test]
    fn csv_import_cases() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.csv");

        std::fs::write(&path, "0,1\n2,4\n").unwrap();
        let g = import_csv(&path).unwrap();
        assert_eq!((g.width(), g.height()), (2, 2));
        assert_eq!(g.kind(), GridKind::Unwrapped);
        assert_eq!(g.values(), &[0.0, 1.0, 2.0, 4.0]);

        // CRLF and all values wrapped.
        std::fs::write(&path, "0.5,-0.5\r\n1.0,-1.0\r\n").unwrap();
        let g = import_csv(&path).unwrap();
        assert_eq!(g.kind(), GridKind::Wrapped);

        std::fs::write(&path, "0,1\n2\n").unwrap();
        match import_csv(&path) {
            Err(Error::Parse { row: 2, .. }) => {}
            other => panic!("expected ragged-row error, got {other:?}"),
        }

        std::fs::write(&path, "0,abc\n").unwrap();
        match import_csv(&path) {
            Err(Error::Parse { row: 1, col: 2, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
