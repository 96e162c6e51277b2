//! File formats: the wecs1 binary matrix container, 16-bit PGM with a scale
//! sidecar, CSV matrices and signals, and the JSON stack manifest. Every
//! write goes through a same-directory temp file plus rename so a crashed
//! run never leaves a half-written output behind.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::DateTime;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stack::{Channel, Domain, ImageStack};
use crate::util::ensure_finite;

/// Matrix container tag, reported by --version and stored in state files.
pub const MATRIX_FORMAT_VERSION: &str = "wecs1/1";
pub const MANIFEST_VERSION: &str = "1";
/// Noise RNG contract: ChaCha8, seed per run, one stream per image index.
pub const RNG_ALGORITHM: &str = "chacha8/streams-1";

const MAGIC: &[u8; 5] = b"WECS1";
const HEADER_LEN: usize = 14;

/// Serialize a matrix: `WECS1`, a dtype byte (8 here; 4 is accepted on
/// read), rows and cols as u32 little-endian, then the row-major payload.
pub fn matrix_to_wecs1(m: &Array2<f64>) -> Result<Vec<u8>> {
    ensure_finite(m, "matrix")?;
    let (rows, cols) = m.dim();
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return Err(Error::BadParam {
            what: format!("matrix dims {rows}x{cols} exceed the wecs1 u32 limit"),
        });
    }
    let mut out = Vec::with_capacity(HEADER_LEN + m.len() * 8);
    out.extend_from_slice(MAGIC);
    out.push(8);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for &v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn write_matrix_wecs1(path: &Path, m: &Array2<f64>) -> Result<()> {
    atomic_write(path, &matrix_to_wecs1(m)?)
}

fn wecs1_from_bytes(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            path,
            format!("truncated wecs1 header: {} bytes, need {HEADER_LEN}", bytes.len()),
        ));
    }
    if &bytes[..5] != MAGIC {
        return Err(Error::format(path, "bad wecs1 magic"));
    }
    let dtype = bytes[5];
    let size = match dtype {
        4 => 4usize,
        8 => 8,
        _ => {
            return Err(Error::format(
                path,
                format!("unknown wecs1 dtype {dtype}; expected 4 (f32) or 8 (f64)"),
            ))
        }
    };
    let rows = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let count = rows.checked_mul(cols);
    let expected = count
        .and_then(|c| c.checked_mul(size))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::format(path, format!("dimension overflow: {rows}x{cols}")))?;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "payload is {} bytes, expected {} for {rows}x{cols} dtype {dtype}",
                bytes.len() - HEADER_LEN,
                expected - HEADER_LEN
            ),
        ));
    }
    let count = count.unwrap();
    let mut data = Vec::with_capacity(count);
    for idx in 0..count {
        let off = HEADER_LEN + idx * size;
        let v = if size == 8 {
            f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap())
        } else {
            f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64
        };
        if !v.is_finite() {
            return Err(Error::format(
                path,
                format!("non-finite value {v} at byte offset {off}"),
            ));
        }
        data.push(v);
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::format(path, e.to_string()))
}

/// Load a matrix, sniffing the format from the leading bytes: wecs1, then
/// binary PGM, then UTF-8 CSV as the fallback.
pub fn read_image(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        wecs1_from_bytes(&bytes, path)
    } else if bytes.starts_with(b"P5") {
        pgm_from_bytes(&bytes, path)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| Error::format(path, "not wecs1, binary PGM, or UTF-8 CSV"))?;
        csv_from_text(text, path)
    }
}

/// Load any matrix format and binarize: nonzero means changed.
pub fn read_truth_mask(path: &Path) -> Result<Array2<bool>> {
    Ok(read_image(path)?.mapv(|v| v != 0.0))
}

struct PgmTokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmTokens<'a> {
    fn next_token(&mut self) -> Option<&'a [u8]> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }
}

fn pgm_from_bytes(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    let mut toks = PgmTokens { bytes, pos: 0 };
    let bad = |detail: String| Error::format(path, detail);
    let magic = toks.next_token().ok_or_else(|| bad("empty PGM".into()))?;
    if magic != b"P5" {
        return Err(bad("only binary PGM (P5) is supported".into()));
    }
    let mut dim = |what: &str| -> Result<usize> {
        let tok = toks
            .next_token()
            .ok_or_else(|| bad(format!("missing PGM {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| bad(format!("unparseable PGM {what}")))
    };
    let cols = dim("width")?;
    let rows = dim("height")?;
    let maxval = dim("maxval")?;
    if rows == 0 || cols == 0 {
        return Err(bad(format!("degenerate PGM dims {rows}x{cols}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad(format!("PGM maxval {maxval} outside 1..=65535")));
    }
    // one whitespace byte separates the maxval from the raster
    if toks.pos >= bytes.len() {
        return Err(bad("missing PGM raster".into()));
    }
    let raster = &bytes[toks.pos + 1..];
    let size = if maxval > 255 { 2 } else { 1 };
    let expected = rows * cols * size;
    if raster.len() != expected {
        return Err(bad(format!(
            "raster is {} bytes, expected {expected} for {cols}x{rows} maxval {maxval}",
            raster.len()
        )));
    }
    let data: Vec<f64> = if size == 2 {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    } else {
        raster.iter().map(|&b| b as f64).collect()
    };
    if let Some(v) = data.iter().find(|&&v| v > maxval as f64) {
        return Err(bad(format!("sample {v} exceeds maxval {maxval}")));
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::format(path, e.to_string()))
}

/// Write a matrix as 16-bit binary PGM, affinely rescaled to 0..=65535.
/// The original range is saved next to it in `<path>.scale.txt` as two
/// lines, `vmin <v>` and `vmax <v>`; a constant matrix writes all zeros.
pub fn write_pgm_scaled(path: &Path, m: &Array2<f64>) -> Result<()> {
    ensure_finite(m, "pgm matrix")?;
    if m.is_empty() {
        return Err(Error::BadParam {
            what: "cannot write an empty PGM".into(),
        });
    }
    let vmin = m.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = vmax - vmin;
    let mut out = Vec::with_capacity(32 + m.len() * 2);
    out.extend_from_slice(format!("P5\n{} {}\n65535\n", m.ncols(), m.nrows()).as_bytes());
    for &v in m.iter() {
        let q = if span == 0.0 {
            0u16
        } else {
            ((v - vmin) / span * 65535.0).round() as u16
        };
        out.extend_from_slice(&q.to_be_bytes());
    }
    atomic_write(path, &out)?;
    let mut sidecar = path.as_os_str().to_os_string();
    sidecar.push(".scale.txt");
    atomic_write(
        Path::new(&sidecar),
        format!("vmin {vmin}\nvmax {vmax}\n").as_bytes(),
    )
}

/// Write a boolean mask as 8-bit binary PGM, 0 or 255. No sidecar; the
/// scale is fixed.
pub fn write_pgm_mask(path: &Path, m: &Array2<bool>) -> Result<()> {
    if m.is_empty() {
        return Err(Error::BadParam {
            what: "cannot write an empty PGM".into(),
        });
    }
    let mut out = Vec::with_capacity(32 + m.len());
    out.extend_from_slice(format!("P5\n{} {}\n255\n", m.ncols(), m.nrows()).as_bytes());
    out.extend(m.iter().map(|&b| if b { 255u8 } else { 0 }));
    atomic_write(path, &out)
}

pub fn matrix_to_csv(m: &Array2<f64>) -> String {
    let mut s = String::new();
    for row in m.rows() {
        let line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        s.push_str(&line);
        s.push('\n');
    }
    s
}

pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    ensure_finite(m, "csv matrix")?;
    atomic_write(path, matrix_to_csv(m).as_bytes())
}

fn csv_from_text(text: &str, path: &Path) -> Result<Array2<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut vals = Vec::new();
        let mut bad = None;
        for (col, tok) in line.split(',').enumerate() {
            match tok.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => vals.push(v),
                Ok(v) => {
                    bad = Some(format!(
                        "non-finite value {v} at line {} column {}",
                        lineno + 1,
                        col + 1
                    ));
                    break;
                }
                Err(_) => {
                    bad = Some(format!(
                        "unparseable number {tok:?} at line {} column {}",
                        lineno + 1,
                        col + 1
                    ));
                    break;
                }
            }
        }
        if let Some(detail) = bad {
            // a single leading header line is tolerated
            if lineno == 0 && rows.is_empty() {
                continue;
            }
            return Err(Error::format(path, detail));
        }
        match width {
            None => width = Some(vals.len()),
            Some(w) if w != vals.len() => {
                return Err(Error::format(
                    path,
                    format!("line {} has {} values, expected {w}", lineno + 1, vals.len()),
                ))
            }
            _ => {}
        }
        rows.push(vals);
    }
    let width = width.ok_or_else(|| Error::format(path, "no numeric rows"))?;
    let nrows = rows.len();
    let data: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, width), data).map_err(|e| Error::format(path, e.to_string()))
}

/// `index,value` rows, index starting at 1 to match the series convention.
pub fn write_signal_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut s = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, v));
    }
    atomic_write(path, s.as_bytes())
}

/// Write via `<path>.tmp` plus rename, so readers never see partial files.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: String,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        detail: format!("{}: {e}", path.display()),
    })?;
    if m.version != MANIFEST_VERSION {
        return Err(Error::Manifest {
            detail: format!(
                "unsupported manifest version {:?}; this build reads version {:?}",
                m.version, MANIFEST_VERSION
            ),
        });
    }
    if m.entries.is_empty() {
        return Err(Error::Manifest {
            detail: "manifest lists no images".into(),
        });
    }
    let stamped = m.entries.iter().filter(|e| e.timestamp.is_some()).count();
    if stamped != 0 && stamped != m.entries.len() {
        return Err(Error::Manifest {
            detail: format!(
                "{stamped} of {} entries carry timestamps; all or none must",
                m.entries.len()
            ),
        });
    }
    Ok(m)
}

pub fn write_manifest(path: &Path, m: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m).expect("manifest serializes");
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Read every image of a manifest into a raw-domain stack. Relative entry
/// paths resolve against the manifest's directory. Also returns the
/// resolved image paths, in order.
pub fn load_stack(manifest_path: &Path) -> Result<(ImageStack, Vec<PathBuf>)> {
    let m = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let paths: Vec<PathBuf> = m.entries.iter().map(|e| base.join(&e.path)).collect();
    let images = paths
        .iter()
        .map(|p| read_image(p))
        .collect::<Result<Vec<_>>>()?;
    let channel = manifest_channel(&m)?;
    let mut stack = ImageStack::new(images, channel, Domain::Raw)?;
    if m.entries[0].timestamp.is_some() {
        let ts = m
            .entries
            .iter()
            .map(|e| {
                let raw = e.timestamp.as_ref().unwrap();
                DateTime::parse_from_rfc3339(raw).map_err(|err| Error::Manifest {
                    detail: format!("bad timestamp {raw:?}: {err}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        stack = stack.with_timestamps(ts)?;
    }
    Ok((stack, paths))
}

fn manifest_channel(m: &Manifest) -> Result<Channel> {
    let mut tag: Option<&str> = None;
    for e in &m.entries {
        if let Some(c) = &e.channel {
            match tag {
                None => tag = Some(c),
                Some(t) if t == c => {}
                Some(t) => {
                    return Err(Error::Manifest {
                        detail: format!("mixed channels {t:?} and {c:?}"),
                    })
                }
            }
        }
    }
    Ok(match tag {
        None | Some("generic") => Channel::Generic,
        Some("vv") => Channel::VV,
        Some("vh") => Channel::VH,
        Some("combined") => Channel::Combined,
        Some(other) => {
            return Err(Error::Manifest {
                detail: format!("unknown channel {other:?}; expected vv, vh, combined, or generic"),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use tempfile::tempdir;

    #[test]
    fn wecs1_round_trip_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.wecs1");
        let m = arr2(&[
            [0.1, -3.5e-300, 1.0],
            [f64::MIN_POSITIVE, 1e308, -0.0],
        ]);
        write_matrix_wecs1(&p, &m).unwrap();
        let back = read_image(&p).unwrap();
        assert_eq!(back.dim(), (2, 3));
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn wecs1_f32_widens() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.wecs1");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"WECS1");
        bytes.push(4);
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&1.5f32.to_le_bytes());
        bytes.extend_from_slice(&(-0.25f32).to_le_bytes());
        fs::write(&p, &bytes).unwrap();
        let m = read_image(&p).unwrap();
        assert_eq!(m, arr2(&[[1.5, -0.25]]));
    }

    #[test]
    fn wecs1_truncation_reported() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.wecs1");
        let m = Array2::from_elem((2, 2), 1.0);
        let mut bytes = matrix_to_wecs1(&m).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&p, &bytes).unwrap();
        let err = read_image(&p).unwrap_err();
        assert_eq!(err.category(), "format");
        assert!(err.to_string().contains("expected 32"));
    }

    #[test]
    fn wecs1_nan_rejected_with_offset() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.wecs1");
        let mut bytes = matrix_to_wecs1(&Array2::zeros((1, 2))).unwrap();
        bytes[22..30].copy_from_slice(&f64::NAN.to_le_bytes());
        fs::write(&p, &bytes).unwrap();
        let err = read_image(&p).unwrap_err();
        assert!(err.to_string().contains("byte offset 22"));
    }

    #[test]
    fn pgm_round_trip_is_affine() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        let m = arr2(&[[0.0, 0.5], [0.75, 1.0]]);
        write_pgm_scaled(&p, &m).unwrap();
        let back = read_image(&p).unwrap();
        assert_eq!(back, arr2(&[[0.0, 32768.0], [49151.0, 65535.0]]));
        let sidecar = fs::read_to_string(dir.path().join("m.pgm.scale.txt")).unwrap();
        assert_eq!(sidecar, "vmin 0\nvmax 1\n");
    }

    #[test]
    fn pgm_constant_writes_zeros() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        write_pgm_scaled(&p, &Array2::from_elem((3, 2), 4.2)).unwrap();
        let back = read_image(&p).unwrap();
        assert!(back.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pgm_eight_bit_with_comment() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        let bytes = b"P5\n# a comment\n2 2\n255\n\x00\x7f\x80\xff";
        fs::write(&p, bytes).unwrap();
        let m = read_image(&p).unwrap();
        assert_eq!(m, arr2(&[[0.0, 127.0], [128.0, 255.0]]));
    }

    #[test]
    fn pgm_short_raster_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        fs::write(&p, b"P5\n2 2\n255\n\x00\x01\x02").unwrap();
        assert_eq!(read_image(&p).unwrap_err().category(), "format");
    }

    #[test]
    fn csv_round_trip_exact() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = arr2(&[[1.0, 0.1], [-2.5e-17, 3.0]]);
        write_matrix_csv(&p, &m).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text, "1,0.1\n-0.000000000000000025,3\n");
        let back = read_image(&p).unwrap();
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_header_tolerated_ragged_rejected() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "row,col,val\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(read_image(&p).unwrap().dim(), (2, 3));
        fs::write(&p, "1,2,3\n4,5\n").unwrap();
        let err = read_image(&p).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn signal_csv_one_based() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_signal_csv(&p, &[0.5, 2.0]).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "index,value\n1,0.5\n2,2\n"
        );
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("out.bin");
        atomic_write(&p, b"payload").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"payload");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    fn write_images(dir: &Path, vals: &[f64]) -> Vec<String> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| {
                let name = format!("img_{i}.wecs1");
                write_matrix_wecs1(&dir.join(&name), &Array2::from_elem((2, 2), v)).unwrap();
                name
            })
            .collect()
    }

    #[test]
    fn manifest_round_trip_and_stack() {
        let dir = tempdir().unwrap();
        let names = write_images(dir.path(), &[1.0, 2.0]);
        let m = Manifest {
            version: MANIFEST_VERSION.into(),
            entries: names
                .iter()
                .enumerate()
                .map(|(i, n)| ManifestEntry {
                    path: n.clone(),
                    timestamp: Some(format!("2021-06-0{}T00:00:00Z", i + 1)),
                    channel: Some("vv".into()),
                })
                .collect(),
        };
        let mp = dir.path().join("manifest.json");
        write_manifest(&mp, &m).unwrap();
        let (stack, paths) = load_stack(&mp).unwrap();
        assert_eq!(stack.n(), 2);
        assert_eq!(stack.domain, Domain::Raw);
        assert_eq!(stack.channel, Channel::VV);
        assert!(stack.timestamps().is_some());
        assert_eq!(paths[0], dir.path().join("img_0.wecs1"));
        assert_eq!(stack.images()[1][(0, 0)], 2.0);
    }

    #[test]
    fn manifest_partial_timestamps_rejected() {
        let dir = tempdir().unwrap();
        let names = write_images(dir.path(), &[1.0, 2.0]);
        let m = Manifest {
            version: MANIFEST_VERSION.into(),
            entries: vec![
                ManifestEntry {
                    path: names[0].clone(),
                    timestamp: Some("2021-06-01T00:00:00Z".into()),
                    channel: None,
                },
                ManifestEntry {
                    path: names[1].clone(),
                    timestamp: None,
                    channel: None,
                },
            ],
        };
        let mp = dir.path().join("manifest.json");
        write_manifest(&mp, &m).unwrap();
        let err = load_stack(&mp).unwrap_err();
        assert_eq!(err.category(), "manifest");
    }

    #[test]
    fn manifest_unknown_field_rejected() {
        let dir = tempdir().unwrap();
        let mp = dir.path().join("manifest.json");
        fs::write(
            &mp,
            r#"{"version":"1","entries":[{"path":"a","extra":1}]}"#,
        )
        .unwrap();
        assert_eq!(load_manifest(&mp).unwrap_err().category(), "manifest");
    }

    #[test]
    fn manifest_version_checked() {
        let dir = tempdir().unwrap();
        let mp = dir.path().join("manifest.json");
        fs::write(&mp, r#"{"version":"2","entries":[{"path":"a"}]}"#).unwrap();
        let err = load_manifest(&mp).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn truth_mask_binarizes() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("t.csv");
        fs::write(&p, "0,1\n2,0\n").unwrap();
        let t = read_truth_mask(&p).unwrap();
        assert_eq!(t, arr2(&[[false, true], [true, false]]));
    }
}
