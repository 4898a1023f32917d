//! On-disk formats.
//!
//! `CSQ1`: magic, little-endian `u32` `n_x, n_y, n_t, n_c`, then `f32` pairs
//! `(re, im)` in `(c, t, y, x)` order. `CMV1`: magic, `u32` `n_x, n_y,
//! n_transitions`, then `f32` pairs `(dy, dx)` in `(transition, y, x)`
//! order. Images are written at single precision.

use std::fs;
use std::path::Path;

use motioncs::motion::MotionField;
use motioncs::C64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, Result};

const CSQ_MAGIC: &[u8; 4] = b"CSQ1";
const CMV_MAGIC: &[u8; 4] = b"CMV1";

/// Decoded `CSQ1` contents.
#[derive(Clone, Debug, PartialEq)]
pub struct Csq {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub nc: usize,
    pub data: Vec<C64>,
}

impl Csq {
    pub fn frame_len(&self) -> usize {
        self.nx * self.ny
    }
}

pub fn encode_csq(nx: usize, ny: usize, nt: usize, nc: usize, data: &[C64]) -> Vec<u8> {
    assert_eq!(data.len(), nx * ny * nt * nc, "csq payload length");
    let mut out = Vec::with_capacity(20 + 8 * data.len());
    out.extend_from_slice(CSQ_MAGIC);
    for v in [nx, ny, nt, nc] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for z in data {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

fn header(bytes: &[u8], magic: &[u8; 4], fields: &[&'static str], path: &Path) -> Result<Vec<usize>> {
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(CliError::format(
            path,
            "magic",
            format!("expected {:?}", std::str::from_utf8(magic).unwrap_or("?")),
        ));
    }
    let mut dims = Vec::with_capacity(fields.len());
    for (i, &name) in fields.iter().enumerate() {
        let at = 4 + 4 * i;
        let raw = bytes
            .get(at..at + 4)
            .ok_or_else(|| CliError::format(path, name, "header truncated"))?;
        let v = u32::from_le_bytes(raw.try_into().unwrap()) as usize;
        if v == 0 {
            return Err(CliError::format(path, name, "must be positive"));
        }
        dims.push(v);
    }
    Ok(dims)
}

fn payload(bytes: &[u8], offset: usize, n_pairs: usize, path: &Path) -> Result<Vec<[f32; 2]>> {
    let want = n_pairs
        .checked_mul(8)
        .ok_or_else(|| CliError::format(path, "payload length", "dimensions overflow"))?;
    let have = bytes.len() - offset;
    if have != want {
        return Err(CliError::format(
            path,
            "payload length",
            format!("expected {want} bytes, found {have}"),
        ));
    }
    Ok(bytes[offset..]
        .chunks_exact(8)
        .map(|c| {
            [
                f32::from_le_bytes(c[..4].try_into().unwrap()),
                f32::from_le_bytes(c[4..].try_into().unwrap()),
            ]
        })
        .collect())
}

pub fn decode_csq(bytes: &[u8], path: &Path) -> Result<Csq> {
    let d = header(bytes, CSQ_MAGIC, &["n_x", "n_y", "n_t", "n_c"], path)?;
    let n = d.iter().try_fold(1usize, |a, &b| a.checked_mul(b));
    let n = n.ok_or_else(|| CliError::format(path, "payload length", "dimensions overflow"))?;
    let data = payload(bytes, 20, n, path)?
        .into_iter()
        .map(|[re, im]| C64::new(re as f64, im as f64))
        .collect::<Vec<_>>();
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CliError::format(path, "payload", "non-finite sample"));
    }
    Ok(Csq {
        nx: d[0],
        ny: d[1],
        nt: d[2],
        nc: d[3],
        data,
    })
}

pub fn encode_cmv(v: &MotionField) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * v.as_slice().len());
    out.extend_from_slice(CMV_MAGIC);
    for d in [v.nx(), v.ny(), v.n_transitions()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for [dy, dx] in v.as_slice() {
        out.extend_from_slice(&(*dy as f32).to_le_bytes());
        out.extend_from_slice(&(*dx as f32).to_le_bytes());
    }
    out
}

pub fn decode_cmv(bytes: &[u8], path: &Path) -> Result<MotionField> {
    let d = header(bytes, CMV_MAGIC, &["n_x", "n_y", "n_transitions"], path)?;
    let n = d[0]
        .checked_mul(d[1])
        .and_then(|v| v.checked_mul(d[2]))
        .ok_or_else(|| CliError::format(path, "payload length", "dimensions overflow"))?;
    let data = payload(bytes, 16, n, path)?
        .into_iter()
        .map(|[a, b]| [a as f64, b as f64])
        .collect();
    MotionField::new(d[0], d[1], d[2], data).map_err(|e| CliError::format(path, "payload", e.to_string()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_csq(path: &Path, nx: usize, ny: usize, nt: usize, nc: usize, data: &[C64]) -> Result<()> {
    write_bytes(path, &encode_csq(nx, ny, nt, nc, data))
}

pub fn read_csq(path: &Path) -> Result<Csq> {
    decode_csq(&read_bytes(path)?, path)
}

pub fn write_cmv(path: &Path, v: &MotionField) -> Result<()> {
    write_bytes(path, &encode_cmv(v))
}

pub fn read_cmv(path: &Path) -> Result<MotionField> {
    decode_cmv(&read_bytes(path)?, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_bytes(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, "json", e.to_string()))
}

/// 16-bit binary PGM of magnitudes scaled by `peak` to `[0, 65535]`.
pub fn encode_pgm(nx: usize, ny: usize, magnitude: &[f64], peak: f64) -> Vec<u8> {
    assert_eq!(magnitude.len(), nx * ny);
    let mut out = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    for &m in magnitude {
        let v = if peak > 0.0 {
            (m / peak * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}
