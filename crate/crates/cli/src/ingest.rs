//! Reading and writing signals: binary PGM (P5) images and raw 3-D volumes.
//!
//! A raw3d file is a 12-byte header holding three little-endian `u32`
//! dims, followed by row-major little-endian `u16` samples.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use mrlwe::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Pgm,
    Raw3d,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "pgm" => Some(Format::Pgm),
            "raw3d" | "raw" => Some(Format::Raw3d),
            _ => None,
        }
    }
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn token<'a>(buf: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < buf.len() && buf[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < buf.len() && buf[*pos] == b'#' {
            while *pos < buf.len() && buf[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < buf.len() && !buf[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    ensure!(start < *pos, "truncated PGM header");
    Ok(&buf[start..*pos])
}

fn header_num(buf: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = token(buf, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .with_context(|| format!("bad PGM {what}"))
}

pub fn parse_pgm(buf: &[u8]) -> Result<Tensor<i64>> {
    let mut pos = 0;
    ensure!(token(buf, &mut pos)? == b"P5", "not a binary PGM (P5) file");
    let width = header_num(buf, &mut pos, "width")?;
    let height = header_num(buf, &mut pos, "height")?;
    let maxval = header_num(buf, &mut pos, "maxval")?;
    ensure!(width > 0 && height > 0, "empty PGM image");
    ensure!((1..=65535).contains(&maxval), "PGM maxval {maxval} out of range");
    ensure!(pos < buf.len(), "truncated PGM header");
    pos += 1; // single whitespace byte before the raster
    let bytes = if maxval < 256 { 1 } else { 2 };
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes))
        .context("PGM dims overflow")?;
    ensure!(
        buf.len() - pos >= need,
        "truncated PGM raster: {} of {need} bytes",
        buf.len() - pos
    );
    let raster = &buf[pos..pos + need];
    let data: Vec<i64> = if bytes == 1 {
        raster.iter().map(|&b| b as i64).collect()
    } else {
        raster.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as i64).collect()
    };
    if let Some(v) = data.iter().find(|&&v| v as usize > maxval) {
        bail!("sample {v} exceeds PGM maxval {maxval}");
    }
    Ok(Tensor::new(vec![height, width], data)?)
}

pub fn write_pgm(img: &Tensor<i64>) -> Result<Vec<u8>> {
    let [h, w] = img.dims() else {
        bail!("PGM output needs a 2-D tensor, got {:?}", img.dims());
    };
    let maxval = img.data().iter().copied().max().unwrap_or(0).max(1);
    ensure!(
        img.data().iter().all(|&v| (0..=65535).contains(&v)),
        "PGM samples must lie in [0, 65535]"
    );
    let mut out = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
    for &v in img.data() {
        if maxval < 256 {
            out.push(v as u8);
        } else {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn parse_raw3d(buf: &[u8]) -> Result<Tensor<i64>> {
    ensure!(buf.len() >= 12, "truncated raw3d header");
    let dims: Vec<usize> = buf[..12]
        .chunks(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    ensure!(dims.iter().all(|&d| d > 0), "raw3d dims must be positive");
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .context("raw3d dims overflow")?;
    ensure!(
        buf.len() - 12 == 2 * n,
        "raw3d payload has {} bytes, expected {}",
        buf.len() - 12,
        2 * n
    );
    let data = buf[12..]
        .chunks(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]) as i64)
        .collect();
    Ok(Tensor::new(dims, data)?)
}

pub fn write_raw3d(vol: &Tensor<i64>) -> Result<Vec<u8>> {
    ensure!(vol.dims().len() == 3, "raw3d output needs a 3-D tensor");
    ensure!(
        vol.data().iter().all(|&v| (0..=65535).contains(&v)),
        "raw3d samples must lie in [0, 65535]"
    );
    let mut out = Vec::with_capacity(12 + 2 * vol.len());
    for &d in vol.dims() {
        out.extend_from_slice(&u32::try_from(d)?.to_le_bytes());
    }
    for &v in vol.data() {
        out.extend_from_slice(&(v as u16).to_le_bytes());
    }
    Ok(out)
}

/// Reads a signal and checks every sample is below `t`.
pub fn ingest(path: &Path, format: Format, t: u64) -> Result<Tensor<i64>> {
    let buf = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let tensor = match format {
        Format::Pgm => parse_pgm(&buf),
        Format::Raw3d => parse_raw3d(&buf),
    }
    .with_context(|| format!("parsing {}", path.display()))?;
    if let Some(v) = tensor.data().iter().find(|&&v| v as u64 >= t) {
        bail!("{}: sample {v} is not below t = {t}", path.display());
    }
    Ok(tensor)
}
