//! Image and flow file formats: PFM (HDR), binary PPM (LDR) and Middlebury `.flo`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::render::{FlowField, GrayImage, Grid, LdrImage, RadianceImage};

pub const FLO_MAGIC: f32 = 202021.25;

fn bad(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Format {
        what,
        detail: detail.into(),
    }
}

/// Splits `n` whitespace-separated header tokens off the front of `bytes`,
/// skipping `#` comments, and returns them with the payload after the single
/// whitespace byte that ends the header.
fn header<'a>(bytes: &'a [u8], n: usize, what: &'static str) -> Result<(Vec<String>, &'a [u8])> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < n {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err(bad(what, "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if i >= bytes.len() {
        return Err(bad(what, "missing payload"));
    }
    Ok((tokens, &bytes[i + 1..]))
}

fn parse<T: std::str::FromStr>(s: &str, what: &'static str) -> Result<T> {
    s.parse().map_err(|_| bad(what, format!("bad header field `{s}`")))
}

/// Decoded PFM: rows top-down, `channels` floats per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

fn encode_pfm_raw(width: usize, height: usize, channels: usize, data: &[f32]) -> Vec<u8> {
    let tag = if channels == 3 { "PF" } else { "Pf" };
    let mut out = format!("{tag}\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(data.len() * 4);
    for y in (0..height).rev() {
        for v in &data[y * width * channels..(y + 1) * width * channels] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn encode_pfm_rgb(img: &RadianceImage) -> Vec<u8> {
    let data: Vec<f32> = img.data.iter().flat_map(|p| p.map(|v| v as f32)).collect();
    encode_pfm_raw(img.width, img.height, 3, &data)
}

pub fn encode_pfm_gray(img: &GrayImage) -> Vec<u8> {
    let data: Vec<f32> = img.data.iter().map(|&v| v as f32).collect();
    encode_pfm_raw(img.width, img.height, 1, &data)
}

pub fn decode_pfm(bytes: &[u8]) -> Result<Pfm> {
    let (t, payload) = header(bytes, 4, "PFM")?;
    let channels = match t[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(bad("PFM", format!("unknown magic `{other}`"))),
    };
    let width: usize = parse(&t[1], "PFM")?;
    let height: usize = parse(&t[2], "PFM")?;
    let scale: f32 = parse(&t[3], "PFM")?;
    let n = width * height * channels;
    if payload.len() < n * 4 {
        return Err(bad("PFM", format!("expected {} payload bytes, found {}", n * 4, payload.len())));
    }
    let read = |i: usize| {
        let b = [payload[4 * i], payload[4 * i + 1], payload[4 * i + 2], payload[4 * i + 3]];
        if scale < 0.0 {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let row = width * channels;
    let mut data = Vec::with_capacity(n);
    for y in 0..height {
        let src = height - 1 - y;
        data.extend((0..row).map(|k| read(src * row + k)));
    }
    Ok(Pfm {
        width,
        height,
        channels,
        data,
    })
}

impl Pfm {
    pub fn to_rgb(&self) -> Result<RadianceImage> {
        if self.channels != 3 {
            return Err(bad("PFM", "expected 3 channels"));
        }
        let px = self.data.chunks(3).map(|c| [c[0] as f64, c[1] as f64, c[2] as f64]).collect();
        Ok(Grid::from_vec(self.width, self.height, px))
    }

    pub fn to_gray(&self) -> Result<GrayImage> {
        if self.channels != 1 {
            return Err(bad("PFM", "expected 1 channel"));
        }
        Ok(Grid::from_vec(self.width, self.height, self.data.iter().map(|&v| v as f64).collect()))
    }
}

/// P6 with maxval `2^bits - 1`; two big-endian bytes per sample above 8 bits.
pub fn encode_ppm(img: &LdrImage) -> Vec<u8> {
    let max = img.max_value();
    let mut out = format!("P6\n{} {}\n{}\n", img.pixels.width, img.pixels.height, max).into_bytes();
    for p in &img.pixels.data {
        for &v in p {
            if max < 256 {
                out.push(v as u8);
            } else {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
    }
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<LdrImage> {
    let (t, payload) = header(bytes, 4, "PPM")?;
    if t[0] != "P6" {
        return Err(bad("PPM", format!("unsupported magic `{}`", t[0])));
    }
    let width: usize = parse(&t[1], "PPM")?;
    let height: usize = parse(&t[2], "PPM")?;
    let max: u32 = parse(&t[3], "PPM")?;
    if max == 0 || max > 65535 {
        return Err(bad("PPM", format!("maxval {max} out of range")));
    }
    let bits = 32 - max.leading_zeros();
    if (1u32 << bits) - 1 != max {
        return Err(bad("PPM", format!("maxval {max} is not 2^bits - 1")));
    }
    let wide = max > 255;
    let bps = if wide { 2 } else { 1 };
    let n = width * height * 3;
    if payload.len() < n * bps {
        return Err(bad("PPM", "truncated payload"));
    }
    let sample = |i: usize| -> u16 {
        if wide {
            u16::from_be_bytes([payload[2 * i], payload[2 * i + 1]])
        } else {
            payload[i] as u16
        }
    };
    let px = (0..width * height)
        .map(|i| [sample(3 * i), sample(3 * i + 1), sample(3 * i + 2)])
        .collect();
    Ok(LdrImage {
        bits,
        pixels: Grid::from_vec(width, height, px),
    })
}

pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + flow.data.len() * 8);
    out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    out.extend_from_slice(&(flow.width as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height as i32).to_le_bytes());
    for f in &flow.data {
        out.extend_from_slice(&(f[0] as f32).to_le_bytes());
        out.extend_from_slice(&(f[1] as f32).to_le_bytes());
    }
    out
}

pub fn decode_flo(bytes: &[u8]) -> Result<FlowField> {
    let word = |i: usize| -> Result<[u8; 4]> {
        bytes
            .get(4 * i..4 * i + 4)
            .map(|b| [b[0], b[1], b[2], b[3]])
            .ok_or_else(|| bad("FLO", "truncated file"))
    };
    if f32::from_le_bytes(word(0)?) != FLO_MAGIC {
        return Err(bad("FLO", "bad magic"));
    }
    let w = i32::from_le_bytes(word(1)?);
    let h = i32::from_le_bytes(word(2)?);
    if w < 0 || h < 0 {
        return Err(bad("FLO", "negative size"));
    }
    let (w, h) = (w as usize, h as usize);
    let mut data = Vec::with_capacity(w * h);
    for i in 0..w * h {
        let u = f32::from_le_bytes(word(3 + 2 * i)?) as f64;
        let v = f32::from_le_bytes(word(4 + 2 * i)?) as f64;
        data.push([u, v]);
    }
    Ok(Grid::from_vec(w, h, data))
}

pub fn write_pfm_rgb(path: &Path, img: &RadianceImage) -> Result<()> {
    Ok(fs::write(path, encode_pfm_rgb(img))?)
}

pub fn write_pfm_gray(path: &Path, img: &GrayImage) -> Result<()> {
    Ok(fs::write(path, encode_pfm_gray(img))?)
}

pub fn read_pfm(path: &Path) -> Result<Pfm> {
    decode_pfm(&fs::read(path)?)
}

pub fn write_ppm(path: &Path, img: &LdrImage) -> Result<()> {
    Ok(fs::write(path, encode_ppm(img))?)
}

pub fn read_ppm(path: &Path) -> Result<LdrImage> {
    decode_ppm(&fs::read(path)?)
}

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    Ok(fs::write(path, encode_flo(flow))?)
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    decode_flo(&fs::read(path)?)
}
