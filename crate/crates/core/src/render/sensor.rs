use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::image::{Grid, LdrImage, RadianceImage};
use crate::error::{Error, Result};
use crate::rng;

fn default_sigma() -> f64 {
    0.002
}

fn default_bits() -> u32 {
    8
}

fn default_gamma() -> f64 {
    1.0
}

/// Camera response: `v = x^(1/gamma)`, plus Gaussian noise of standard
/// deviation `gaussian_noise_sigma` (normalized units), clamped to [0, 1],
/// then `q = floor(v * (2^bits - 1) + 0.5)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    #[serde(default = "default_sigma")]
    pub gaussian_noise_sigma: f64,
    #[serde(default = "default_bits")]
    pub quantization_bits: u32,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            gaussian_noise_sigma: default_sigma(),
            quantization_bits: default_bits(),
            gamma: default_gamma(),
            noise_seed: 0,
        }
    }
}

impl SensorConfig {
    pub fn noiseless() -> Self {
        Self {
            gaussian_noise_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gaussian_noise_sigma.is_finite() && self.gaussian_noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise sigma {} must be >= 0", self.gaussian_noise_sigma)));
        }
        if !(1..=16).contains(&self.quantization_bits) {
            return Err(Error::InvalidConfig(format!("quantization bits {} outside 1..=16", self.quantization_bits)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("gamma {} must be positive", self.gamma)));
        }
        Ok(())
    }
}

/// Noisy response before quantization, in normalized units.
pub fn sensor_response(img: &RadianceImage, cfg: &SensorConfig) -> Result<RadianceImage> {
    cfg.validate()?;
    let data = img
        .data
        .par_iter()
        .enumerate()
        .map(|(i, px)| {
            let mut out = [0.0; 3];
            let mut rng = (cfg.gaussian_noise_sigma > 0.0).then(|| rng::stream(cfg.noise_seed, &[i as u64]));
            for c in 0..3 {
                let mut v = px[c].max(0.0).powf(1.0 / cfg.gamma);
                if let Some(r) = rng.as_mut() {
                    let z: f64 = StandardNormal.sample(r);
                    v += cfg.gaussian_noise_sigma * z;
                }
                out[c] = v.clamp(0.0, 1.0);
            }
            out
        })
        .collect();
    Ok(RadianceImage::from_vec(img.width, img.height, data))
}

pub fn apply_sensor(img: &RadianceImage, cfg: &SensorConfig) -> Result<LdrImage> {
    let v = sensor_response(img, cfg)?;
    let max = ((1u32 << cfg.quantization_bits) - 1) as f64;
    let q = |x: f64| (x * max + 0.5).floor() as u16;
    Ok(LdrImage {
        bits: cfg.quantization_bits,
        pixels: Grid::from_vec(v.width, v.height, v.data.iter().map(|p| [q(p[0]), q(p[1]), q(p[2])]).collect()),
    })
}
