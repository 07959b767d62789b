//! Homogeneous participating media: Beer-Lambert attenuation, the Schlick
//! phase function, and closed-form single-scattered airlight.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::light::{LightKind, LightSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeatherTag {
    Clear,
    Fog,
    Mist,
    Rain,
    DenseHaze,
    MildHaze,
}

impl WeatherTag {
    pub const ALL: [WeatherTag; 6] = [
        WeatherTag::Clear,
        WeatherTag::Fog,
        WeatherTag::Mist,
        WeatherTag::Rain,
        WeatherTag::DenseHaze,
        WeatherTag::MildHaze,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&w| w == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            WeatherTag::Clear => "Clear",
            WeatherTag::Fog => "Fog",
            WeatherTag::Mist => "Mist",
            WeatherTag::Rain => "Rain",
            WeatherTag::DenseHaze => "DenseHaze",
            WeatherTag::MildHaze => "MildHaze",
        }
    }

    /// Whether the condition is rendered under direct sun rather than overcast sky.
    pub fn sunny(self) -> bool {
        matches!(self, WeatherTag::Clear | WeatherTag::MildHaze)
    }

    /// Default medium for the condition.
    ///
    /// Large droplets (fog, mist, rain) scatter nearly wavelength-independently;
    /// small haze particles scatter blue more strongly. The per-channel spread
    /// of `beta` is what separates the conditions in dichromatic-plane tests.
    pub fn preset(self) -> MediumSpec {
        let (beta, k, air) = match self {
            WeatherTag::Clear => ([0.0; 3], 0.0, [1.0; 3]),
            WeatherTag::Fog => ([0.05, 0.05, 0.05], 0.2, [0.92, 0.93, 0.95]),
            WeatherTag::Mist => ([0.030, 0.0303, 0.0306], 0.1, [0.90, 0.92, 0.95]),
            WeatherTag::Rain => ([0.015, 0.0158, 0.0166], 0.3, [0.80, 0.82, 0.86]),
            WeatherTag::DenseHaze => ([0.040, 0.0416, 0.0432], 0.5, [0.88, 0.86, 0.80]),
            WeatherTag::MildHaze => ([0.010, 0.0135, 0.018], 0.7, [0.85, 0.88, 0.95]),
        };
        MediumSpec {
            beta,
            anisotropy: k,
            airlight_color: air,
            weather: self,
            beta_scale: 1.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumSpec {
    /// Per-channel scattering coefficient (1/m).
    pub beta: [f64; 3],
    /// Schlick anisotropy; positive values scatter forward.
    pub anisotropy: f64,
    /// Single-scattering tint applied to in-scattered light.
    pub airlight_color: [f64; 3],
    pub weather: WeatherTag,
    /// Density multiplier driven by dynamics scripts.
    #[serde(default = "one")]
    pub beta_scale: f64,
}

impl Default for MediumSpec {
    fn default() -> Self {
        WeatherTag::Clear.preset()
    }
}

impl MediumSpec {
    pub fn effective_beta(&self) -> [f64; 3] {
        [
            self.beta[0] * self.beta_scale,
            self.beta[1] * self.beta_scale,
            self.beta[2] * self.beta_scale,
        ]
    }

    pub fn is_clear(&self) -> bool {
        self.effective_beta().iter().all(|&b| b == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) || !(self.beta_scale >= 0.0) {
            return Err(Error::InvalidConfig(format!("medium beta {:?} must be >= 0", self.beta)));
        }
        if !(self.anisotropy.abs() < 1.0) {
            return Err(Error::PhaseDomain(self.anisotropy));
        }
        if self.weather == WeatherTag::Clear && !self.is_clear() {
            return Err(Error::InvalidConfig("Clear weather requires beta = 0".into()));
        }
        Ok(())
    }
}

/// Beer-Lambert transmittance `exp(-beta_c * d)` per channel. Returns exactly
/// 1 on channels with `beta = 0`, including at infinite distance.
pub fn transmittance(medium: &MediumSpec, distance: f64) -> [f64; 3] {
    let beta = medium.effective_beta();
    let mut t = [1.0; 3];
    for c in 0..3 {
        if beta[c] > 0.0 {
            t[c] = (-beta[c] * distance).exp();
        }
    }
    t
}

/// Schlick phase function `(1 - k^2) / (4 pi (1 - k cos)^2)`, normalized over
/// the sphere.
pub fn schlick_phase(k: f64, cos_theta: f64) -> Result<f64> {
    if !(k.abs() < 1.0) {
        return Err(Error::PhaseDomain(k));
    }
    let d = 1.0 - k * cos_theta;
    Ok((1.0 - k * k) / (4.0 * PI * d * d))
}

/// Light scattered into a view ray over `depth` meters of homogeneous medium.
///
/// `view_dir` points from the camera into the scene. Ambient lights give
/// `airlight_color * sky * (1 - T)`; each directional light adds the closed
/// form of `int_0^d beta e^{-beta t} p(k, cos) E dt = p E (1 - T)`.
pub fn airlight(medium: &MediumSpec, view_dir: [f64; 3], lights: &[LightSpec], depth: f64) -> [f64; 3] {
    let t = transmittance(medium, depth);
    let mut sky = [0.0; 3];
    let mut sun = [0.0; 3];
    for light in lights {
        match &light.kind {
            LightKind::Ambient => {
                let r = light.radiance();
                for c in 0..3 {
                    sky[c] += r[c];
                }
            }
            LightKind::Directional { direction } => {
                // scattering angle between the sun's propagation and the ray toward the camera
                let cos = -(direction[0] * view_dir[0] + direction[1] * view_dir[1] + direction[2] * view_dir[2]);
                let p = schlick_phase(medium.anisotropy, cos.clamp(-1.0, 1.0)).unwrap_or(0.0);
                let r = light.radiance();
                for c in 0..3 {
                    sun[c] += p * r[c];
                }
            }
            LightKind::Spot { .. } => {}
        }
    }
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = medium.airlight_color[c] * (sky[c] + sun[c]) * (1.0 - t[c]);
    }
    out
}
