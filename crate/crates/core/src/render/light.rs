use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LightKind {
    /// Sun. `direction` is the propagation direction (from the sun into the scene).
    Directional { direction: [f64; 3] },
    /// Uniform sky dome; `color * intensity` is the sky radiance.
    Ambient,
    /// Street light with a hard cutoff at `cone_angle_deg` from its axis.
    /// `intensity` is radiant intensity, falling off as `1/r^2`.
    Spot {
        position: [f64; 3],
        direction: [f64; 3],
        cone_angle_deg: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightSpec {
    #[serde(flatten)]
    pub kind: LightKind,
    pub color: [f64; 3],
    pub intensity: f64,
    /// Multiplier driven by dynamics scripts; effective power is `intensity * scale`.
    #[serde(default = "one")]
    pub scale: f64,
}

impl LightSpec {
    pub fn sun(direction: [f64; 3], color: [f64; 3], intensity: f64) -> Self {
        Self {
            kind: LightKind::Directional {
                direction: normalize(direction),
            },
            color,
            intensity,
            scale: 1.0,
        }
    }

    pub fn ambient(color: [f64; 3], intensity: f64) -> Self {
        Self {
            kind: LightKind::Ambient,
            color,
            intensity,
            scale: 1.0,
        }
    }

    pub fn spot(position: [f64; 3], direction: [f64; 3], cone_angle_deg: f64, color: [f64; 3], intensity: f64) -> Self {
        Self {
            kind: LightKind::Spot {
                position,
                direction: normalize(direction),
                cone_angle_deg,
            },
            color,
            intensity,
            scale: 1.0,
        }
    }

    /// `color * intensity * scale`.
    pub fn radiance(&self) -> [f64; 3] {
        let k = self.intensity * self.scale;
        [self.color[0] * k, self.color[1] * k, self.color[2] * k]
    }

    pub fn is_direct(&self) -> bool {
        !matches!(self.kind, LightKind::Ambient)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity >= 0.0 && self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "light intensity {} x scale {} must be >= 0",
                self.intensity, self.scale
            )));
        }
        if self.color.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidConfig(format!("light color {:?} must be >= 0", self.color)));
        }
        let dir = match &self.kind {
            LightKind::Directional { direction } => Some(direction),
            LightKind::Spot {
                direction, cone_angle_deg, ..
            } => {
                if !(*cone_angle_deg > 0.0 && *cone_angle_deg <= 180.0) {
                    return Err(Error::InvalidConfig(format!("spot cone {cone_angle_deg} outside (0, 180]")));
                }
                Some(direction)
            }
            LightKind::Ambient => None,
        };
        if let Some(d) = dir {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if (n - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidConfig(format!("light direction {d:?} is not normalized")));
            }
        }
        Ok(())
    }
}

pub fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}
