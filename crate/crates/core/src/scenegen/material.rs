use serde::{Deserialize, Serialize};

use crate::rng::mix64;

pub type MaterialId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaterialKind {
    /// Lambertian.
    Diffuse,
    /// Glassy: Schlick-Fresnel mirror lobe over a dim Lambertian base.
    Specular,
    /// Emitter with a Lambertian base (brake lights).
    Emissive,
}

/// Multiplicative albedo variation in object-local space: fractal value
/// noise from the feature size down to a sixteenth of it. Lookups take a
/// filter width; octaves too fine to resolve at that width fade out, so a
/// pixel sees the average of its footprint, as with mip-mapped textures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Texture {
    /// Feature size in meters.
    pub scale: f64,
    /// Albedo stays strictly within `(1 - contrast, 1 + contrast)` of the base.
    pub contrast: f64,
    pub seed: u64,
}

impl Texture {
    /// Albedo factor at `p`, filtered to features no finer than `width`
    /// meters (0 for a point lookup).
    pub fn factor(&self, p: [f64; 3], width: f64) -> f64 {
        let (mut sum, mut power, mut amp, mut freq) = (0.0, 0.0, 1.0, 1.0 / self.scale);
        for octave in 0..OCTAVES {
            power += amp * amp;
            // full weight from two filter widths per wavelength, none below one
            let w = (1.0 / (freq * width) - 1.0).clamp(0.0, 1.0);
            if w > 0.0 {
                let o = octave as f64;
                let q = [p[0] * freq + 17.0 * o, p[1] * freq + 5.0 * o, p[2] * freq + 11.0 * o];
                sum += w * amp * (2.0 * value_noise(q, self.seed ^ mix64(octave)) - 1.0);
            }
            amp *= GAIN;
            freq *= LACUNARITY;
        }
        // rescaled to one octave's spread, softly saturated
        1.0 + self.contrast * (SHARPNESS * sum / power.sqrt()).tanh()
    }
}

const OCTAVES: u64 = 5;
const GAIN: f64 = 0.7;
const LACUNARITY: f64 = 2.03;
const SHARPNESS: f64 = 2.0;

fn lattice(ix: i64, iy: i64, iz: i64, seed: u64) -> f64 {
    let h = mix64(seed ^ mix64(ix as u64 ^ mix64(iy as u64 ^ mix64(iz as u64))));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Trilinear value noise in [0, 1].
fn value_noise(p: [f64; 3], seed: u64) -> f64 {
    let f = [p[0].floor(), p[1].floor(), p[2].floor()];
    let (ix, iy, iz) = (f[0] as i64, f[1] as i64, f[2] as i64);
    let t = [smooth(p[0] - f[0]), smooth(p[1] - f[1]), smooth(p[2] - f[2])];
    let mut acc = 0.0;
    for dz in 0..2 {
        for dy in 0..2 {
            for dx in 0..2 {
                let w = (if dx == 1 { t[0] } else { 1.0 - t[0] })
                    * (if dy == 1 { t[1] } else { 1.0 - t[1] })
                    * (if dz == 1 { t[2] } else { 1.0 - t[2] });
                acc += w * lattice(ix + dx, iy + dy, iz + dz, seed);
            }
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub id: MaterialId,
    pub name: String,
    pub kind: MaterialKind,
    pub albedo: [f64; 3],
    #[serde(default)]
    pub texture: Option<Texture>,
    /// Normal-incidence reflectance of the mirror lobe (Specular only).
    #[serde(default)]
    pub specular_f0: f64,
    #[serde(default)]
    pub emission: [f64; 3],
}

impl Material {
    /// Point albedo at object-local `local`.
    pub fn albedo_at(&self, local: [f64; 3]) -> [f64; 3] {
        self.albedo_filtered(local, 0.0)
    }

    /// Albedo averaged over a footprint `width` meters across.
    pub fn albedo_filtered(&self, local: [f64; 3], width: f64) -> [f64; 3] {
        match &self.texture {
            Some(t) => {
                let f = t.factor(local, width);
                [
                    (self.albedo[0] * f).clamp(0.0, 1.0),
                    (self.albedo[1] * f).clamp(0.0, 1.0),
                    (self.albedo[2] * f).clamp(0.0, 1.0),
                ]
            }
            None => self.albedo,
        }
    }
}

/// Fixed material table shared by every generated scene. Ids are stable.
pub mod standard {
    use super::MaterialId;

    pub const PAVEMENT: MaterialId = 0;
    pub const ASPHALT: MaterialId = 1;
    pub const FACADE_BRICK: MaterialId = 2;
    pub const FACADE_SANDSTONE: MaterialId = 3;
    pub const FACADE_CONCRETE: MaterialId = 4;
    pub const WINDOW_GLASS: MaterialId = 5;
    pub const BARK: MaterialId = 6;
    pub const FOLIAGE: MaterialId = 7;
    pub const PAINT_RED: MaterialId = 8;
    pub const PAINT_BLUE: MaterialId = 9;
    pub const PAINT_SILVER: MaterialId = 10;
    pub const PAINT_BLACK: MaterialId = 11;
    pub const BRAKE_LIGHT: MaterialId = 12;
    pub const CLOTH: MaterialId = 13;
    pub const PLAIN_WALL: MaterialId = 14;

    pub const FACADES: [MaterialId; 4] = [FACADE_BRICK, FACADE_SANDSTONE, FACADE_CONCRETE, PLAIN_WALL];
    pub const PAINTS: [MaterialId; 4] = [PAINT_RED, PAINT_BLUE, PAINT_SILVER, PAINT_BLACK];
}

pub fn standard_materials() -> Vec<Material> {
    fn diffuse(id: MaterialId, name: &str, albedo: [f64; 3], texture: Option<(f64, f64)>) -> Material {
        Material {
            id,
            name: name.to_string(),
            kind: MaterialKind::Diffuse,
            albedo,
            texture: texture.map(|(scale, contrast)| Texture {
                scale,
                contrast,
                seed: 0xA5A5_0000 + id as u64,
            }),
            specular_f0: 0.0,
            emission: [0.0; 3],
        }
    }
    vec![
        diffuse(standard::PAVEMENT, "pavement", [0.45, 0.43, 0.40], Some((1.2, 0.45))),
        diffuse(standard::ASPHALT, "asphalt", [0.18, 0.18, 0.19], None),
        diffuse(standard::FACADE_BRICK, "facade_brick", [0.55, 0.30, 0.22], Some((1.5, 0.45))),
        diffuse(standard::FACADE_SANDSTONE, "facade_sandstone", [0.70, 0.62, 0.45], Some((1.5, 0.45))),
        diffuse(standard::FACADE_CONCRETE, "facade_concrete", [0.55, 0.56, 0.58], Some((1.5, 0.45))),
        Material {
            id: standard::WINDOW_GLASS,
            name: "window_glass".into(),
            kind: MaterialKind::Specular,
            albedo: [0.05, 0.06, 0.08],
            texture: None,
            specular_f0: 0.6,
            emission: [0.0; 3],
        },
        diffuse(standard::BARK, "bark", [0.30, 0.22, 0.15], Some((0.3, 0.3))),
        diffuse(standard::FOLIAGE, "foliage", [0.15, 0.40, 0.12], Some((0.6, 0.5))),
        diffuse(standard::PAINT_RED, "paint_red", [0.60, 0.08, 0.07], None),
        diffuse(standard::PAINT_BLUE, "paint_blue", [0.08, 0.15, 0.55], None),
        diffuse(standard::PAINT_SILVER, "paint_silver", [0.62, 0.63, 0.65], None),
        diffuse(standard::PAINT_BLACK, "paint_black", [0.05, 0.05, 0.05], None),
        Material {
            id: standard::BRAKE_LIGHT,
            name: "brake_light".into(),
            kind: MaterialKind::Emissive,
            albedo: [0.3, 0.02, 0.02],
            texture: None,
            specular_f0: 0.0,
            emission: [4.0, 0.1, 0.05],
        },
        diffuse(standard::CLOTH, "cloth", [0.25, 0.28, 0.40], None),
        diffuse(standard::PLAIN_WALL, "plain_wall", [0.68, 0.66, 0.62], None),
    ]
}
