//! Seeded Monte Carlo ray tracer with exact ground truth.

pub mod camera;
pub mod geom;
pub mod gt;
pub mod image;
pub mod light;
pub mod medium;
pub mod sensor;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use camera::{Camera, CameraSpec, Ray, Vec3};
pub use gt::{compute_flow, render_ground_truth, GroundTruthBuffers, GtPixel, SKY_ID};
pub use image::{luma, to_gray, FlowField, GrayImage, Grid, LdrImage, RadianceImage, LUMA};
pub use light::{LightKind, LightSpec};
pub use medium::{airlight, schlick_phase, transmittance, MediumSpec, WeatherTag};
pub use sensor::{apply_sensor, sensor_response, SensorConfig};
pub use trace::render_frame;

/// Longest per-pixel sample sequence the sampler supports.
pub const MAX_SAMPLES: usize = 1 << 16;

fn default_spp() -> usize {
    200
}

fn default_bounces() -> usize {
    1
}

fn default_vertex_samples() -> usize {
    16
}

/// Rendering fidelity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    #[serde(default = "default_spp")]
    pub samples_per_pixel: usize,
    #[serde(default = "default_bounces")]
    pub max_bounces: usize,
    /// Sky and bounce rays at each camera-visible surface point, per camera
    /// sample; deeper vertices use one of each.
    #[serde(default = "default_vertex_samples")]
    pub vertex_samples: usize,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

impl RenderConfig {
    pub fn new(width: usize, height: usize, samples_per_pixel: usize) -> Self {
        Self {
            samples_per_pixel,
            max_bounces: default_bounces(),
            vertex_samples: default_vertex_samples(),
            width,
            height,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_pixel == 0 {
            return Err(Error::InvalidConfig("samples_per_pixel must be >= 1".into()));
        }
        if self.vertex_samples == 0 {
            return Err(Error::InvalidConfig("vertex_samples must be >= 1".into()));
        }
        if self.samples_per_pixel * self.vertex_samples > MAX_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "samples_per_pixel * vertex_samples must be <= {MAX_SAMPLES}"
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig(format!("resolution {}x{} is empty", self.width, self.height)));
        }
        Ok(())
    }
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self::new(320, 240, default_spp())
    }
}
