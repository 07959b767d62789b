use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

pub fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub position: [f64; 3],
    pub look_at: [f64; 3],
    #[serde(default = "CameraSpec::default_up")]
    pub up: [f64; 3],
    /// Vertical field of view in degrees.
    pub vfov_deg: f64,
}

impl CameraSpec {
    fn default_up() -> [f64; 3] {
        [0.0, 1.0, 0.0]
    }

    pub fn validate(&self) -> Result<()> {
        let fwd = v3(self.look_at) - v3(self.position);
        if fwd.norm() == 0.0 || fwd.cross(&v3(self.up)).norm() < 1e-9 {
            return Err(Error::InvalidConfig("camera forward is zero or parallel to up".into()));
        }
        if !(self.vfov_deg > 0.0 && self.vfov_deg < 180.0) {
            return Err(Error::InvalidConfig(format!("vfov {} outside (0, 180)", self.vfov_deg)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

/// Pinhole camera. Pixel `(i, j)` spans `[i, i+1) x [j, j+1)` with `j`
/// growing downward; the principal point is the image center.
#[derive(Debug, Clone)]
pub struct Camera {
    pub origin: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    /// Focal length in pixels.
    pub focal: f64,
    pub width: usize,
    pub height: usize,
}

impl Camera {
    pub fn new(spec: &CameraSpec, width: usize, height: usize) -> Self {
        let origin = v3(spec.position);
        let forward = (v3(spec.look_at) - origin).normalize();
        let right = forward.cross(&v3(spec.up)).normalize();
        let up = right.cross(&forward);
        let focal = (height as f64 / 2.0) / (spec.vfov_deg.to_radians() / 2.0).tan();
        Self {
            origin,
            forward,
            right,
            up,
            focal,
            width,
            height,
        }
    }

    /// Ray through continuous pixel coordinates.
    pub fn ray(&self, px: f64, py: f64) -> Ray {
        let x = (px - self.width as f64 / 2.0) / self.focal;
        let y = (py - self.height as f64 / 2.0) / self.focal;
        Ray {
            origin: self.origin,
            dir: (self.forward + self.right * x - self.up * y).normalize(),
        }
    }

    /// Continuous pixel coordinates of a world point, `None` behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<[f64; 2]> {
        self.project_dir(&(p - self.origin))
    }

    /// Projection of a direction (a point at infinity).
    pub fn project_dir(&self, d: &Vec3) -> Option<[f64; 2]> {
        let z = d.dot(&self.forward);
        if z <= 1e-12 {
            return None;
        }
        Some([
            self.width as f64 / 2.0 + self.focal * d.dot(&self.right) / z,
            self.height as f64 / 2.0 - self.focal * d.dot(&self.up) / z,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_inverts_rays() {
        let cam = Camera::new(
            &CameraSpec {
                position: [1.0, 2.0, 3.0],
                look_at: [0.0, 1.0, -5.0],
                up: [0.0, 1.0, 0.0],
                vfov_deg: 50.0,
            },
            64,
            48,
        );
        for (px, py) in [(0.5, 0.5), (32.0, 24.0), (63.2, 10.7)] {
            let r = cam.ray(px, py);
            let p = cam.project(&r.at(17.0)).unwrap();
            assert!((p[0] - px).abs() < 1e-9 && (p[1] - py).abs() < 1e-9);
        }
    }
}
