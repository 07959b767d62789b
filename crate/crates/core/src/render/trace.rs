//! Monte Carlo radiance estimator.
//!
//! Per camera sample: next-event estimation toward every sun and spot light
//! with a shadow ray, cosine-weighted sky visibility rays for the ambient
//! term, cosine-weighted bounce rays that gather light reflected by other
//! surfaces while bounces remain, and a deterministic mirror ray on specular
//! surfaces. The camera vertex splits into `vertex_samples` sky and bounce
//! rays; deeper vertices use one of each. The medium acts on
//! the camera segment only: `T(d) * L + airlight(d)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::camera::{v3, Camera, Ray, Vec3};
use super::geom::{Hit, SceneView, RAY_EPSILON};
use super::image::RadianceImage;
use super::light::{LightKind, LightSpec};
use super::medium::{airlight, transmittance};
use super::RenderConfig;
use crate::rng;
use crate::scenegen::{MaterialKind, SceneGraph};

/// Longest chain of consecutive mirror reflections followed.
const MAX_MIRROR_DEPTH: usize = 3;

fn add(a: &mut [f64; 3], b: [f64; 3], w: f64) {
    for c in 0..3 {
        a[c] += b[c] * w;
    }
}

/// Unoccluded irradiance from one direct light and the direction/distance
/// to it; `None` for ambient lights, back-facing surfaces and points outside
/// a spot cone.
pub(crate) fn light_contribution(light: &LightSpec, p: &Vec3, n: &Vec3) -> Option<([f64; 3], Vec3, f64)> {
    let radiance = light.radiance();
    match &light.kind {
        LightKind::Ambient => None,
        LightKind::Directional { direction } => {
            let l = -v3(*direction);
            let cos = n.dot(&l);
            if cos <= 0.0 {
                return None;
            }
            Some(([radiance[0] * cos, radiance[1] * cos, radiance[2] * cos], l, f64::INFINITY))
        }
        LightKind::Spot {
            position,
            direction,
            cone_angle_deg,
        } => {
            let to = v3(*position) - p;
            let r2 = to.norm_squared();
            let r = r2.sqrt();
            let l = to / r;
            let cos = n.dot(&l);
            if cos <= 0.0 || r == 0.0 {
                return None;
            }
            if (-l).dot(&v3(*direction)) < cone_angle_deg.to_radians().cos() {
                return None;
            }
            let k = cos / r2;
            Some(([radiance[0] * k, radiance[1] * k, radiance[2] * k], l, r))
        }
    }
}

/// Visibility of a light from `p`, as tested by a shadow ray.
pub(crate) fn visible(view: &SceneView, p: &Vec3, n: &Vec3, l: &Vec3, dist: f64) -> bool {
    let origin = p + n * RAY_EPSILON;
    let ray = Ray { origin, dir: *l };
    !view.occluded(&ray, dist - 2.0 * RAY_EPSILON)
}

/// Total ambient sky radiance.
pub(crate) fn sky_radiance(lights: &[LightSpec]) -> [f64; 3] {
    let mut a = [0.0; 3];
    for l in lights.iter().filter(|l| matches!(l.kind, LightKind::Ambient)) {
        add(&mut a, l.radiance(), 1.0);
    }
    a
}

fn onb(n: &Vec3) -> (Vec3, Vec3) {
    let t = if n.x.abs() > 0.9 { Vec3::y() } else { Vec3::x() };
    let u = n.cross(&t).normalize();
    let v = n.cross(&u);
    (u, v)
}

fn cosine_dir(n: &Vec3, s: [f64; 2]) -> Vec3 {
    let r = s[0].sqrt();
    let phi = 2.0 * PI * s[1];
    let (u, v) = onb(n);
    (u * (r * phi.cos()) + v * (r * phi.sin()) + n * (1.0 - s[0]).max(0.0).sqrt()).normalize()
}

fn schlick_fresnel(f0: f64, cos: f64) -> f64 {
    f0 + (1.0 - f0) * (1.0 - cos.clamp(0.0, 1.0)).powi(5)
}

/// Owen-scrambled Sobol samples for one pixel. Every 2-D dimension pair is
/// an independently seeded (0, 2)-sequence, so pairs are uncorrelated while
/// each stays well stratified. Pair 0 jitters the pixel; at path depth `k`,
/// pair `1 + 2k` drives the bounce rays and pair `2 + 2k` the sky rays.
/// Rays split at the camera vertex index one sequence over the whole pixel.
struct PixelSamples {
    seed: u64,
    keys: Vec<u32>,
    sample: u32,
}

impl PixelSamples {
    fn new(seed: u64, depths: usize) -> Self {
        let keys = (0..1 + 2 * depths).map(|d| rng::derive(seed, &[d as u64]) as u32).collect();
        Self { seed, keys, sample: 0 }
    }

    fn pair(&self, d: usize, index: u32) -> [f64; 2] {
        let key = match self.keys.get(d) {
            Some(&k) => k,
            None => rng::derive(self.seed, &[d as u64]) as u32,
        };
        [sobol_burley::sample(index, 0, key) as f64, sobol_burley::sample(index, 1, key) as f64]
    }

    fn jitter(&self) -> [f64; 2] {
        self.pair(0, self.sample)
    }

    fn bounce(&self, depth: usize, index: u32) -> [f64; 2] {
        self.pair(1 + 2 * depth, index)
    }

    fn sky(&self, depth: usize, index: u32) -> [f64; 2] {
        self.pair(2 + 2 * depth, index)
    }
}

/// Spread of a ray bundle for texture filtering: footprint width grows by
/// `cone` per meter travelled, starting from `travelled` meters.
#[derive(Debug, Clone, Copy)]
struct Footprint {
    cone: f64,
    travelled: f64,
}

impl Footprint {
    /// Width across the footprint at `hit`, widened at grazing incidence.
    fn width(&self, hit: &Hit, dir: &Vec3) -> f64 {
        let cos = hit.normal.dot(dir).abs().max(MIN_FOOTPRINT_COS);
        (self.travelled + hit.t) * self.cone / cos
    }
}

/// Steepest incidence the texture filter widens for.
pub(crate) const MIN_FOOTPRINT_COS: f64 = 0.05;

struct Tracer<'a> {
    view: SceneView<'a>,
    sky: [f64; 3],
    split: u32,
    max_bounces: usize,
    pixel: Footprint,
}

impl Tracer<'_> {
    /// Radiance leaving `hit` toward `-dir`. `path` indexes the sample
    /// sequences at this depth.
    #[allow(clippy::too_many_arguments)]
    fn shade(
        &self,
        hit: &Hit,
        dir: &Vec3,
        depth: usize,
        path: u32,
        mirror: usize,
        footprint: Footprint,
        samples: &PixelSamples,
    ) -> [f64; 3] {
        let scene = self.view.scene;
        let Some(mat) = scene.material(hit.material) else {
            return [0.0; 3];
        };
        let n = if hit.normal.dot(dir) > 0.0 { -hit.normal } else { hit.normal };
        let albedo = mat.albedo_filtered([hit.local.x, hit.local.y, hit.local.z], footprint.width(hit, dir));
        let mut out = mat.emission;
        let fresnel = match mat.kind {
            MaterialKind::Specular => schlick_fresnel(mat.specular_f0, -n.dot(dir)),
            _ => 0.0,
        };
        let diffuse = [albedo[0] * (1.0 - fresnel), albedo[1] * (1.0 - fresnel), albedo[2] * (1.0 - fresnel)];
        let origin = hit.point + n * RAY_EPSILON;

        let mut irradiance = [0.0; 3];
        for light in &scene.lights {
            if let Some((e, l, dist)) = light_contribution(light, &hit.point, &n) {
                if visible(&self.view, &hit.point, &n, &l, dist) {
                    add(&mut irradiance, e, 1.0);
                }
            }
        }
        for c in 0..3 {
            out[c] += diffuse[c] * irradiance[c] / PI;
        }

        let rays = if depth == 0 { self.split } else { 1 };
        // sky: fraction of cosine-weighted rays that escape
        if self.sky != [0.0; 3] {
            let open = (0..rays)
                .filter(|&j| {
                    let ray = Ray {
                        origin,
                        dir: cosine_dir(&n, samples.sky(depth, path * rays + j)),
                    };
                    !self.view.occluded(&ray, f64::INFINITY)
                })
                .count();
            let v = open as f64 / rays as f64;
            for c in 0..3 {
                out[c] += diffuse[c] * self.sky[c] * v;
            }
        }

        // indirect: light reflected by other surfaces
        if depth < self.max_bounces {
            let mut li = [0.0; 3];
            for j in 0..rays {
                let next = path * rays + j;
                let ray = Ray {
                    origin,
                    dir: cosine_dir(&n, samples.bounce(depth, next)),
                };
                if let Some(h) = self.view.intersect(&ray, 0.0, f64::INFINITY) {
                    // diffuse reflection blurs texture completely
                    let blurred = Footprint {
                        cone: f64::INFINITY,
                        travelled: 0.0,
                    };
                    add(&mut li, self.shade(&h, &ray.dir, depth + 1, next, 0, blurred, samples), 1.0 / rays as f64);
                }
            }
            for c in 0..3 {
                out[c] += diffuse[c] * li[c];
            }
        }

        if fresnel > 0.0 && mirror < MAX_MIRROR_DEPTH {
            let r = dir - n * (2.0 * dir.dot(&n));
            let ray = Ray {
                origin,
                dir: r.normalize(),
            };
            let li = match self.view.intersect(&ray, 0.0, f64::INFINITY) {
                None => self.sky,
                Some(h) => {
                    let onward = Footprint {
                        travelled: footprint.travelled + hit.t,
                        ..footprint
                    };
                    self.shade(&h, &ray.dir, depth, path, mirror + 1, onward, samples)
                }
            };
            add(&mut out, li, fresnel);
        }
        out
    }

    /// Observed radiance along a camera ray, medium included.
    fn camera_sample(&self, ray: &Ray, samples: &PixelSamples) -> [f64; 3] {
        let scene = self.view.scene;
        let (surface, depth) = match self.view.intersect(ray, 0.0, f64::INFINITY) {
            Some(h) => (self.shade(&h, &ray.dir, 0, samples.sample, 0, self.pixel, samples), h.t),
            None => (self.sky, f64::INFINITY),
        };
        if scene.medium.is_clear() {
            return surface;
        }
        let t = transmittance(&scene.medium, depth);
        let a = airlight(&scene.medium, [ray.dir.x, ray.dir.y, ray.dir.z], &scene.lights, depth);
        [t[0] * surface[0] + a[0], t[1] * surface[1] + a[1], t[2] * surface[2] + a[2]]
    }
}

/// HDR render of `scene`. Each pixel draws its samples from sequences keyed
/// on `(cfg.rng_seed, pixel index)`, so the output is independent of thread
/// count and scheduling.
pub fn render_frame(scene: &SceneGraph, cfg: &RenderConfig) -> RadianceImage {
    let camera = Camera::new(&scene.camera, cfg.width, cfg.height);
    let tracer = Tracer {
        view: SceneView::new(scene),
        sky: sky_radiance(&scene.lights),
        split: cfg.vertex_samples.max(1) as u32,
        max_bounces: cfg.max_bounces,
        pixel: Footprint {
            cone: 1.0 / camera.focal,
            travelled: 0.0,
        },
    };
    let n = cfg.samples_per_pixel.max(1);
    let mut data = vec![[0.0f64; 3]; cfg.width * cfg.height];
    data.par_chunks_mut(cfg.width.max(1)).enumerate().for_each(|(y, row)| {
        for (x, px) in row.iter_mut().enumerate() {
            let index = (y * cfg.width + x) as u64;
            let mut samples = PixelSamples::new(rng::derive(cfg.rng_seed, &[index]), cfg.max_bounces + 1);
            let mut acc = [0.0; 3];
            for s in 0..n {
                samples.sample = s as u32;
                let j = samples.jitter();
                let ray = camera.ray(x as f64 + j[0], y as f64 + j[1]);
                add(&mut acc, tracer.camera_sample(&ray, &samples), 1.0);
            }
            *px = [acc[0] / n as f64, acc[1] / n as f64, acc[2] / n as f64];
        }
    });
    RadianceImage::from_vec(cfg.width, cfg.height, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{empty_scene, frontal_plane, street_scene};

    #[test]
    fn empty_scene_shows_the_sky() {
        let scene = empty_scene();
        let img = render_frame(&scene, &RenderConfig::new(8, 6, 4));
        let sky = sky_radiance(&scene.lights);
        assert!(img.data.iter().all(|p| *p == sky));
    }

    #[test]
    fn lambertian_plane_matches_closed_form() {
        let albedo = [0.2, 0.5, 0.8];
        let img = render_frame(&frontal_plane(10.0, albedo), &RenderConfig::new(16, 12, 8));
        for p in &img.data {
            for c in 0..3 {
                assert!((p[c] - albedo[c] / PI).abs() < 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn open_sky_irradiance_is_exact() {
        // nothing in front of the plane: every sky ray escapes
        let mut scene = frontal_plane(10.0, [0.5; 3]);
        scene.lights = vec![LightSpec::ambient([1.0, 0.8, 0.6], 0.5)];
        let img = render_frame(&scene, &RenderConfig::new(8, 6, 4));
        for p in &img.data {
            assert_eq!(*p, [0.25, 0.2, 0.15]);
        }
    }

    #[test]
    fn doubling_every_light_doubles_every_pixel() {
        let scene = street_scene();
        let mut brighter = scene.clone();
        for l in &mut brighter.lights {
            l.scale *= 2.0;
        }
        let cfg = RenderConfig::new(24, 18, 4);
        let (a, b) = (render_frame(&scene, &cfg), render_frame(&brighter, &cfg));
        for (p, q) in a.data.iter().zip(&b.data) {
            assert_eq!([2.0 * p[0], 2.0 * p[1], 2.0 * p[2]], *q);
        }
    }

    #[test]
    fn output_ignores_thread_count() {
        let scene = street_scene();
        let mut cfg = RenderConfig::new(24, 18, 4);
        cfg.rng_seed = 11;
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = single.install(|| render_frame(&scene, &cfg));
        let b = render_frame(&scene, &cfg);
        assert_eq!(a, b);
        cfg.rng_seed = 12;
        assert_ne!(render_frame(&scene, &cfg), b);
    }

    #[test]
    fn sample_pairs_are_stratified() {
        let mut s = PixelSamples::new(5, 2);
        for d in 0..5 {
            let mut cols = [0usize; 16];
            let mut rows = [0usize; 16];
            for i in 0..16 {
                s.sample = i;
                let p = s.pair(d, i);
                assert!((0.0..1.0).contains(&p[0]) && (0.0..1.0).contains(&p[1]));
                cols[(p[0] * 16.0) as usize] += 1;
                rows[(p[1] * 16.0) as usize] += 1;
            }
            assert!(cols.iter().chain(&rows).all(|&c| c == 1), "pair {d}");
        }
        assert_ne!(s.pair(1, 3), s.pair(2, 3));
    }
}
