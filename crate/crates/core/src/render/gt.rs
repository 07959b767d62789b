//! Ground-truth buffers from deterministic pixel-center rays.

use rayon::prelude::*;

use super::camera::{Camera, Ray, Vec3};
use super::geom::SceneView;
use super::image::{FlowField, Grid};
use super::trace::{light_contribution, visible, MIN_FOOTPRINT_COS};
use super::RenderConfig;
use crate::error::{Error, Result};
use crate::scenegen::{MaterialId, MaterialKind, ObjectId, SceneGraph};

/// Object/material id stored for sky pixels.
pub const SKY_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtPixel {
    /// Euclidean distance from the camera center; `INFINITY` on sky.
    pub depth: f64,
    pub object_id: ObjectId,
    pub material_id: MaterialId,
    /// Outward unit normal; zero on sky.
    pub normal: [f64; 3],
    /// Power-weighted fraction of direct lights that do not reach the point.
    pub shadow_fraction: f64,
    pub reflectance: [f64; 3],
    /// World-space hit point; infinite on sky.
    pub point: [f64; 3],
}

impl GtPixel {
    pub const SKY: GtPixel = GtPixel {
        depth: f64::INFINITY,
        object_id: SKY_ID,
        material_id: SKY_ID,
        normal: [0.0; 3],
        shadow_fraction: 0.0,
        reflectance: [0.0; 3],
        point: [f64::INFINITY; 3],
    };

    pub fn is_sky(&self) -> bool {
        self.object_id == SKY_ID
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthBuffers {
    pub pixels: Grid<GtPixel>,
    /// Material class per pixel, `None` on sky.
    pub material_kind: Grid<Option<MaterialKind>>,
    /// Flow to the next frame when computed for a frame pair.
    pub flow: Option<FlowField>,
    /// Pixels whose flow target shows a different object in the next frame.
    pub occlusion: Option<Grid<bool>>,
}

impl GroundTruthBuffers {
    pub fn width(&self) -> usize {
        self.pixels.width
    }

    pub fn height(&self) -> usize {
        self.pixels.height
    }

    pub fn depth(&self) -> Grid<f64> {
        self.pixels.map(|p| p.depth)
    }

    pub fn object_ids(&self) -> Grid<u32> {
        self.pixels.map(|p| p.object_id)
    }
}

fn shadow_fraction(view: &SceneView, p: &Vec3, n: &Vec3) -> f64 {
    let mut total = 0.0;
    let mut blocked = 0.0;
    for light in view.scene.lights.iter().filter(|l| l.is_direct()) {
        let r = light.radiance();
        let power = r[0] + r[1] + r[2];
        total += power;
        match light_contribution(light, p, n) {
            Some((_, l, dist)) if visible(view, p, n, &l, dist) => {}
            _ => blocked += power,
        }
    }
    if total > 0.0 {
        blocked / total
    } else {
        0.0
    }
}

/// Ground truth along `ray`; `cone` is the pixel's footprint growth per
/// meter, so reflectance is filtered the way the renderer filters it.
fn gt_pixel(view: &SceneView, ray: &Ray, cone: f64) -> GtPixel {
    let Some(hit) = view.intersect(ray, 0.0, f64::INFINITY) else {
        return GtPixel::SKY;
    };
    let scene = view.scene;
    let reflectance = scene
        .material(hit.material)
        .map(|m| m.albedo_filtered([hit.local.x, hit.local.y, hit.local.z], hit.t * cone / hit.normal.dot(&ray.dir).abs().max(MIN_FOOTPRINT_COS)))
        .unwrap_or([0.0; 3]);
    let n = if hit.normal.dot(&ray.dir) > 0.0 { -hit.normal } else { hit.normal };
    GtPixel {
        depth: hit.t,
        object_id: hit.object_id,
        material_id: hit.material,
        normal: [hit.normal.x, hit.normal.y, hit.normal.z],
        shadow_fraction: shadow_fraction(view, &hit.point, &n),
        reflectance,
        point: [hit.point.x, hit.point.y, hit.point.z],
    }
}

/// Depth, ids, normals, shadow fraction and reflectance from one center ray
/// per pixel. Independent of `samples_per_pixel` and `rng_seed`.
pub fn render_ground_truth(scene: &SceneGraph, cfg: &RenderConfig) -> GroundTruthBuffers {
    let camera = Camera::new(&scene.camera, cfg.width, cfg.height);
    let view = SceneView::new(scene);
    let data: Vec<GtPixel> = (0..cfg.width * cfg.height)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % cfg.width, i / cfg.width);
            gt_pixel(&view, &camera.ray(x as f64 + 0.5, y as f64 + 0.5), 1.0 / camera.focal)
        })
        .collect();
    let pixels = Grid::from_vec(cfg.width, cfg.height, data);
    let material_kind = pixels.map(|p| if p.is_sky() { None } else { scene.material(p.material_id).map(|m| m.kind) });
    GroundTruthBuffers {
        pixels,
        material_kind,
        flow: None,
        occlusion: None,
    }
}

/// Ground-truth forward flow from `scene_t` to `scene_t1`.
///
/// Each hit point moves with its object's rigid translation and is projected
/// with the camera of `t + 1`; sky pixels move as points at infinity. A pixel
/// is occluded when its target leaves the image or shows another object id.
/// Returns the buffers of frame `t` with `flow` and `occlusion` filled in.
pub fn compute_flow(scene_t: &SceneGraph, scene_t1: &SceneGraph, cfg: &RenderConfig) -> Result<GroundTruthBuffers> {
    if scene_t.object_ids() != scene_t1.object_ids() {
        return Err(Error::IdentityMismatch);
    }
    let mut gt = render_ground_truth(scene_t, cfg);
    let next = render_ground_truth(scene_t1, cfg);
    let cam_t = Camera::new(&scene_t.camera, cfg.width, cfg.height);
    let cam_t1 = Camera::new(&scene_t1.camera, cfg.width, cfg.height);
    let view_t = SceneView::new(scene_t);
    let view_t1 = SceneView::new(scene_t1);
    let (w, h) = (cfg.width, cfg.height);
    let mut flow = Grid::filled(w, h, [0.0; 2]);
    let mut occl = Grid::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let p = *gt.pixels.get(x, y);
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            let target = if p.is_sky() {
                cam_t1.project_dir(&cam_t.ray(cx, cy).dir)
            } else {
                let i = scene_t.object_index(p.object_id).expect("gt ids come from the scene");
                let j = scene_t1.object_index(p.object_id).expect("identity sets match");
                let moved = Vec3::new(p.point[0], p.point[1], p.point[2]) + view_t1.offset(j) - view_t.offset(i);
                cam_t1.project(&moved)
            };
            match target {
                Some([tx, ty]) => {
                    *flow.get_mut(x, y) = [tx - cx, ty - cy];
                    let inside = tx >= 0.0 && ty >= 0.0 && tx < w as f64 && ty < h as f64;
                    *occl.get_mut(x, y) =
                        !inside || next.pixels.get(tx.floor() as usize, ty.floor() as usize).object_id != p.object_id;
                }
                None => *occl.get_mut(x, y) = true,
            }
        }
    }
    gt.flow = Some(flow);
    gt.occlusion = Some(occl);
    Ok(gt)
}
