use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dynamics::DynamicsScript;
use super::geometry::CuboidMark;
use super::material::standard_materials;
use super::occupancy::{OccupancyMap, Rect, WorldBounds};
use super::priors::{ClassPriors, ObjectClass};
use super::scene::{SceneGraph, SceneObject};
use crate::error::{Error, Result};
use crate::render::camera::CameraSpec;
use crate::render::light::LightSpec;
use crate::render::medium::MediumSpec;
use crate::rng;

/// Inclusive range for the total number of sampled objects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

/// Fixed axis-aligned road strip on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadStrip {
    pub x0: f64,
    pub z0: f64,
    pub x1: f64,
    pub z1: f64,
}

fn yes() -> bool {
    true
}

fn default_cell_size() -> f64 {
    OccupancyMap::DEFAULT_CELL_SIZE
}

fn default_attempts() -> usize {
    1000
}

fn default_camera_clearance() -> f64 {
    2.0
}

/// Scene sampling configuration (the JSON document read by `visval sample`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub world_bounds: WorldBounds,
    pub classes: ClassPriors,
    pub counts: CountRange,
    #[serde(default = "yes")]
    pub manhattan: bool,
    /// Default seed; the command-line `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    /// Adds a pavement plane spanning the bounds unless Ground is a sampled class.
    #[serde(default = "yes")]
    pub ground: bool,
    #[serde(default)]
    pub roads: Vec<RoadStrip>,
    #[serde(default = "default_cell_size")]
    pub cell_size: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    #[serde(default)]
    pub lights: Option<Vec<LightSpec>>,
    #[serde(default)]
    pub medium: Option<MediumSpec>,
    #[serde(default)]
    pub camera: Option<CameraSpec>,
    /// Half-width of the square kept free around the camera, in meters.
    #[serde(default = "default_camera_clearance")]
    pub camera_clearance: f64,
    #[serde(default)]
    pub dynamics: DynamicsScript,
}

impl SceneConfig {
    pub fn new(world_bounds: WorldBounds, classes: ClassPriors, counts: CountRange) -> Self {
        Self {
            world_bounds,
            classes,
            counts,
            manhattan: true,
            seed: 0,
            ground: true,
            roads: Vec::new(),
            cell_size: default_cell_size(),
            max_attempts: default_attempts(),
            lights: None,
            medium: None,
            camera: None,
            camera_clearance: default_camera_clearance(),
            dynamics: DynamicsScript::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: SceneConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.world_bounds.validate()?;
        self.classes.validate()?;
        if self.counts.min > self.counts.max {
            return Err(Error::InvalidConfig(format!(
                "count range {}..={} is empty",
                self.counts.min, self.counts.max
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be >= 1".into()));
        }
        if let Some(m) = &self.medium {
            m.validate()?;
        }
        if let Some(c) = &self.camera {
            c.validate()?;
        }
        for l in self.lights.iter().flatten() {
            l.validate()?;
        }
        Ok(())
    }

    /// Sun from the upper left behind the camera plus a blue sky.
    pub fn default_lights() -> Vec<LightSpec> {
        vec![
            LightSpec::sun([-0.45, -0.8, -0.4], [1.0, 0.97, 0.92], 3.0),
            LightSpec::ambient([0.55, 0.65, 0.85], 0.6),
        ]
    }

    /// Eye-level camera near the low-x edge looking along +x.
    pub fn default_camera(bounds: &WorldBounds) -> CameraSpec {
        let cz = 0.5 * (bounds.min[1] + bounds.max[1]);
        let x = bounds.min[0] + 0.1 * (bounds.max[0] - bounds.min[0]);
        CameraSpec {
            position: [x, 1.7, cz],
            look_at: [bounds.max[0], 1.7, cz],
            up: [0.0, 1.0, 0.0],
            vfov_deg: 60.0,
        }
    }
}

/// Slab of the given class spanning the bounds, with its top at y = 0.
fn support_mark(class: ObjectClass, bounds: &WorldBounds, thickness: f64) -> CuboidMark {
    let r = bounds.rect();
    CuboidMark {
        class,
        position: [0.5 * (r.x0 + r.x1), 0.5 * (r.z0 + r.z1)],
        elevation: -thickness,
        length: r.width(),
        breadth: r.depth(),
        height: thickness,
        yaw: 0.0,
    }
}

/// Draws a scene from the marked point process.
///
/// The object count is uniform on `counts`; each object's class comes from the
/// multinomial prior, its dimensions from the class Gaussians, then positions
/// are drawn uniformly over the bounds and rejected on occupancy collisions.
/// The result is a pure function of `(config, seed)`.
pub fn sample_scene(config: &SceneConfig, seed: u64) -> Result<SceneGraph> {
    config.validate()?;
    let bounds = &config.world_bounds;
    let world = bounds.rect();
    let mut occupancy = OccupancyMap::new(bounds, config.cell_size)?;
    let mut rng = rng::stream(seed, &[rng::label_key("scene")]);
    let camera = config.camera.clone().unwrap_or_else(|| SceneConfig::default_camera(bounds));

    let mut objects = Vec::new();
    let push = |objects: &mut Vec<SceneObject>, mark: CuboidMark, style: u32| {
        let id = objects.len() as u32;
        objects.push(SceneObject::from_mark(id, mark, style));
    };

    if config.ground && config.classes.get(ObjectClass::Ground).is_none() {
        push(&mut objects, support_mark(ObjectClass::Ground, bounds, 0.05), 0);
    }
    for road in &config.roads {
        let r = Rect::new(road.x0, road.z0, road.x1, road.z1);
        occupancy.mark(&r)?;
        let mark = CuboidMark {
            class: ObjectClass::Road,
            position: [0.5 * (r.x0 + r.x1), 0.5 * (r.z0 + r.z1)],
            elevation: 0.0,
            length: r.width(),
            breadth: r.depth(),
            height: 0.01,
            yaw: 0.0,
        };
        push(&mut objects, mark, 0);
    }
    let c = config.camera_clearance;
    if c > 0.0 {
        let keep = Rect::centered(camera.position[0], camera.position[2], 2.0 * c, 2.0 * c);
        let clipped = Rect::new(
            keep.x0.max(world.x0),
            keep.z0.max(world.z0),
            keep.x1.min(world.x1),
            keep.z1.min(world.z1),
        );
        if clipped.x0 < clipped.x1 && clipped.z0 < clipped.z1 {
            occupancy.mark(&clipped)?;
        }
    }

    let total = rng.random_range(config.counts.min..=config.counts.max);
    for index in 0..total {
        let prior = config.classes.sample_class(&mut rng);
        let class = prior.class;
        let style = rng.random_range(0..prior.shape_styles);
        if class.is_support() {
            push(&mut objects, support_mark(class, bounds, prior.height.sample(&mut rng)), style);
            continue;
        }
        let length = prior.length.sample(&mut rng);
        let breadth = prior.breadth.sample(&mut rng);
        let height = prior.height.sample(&mut rng);
        let yaw = if config.manhattan {
            0.0
        } else {
            rng.random_range(0.0..std::f64::consts::TAU)
        };
        let mut mark = CuboidMark {
            class,
            position: [0.0, 0.0],
            elevation: 0.0,
            length,
            breadth,
            height,
            yaw,
        };
        let half = {
            let f = mark.footprint();
            [f.width() / 2.0, f.depth() / 2.0]
        };
        if 2.0 * half[0] > world.width() || 2.0 * half[1] > world.depth() {
            return Err(Error::PlacementFailure {
                class: class.name().into(),
                index,
                attempts: 0,
            });
        }
        let mut placed = false;
        for _ in 0..config.max_attempts {
            let x = if half[0] * 2.0 == world.width() {
                world.x0 + half[0]
            } else {
                rng.random_range(world.x0 + half[0]..world.x1 - half[0])
            };
            let z = if half[1] * 2.0 == world.depth() {
                world.z0 + half[1]
            } else {
                rng.random_range(world.z0 + half[1]..world.z1 - half[1])
            };
            mark.position = [x, z];
            let fp = mark.footprint();
            if occupancy.check_placement(&fp)? {
                occupancy.mark(&fp)?;
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::PlacementFailure {
                class: class.name().into(),
                index,
                attempts: config.max_attempts,
            });
        }
        push(&mut objects, mark, style);
    }

    let scene = SceneGraph {
        seed,
        bounds: *bounds,
        objects,
        materials: standard_materials(),
        lights: config.lights.clone().unwrap_or_else(SceneConfig::default_lights),
        medium: config.medium.clone().unwrap_or_default(),
        camera,
        dynamics: config.dynamics.clone(),
    };
    scene.validate()?;
    Ok(scene)
}
