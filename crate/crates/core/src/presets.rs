//! Hand-placed scenes used by the protocols, tests and examples.

use crate::render::{CameraSpec, LightSpec, MediumSpec};
use crate::scenegen::{
    standard_materials, ClassPriors, CountRange, CuboidMark, DynamicsScript, Material, MaterialKind,
    ObjectClass, Primitive, RoadStrip, SceneConfig, SceneGraph, SceneObject, WorldBounds,
};

/// Material id used by [`frontal_plane`].
pub const TEST_PLANE: u32 = 15;

fn mark(class: ObjectClass, x: f64, z: f64, length: f64, breadth: f64, height: f64) -> CuboidMark {
    CuboidMark {
        class,
        position: [x, z],
        elevation: 0.0,
        length,
        breadth,
        height,
        yaw: 0.0,
    }
}

fn ground(bounds: &WorldBounds) -> CuboidMark {
    let r = bounds.rect();
    CuboidMark {
        class: ObjectClass::Ground,
        position: [0.5 * (r.x0 + r.x1), 0.5 * (r.z0 + r.z1)],
        elevation: -0.05,
        length: r.width(),
        breadth: r.depth(),
        height: 0.05,
        yaw: 0.0,
    }
}

fn assemble(marks: Vec<(CuboidMark, u32)>) -> Vec<SceneObject> {
    marks
        .into_iter()
        .enumerate()
        .map(|(i, (m, style))| SceneObject::from_mark(i as u32, m, style))
        .collect()
}

/// No objects, a unit-ish sky, clear air.
pub fn empty_scene() -> SceneGraph {
    SceneGraph {
        seed: 0,
        bounds: WorldBounds::new([-50.0, -50.0], [50.0, 50.0]),
        objects: Vec::new(),
        materials: standard_materials(),
        lights: vec![LightSpec::ambient([0.5, 0.6, 0.7], 1.0)],
        medium: MediumSpec::default(),
        camera: CameraSpec {
            position: [0.0, 1.0, 0.0],
            look_at: [0.0, 1.0, 1.0],
            up: [0.0, 1.0, 0.0],
            vfov_deg: 60.0,
        },
        dynamics: DynamicsScript::default(),
    }
}

/// Large uniform Lambertian plane at `z = distance`, facing a camera at the
/// origin, lit head-on by a unit white sun. No sky light.
pub fn frontal_plane(distance: f64, albedo: [f64; 3]) -> SceneGraph {
    let mut scene = empty_scene();
    scene.bounds = WorldBounds::new([-60.0, -1.0], [60.0, distance + 10.0]);
    scene.materials.push(Material {
        id: TEST_PLANE,
        name: "test_plane".into(),
        kind: MaterialKind::Diffuse,
        albedo,
        texture: None,
        specular_f0: 0.0,
        emission: [0.0; 3],
    });
    let m = CuboidMark {
        class: ObjectClass::Building,
        position: [0.0, distance + 0.05],
        elevation: -50.0,
        length: 100.0,
        breadth: 0.1,
        height: 100.0,
        yaw: 0.0,
    };
    let mut obj = SceneObject::from_mark(0, m, 4);
    obj.material = TEST_PLANE;
    for p in &mut obj.mesh.primitives {
        if let Primitive::Cuboid { material, regions, .. } = p {
            *material = TEST_PLANE;
            regions.clear();
        }
    }
    scene.objects.push(obj);
    scene.lights = vec![LightSpec::sun([0.0, 0.0, 1.0], [1.0; 3], 1.0)];
    scene.camera = CameraSpec {
        position: [0.0, 0.0, 0.0],
        look_at: [0.0, 0.0, 1.0],
        up: [0.0, 1.0, 0.0],
        vfov_deg: 40.0,
    };
    scene
}

/// Sun from behind-left of the camera and a blue sky.
pub fn street_lights() -> Vec<LightSpec> {
    vec![
        LightSpec::sun([0.35, -0.65, 0.55], [1.0, 0.97, 0.92], 3.0),
        LightSpec::ambient([0.55, 0.65, 0.85], 0.6),
    ]
}

/// Street canyon along +x: two rows of buildings, a road, trees, parked
/// vehicles and a pedestrian. The camera stands on the road looking down the
/// street; the sun lights the right-hand facades and casts the left row's
/// shadows across the road.
pub fn street_scene() -> SceneGraph {
    let bounds = WorldBounds::new([-10.0, -20.0], [80.0, 20.0]);
    let mut marks = vec![
        (ground(&bounds), 0),
        (
            CuboidMark {
                class: ObjectClass::Road,
                position: [35.0, 0.0],
                elevation: 0.0,
                length: 90.0,
                breadth: 7.0,
                height: 0.01,
                yaw: 0.0,
            },
            0,
        ),
    ];
    // (x center, length, height, style) per side
    let left = [(8.0, 12.0, 14.0, 0u32), (23.0, 14.0, 22.0, 5), (39.0, 12.0, 17.0, 2), (55.0, 14.0, 25.0, 4)];
    let right = [(9.0, 13.0, 18.0, 1u32), (25.0, 12.0, 12.0, 6), (40.0, 14.0, 24.0, 3), (57.0, 12.0, 16.0, 0)];
    for (x, l, h, style) in left {
        marks.push((mark(ObjectClass::Building, x, -12.0, l, 10.0, h), style));
    }
    for (x, l, h, style) in right {
        marks.push((mark(ObjectClass::Building, x, 12.0, l, 10.0, h), style));
    }
    marks.push((mark(ObjectClass::Tree, 16.0, 5.0, 2.6, 2.6, 6.0), 0));
    marks.push((mark(ObjectClass::Tree, 31.0, -5.0, 2.8, 2.8, 6.5), 1));
    marks.push((mark(ObjectClass::Vehicle, 14.0, -1.8, 4.5, 1.9, 1.5), 1));
    marks.push((mark(ObjectClass::Vehicle, 27.0, 1.9, 4.4, 1.8, 1.6), 3));
    marks.push((mark(ObjectClass::Pedestrian, 11.0, 4.6, 0.5, 0.4, 1.75), 0));
    SceneGraph {
        seed: 0,
        bounds,
        objects: assemble(marks),
        materials: standard_materials(),
        lights: street_lights(),
        medium: MediumSpec::default(),
        camera: CameraSpec {
            position: [0.0, 1.7, 0.0],
            look_at: [40.0, 3.5, 0.0],
            up: [0.0, 1.0, 0.0],
            vfov_deg: 60.0,
        },
        dynamics: DynamicsScript::default(),
    }
}

/// Index of the moving box in [`two_box_scene`].
pub const MOVING_BOX: u32 = 2;

/// A wide static wall with a smaller box sliding sideways in front of it.
/// The script moves the box 0.25 m per frame along +z for 8 frames.
pub fn two_box_scene() -> SceneGraph {
    let bounds = WorldBounds::new([-5.0, -15.0], [30.0, 15.0]);
    let marks = vec![
        (ground(&bounds), 0),
        (mark(ObjectClass::Building, 20.0, 0.0, 2.0, 16.0, 7.0), 7),
        (mark(ObjectClass::Vehicle, 11.0, -1.5, 2.0, 3.0, 2.5), 1),
    ];
    SceneGraph {
        seed: 0,
        bounds,
        objects: assemble(marks),
        materials: standard_materials(),
        lights: street_lights(),
        medium: MediumSpec::default(),
        camera: CameraSpec {
            position: [0.0, 1.5, 0.0],
            look_at: [20.0, 1.8, 0.0],
            up: [0.0, 1.0, 0.0],
            vfov_deg: 55.0,
        },
        dynamics: DynamicsScript::translation(MOVING_BOX, [0.0, 0.0, 0.25], 8),
    }
}

/// Sampling configuration for a generic block of city: buildings, trees,
/// vehicles and pedestrians around a central road.
pub fn city_config() -> SceneConfig {
    let mut priors = ClassPriors::uniform(&[
        ObjectClass::Building,
        ObjectClass::Tree,
        ObjectClass::Vehicle,
        ObjectClass::Pedestrian,
    ]);
    for (p, w) in priors.classes.iter_mut().zip([0.4, 0.2, 0.25, 0.15]) {
        p.probability = w;
    }
    let mut cfg = SceneConfig::new(
        WorldBounds::new([0.0, 0.0], [100.0, 100.0]),
        priors,
        CountRange { min: 15, max: 25 },
    );
    cfg.roads.push(RoadStrip {
        x0: 0.0,
        z0: 46.0,
        x1: 100.0,
        z1: 54.0,
    });
    cfg.camera = Some(CameraSpec {
        position: [5.0, 1.7, 50.0],
        look_at: [60.0, 4.0, 50.0],
        up: [0.0, 1.0, 0.0],
        vfov_deg: 60.0,
    });
    cfg
}
