use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dynamics::DynamicsScript;
use super::geometry::{instantiate_geometry, CuboidMark, ParametricMesh, Primitive};
use super::material::{Material, MaterialId};
use super::occupancy::WorldBounds;
use crate::error::{Error, Result};
use crate::render::camera::CameraSpec;
use crate::render::light::LightSpec;
use crate::render::medium::MediumSpec;

pub type ObjectId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub mark: CuboidMark,
    pub style: u32,
    pub mesh: ParametricMesh,
    /// Dominant material of the mesh.
    pub material: MaterialId,
    /// Moving objects (vehicles, pedestrians) are dropped from reference frames.
    #[serde(default)]
    pub dynamic: bool,
    /// Rigid translation applied by dynamics scripts.
    #[serde(default)]
    pub offset: [f64; 3],
}

impl SceneObject {
    pub fn from_mark(id: ObjectId, mark: CuboidMark, style: u32) -> Self {
        let (mesh, material) = instantiate_geometry(&mark, style);
        Self {
            id,
            mark,
            style,
            mesh,
            material,
            dynamic: mark.class.is_dynamic(),
            offset: [0.0; 3],
        }
    }
}

/// One sampled world state: geometry, photometry, camera and scripted dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub seed: u64,
    pub bounds: WorldBounds,
    pub objects: Vec<SceneObject>,
    pub materials: Vec<Material>,
    pub lights: Vec<LightSpec>,
    #[serde(default)]
    pub medium: MediumSpec,
    pub camera: CameraSpec,
    #[serde(default)]
    pub dynamics: DynamicsScript,
}

impl SceneGraph {
    pub fn material(&self, id: MaterialId) -> Option<&Material> {
        self.materials.get(id as usize).filter(|m| m.id == id).or_else(|| self.materials.iter().find(|m| m.id == id))
    }

    pub fn object_index(&self, id: ObjectId) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn object_ids(&self) -> BTreeSet<ObjectId> {
        self.objects.iter().map(|o| o.id).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        self.camera.validate()?;
        self.medium.validate()?;
        for l in &self.lights {
            l.validate()?;
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                return Err(Error::InvalidConfig(format!("duplicate object id {}", o.id)));
            }
            if !o.mark.is_valid() {
                return Err(Error::InvalidConfig(format!("object {} has a degenerate mark", o.id)));
            }
            let mut used = vec![o.material];
            for p in &o.mesh.primitives {
                match p {
                    Primitive::Cuboid { material, regions, .. } => {
                        used.push(*material);
                        used.extend(regions.iter().map(|r| r.material));
                    }
                    Primitive::Cylinder { material, .. } | Primitive::Sphere { material, .. } => used.push(*material),
                }
            }
            if let Some(m) = used.iter().find(|&&m| self.material(m).is_none()) {
                return Err(Error::InvalidConfig(format!("object {} references unknown material {m}", o.id)));
            }
        }
        self.dynamics.validate(self)
    }

    /// Copy of the scene without dynamic objects.
    pub fn without_dynamic_objects(&self) -> SceneGraph {
        let mut s = self.clone();
        s.objects.retain(|o| !o.dynamic);
        s
    }

    /// Copy keeping only the ambient lights.
    pub fn ambient_only(&self) -> SceneGraph {
        let mut s = self.clone();
        s.lights.retain(|l| !l.is_direct());
        s
    }

    /// Deterministic, diffable JSON export. Field order follows the type
    /// definitions, so equal scenes serialize to equal bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene graphs always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scene: SceneGraph = serde_json::from_str(s)?;
        scene.validate()?;
        Ok(scene)
    }
}
