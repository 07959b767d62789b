//! Stochastic Manhattan-world scene generation.

pub mod dynamics;
pub mod geometry;
pub mod material;
pub mod occupancy;
pub mod priors;
pub mod sample;
pub mod scene;

pub use dynamics::{apply_dynamics, DynamicsScript, Keyframe, ParamValue};
pub use geometry::{instantiate_geometry, CuboidMark, Face, FaceRegion, ParametricMesh, Primitive};
pub use material::{standard, standard_materials, Material, MaterialId, MaterialKind, Texture};
pub use occupancy::{OccupancyMap, Rect, WorldBounds};
pub use priors::{ClassPrior, ClassPriors, Gaussian, ObjectClass};
pub use sample::{sample_scene, CountRange, RoadStrip, SceneConfig};
pub use scene::{ObjectId, SceneGraph, SceneObject};
