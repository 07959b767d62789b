//! Scripted temporal variation of scene parameters.
//!
//! A script is a list of keyframes `(frame, path, value)`. Values hold from
//! their keyframe until the next keyframe on the same path (step
//! interpolation, one value per rendered frame). Recognized paths:
//!
//! | path                 | value  | effect                                  |
//! |----------------------|--------|-----------------------------------------|
//! | `lights[<i>].scale`  | scalar | intensity multiplier of light `i`       |
//! | `lights[*].scale`    | scalar | intensity multiplier of every light     |
//! | `medium.beta_scale`  | scalar | density multiplier of the medium        |
//! | `objects[<id>].offset` | vector | rigid translation of object `id`      |
//! | `camera.position`    | vector | camera center                           |
//! | `camera.look_at`     | vector | camera target                           |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scene::{ObjectId, SceneGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Vector([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub frame: usize,
    pub path: String,
    pub value: ParamValue,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DynamicsScript {
    /// Number of frames the script covers.
    pub frames: usize,
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Target {
    Light(usize),
    AllLights,
    BetaScale,
    ObjectOffset(ObjectId),
    CameraPosition,
    CameraLookAt,
}

impl Target {
    fn parse(path: &str) -> Option<Target> {
        match path {
            "medium.beta_scale" => return Some(Target::BetaScale),
            "camera.position" => return Some(Target::CameraPosition),
            "camera.look_at" => return Some(Target::CameraLookAt),
            "lights[*].scale" => return Some(Target::AllLights),
            _ => {}
        }
        let index = |prefix: &str, suffix: &str| -> Option<u64> {
            path.strip_prefix(prefix)?.strip_suffix(suffix)?.parse().ok()
        };
        if let Some(i) = index("lights[", "].scale") {
            return Some(Target::Light(i as usize));
        }
        if let Some(id) = index("objects[", "].offset") {
            return Some(Target::ObjectOffset(u32::try_from(id).ok()?));
        }
        None
    }

    fn wants_vector(self) -> bool {
        matches!(self, Target::ObjectOffset(_) | Target::CameraPosition | Target::CameraLookAt)
    }

    fn resolves(self, scene: &SceneGraph) -> bool {
        match self {
            Target::Light(i) => i < scene.lights.len(),
            Target::ObjectOffset(id) => scene.object_index(id).is_some(),
            _ => true,
        }
    }
}

impl DynamicsScript {
    pub fn is_empty(&self) -> bool {
        self.keyframes.is_empty()
    }

    /// Step ramp with one keyframe per frame, `from` at frame 0 and `to` at
    /// frame `frames - 1`.
    pub fn ramp(path: &str, from: f64, to: f64, frames: usize) -> Self {
        let keyframes = (0..frames)
            .map(|t| {
                let a = if frames > 1 { t as f64 / (frames - 1) as f64 } else { 0.0 };
                Keyframe {
                    frame: t,
                    path: path.to_string(),
                    value: ParamValue::Scalar(from + (to - from) * a),
                }
            })
            .collect();
        Self { frames, keyframes }
    }

    /// Constant-velocity translation: offset `t * per_frame` at frame `t`.
    pub fn translation(object: ObjectId, per_frame: [f64; 3], frames: usize) -> Self {
        let keyframes = (0..frames)
            .map(|t| {
                let k = t as f64;
                Keyframe {
                    frame: t,
                    path: format!("objects[{object}].offset"),
                    value: ParamValue::Vector([per_frame[0] * k, per_frame[1] * k, per_frame[2] * k]),
                }
            })
            .collect();
        Self { frames, keyframes }
    }

    /// Union of two scripts, keyframes sorted by (frame, path).
    pub fn merged(mut self, other: DynamicsScript) -> Self {
        self.frames = self.frames.max(other.frames);
        self.keyframes.extend(other.keyframes);
        self.keyframes.sort_by(|a, b| (a.frame, &a.path).cmp(&(b.frame, &b.path)));
        self
    }

    pub fn validate(&self, scene: &SceneGraph) -> Result<()> {
        let mut last: BTreeMap<&str, usize> = BTreeMap::new();
        for k in &self.keyframes {
            let target = Target::parse(&k.path).ok_or_else(|| Error::UnresolvedPath(k.path.clone()))?;
            if !target.resolves(scene) {
                return Err(Error::UnresolvedPath(k.path.clone()));
            }
            if target.wants_vector() != matches!(k.value, ParamValue::Vector(_)) {
                return Err(Error::InvalidScript(format!("wrong value type for `{}`", k.path)));
            }
            if k.frame >= self.frames {
                return Err(Error::InvalidScript(format!(
                    "keyframe at frame {} beyond script length {}",
                    k.frame, self.frames
                )));
            }
            if let Some(&prev) = last.get(k.path.as_str()) {
                if k.frame <= prev {
                    return Err(Error::InvalidScript(format!("frames for `{}` are not strictly increasing", k.path)));
                }
            }
            last.insert(&k.path, k.frame);
        }
        Ok(())
    }
}

fn set(scene: &mut SceneGraph, target: Target, value: ParamValue) -> Result<()> {
    match (target, value) {
        (Target::Light(i), ParamValue::Scalar(v)) => scene.lights[i].scale = v,
        (Target::AllLights, ParamValue::Scalar(v)) => scene.lights.iter_mut().for_each(|l| l.scale = v),
        (Target::BetaScale, ParamValue::Scalar(v)) => scene.medium.beta_scale = v,
        (Target::ObjectOffset(id), ParamValue::Vector(v)) => {
            let i = scene
                .object_index(id)
                .ok_or_else(|| Error::UnresolvedPath(format!("objects[{id}].offset")))?;
            scene.objects[i].offset = v;
        }
        (Target::CameraPosition, ParamValue::Vector(v)) => scene.camera.position = v,
        (Target::CameraLookAt, ParamValue::Vector(v)) => scene.camera.look_at = v,
        _ => return Err(Error::InvalidScript("value type does not match path".into())),
    }
    Ok(())
}

/// Scene state at frame `t`. The input is left untouched and unreferenced
/// parameters keep their values. Applying the same `t` twice yields the
/// same scene, since keyframes set absolute values.
pub fn apply_dynamics(scene: &SceneGraph, t: usize) -> Result<SceneGraph> {
    let script = &scene.dynamics;
    if script.is_empty() {
        return Ok(scene.clone());
    }
    if t >= script.frames {
        return Err(Error::FrameOutOfRange {
            frame: t,
            frames: script.frames,
        });
    }
    let mut current: BTreeMap<&str, (usize, ParamValue)> = BTreeMap::new();
    for k in &script.keyframes {
        if k.frame <= t && current.get(k.path.as_str()).is_none_or(|(f, _)| k.frame >= *f) {
            current.insert(&k.path, (k.frame, k.value));
        }
    }
    let mut out = scene.clone();
    // whole-set paths first so per-index overrides win
    let mut ordered: Vec<_> = current.into_iter().collect();
    ordered.sort_by_key(|(p, _)| *p != "lights[*].scale");
    for (path, (_, value)) in ordered {
        let target = Target::parse(path).ok_or_else(|| Error::UnresolvedPath(path.to_string()))?;
        if !target.resolves(&out) {
            return Err(Error::UnresolvedPath(path.to_string()));
        }
        set(&mut out, target, value)?;
    }
    Ok(out)
}
