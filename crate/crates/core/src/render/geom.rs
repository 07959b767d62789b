//! Ray/scene intersection over parametric primitives.
//!
//! Meshes are stored in the object's rest pose. A moved or yawed object is
//! intersected by carrying the ray into that rest frame: subtract the
//! dynamics offset, then rotate about the vertical axis through the mark
//! center.

use super::camera::{v3, Ray, Vec3};
use crate::scenegen::{Face, MaterialId, ObjectId, Primitive, SceneGraph};

/// Self-intersection offset for secondary rays, in meters.
pub const RAY_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    /// Index into `SceneGraph::objects`.
    pub object: usize,
    pub object_id: ObjectId,
    pub material: MaterialId,
    /// World-space unit normal facing against the incoming ray side it was hit from.
    pub normal: Vec3,
    /// Hit point in the object's rest frame (texture coordinates).
    pub local: Vec3,
    pub point: Vec3,
}

struct Prepared {
    offset: Vec3,
    pivot: Vec3,
    cos: f64,
    sin: f64,
    lo: Vec3,
    hi: Vec3,
}

impl Prepared {
    /// Rotation by `-yaw` about y (world to rest frame).
    fn to_rest(&self, v: &Vec3) -> Vec3 {
        Vec3::new(self.cos * v.x - self.sin * v.z, v.y, self.sin * v.x + self.cos * v.z)
    }

    fn from_rest(&self, v: &Vec3) -> Vec3 {
        Vec3::new(self.cos * v.x + self.sin * v.z, v.y, -self.sin * v.x + self.cos * v.z)
    }
}

/// Read-only acceleration view of a scene.
pub struct SceneView<'a> {
    pub scene: &'a SceneGraph,
    prepared: Vec<Prepared>,
}

fn slab(origin: &Vec3, inv: &Vec3, lo: &Vec3, hi: &Vec3) -> Option<(f64, f64, usize, usize)> {
    let mut tmin = f64::NEG_INFINITY;
    let mut tmax = f64::INFINITY;
    let (mut amin, mut amax) = (0, 0);
    for a in 0..3 {
        let (t0, t1) = {
            let t0 = (lo[a] - origin[a]) * inv[a];
            let t1 = (hi[a] - origin[a]) * inv[a];
            if t0.is_nan() || t1.is_nan() {
                // ray parallel to and exactly on a slab plane
                if origin[a] < lo[a] || origin[a] > hi[a] {
                    return None;
                }
                continue;
            }
            if t0 <= t1 {
                (t0, t1)
            } else {
                (t1, t0)
            }
        };
        if t0 > tmin {
            tmin = t0;
            amin = a;
        }
        if t1 < tmax {
            tmax = t1;
            amax = a;
        }
    }
    if tmin > tmax {
        return None;
    }
    Some((tmin, tmax, amin, amax))
}

fn axis_face(axis: usize, positive: bool) -> Face {
    match (axis, positive) {
        (0, true) => Face::PosX,
        (0, false) => Face::NegX,
        (1, true) => Face::PosY,
        (1, false) => Face::NegY,
        (2, true) => Face::PosZ,
        _ => Face::NegZ,
    }
}

struct LocalHit {
    t: f64,
    normal: Vec3,
    material: MaterialId,
}

fn hit_primitive(p: &Primitive, o: &Vec3, d: &Vec3, inv: &Vec3, tmin: f64, tmax: f64) -> Option<LocalHit> {
    match p {
        Primitive::Cuboid {
            min,
            max,
            material,
            regions,
        } => {
            let (lo, hi) = (v3(*min), v3(*max));
            let (t0, t1, a0, a1) = slab(o, inv, &lo, &hi)?;
            let (t, axis, entering) = if t0 > tmin {
                (t0, a0, true)
            } else if t1 > tmin {
                (t1, a1, false)
            } else {
                return None;
            };
            if t >= tmax {
                return None;
            }
            // outward normal on the exited/entered face
            let positive = if entering { d[axis] < 0.0 } else { d[axis] > 0.0 };
            let face = axis_face(axis, positive);
            let n = v3(face.normal());
            let mut mat = *material;
            if !regions.is_empty() {
                let q = o + d * t;
                let (u, v) = face.uv([q.x, q.y, q.z], *min);
                if let Some(r) = regions
                    .iter()
                    .find(|r| r.face == face && u >= r.rect[0] && u <= r.rect[2] && v >= r.rect[1] && v <= r.rect[3])
                {
                    mat = r.material;
                }
            }
            Some(LocalHit {
                t,
                normal: n,
                material: mat,
            })
        }
        Primitive::Cylinder {
            base,
            radius,
            height,
            material,
        } => {
            let (cx, y0, cz) = (base[0], base[1], base[2]);
            let y1 = y0 + height;
            let mut best: Option<LocalHit> = None;
            let mut consider = |t: f64, n: Vec3| {
                if t > tmin && t < tmax && best.as_ref().is_none_or(|b| t < b.t) {
                    best = Some(LocalHit {
                        t,
                        normal: n,
                        material: *material,
                    });
                }
            };
            let (ox, oz) = (o.x - cx, o.z - cz);
            let a = d.x * d.x + d.z * d.z;
            if a > 0.0 {
                let b = ox * d.x + oz * d.z;
                let c = ox * ox + oz * oz - radius * radius;
                let disc = b * b - a * c;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    for t in [(-b - s) / a, (-b + s) / a] {
                        let y = o.y + d.y * t;
                        if y >= y0 && y <= y1 {
                            let n = Vec3::new(ox + d.x * t, 0.0, oz + d.z * t) / *radius;
                            consider(t, n);
                        }
                    }
                }
            }
            if d.y != 0.0 {
                for (y, ny) in [(y0, -1.0), (y1, 1.0)] {
                    let t = (y - o.y) / d.y;
                    let (px, pz) = (ox + d.x * t, oz + d.z * t);
                    if px * px + pz * pz <= radius * radius {
                        consider(t, Vec3::new(0.0, ny, 0.0));
                    }
                }
            }
            best
        }
        Primitive::Sphere {
            center,
            radius,
            material,
        } => {
            let oc = o - v3(*center);
            let a = d.dot(d);
            let b = oc.dot(d);
            let c = oc.dot(&oc) - radius * radius;
            let disc = b * b - a * c;
            if disc < 0.0 {
                return None;
            }
            let s = disc.sqrt();
            [(-b - s) / a, (-b + s) / a]
                .into_iter()
                .find(|&t| t > tmin && t < tmax)
                .map(|t| LocalHit {
                    t,
                    normal: (oc + d * t) / *radius,
                    material: *material,
                })
        }
    }
}

impl<'a> SceneView<'a> {
    pub fn new(scene: &'a SceneGraph) -> Self {
        let prepared = scene
            .objects
            .iter()
            .map(|obj| {
                let (lo, hi) = obj.mesh.aabb();
                let pivot = Vec3::new(obj.mark.position[0], 0.0, obj.mark.position[1]);
                let (sin, cos) = obj.mark.yaw.sin_cos();
                let offset = v3(obj.offset);
                // world AABB of the rotated, translated rest box
                let mut wlo = Vec3::repeat(f64::INFINITY);
                let mut whi = Vec3::repeat(f64::NEG_INFINITY);
                let p = Prepared {
                    offset,
                    pivot,
                    cos,
                    sin,
                    lo: Vec3::zeros(),
                    hi: Vec3::zeros(),
                };
                for k in 0..8 {
                    let c = Vec3::new(
                        if k & 1 == 0 { lo[0] } else { hi[0] },
                        if k & 2 == 0 { lo[1] } else { hi[1] },
                        if k & 4 == 0 { lo[2] } else { hi[2] },
                    );
                    let w = p.from_rest(&(c - pivot)) + pivot + offset;
                    wlo = wlo.inf(&w);
                    whi = whi.sup(&w);
                }
                Prepared {
                    lo: wlo - Vec3::repeat(1e-9),
                    hi: whi + Vec3::repeat(1e-9),
                    ..p
                }
            })
            .collect();
        Self { scene, prepared }
    }

    /// Nearest hit with `t` in `(tmin, tmax)`.
    pub fn intersect(&self, ray: &Ray, tmin: f64, tmax: f64) -> Option<Hit> {
        let inv = Vec3::new(1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = tmax;
        for (i, (obj, prep)) in self.scene.objects.iter().zip(&self.prepared).enumerate() {
            match slab(&ray.origin, &inv, &prep.lo, &prep.hi) {
                Some((t0, t1, _, _)) if t1 > tmin && t0 < limit => {}
                _ => continue,
            }
            let o = prep.to_rest(&(ray.origin - prep.offset - prep.pivot)) + prep.pivot;
            let d = prep.to_rest(&ray.dir);
            let linv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
            for prim in &obj.mesh.primitives {
                if let Some(h) = hit_primitive(prim, &o, &d, &linv, tmin, limit) {
                    limit = h.t;
                    let local = o + d * h.t;
                    best = Some(Hit {
                        t: h.t,
                        object: i,
                        object_id: obj.id,
                        material: h.material,
                        normal: prep.from_rest(&h.normal).normalize(),
                        local,
                        point: ray.at(h.t),
                    });
                }
            }
        }
        best
    }

    pub fn occluded(&self, ray: &Ray, tmax: f64) -> bool {
        self.intersect(ray, 0.0, tmax).is_some()
    }

    /// Rigid displacement of object `index` in this scene.
    pub fn offset(&self, index: usize) -> Vec3 {
        self.prepared[index].offset
    }
}
