use serde::{Deserialize, Serialize};

use super::material::{standard, MaterialId};
use super::occupancy::Rect;
use super::priors::ObjectClass;

/// One realization of the marked point process: a ground position plus the
/// mark (class, dimensions, orientation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuboidMark {
    pub class: ObjectClass,
    /// Footprint center on the xz-plane.
    pub position: [f64; 2],
    /// Height of the cuboid base above y = 0.
    #[serde(default)]
    pub elevation: f64,
    /// Extent along x.
    pub length: f64,
    /// Extent along z.
    pub breadth: f64,
    pub height: f64,
    #[serde(default)]
    pub yaw: f64,
}

impl CuboidMark {
    /// Axis-aligned footprint; for yawed marks this is the bounding rectangle.
    pub fn footprint(&self) -> Rect {
        let (c, s) = (self.yaw.cos().abs(), self.yaw.sin().abs());
        let l = self.length * c + self.breadth * s;
        let b = self.length * s + self.breadth * c;
        Rect::centered(self.position[0], self.position[1], l, b)
    }

    pub fn min(&self) -> [f64; 3] {
        [
            self.position[0] - self.length / 2.0,
            self.elevation,
            self.position[1] - self.breadth / 2.0,
        ]
    }

    pub fn max(&self) -> [f64; 3] {
        [
            self.position[0] + self.length / 2.0,
            self.elevation + self.height,
            self.position[1] + self.breadth / 2.0,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.length > 0.0 && self.breadth > 0.0 && self.height > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub const SIDES: [Face; 4] = [Face::PosX, Face::NegX, Face::PosZ, Face::NegZ];

    pub fn normal(self) -> [f64; 3] {
        match self {
            Face::PosX => [1.0, 0.0, 0.0],
            Face::NegX => [-1.0, 0.0, 0.0],
            Face::PosY => [0.0, 1.0, 0.0],
            Face::NegY => [0.0, -1.0, 0.0],
            Face::PosZ => [0.0, 0.0, 1.0],
            Face::NegZ => [0.0, 0.0, -1.0],
        }
    }

    /// Face-plane coordinates `(u, v)` measured from the box minimum corner:
    /// x faces use (z, y), z faces use (x, y), y faces use (x, z).
    pub fn uv(self, p: [f64; 3], min: [f64; 3]) -> (f64, f64) {
        match self {
            Face::PosX | Face::NegX => (p[2] - min[2], p[1] - min[1]),
            Face::PosZ | Face::NegZ => (p[0] - min[0], p[1] - min[1]),
            Face::PosY | Face::NegY => (p[0] - min[0], p[2] - min[2]),
        }
    }

    /// Width and height of this face on a box of the given extents.
    pub fn extent(self, size: [f64; 3]) -> (f64, f64) {
        match self {
            Face::PosX | Face::NegX => (size[2], size[1]),
            Face::PosZ | Face::NegZ => (size[0], size[1]),
            Face::PosY | Face::NegY => (size[0], size[2]),
        }
    }
}

/// Rectangle `[u0, v0, u1, v1]` on one box face with its own material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceRegion {
    pub face: Face,
    pub rect: [f64; 4],
    pub material: MaterialId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Primitive {
    Cuboid {
        min: [f64; 3],
        max: [f64; 3],
        material: MaterialId,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        regions: Vec<FaceRegion>,
    },
    /// Vertical cylinder standing on `base`.
    Cylinder {
        base: [f64; 3],
        radius: f64,
        height: f64,
        material: MaterialId,
    },
    Sphere {
        center: [f64; 3],
        radius: f64,
        material: MaterialId,
    },
}

impl Primitive {
    pub fn aabb(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            Primitive::Cuboid { min, max, .. } => (*min, *max),
            Primitive::Cylinder { base, radius, height, .. } => (
                [base[0] - radius, base[1], base[2] - radius],
                [base[0] + radius, base[1] + height, base[2] + radius],
            ),
            Primitive::Sphere { center, radius, .. } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricMesh {
    pub primitives: Vec<Primitive>,
}

impl ParametricMesh {
    pub fn aabb(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.primitives {
            let (a, b) = p.aabb();
            for k in 0..3 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        (lo, hi)
    }

    /// Face regions whose material is `material`, across all cuboids.
    pub fn regions_with(&self, material: MaterialId) -> Vec<(Face, [f64; 4])> {
        self.primitives
            .iter()
            .flat_map(|p| match p {
                Primitive::Cuboid { regions, .. } => regions.clone(),
                _ => Vec::new(),
            })
            .filter(|r| r.material == material)
            .map(|r| (r.face, r.rect))
            .collect()
    }
}

/// Regular `cols x rows` window grid on a `width x height` facade. Each
/// window is centered in its grid cell and covers half the cell per axis.
pub fn facade_windows(width: f64, height: f64, cols: usize, rows: usize) -> Vec<[f64; 4]> {
    if cols == 0 || rows == 0 {
        return Vec::new();
    }
    let (cw, ch) = (width / cols as f64, height / rows as f64);
    let mut out = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            let (cu, cv) = ((c as f64 + 0.5) * cw, (r as f64 + 0.5) * ch);
            out.push([cu - cw / 4.0, cv - ch / 4.0, cu + cw / 4.0, cv + ch / 4.0]);
        }
    }
    out
}

const WINDOW_SPACING_U: f64 = 3.0;
const WINDOW_SPACING_V: f64 = 3.5;

/// Builds the parametric stand-in for a mark. The mesh never leaves the
/// mark's cuboid and, except for trees, fills it exactly.
///
/// Buildings pick a facade from `style % 4`; even `style / 4` adds a window
/// grid on every side face. Vehicles pick a paint from `style % 4`; even
/// styles get emissive brake lights on the rear (-x) face.
pub fn instantiate_geometry(mark: &CuboidMark, style: u32) -> (ParametricMesh, MaterialId) {
    let (min, max) = (mark.min(), mark.max());
    let size = [max[0] - min[0], max[1] - min[1], max[2] - min[2]];
    let cuboid = |material, regions| Primitive::Cuboid {
        min,
        max,
        material,
        regions,
    };
    match mark.class {
        ObjectClass::Building => {
            let facade = standard::FACADES[(style % 4) as usize];
            let mut regions = Vec::new();
            if (style / 4) % 2 == 0 {
                for face in Face::SIDES {
                    let (w, h) = face.extent(size);
                    let cols = (w / WINDOW_SPACING_U).floor() as usize;
                    let rows = (h / WINDOW_SPACING_V).floor() as usize;
                    regions.extend(facade_windows(w, h, cols, rows).into_iter().map(|rect| FaceRegion {
                        face,
                        rect,
                        material: standard::WINDOW_GLASS,
                    }));
                }
            }
            (ParametricMesh { primitives: vec![cuboid(facade, regions)] }, facade)
        }
        ObjectClass::Tree => {
            let crown = (size[0] / 2.0).min(size[2] / 2.0).min(0.3 * size[1]);
            let trunk = 0.25 * crown;
            let cx = mark.position[0];
            let cz = mark.position[1];
            let top = max[1];
            (
                ParametricMesh {
                    primitives: vec![
                        Primitive::Cylinder {
                            base: [cx, min[1], cz],
                            radius: trunk,
                            height: size[1] - crown,
                            material: standard::BARK,
                        },
                        Primitive::Sphere {
                            center: [cx, top - crown, cz],
                            radius: crown,
                            material: standard::FOLIAGE,
                        },
                    ],
                },
                standard::FOLIAGE,
            )
        }
        ObjectClass::Vehicle => {
            let paint = standard::PAINTS[(style % 4) as usize];
            let mut regions = Vec::new();
            if style % 2 == 0 {
                let (w, h) = Face::NegX.extent(size);
                let (lw, lh) = (0.15 * w, 0.12 * h);
                let v0 = 0.45 * h;
                regions.push(FaceRegion {
                    face: Face::NegX,
                    rect: [0.05 * w, v0, 0.05 * w + lw, v0 + lh],
                    material: standard::BRAKE_LIGHT,
                });
                regions.push(FaceRegion {
                    face: Face::NegX,
                    rect: [0.95 * w - lw, v0, 0.95 * w, v0 + lh],
                    material: standard::BRAKE_LIGHT,
                });
            }
            (ParametricMesh { primitives: vec![cuboid(paint, regions)] }, paint)
        }
        ObjectClass::Pedestrian => (
            ParametricMesh {
                primitives: vec![cuboid(standard::CLOTH, Vec::new())],
            },
            standard::CLOTH,
        ),
        ObjectClass::Ground => (
            ParametricMesh {
                primitives: vec![cuboid(standard::PAVEMENT, Vec::new())],
            },
            standard::PAVEMENT,
        ),
        ObjectClass::Road => (
            ParametricMesh {
                primitives: vec![cuboid(standard::ASPHALT, Vec::new())],
            },
            standard::ASPHALT,
        ),
    }
}
