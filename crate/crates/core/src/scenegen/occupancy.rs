use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle on the xz ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub z0: f64,
    pub x1: f64,
    pub z1: f64,
}

impl Rect {
    pub fn new(x0: f64, z0: f64, x1: f64, z1: f64) -> Self {
        Self { x0, z0, x1, z1 }
    }

    pub fn centered(cx: f64, cz: f64, length: f64, breadth: f64) -> Self {
        Self::new(cx - length / 2.0, cz - breadth / 2.0, cx + length / 2.0, cz + breadth / 2.0)
    }

    /// Positive-area intersection. Rectangles that only share an edge do not overlap.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.z0 < other.z1 && other.z0 < self.z1
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.z0 >= self.z0 && other.z1 <= self.z1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn depth(&self) -> f64 {
        self.z1 - self.z0
    }
}

/// Bounded region of the ground plane the scene lives in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldBounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl WorldBounds {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.min[0], self.min[1], self.max[0], self.max[1])
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.min.iter().chain(&self.max).all(|v| v.is_finite())
            && self.max[0] > self.min[0]
            && self.max[1] > self.min[1];
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("degenerate world bounds {:?}..{:?}", self.min, self.max)))
        }
    }
}

/// Boolean raster over the world bounds; a cell is set iff some accepted
/// footprint covers part of it with positive area.
#[derive(Debug, Clone)]
pub struct OccupancyMap {
    bounds: Rect,
    cell_size: f64,
    nx: usize,
    nz: usize,
    cells: Vec<bool>,
}

impl OccupancyMap {
    pub const DEFAULT_CELL_SIZE: f64 = 0.5;

    pub fn new(bounds: &WorldBounds, cell_size: f64) -> Result<Self> {
        bounds.validate()?;
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidConfig(format!("cell size {cell_size} must be positive")));
        }
        let r = bounds.rect();
        let nx = (r.width() / cell_size).ceil() as usize;
        let nz = (r.depth() / cell_size).ceil() as usize;
        Ok(Self {
            bounds: r,
            cell_size,
            nx,
            nz,
            cells: vec![false; nx * nz],
        })
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.nz)
    }

    pub fn is_set(&self, ix: usize, iz: usize) -> bool {
        self.cells[iz * self.nx + ix]
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Index range of cells that intersect `[a, b]` with positive length.
    fn span(&self, a: f64, b: f64, origin: f64, n: usize) -> Option<(usize, usize)> {
        let lo = ((a - origin) / self.cell_size).floor().max(0.0);
        let hi = ((b - origin) / self.cell_size).ceil().min(n as f64);
        if hi <= lo {
            return None;
        }
        Some((lo as usize, hi as usize))
    }

    fn cells_of(&self, r: &Rect) -> Option<((usize, usize), (usize, usize))> {
        let xs = self.span(r.x0, r.x1, self.bounds.x0, self.nx)?;
        let zs = self.span(r.z0, r.z1, self.bounds.z0, self.nz)?;
        Some((xs, zs))
    }

    fn check_bounds(&self, r: &Rect) -> Result<()> {
        if !(r.x0 < r.x1 && r.z0 < r.z1) || !self.bounds.contains(r) {
            return Err(Error::OutOfBounds {
                x0: r.x0,
                x1: r.x1,
                z0: r.z0,
                z1: r.z1,
            });
        }
        Ok(())
    }

    /// True iff no occupied cell touches the footprint dilated by half a cell.
    /// A `true` answer guarantees the footprint is disjoint from every
    /// accepted footprint.
    pub fn check_placement(&self, footprint: &Rect) -> Result<bool> {
        self.check_bounds(footprint)?;
        let h = self.cell_size / 2.0;
        let dilated = Rect::new(footprint.x0 - h, footprint.z0 - h, footprint.x1 + h, footprint.z1 + h);
        let Some(((ix0, ix1), (iz0, iz1))) = self.cells_of(&dilated) else {
            return Ok(true);
        };
        for iz in iz0..iz1 {
            let row = &self.cells[iz * self.nx..(iz + 1) * self.nx];
            if row[ix0..ix1].iter().any(|&c| c) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Marks every cell the footprint intersects.
    pub fn mark(&mut self, footprint: &Rect) -> Result<()> {
        self.check_bounds(footprint)?;
        if let Some(((ix0, ix1), (iz0, iz1))) = self.cells_of(footprint) {
            for iz in iz0..iz1 {
                for c in &mut self.cells[iz * self.nx + ix0..iz * self.nx + ix1] {
                    *c = true;
                }
            }
        }
        Ok(())
    }
}
