//! Spatial-context labelling of ground-truth buffers and patch sampling.
//!
//! Every pixel gets a set of base labels computed from its 3x3 neighbourhood
//! in the ground truth. At patch scale `s` the boundary labels
//! (shadow boundary, edge, corner, motion boundary) are dilated by `s / 2`
//! so that patches straddling a boundary count as boundary patches. A patch
//! is eligible for a context when at least [`PURITY`] of its pixels carry the
//! (effective) label and none carries a label that would contaminate it,
//! e.g. a diffuse patch may not contain an edge or a shadow boundary.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::{GroundTruthBuffers, Grid};
use crate::rng;
use crate::scenegen::MaterialKind;

/// Minimum fraction of patch pixels that must carry the context label.
pub const PURITY: f64 = 0.8;

/// Reflectance variance below which a window counts as homogeneous.
pub const HOMOGENEITY_TAU: f64 = 1e-4;

/// Normal angle above which neighbouring pixels lie on different surfaces.
pub const EDGE_ANGLE_DEG: f64 = 15.0;

/// Default patch sides.
pub const DEFAULT_SIDES: [usize; 10] = [3, 5, 7, 9, 11, 13, 15, 17, 19, 21];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpatialContext {
    Homogeneous,
    Diffuse,
    Specular,
    ShadowRegion,
    ShadowBoundary,
    Edge,
    Corner,
    Occluded,
    MotionBoundary,
    SameSurface,
}

impl SpatialContext {
    pub const ALL: [SpatialContext; 10] = [
        SpatialContext::Homogeneous,
        SpatialContext::Diffuse,
        SpatialContext::Specular,
        SpatialContext::ShadowRegion,
        SpatialContext::ShadowBoundary,
        SpatialContext::Edge,
        SpatialContext::Corner,
        SpatialContext::Occluded,
        SpatialContext::MotionBoundary,
        SpatialContext::SameSurface,
    ];

    pub fn bit(self) -> u16 {
        1 << (self as u16)
    }

    pub fn name(self) -> &'static str {
        match self {
            SpatialContext::Homogeneous => "Homogeneous",
            SpatialContext::Diffuse => "Diffuse",
            SpatialContext::Specular => "Specular",
            SpatialContext::ShadowRegion => "ShadowRegion",
            SpatialContext::ShadowBoundary => "ShadowBoundary",
            SpatialContext::Edge => "Edge",
            SpatialContext::Corner => "Corner",
            SpatialContext::Occluded => "Occluded",
            SpatialContext::MotionBoundary => "MotionBoundary",
            SpatialContext::SameSurface => "SameSurface",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }

    /// Labels that mark a thin structure and are widened to the patch scale.
    pub fn is_boundary(self) -> bool {
        matches!(
            self,
            SpatialContext::ShadowBoundary | SpatialContext::Edge | SpatialContext::Corner | SpatialContext::MotionBoundary
        )
    }

    /// Base labels that may not appear anywhere inside a patch of this context.
    pub fn exclusions(self) -> u16 {
        use SpatialContext::*;
        let disruptive = ShadowBoundary.bit() | Edge.bit() | Corner.bit() | Occluded.bit() | MotionBoundary.bit();
        match self {
            Homogeneous | Specular | ShadowRegion => disruptive,
            Diffuse => disruptive | Specular.bit(),
            SameSurface => MotionBoundary.bit() | Occluded.bit(),
            _ => 0,
        }
    }

    fn color(self) -> [u8; 3] {
        match self {
            SpatialContext::Homogeneous => [120, 200, 120],
            SpatialContext::Diffuse => [90, 140, 220],
            SpatialContext::Specular => [240, 240, 90],
            SpatialContext::ShadowRegion => [60, 60, 110],
            SpatialContext::ShadowBoundary => [250, 150, 40],
            SpatialContext::Edge => [230, 60, 60],
            SpatialContext::Corner => [250, 0, 250],
            SpatialContext::Occluded => [255, 255, 255],
            SpatialContext::MotionBoundary => [0, 230, 230],
            SpatialContext::SameSurface => [150, 150, 150],
        }
    }
}

impl std::fmt::Display for SpatialContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Square patch with top-left corner `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub x: usize,
    pub y: usize,
    pub side: usize,
    pub context: SpatialContext,
    pub frame: usize,
}

impl Patch {
    pub fn new(x: usize, y: usize, side: usize, context: SpatialContext) -> Self {
        Self {
            x,
            y,
            side,
            context,
            frame: 0,
        }
    }

    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y..self.y + self.side).flat_map(move |y| (self.x..self.x + self.side).map(move |x| (x, y)))
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.side > 0 && self.x + self.side <= width && self.y + self.side <= height
    }
}

/// Largest window side tracked for homogeneity.
pub const MAX_HOMOGENEOUS_SIDE: u8 = 63;

/// Per-pixel label sets as bit masks over [`SpatialContext`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextMap {
    pub labels: Grid<u16>,
    /// Largest odd side of a centered window, inside the image, holding a
    /// single material, a constant shadow fraction and reflectance variance
    /// below [`HOMOGENEITY_TAU`]; 0 where even 3x3 fails. A patch is
    /// homogeneous exactly when this value at its center reaches its side.
    pub homogeneous_side: Grid<u8>,
    /// Same for windows lying on one surface: a single material, normal and
    /// shadow fraction, with any reflectance variation.
    pub surface_side: Grid<u8>,
}

/// Summed-area table for O(1) box sums.
struct Sat {
    w: usize,
    sums: Vec<f64>,
}

impl Sat {
    fn new(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut sums = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += f(x, y);
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Self { w, sums }
    }

    fn flags(w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        Self::new(w, h, |x, y| if f(x, y) { 1.0 } else { 0.0 })
    }

    /// Sum over `[x0, x1) x [y0, y1)`.
    fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let s = |x: usize, y: usize| self.sums[y * (self.w + 1) + x];
        (s(x1, y1) - s(x0, y1)) - (s(x1, y0) - s(x0, y0))
    }

    fn count(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> usize {
        self.sum(x0, y0, x1, y1).round() as usize
    }
}

fn angle_deg(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    d.acos().to_degrees()
}

impl ContextMap {
    pub fn width(&self) -> usize {
        self.labels.width
    }

    pub fn height(&self) -> usize {
        self.labels.height
    }

    pub fn has(&self, x: usize, y: usize, c: SpatialContext) -> bool {
        self.labels.get(x, y) & c.bit() != 0
    }

    pub fn count(&self, c: SpatialContext) -> usize {
        self.labels.data.iter().filter(|&&m| m & c.bit() != 0).count()
    }

    /// Labels of context `c` at scale `side`: boundary labels dilated by
    /// `side / 2` (Chebyshev), Homogeneous restricted to pixels whose
    /// homogeneous window reaches `side`, others unchanged.
    pub fn effective(&self, c: SpatialContext, side: usize) -> Grid<bool> {
        let (w, h) = (self.width(), self.height());
        if c == SpatialContext::Homogeneous {
            return self.homogeneous_side.map(|&v| v > 0 && v as usize >= side.min(MAX_HOMOGENEOUS_SIDE as usize));
        }
        let base = self.labels.map(|m| m & c.bit() != 0);
        if !c.is_boundary() || side < 2 {
            return base;
        }
        let r = side / 2;
        let sat = Sat::flags(w, h, |x, y| *base.get(x, y));
        Grid::from_fn(w, h, |x, y| {
            let (x0, y0) = (x.saturating_sub(r), y.saturating_sub(r));
            let (x1, y1) = ((x + r + 1).min(w), (y + r + 1).min(h));
            sat.count(x0, y0, x1, y1) > 0
        })
    }

    /// Fraction of patch pixels carrying the effective label of its context.
    pub fn purity(&self, p: &Patch) -> f64 {
        let eff = self.effective(p.context, p.side);
        let n = p.pixels().filter(|&(x, y)| *eff.get(x, y)).count();
        n as f64 / (p.side * p.side) as f64
    }

    /// Whether a patch contains none of its context's excluded base labels.
    pub fn is_clean(&self, p: &Patch) -> bool {
        let ex = p.context.exclusions();
        p.pixels().all(|(x, y)| self.labels.get(x, y) & ex == 0)
    }

    /// Whether a patch is admissible for its context: clean, and either
    /// homogeneous as a whole (Homogeneous), or pure. Diffuse patches must
    /// also lie on one surface without being homogeneous: Diffuse stands for
    /// textured Lambertian surfaces.
    pub fn is_eligible(&self, p: &Patch) -> bool {
        p.fits(self.width(), self.height()) && self.eligible(p.context, p.side).contains(&(p.x, p.y))
    }

    /// All eligible top-left corners for `(c, side)` in row-major order.
    pub fn eligible(&self, c: SpatialContext, side: usize) -> Vec<(usize, usize)> {
        let (w, h) = (self.width(), self.height());
        if side == 0 || side > w || side > h {
            return Vec::new();
        }
        let eff = self.effective(c, side);
        let on = Sat::flags(w, h, |x, y| *eff.get(x, y));
        let ex = c.exclusions();
        let bad = Sat::flags(w, h, |x, y| self.labels.get(x, y) & ex != 0);
        let need = (PURITY * (side * side) as f64).ceil() as usize;
        let r = side / 2;
        let flat = |x: usize, y: usize| *self.homogeneous_side.get(x + r, y + r) as usize >= side;
        let one_surface = |x: usize, y: usize| *self.surface_side.get(x + r, y + r) as usize >= side;
        let mut out = Vec::new();
        for y in 0..=h - side {
            for x in 0..=w - side {
                let texture_ok = match c {
                    SpatialContext::Homogeneous => flat(x, y),
                    SpatialContext::Diffuse => one_surface(x, y) && !flat(x, y),
                    _ => true,
                };
                if texture_ok
                    && (c == SpatialContext::Homogeneous || on.count(x, y, x + side, y + side) >= need)
                    && bad.count(x, y, x + side, y + side) == 0
                {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// 8-bit label visualization; each pixel shows its highest-priority label.
    pub fn to_ppm(&self) -> Vec<u8> {
        const PRIORITY: [SpatialContext; 10] = [
            SpatialContext::Occluded,
            SpatialContext::MotionBoundary,
            SpatialContext::Corner,
            SpatialContext::Edge,
            SpatialContext::ShadowBoundary,
            SpatialContext::Specular,
            SpatialContext::ShadowRegion,
            SpatialContext::Homogeneous,
            SpatialContext::Diffuse,
            SpatialContext::SameSurface,
        ];
        let mut out = format!("P6\n{} {}\n255\n", self.width(), self.height()).into_bytes();
        for &m in &self.labels.data {
            let c = PRIORITY.iter().find(|c| m & c.bit() != 0).map(|c| c.color()).unwrap_or([0, 0, 0]);
            out.extend_from_slice(&c);
        }
        out
    }

    /// Run-length encoding in row-major order: `runs` holds `(mask, length)`
    /// pairs over the label bit masks (bit `i` is `bits[i]`), `homogeneous`
    /// and `surface` the same for the window sides.
    pub fn to_rle_json(&self) -> String {
        let labels: Vec<&str> = SpatialContext::ALL.iter().map(|c| c.name()).collect();
        serde_json::json!({
            "width": self.width(),
            "height": self.height(),
            "bits": labels,
            "runs": rle(&self.labels.data),
            "homogeneous": rle(&self.homogeneous_side.data),
            "surface": rle(&self.surface_side.data),
        })
        .to_string()
    }

    pub fn from_rle_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Rle {
            width: usize,
            height: usize,
            runs: Vec<(u16, usize)>,
            homogeneous: Vec<(u8, usize)>,
            surface: Vec<(u8, usize)>,
        }
        let r: Rle = serde_json::from_str(s)?;
        let n = r.width * r.height;
        Ok(Self {
            labels: Grid::from_vec(r.width, r.height, unrle(r.runs, n)?),
            homogeneous_side: Grid::from_vec(r.width, r.height, unrle(r.homogeneous, n)?),
            surface_side: Grid::from_vec(r.width, r.height, unrle(r.surface, n)?),
        })
    }
}

fn rle<T: Copy + PartialEq>(data: &[T]) -> Vec<(T, usize)> {
    let mut runs: Vec<(T, usize)> = Vec::new();
    for &m in data {
        match runs.last_mut() {
            Some((v, n)) if *v == m => *n += 1,
            _ => runs.push((m, 1)),
        }
    }
    runs
}

fn unrle<T: Copy>(runs: Vec<(T, usize)>, expected: usize) -> Result<Vec<T>> {
    let mut data = Vec::with_capacity(expected);
    for (m, n) in runs {
        data.extend(std::iter::repeat_n(m, n));
    }
    if data.len() != expected {
        return Err(Error::Format {
            what: "context map",
            detail: format!("runs cover {} pixels, expected {expected}", data.len()),
        });
    }
    Ok(data)
}

/// Sides of the largest centered windows per pixel lying on one surface,
/// and additionally homogeneous.
fn window_sides(gt: &GroundTruthBuffers) -> (Grid<u8>, Grid<u8>) {
    let (w, h) = (gt.width(), gt.height());
    let px = |x: usize, y: usize| gt.pixels.get(x, y);
    let differs = |a: &crate::render::GtPixel, b: &crate::render::GtPixel| {
        a.material_id != b.material_id || a.shadow_fraction != b.shadow_fraction || a.normal != b.normal
    };
    // jumps between a pixel and its left / upper neighbour
    let jump_x = Sat::flags(w, h, |x, y| x > 0 && differs(px(x, y), px(x - 1, y)));
    let jump_y = Sat::flags(w, h, |x, y| y > 0 && differs(px(x, y), px(x, y - 1)));
    let sums: Vec<Sat> = (0..3).map(|c| Sat::new(w, h, |x, y| px(x, y).reflectance[c])).collect();
    let squares: Vec<Sat> = (0..3).map(|c| Sat::new(w, h, |x, y| px(x, y).reflectance[c].powi(2))).collect();
    let mut surface = Grid::filled(w, h, 0u8);
    let homogeneous = Grid::from_fn(w, h, |x, y| {
        if px(x, y).is_sky() {
            return 0;
        }
        let (mut best_surface, mut best) = (0u8, 0u8);
        let mut still_flat = true;
        let mut side = 3u8;
        while side <= MAX_HOMOGENEOUS_SIDE {
            let r = (side / 2) as usize;
            if x < r || y < r || x + r >= w || y + r >= h {
                break;
            }
            let (x0, y0, x1, y1) = (x - r, y - r, x + r + 1, y + r + 1);
            if jump_x.count(x0 + 1, y0, x1, y1) > 0 || jump_y.count(x0, y0 + 1, x1, y1) > 0 {
                break;
            }
            best_surface = side;
            let n = ((x1 - x0) * (y1 - y0)) as f64;
            still_flat = still_flat
                && (0..3).all(|c| {
                    let mean = sums[c].sum(x0, y0, x1, y1) / n;
                    squares[c].sum(x0, y0, x1, y1) / n - mean * mean < HOMOGENEITY_TAU
                });
            if still_flat {
                best = side;
            }
            side += 2;
        }
        *surface.get_mut(x, y) = best_surface;
        best
    });
    (surface, homogeneous)
}

/// Base labels from ground truth.
///
/// `gt_next` is the ground truth of the frame the patches are compared with;
/// when present, a pixel is Occluded where the object id at the same pixel
/// differs between the two. Without it, the flow occlusion mask of `gt` is
/// used if available. MotionBoundary needs `gt.flow`.
pub fn classify_contexts(gt: &GroundTruthBuffers, gt_next: Option<&GroundTruthBuffers>) -> Result<ContextMap> {
    let (w, h) = (gt.width(), gt.height());
    if gt.material_kind.width != w || gt.material_kind.height != h {
        return Err(Error::MissingBuffer("material kind".into()));
    }
    if let Some(n) = gt_next {
        if n.width() != w || n.height() != h {
            return Err(Error::SizeMismatch(format!("{}x{} vs {}x{}", w, h, n.width(), n.height())));
        }
    }
    let occluded: Option<Grid<bool>> = match gt_next {
        Some(n) => Some(Grid::from_fn(w, h, |x, y| gt.pixels.get(x, y).object_id != n.pixels.get(x, y).object_id)),
        None => gt.occlusion.clone(),
    };
    let px = |x: usize, y: usize| gt.pixels.get(x, y);
    let (surface, homogeneous) = window_sides(gt);
    let mut labels = Grid::filled(w, h, 0u16);
    for y in 0..h {
        for x in 0..w {
            let mut m = 0u16;
            let centre = px(x, y);
            if occluded.as_ref().is_some_and(|o| *o.get(x, y)) {
                m |= SpatialContext::Occluded.bit();
            }
            if centre.is_sky() {
                *labels.get_mut(x, y) = m;
                continue;
            }
            let (x0, x1) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (y0, y1) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let window: Vec<(usize, usize)> = (y0..=y1).flat_map(|yy| (x0..=x1).map(move |xx| (xx, yy))).collect();

            // surfaces: clusters of normals separated by more than the edge angle; sky is its own surface
            let mut surfaces: Vec<Option<[f64; 3]>> = Vec::new();
            for &(xx, yy) in &window {
                let p = px(xx, yy);
                let key = (!p.is_sky()).then_some(p.normal);
                let known = surfaces.iter().any(|s| match (s, &key) {
                    (None, None) => true,
                    (Some(a), Some(b)) => angle_deg(a, b) <= EDGE_ANGLE_DEG,
                    _ => false,
                });
                if !known {
                    surfaces.push(key);
                }
            }
            match surfaces.len() {
                0 | 1 => {}
                2 => m |= SpatialContext::Edge.bit(),
                _ => m |= SpatialContext::Corner.bit(),
            }

            let sf: Vec<f64> = window.iter().filter(|&&(a, b)| !px(a, b).is_sky()).map(|&(a, b)| px(a, b).shadow_fraction).collect();
            let has0 = sf.iter().any(|&v| v == 0.0);
            let has1 = sf.iter().any(|&v| v == 1.0);
            if has0 && has1 {
                m |= SpatialContext::ShadowBoundary.bit();
            } else if centre.shadow_fraction == 1.0 && sf.iter().all(|&v| v == 1.0) {
                m |= SpatialContext::ShadowRegion.bit();
            }

            let kinds: Vec<Option<MaterialKind>> = window.iter().map(|&(a, b)| *gt.material_kind.get(a, b)).collect();
            let majority = |k: MaterialKind| 2 * kinds.iter().filter(|&&v| v == Some(k)).count() > kinds.len();
            if majority(MaterialKind::Diffuse) {
                m |= SpatialContext::Diffuse.bit();
            }
            if majority(MaterialKind::Specular) {
                m |= SpatialContext::Specular.bit();
            }

            // covered by some homogeneous 3x3 window
            let near_flat = (y.saturating_sub(1)..(y + 2).min(h))
                .any(|b| (x.saturating_sub(1)..(x + 2).min(w)).any(|a| *homogeneous.get(a, b) >= 3));
            if near_flat {
                m |= SpatialContext::Homogeneous.bit();
            }

            let single_object = window.iter().all(|&(a, b)| px(a, b).object_id == centre.object_id);
            let window_occluded = occluded.as_ref().is_some_and(|o| window.iter().any(|&(a, b)| *o.get(a, b)));
            if single_object && !window_occluded {
                m |= SpatialContext::SameSurface.bit();
            }

            if let Some(flow) = &gt.flow {
                let f0 = flow.get(x, y);
                let moving_apart = window.iter().any(|&(a, b)| {
                    let f = flow.get(a, b);
                    px(a, b).object_id != centre.object_id && ((f[0] - f0[0]).abs() > 1e-6 || (f[1] - f0[1]).abs() > 1e-6)
                });
                if moving_apart {
                    m |= SpatialContext::MotionBoundary.bit();
                }
            }
            *labels.get_mut(x, y) = m;
        }
    }
    Ok(ContextMap {
        labels,
        homogeneous_side: homogeneous,
        surface_side: surface,
    })
}

/// Uniform sample without replacement of `count` eligible patches.
pub fn sample_patches(map: &ContextMap, context: SpatialContext, side: usize, count: usize, seed: u64) -> Result<Vec<Patch>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let eligible = map.eligible(context, side);
    if eligible.is_empty() {
        return Err(Error::EmptyContext { context, side });
    }
    if count > eligible.len() {
        return Err(Error::NotEnoughPatches {
            context,
            side,
            requested: count,
            available: eligible.len(),
        });
    }
    let mut rng = rng::stream(seed, &[rng::label_key("patches"), context as u64, side as u64]);
    let mut picked: Vec<usize> = index::sample(&mut rng, eligible.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| {
            let (x, y) = eligible[i];
            Patch::new(x, y, side, context)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::render::{render_ground_truth, GtPixel, RenderConfig};

    fn synthetic(w: usize, h: usize, f: impl Fn(usize, usize) -> GtPixel) -> GroundTruthBuffers {
        let pixels = Grid::from_fn(w, h, f);
        GroundTruthBuffers {
            material_kind: pixels.map(|p| (!p.is_sky()).then_some(MaterialKind::Diffuse)),
            pixels,
            flow: None,
            occlusion: None,
        }
    }

    fn plane(sf: f64) -> GtPixel {
        GtPixel {
            depth: 5.0,
            object_id: 1,
            material_id: 2,
            normal: [0.0, 0.0, -1.0],
            shadow_fraction: sf,
            reflectance: [0.5; 3],
            point: [0.0; 3],
        }
    }

    #[test]
    fn uniform_plane_is_homogeneous_and_diffuse() {
        let gt = synthetic(12, 10, |_, _| plane(0.0));
        let map = classify_contexts(&gt, None).unwrap();
        for &m in &map.labels.data {
            assert_ne!(m & SpatialContext::Homogeneous.bit(), 0);
            assert_ne!(m & SpatialContext::Diffuse.bit(), 0);
            assert_eq!(m & SpatialContext::Edge.bit(), 0);
        }
    }

    #[test]
    fn shadow_step_gives_boundary_not_region() {
        let gt = synthetic(12, 6, |x, _| plane(if x < 6 { 1.0 } else { 0.0 }));
        let map = classify_contexts(&gt, None).unwrap();
        assert!(map.has(5, 3, SpatialContext::ShadowBoundary));
        assert!(map.has(6, 3, SpatialContext::ShadowBoundary));
        assert!(map.has(2, 3, SpatialContext::ShadowRegion));
        for y in 0..6 {
            for x in 0..12 {
                assert!(!(map.has(x, y, SpatialContext::ShadowRegion) && map.has(x, y, SpatialContext::ShadowBoundary)));
            }
        }
    }

    #[test]
    fn normal_step_gives_edge_and_three_way_junction_corner() {
        let gt = synthetic(10, 10, |x, y| {
            let mut p = plane(0.0);
            if x >= 5 {
                p.normal = [1.0, 0.0, 0.0];
            }
            if x >= 5 && y >= 5 {
                p = GtPixel::SKY;
            }
            p
        });
        let map = classify_contexts(&gt, None).unwrap();
        assert!(map.has(4, 1, SpatialContext::Edge));
        assert!(!map.has(1, 1, SpatialContext::Edge));
        assert!(map.has(5, 4, SpatialContext::Corner));
    }

    #[test]
    fn occlusion_is_two_frame_id_change() {
        let a = synthetic(8, 8, |_, _| plane(0.0));
        let b = synthetic(8, 8, |x, _| {
            let mut p = plane(0.0);
            if x < 3 {
                p.object_id = 9;
            }
            p
        });
        let map = classify_contexts(&a, Some(&b)).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                assert_eq!(map.has(x, y, SpatialContext::Occluded), x < 3);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_pure() {
        let scene = presets::street_scene();
        let gt = render_ground_truth(&scene, &RenderConfig::new(64, 48, 1));
        let map = classify_contexts(&gt, None).unwrap();
        let a = sample_patches(&map, SpatialContext::Diffuse, 5, 10, 3).unwrap();
        assert_eq!(a, sample_patches(&map, SpatialContext::Diffuse, 5, 10, 3).unwrap());
        for p in &a {
            assert!(p.fits(64, 48));
            assert!(map.purity(p) >= PURITY);
            assert!(map.is_clean(p));
        }
    }

    #[test]
    fn count_errors() {
        let gt = synthetic(8, 8, |_, _| plane(0.0));
        let map = classify_contexts(&gt, None).unwrap();
        assert!(sample_patches(&map, SpatialContext::Edge, 3, 0, 1).unwrap().is_empty());
        assert!(matches!(sample_patches(&map, SpatialContext::Edge, 3, 1, 1), Err(Error::EmptyContext { .. })));
        assert!(matches!(
            sample_patches(&map, SpatialContext::Homogeneous, 3, 1000, 1),
            Err(Error::NotEnoughPatches { .. })
        ));
    }

    #[test]
    fn texture_separates_diffuse_from_homogeneous() {
        // left half uniform, right half a checker of two reflectances
        let gt = synthetic(24, 12, |x, y| {
            let mut p = plane(0.0);
            if x >= 12 {
                p.reflectance = if (x + y) % 2 == 0 { [0.3; 3] } else { [0.6; 3] };
            }
            p
        });
        let map = classify_contexts(&gt, None).unwrap();
        assert!(*map.homogeneous_side.get(3, 5) >= 7);
        assert_eq!(*map.homogeneous_side.get(18, 5), 0);
        let diffuse = map.eligible(SpatialContext::Diffuse, 5);
        let homogeneous = map.eligible(SpatialContext::Homogeneous, 5);
        assert!(diffuse.contains(&(16, 3)) && !diffuse.contains(&(2, 3)));
        assert!(homogeneous.contains(&(2, 3)) && !homogeneous.contains(&(16, 3)));
        assert!(map.is_eligible(&Patch::new(16, 3, 5, SpatialContext::Diffuse)));
    }

    #[test]
    fn diffuse_patches_stay_on_one_surface() {
        // two textured materials meeting at x = 12
        let gt = synthetic(24, 12, |x, y| {
            let mut p = plane(0.0);
            p.reflectance = if (x + y) % 2 == 0 { [0.3; 3] } else { [0.6; 3] };
            if x >= 12 {
                p.material_id = 3;
            }
            p
        });
        let map = classify_contexts(&gt, None).unwrap();
        let diffuse = map.eligible(SpatialContext::Diffuse, 5);
        assert!(diffuse.contains(&(3, 3)) && diffuse.contains(&(14, 3)));
        assert!(diffuse.iter().all(|&(x, _)| x + 5 <= 12 || x >= 12));
    }

    #[test]
    fn rle_round_trip() {
        let scene = presets::street_scene();
        let gt = render_ground_truth(&scene, &RenderConfig::new(32, 24, 1));
        let map = classify_contexts(&gt, None).unwrap();
        assert_eq!(ContextMap::from_rle_json(&map.to_rle_json()).unwrap(), map);
        assert_eq!(map.to_ppm().len(), "P6\n32 24\n255\n".len() + 32 * 24 * 3);
    }
}
