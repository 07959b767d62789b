//! Criterion measures for the invariance assumptions: order consistency,
//! brightness and gradient constancy, piecewise-smooth flow, and the
//! dichromatic atmospheric model.
//!
//! All functions are pure. Intensities are single-channel (see
//! [`crate::render::to_gray`] for the luma weights); the dichromatic measures
//! work on raw RGB.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patches::Patch;
use crate::render::{FlowField, GrayImage, Grid};

/// Which criterion a value measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    RhoOC,
    VarBC,
    VarGC,
    VarPS,
    AngErrDS,
}

impl CriterionKind {
    /// Whether a larger value means the assumption holds better.
    pub fn larger_is_better(self) -> bool {
        self == CriterionKind::RhoOC
    }

    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::RhoOC => "OC",
            CriterionKind::VarBC => "BC",
            CriterionKind::VarGC => "GC",
            CriterionKind::VarPS => "PS",
            CriterionKind::AngErrDS => "DS",
        }
    }
}

/// Population variance. Values are shifted by the first element before
/// accumulating, so a constant input gives exactly 0.
pub fn population_variance(values: &[f64]) -> f64 {
    let Some(&k) = values.first() else {
        return 0.0;
    };
    let n = values.len() as f64;
    let mean = values.iter().map(|v| v - k).sum::<f64>() / n;
    values.iter().map(|v| (v - k - mean).powi(2)).sum::<f64>() / n
}

/// Twice the average (1-based) rank of each value; integers even with ties.
fn doubled_ranks(v: &[f64]) -> Vec<i64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0i64; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // positions i..=j share rank ((i + 1) + (j + 1)) / 2
        for &k in &order[i..=j] {
            ranks[k] = (i + j + 2) as i64;
        }
        i = j + 1;
    }
    ranks
}

/// Average ranks, 1-based, smallest value first.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    doubled_ranks(v).into_iter().map(|r| r as f64 / 2.0).collect()
}

/// Spearman rank correlation: Pearson correlation of the average-tie ranks.
///
/// The rank sums are accumulated in integers, so the only rounding is the
/// final division and square root, and `+-1` is returned exactly when the
/// ranks are perfectly (anti)correlated.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(format!("{} vs {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("fewer than two values".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Degenerate("NaN value".into()));
    }
    let (rx, ry) = (doubled_ranks(x), doubled_ranks(y));
    let n = x.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (&a, &b) in rx.iter().zip(&ry) {
        let (a, b) = (a as i128, b as i128);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let num = n * sxy - sx * sy;
    let dx = n * sxx - sx * sx;
    let dy = n * syy - sy * sy;
    if dx == 0 || dy == 0 {
        return Err(Error::Degenerate("constant sequence has no rank order".into()));
    }
    let exact_unit = match (num.checked_mul(num), dx.checked_mul(dy)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    if exact_unit {
        return Ok(num.signum() as f64);
    }
    let rho = num as f64 / ((dx as f64).sqrt() * (dy as f64).sqrt());
    Ok(rho.clamp(-1.0, 1.0))
}

/// Intensities of `patch` in row-major order.
pub fn patch_values(img: &GrayImage, patch: &Patch) -> Vec<f64> {
    patch.pixels().map(|(x, y)| *img.get(x, y)).collect()
}

/// Order consistency of two co-located patches: `|rho|` over their
/// row-major pixel values.
pub fn oc_measure(reference: &[f64], current: &[f64]) -> Result<f64> {
    Ok(spearman_rho(reference, current)?.abs())
}

/// Bilinear sample; `None` outside `[0, w-1] x [0, h-1]`.
pub fn bilinear(img: &GrayImage, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (img.width as f64, img.height as f64);
    if !(x >= 0.0 && y >= 0.0 && x <= w - 1.0 && y <= h - 1.0) {
        return None;
    }
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let top = if fx == 0.0 {
        *img.get(x0, y0)
    } else {
        (1.0 - fx) * img.get(x0, y0) + fx * img.get(x1, y0)
    };
    if fy == 0.0 {
        return Some(top);
    }
    let bottom = if fx == 0.0 {
        *img.get(x0, y1)
    } else {
        (1.0 - fx) * img.get(x0, y1) + fx * img.get(x1, y1)
    };
    Some((1.0 - fy) * top + fy * bottom)
}

/// Two consecutive frames with the flow from the first to the second.
#[derive(Debug, Clone, Copy)]
pub struct MotionPair<'a> {
    pub frame_t: &'a GrayImage,
    pub frame_t1: &'a GrayImage,
    pub flow: &'a FlowField,
    /// Ground-truth occlusion mask of frame `t`, used when excluding occluded pixels.
    pub occlusion: Option<&'a Grid<bool>>,
}

impl MotionPair<'_> {
    fn check(&self, patch: &Patch) -> Result<()> {
        let (a, b) = (self.frame_t, self.frame_t1);
        if !a.same_size(b) || !a.same_size(self.flow) || self.occlusion.is_some_and(|o| !a.same_size(o)) {
            return Err(Error::SizeMismatch("frames, flow and occlusion mask differ in size".into()));
        }
        if !patch.fits(a.width, a.height) {
            return Err(Error::SizeMismatch(format!("patch {patch:?} outside {}x{}", a.width, a.height)));
        }
        Ok(())
    }

    fn skip(&self, x: usize, y: usize, exclude_occluded: bool) -> bool {
        exclude_occluded && self.occlusion.is_some_and(|o| *o.get(x, y))
    }
}

/// Brightness constancy: population variance of
/// `I(x + u, y + v, t + 1) - I(x, y, t)` over the patch.
///
/// Targets falling outside the second frame are always dropped; occluded
/// pixels only when `exclude_occluded` is set.
pub fn bc_variance(pair: &MotionPair, patch: &Patch, exclude_occluded: bool) -> Result<f64> {
    pair.check(patch)?;
    let mut residuals = Vec::with_capacity(patch.side * patch.side);
    for (x, y) in patch.pixels() {
        if pair.skip(x, y, exclude_occluded) {
            continue;
        }
        let [u, v] = *pair.flow.get(x, y);
        if let Some(i1) = bilinear(pair.frame_t1, x as f64 + u, y as f64 + v) {
            residuals.push(i1 - pair.frame_t.get(x, y));
        }
    }
    if residuals.is_empty() {
        return Err(Error::AllOccluded);
    }
    Ok(population_variance(&residuals))
}

/// Gradient constancy: pooled population variance of both components of
/// `grad I(x + u, y + v, t + 1) - grad I(x, y, t)`, with central differences,
/// over the patch interior (one-pixel border dropped).
pub fn gc_variance(pair: &MotionPair, patch: &Patch, exclude_occluded: bool) -> Result<f64> {
    if patch.side < 5 {
        return Err(Error::PatchTooSmall(patch.side));
    }
    pair.check(patch)?;
    let (f0, f1) = (pair.frame_t, pair.frame_t1);
    let mut residuals = Vec::with_capacity(2 * patch.side * patch.side);
    for y in patch.y + 1..patch.y + patch.side - 1 {
        for x in patch.x + 1..patch.x + patch.side - 1 {
            if pair.skip(x, y, exclude_occluded) {
                continue;
            }
            let gx0 = (f0.get(x + 1, y) - f0.get(x - 1, y)) / 2.0;
            let gy0 = (f0.get(x, y + 1) - f0.get(x, y - 1)) / 2.0;
            let [u, v] = *pair.flow.get(x, y);
            let (tx, ty) = (x as f64 + u, y as f64 + v);
            let g1 = (|| {
                let gx = (bilinear(f1, tx + 1.0, ty)? - bilinear(f1, tx - 1.0, ty)?) / 2.0;
                let gy = (bilinear(f1, tx, ty + 1.0)? - bilinear(f1, tx, ty - 1.0)?) / 2.0;
                Some((gx, gy))
            })();
            if let Some((gx1, gy1)) = g1 {
                residuals.push(gx1 - gx0);
                residuals.push(gy1 - gy0);
            }
        }
    }
    if residuals.is_empty() {
        return Err(Error::AllOccluded);
    }
    Ok(population_variance(&residuals))
}

/// Flow fields entering the piecewise-smoothness measure.
#[derive(Debug, Clone, Copy)]
pub enum FlowStack<'a> {
    /// One field; spatial forward differences on the `(s-1)^2` grid of the patch.
    Spatial(&'a FlowField),
    /// Previous, current and next fields; spatial central differences on the
    /// patch interior and temporal `(next - prev) / 2`.
    SpatioTemporal {
        prev: &'a FlowField,
        current: &'a FlowField,
        next: &'a FlowField,
    },
}

/// Piecewise-smooth flow: population variance over the patch of
/// `|grad3 u|^2 + |grad3 v|^2`.
pub fn ps_variance(flows: FlowStack, patch: &Patch) -> Result<f64> {
    let current = match flows {
        FlowStack::Spatial(f) => f,
        FlowStack::SpatioTemporal { prev, current, next } => {
            if !current.same_size(prev) || !current.same_size(next) {
                return Err(Error::SizeMismatch("temporal flow neighbours differ in size".into()));
            }
            current
        }
    };
    if !patch.fits(current.width, current.height) || patch.side < 2 {
        return Err(Error::SizeMismatch(format!("patch {patch:?} unusable on {}x{}", current.width, current.height)));
    }
    let mut energy = Vec::with_capacity(patch.side * patch.side);
    match flows {
        FlowStack::Spatial(f) => {
            for y in patch.y..patch.y + patch.side - 1 {
                for x in patch.x..patch.x + patch.side - 1 {
                    let c = f.get(x, y);
                    let (r, d) = (f.get(x + 1, y), f.get(x, y + 1));
                    let r2: f64 = (0..2).map(|k| (r[k] - c[k]).powi(2) + (d[k] - c[k]).powi(2)).sum();
                    energy.push(r2);
                }
            }
        }
        FlowStack::SpatioTemporal { prev, current: f, next } => {
            if patch.side < 3 {
                return Err(Error::PatchTooSmall(patch.side));
            }
            for y in patch.y + 1..patch.y + patch.side - 1 {
                for x in patch.x + 1..patch.x + patch.side - 1 {
                    let r2: f64 = (0..2)
                        .map(|k| {
                            let dx = (f.get(x + 1, y)[k] - f.get(x - 1, y)[k]) / 2.0;
                            let dy = (f.get(x, y + 1)[k] - f.get(x, y - 1)[k]) / 2.0;
                            let dt = (next.get(x, y)[k] - prev.get(x, y)[k]) / 2.0;
                            dx * dx + dy * dy + dt * dt
                        })
                        .sum();
                    energy.push(r2);
                }
            }
        }
    }
    Ok(population_variance(&energy))
}

/// Plane through the RGB origin best fitting the observations of one pixel:
/// the right singular vector of the smallest singular value. The sign makes
/// the largest-magnitude component positive (the first such component on an
/// exact tie).
pub fn fit_dichromatic_plane(observations: &[[f64; 3]]) -> Result<[f64; 3]> {
    if observations.len() < 3 {
        return Err(Error::Degenerate(format!("{} observations, need at least 3", observations.len())));
    }
    if observations.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Degenerate("colors must be finite and non-negative".into()));
    }
    let m = DMatrix::from_row_iterator(observations.len(), 3, observations.iter().flatten().copied());
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::RankDeficient)?;
    let s = &svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let (s1, s2) = (s[order[0]], s[order[1]]);
    if s1 == 0.0 || s2 <= 1e-6 * s1 {
        return Err(Error::RankDeficient);
    }
    let row = v_t.row(order[2]);
    let mut n = [row[0], row[1], row[2]];
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let mut lead = 0;
    for k in 1..3 {
        if n[k].abs() > n[lead].abs() {
            lead = k;
        }
    }
    let sign = if n[lead] < 0.0 { -1.0 } else { 1.0 };
    for c in &mut n {
        *c *= sign / len;
    }
    Ok(n)
}

/// Angle in degrees between a color vector and the plane with unit normal `n`;
/// `None` for the zero vector.
pub fn plane_angle_deg(v: &[f64; 3], n: &[f64; 3]) -> Option<f64> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm == 0.0 {
        return None;
    }
    let d = (v[0] * n[0] + v[1] * n[1] + v[2] * n[2]).abs() / norm;
    Some(d.min(1.0).asin().to_degrees())
}

/// Summary of the dichromatic plane test over many pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsSummary {
    /// Mean over pixels of the per-pixel mean angle, degrees.
    pub mean_deg: f64,
    /// Population standard deviation of the per-pixel mean angles.
    pub std_deg: f64,
    /// Fraction of individual observation angles below the threshold.
    pub fraction_below: f64,
    pub threshold_deg: f64,
    pub pixels: usize,
    /// Pixels dropped for having too few or collinear observations.
    pub excluded: usize,
}

/// Dichromatic angular error over pixels, each given as its observations
/// across weather conditions.
pub fn ds_angular_error(samples: &[Vec<[f64; 3]>], threshold_deg: f64) -> Result<DsSummary> {
    let mut pixel_means = Vec::new();
    let mut angles = 0usize;
    let mut below = 0usize;
    let mut excluded = 0;
    for obs in samples {
        let Ok(n) = fit_dichromatic_plane(obs) else {
            excluded += 1;
            continue;
        };
        let a: Vec<f64> = obs.iter().filter_map(|v| plane_angle_deg(v, &n)).collect();
        if a.is_empty() {
            excluded += 1;
            continue;
        }
        angles += a.len();
        below += a.iter().filter(|&&v| v < threshold_deg).count();
        pixel_means.push(a.iter().sum::<f64>() / a.len() as f64);
    }
    if pixel_means.is_empty() {
        return Err(Error::Degenerate("no pixel with a valid dichromatic plane".into()));
    }
    Ok(DsSummary {
        mean_deg: pixel_means.iter().sum::<f64>() / pixel_means.len() as f64,
        std_deg: population_variance(&pixel_means).sqrt(),
        fraction_below: below as f64 / angles as f64,
        threshold_deg,
        pixels: pixel_means.len(),
        excluded,
    })
}
