use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ingest::{ingest_sequence, IngestedSequence};
use super::manifold::{CriterionRecord, Gap, Manifold};
use super::{resolve, ModelKind, ProtocolConfig, Source, ALL_CONTEXTS};
use crate::error::{Error, Result};
use crate::patches::{classify_contexts, sample_patches, ContextMap, Patch, SpatialContext};
use crate::render::{
    airlight, apply_sensor, compute_flow, render_frame, render_ground_truth, to_gray, transmittance, Camera, FlowField,
    GrayImage, GroundTruthBuffers, MediumSpec, RadianceImage, RenderConfig, WeatherTag,
};
use crate::rng::{derive, label_key};
use crate::scenegen::{apply_dynamics, SceneGraph};
use crate::validators::{
    bc_variance, ds_angular_error, gc_variance, oc_measure, patch_values, population_variance, ps_variance, FlowStack,
    MotionPair,
};

/// Where a sweep reads relative paths from and keeps per-cell results.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions<'a> {
    /// Directory relative scene and ingest paths resolve against.
    pub base_dir: Option<&'a Path>,
    /// Finished cells are stored here under a content hash and reused by
    /// later runs with the same inputs.
    pub cache_dir: Option<&'a Path>,
}

/// Result of one theta_W cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct CellOutput {
    records: Vec<CriterionRecord>,
    gaps: Vec<Gap>,
}

/// Runs a protocol with no cache and paths relative to the working directory.
pub fn run_sweep(protocol: &ProtocolConfig) -> Result<Manifold> {
    run_sweep_with(protocol, SweepOptions::default())
}

pub fn run_sweep_with(protocol: &ProtocolConfig, opts: SweepOptions) -> Result<Manifold> {
    protocol.validate()?;
    match &protocol.source {
        Source::Simulate(src) => {
            let scene = src.load(opts.base_dir)?;
            simulate(protocol, &scene, opts.cache_dir)
        }
        Source::Ingest { directory, annotations } => {
            let seq = ingest_sequence(&resolve(opts.base_dir, directory), &resolve(opts.base_dir, annotations))?;
            evaluate_ingested(protocol, &seq)
        }
    }
}

/// Number of theta_W cells the protocol evaluates.
pub fn cell_count(protocol: &ProtocolConfig, base_dir: Option<&Path>) -> Result<usize> {
    protocol.validate()?;
    match &protocol.source {
        Source::Simulate(_) => Ok(grid(protocol).len()),
        Source::Ingest { directory, annotations } => {
            let seq = ingest_sequence(&resolve(base_dir, directory), &resolve(base_dir, annotations))?;
            Ok(ingest_frames(protocol, &seq).len())
        }
    }
}

/// Cartesian product of the theta_W axes, last axis fastest.
fn grid(p: &ProtocolConfig) -> Vec<Vec<f64>> {
    let mut cells = vec![Vec::new()];
    for axis in &p.theta_w {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    cells
}

struct Cell<'a> {
    names: &'a [String],
    coords: &'a [f64],
    key: u64,
}

impl Cell<'_> {
    fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coords[i])
    }

    fn frame(&self) -> usize {
        self.get("frame").unwrap_or(0.0) as usize
    }
}

fn cell_key(seed: u64, names: &[String], coords: &[f64]) -> u64 {
    let counters: Vec<u64> = names
        .iter()
        .zip(coords)
        .flat_map(|(n, v)| [label_key(n), v.to_bits()])
        .collect();
    derive(seed, &counters)
}

/// Applies the cell's weather and density, and with `lighting` its light
/// levels: `illumination_level` scales the light sources (sun, spots),
/// `light_scale` every light including the sky.
fn configure(scene: &SceneGraph, cell: &Cell, lighting: bool) -> SceneGraph {
    let mut s = scene.clone();
    if let Some(w) = cell.get("weather") {
        let scale = s.medium.beta_scale;
        s.medium = WeatherTag::from_index(w as usize).expect("validated weather index").preset();
        s.medium.beta_scale = scale;
    }
    if let Some(b) = cell.get("beta_scale") {
        s.medium.beta_scale *= b;
    }
    if lighting {
        for l in &mut s.lights {
            if let Some(v) = cell.get("illumination_level") {
                if l.is_direct() {
                    l.scale *= v;
                }
            }
            if let Some(v) = cell.get("light_scale") {
                l.scale *= v;
            }
        }
    }
    s
}

struct Sim<'a> {
    p: &'a ProtocolConfig,
    scene: &'a SceneGraph,
    names: Vec<String>,
    reference: Option<(GrayImage, GroundTruthBuffers)>,
}

impl Sim<'_> {
    fn render_cfg(&self, seed: u64) -> RenderConfig {
        RenderConfig {
            rng_seed: seed,
            ..self.p.render.clone()
        }
    }

    fn render_seed(&self, cell_key: u64, role: &str) -> u64 {
        if self.p.common_random_numbers {
            derive(self.p.seed, &[label_key("render")])
        } else {
            derive(cell_key, &[label_key(role)])
        }
    }

    fn to_signal(&self, hdr: &RadianceImage, noise_seed: u64) -> Result<RadianceImage> {
        match &self.p.sensor {
            None => Ok(hdr.clone()),
            Some(s) => {
                let mut s = s.clone();
                s.noise_seed = noise_seed;
                Ok(apply_sensor(hdr, &s)?.to_unit())
            }
        }
    }

    fn shoot(&self, scene: &SceneGraph, render_seed: u64, noise_seed: u64) -> Result<GrayImage> {
        let hdr = render_frame(scene, &self.render_cfg(render_seed));
        Ok(to_gray(&self.to_signal(&hdr, noise_seed)?))
    }

    fn noise_seed(cell_key: u64, role: &str) -> u64 {
        derive(cell_key, &[label_key("noise"), label_key(role)])
    }

    /// OC reference: first frame without dynamic objects, ambient light only.
    fn make_reference(&self) -> Result<(GrayImage, GroundTruthBuffers)> {
        let s = apply_dynamics(self.scene, 0)?.without_dynamic_objects().ambient_only();
        let seed = if self.p.common_random_numbers {
            derive(self.p.seed, &[label_key("render")])
        } else {
            derive(self.p.seed, &[label_key("reference")])
        };
        let gray = self.shoot(&s, seed, derive(self.p.seed, &[label_key("noise"), label_key("reference")]))?;
        let gt = render_ground_truth(&s, &self.render_cfg(0));
        Ok((gray, gt))
    }

    fn cell(&self, coords: &[f64]) -> Result<CellOutput> {
        let cell = Cell {
            names: &self.names,
            coords,
            key: cell_key(self.p.seed, &self.names, coords),
        };
        let f = cell.frame();
        let gt_cfg = self.render_cfg(0);
        match self.p.model {
            ModelKind::OC => {
                let (ref_gray, ref_gt) = self.reference.as_ref().expect("reference rendered before OC cells");
                let cur = configure(&apply_dynamics(self.scene, f)?, &cell, true);
                let gt = render_ground_truth(&cur, &gt_cfg);
                let map = classify_contexts(&gt, Some(ref_gt))?;
                let img = self.shoot(&cur, self.render_seed(cell.key, "current"), Self::noise_seed(cell.key, "current"))?;
                evaluate_patches(self.p, &map, &cell, |patch| {
                    oc_measure(&patch_values(ref_gray, patch), &patch_values(&img, patch))
                })
            }
            ModelKind::BC | ModelKind::GC => {
                let s0 = configure(&apply_dynamics(self.scene, f)?, &cell, false);
                let s1 = configure(&apply_dynamics(self.scene, f + 1)?, &cell, true);
                let gt = compute_flow(&s0, &s1, &gt_cfg)?;
                let map = classify_contexts(&gt, None)?;
                let i0 = self.shoot(&s0, self.render_seed(cell.key, "frame_t"), Self::noise_seed(cell.key, "frame_t"))?;
                let i1 = self.shoot(&s1, self.render_seed(cell.key, "frame_t1"), Self::noise_seed(cell.key, "frame_t1"))?;
                let pair = MotionPair {
                    frame_t: &i0,
                    frame_t1: &i1,
                    flow: gt.flow.as_ref().expect("compute_flow fills flow"),
                    occlusion: gt.occlusion.as_ref(),
                };
                let gc = self.p.model == ModelKind::GC;
                let excl = self.p.exclude_occluded;
                evaluate_patches(self.p, &map, &cell, |patch| {
                    if gc {
                        gc_variance(&pair, patch, excl)
                    } else {
                        bc_variance(&pair, patch, excl)
                    }
                })
            }
            ModelKind::PS => {
                let at = |t: usize| -> Result<SceneGraph> { Ok(configure(&apply_dynamics(self.scene, t)?, &cell, true)) };
                let gt = compute_flow(&at(f)?, &at(f + 1)?, &gt_cfg)?;
                let map = classify_contexts(&gt, None)?;
                let flow = gt.flow.as_ref().expect("compute_flow fills flow");
                if !self.p.temporal {
                    return evaluate_patches(self.p, &map, &cell, |patch| ps_variance(FlowStack::Spatial(flow), patch));
                }
                let neighbours = (|| -> Result<(FlowField, FlowField)> {
                    if f == 0 {
                        return Err(Error::FrameOutOfRange { frame: 0, frames: 0 });
                    }
                    let prev = compute_flow(&at(f - 1)?, &at(f)?, &gt_cfg)?.flow.expect("flow");
                    let next = compute_flow(&at(f + 1)?, &at(f + 2)?, &gt_cfg)?.flow.expect("flow");
                    Ok((prev, next))
                })();
                match neighbours {
                    Ok((prev, next)) => evaluate_patches(self.p, &map, &cell, |patch| {
                        ps_variance(
                            FlowStack::SpatioTemporal {
                                prev: &prev,
                                current: flow,
                                next: &next,
                            },
                            patch,
                        )
                    }),
                    Err(Error::FrameOutOfRange { .. }) => Ok(all_gaps(self.p, &cell, "missing temporal neighbour frames")),
                    Err(e) => Err(e),
                }
            }
            ModelKind::DS => self.ds_cell(&cell),
        }
    }

    /// Dichromatic test: the clear-air frame is composited with the medium
    /// at every density level of `beta_levels`, giving one color observation
    /// per level and pixel. Overcast conditions drop the direct lights.
    fn ds_cell(&self, cell: &Cell) -> Result<CellOutput> {
        let mut base = configure(&apply_dynamics(self.scene, cell.frame())?, cell, true);
        if !base.medium.weather.sunny() {
            base = base.ambient_only();
        }
        let mut clear = base.clone();
        clear.medium = MediumSpec::default();
        let radiance = render_frame(&clear, &self.render_cfg(self.render_seed(cell.key, "clear")));
        let gt = render_ground_truth(&clear, &self.render_cfg(0));
        let (w, h) = (radiance.width, radiance.height);
        let camera = Camera::new(&base.camera, w, h);
        let mut samples: Vec<Vec<[f64; 3]>> = vec![Vec::with_capacity(self.p.beta_levels.len()); w * h];
        for (k, &level) in self.p.beta_levels.iter().enumerate() {
            let mut medium = base.medium.clone();
            medium.beta_scale *= level;
            let composite = RadianceImage::from_fn(w, h, |x, y| {
                let d = gt.pixels.get(x, y).depth;
                let dir = camera.ray(x as f64 + 0.5, y as f64 + 0.5).dir;
                let t = transmittance(&medium, d);
                let a = airlight(&medium, [dir.x, dir.y, dir.z], &base.lights, d);
                let l = radiance.get(x, y);
                [0, 1, 2].map(|c| if t[c] > 0.0 { t[c] * l[c] + a[c] } else { a[c] })
            });
            let signal = self.to_signal(&composite, derive(cell.key, &[label_key("noise"), k as u64]))?;
            for (s, px) in samples.iter_mut().zip(&signal.data) {
                s.push(*px);
            }
        }
        let context = ALL_CONTEXTS.to_string();
        match ds_angular_error(&samples, self.p.threshold_deg) {
            Ok(s) => Ok(CellOutput {
                records: vec![CriterionRecord {
                    context,
                    theta_w: cell.coords.to_vec(),
                    theta_v: Vec::new(),
                    mean: s.mean_deg,
                    std: s.std_deg,
                    n: s.pixels,
                    skipped: s.excluded,
                    fraction_below: Some(s.fraction_below),
                }],
                gaps: Vec::new(),
            }),
            Err(Error::Degenerate(reason)) => Ok(CellOutput {
                records: Vec::new(),
                gaps: vec![Gap {
                    context,
                    theta_w: cell.coords.to_vec(),
                    theta_v: Vec::new(),
                    reason,
                }],
            }),
            Err(e) => Err(e),
        }
    }
}

fn all_gaps(p: &ProtocolConfig, cell: &Cell, reason: &str) -> CellOutput {
    let mut out = CellOutput::default();
    for &side in &p.sides {
        for c in &p.contexts {
            out.gaps.push(Gap {
                context: c.name().into(),
                theta_w: cell.coords.to_vec(),
                theta_v: vec![side as f64],
                reason: reason.into(),
            });
        }
    }
    out
}

fn undefined(e: &Error) -> bool {
    matches!(e, Error::Degenerate(_) | Error::AllOccluded | Error::PatchTooSmall(_))
}

fn record(context: &str, cell: &Cell, side: usize, values: &[f64], skipped: usize) -> CriterionRecord {
    CriterionRecord {
        context: context.into(),
        theta_w: cell.coords.to_vec(),
        theta_v: vec![side as f64],
        mean: values.iter().sum::<f64>() / values.len() as f64,
        std: population_variance(values).sqrt(),
        n: values.len(),
        skipped,
        fraction_below: None,
    }
}

/// Samples up to `patches_per_cell` patches per (side, context) and
/// aggregates `eval` over them. Contexts without eligible patches, and
/// contexts whose every sample is undefined, become gaps.
fn evaluate_patches(
    p: &ProtocolConfig,
    map: &ContextMap,
    cell: &Cell,
    eval: impl Fn(&Patch) -> Result<f64> + Sync,
) -> Result<CellOutput> {
    let mut out = CellOutput::default();
    let seed = derive(cell.key, &[label_key("patches")]);
    for &side in &p.sides {
        let mut pooled = Vec::new();
        let mut pooled_skipped = 0;
        for &context in &p.contexts {
            let gap = |reason: String| Gap {
                context: context.name().into(),
                theta_w: cell.coords.to_vec(),
                theta_v: vec![side as f64],
                reason,
            };
            let patches = match sample_patches(map, context, side, p.patches_per_cell, seed) {
                Ok(v) => v,
                Err(Error::NotEnoughPatches { available, .. }) => sample_patches(map, context, side, available, seed)?,
                Err(e @ Error::EmptyContext { .. }) => {
                    out.gaps.push(gap(e.to_string()));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let results: Vec<Result<f64>> = patches.par_iter().map(&eval).collect();
            let mut values = Vec::with_capacity(results.len());
            let mut skipped = 0;
            for r in results {
                match r {
                    Ok(v) => values.push(v),
                    Err(e) if undefined(&e) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            if values.is_empty() {
                out.gaps.push(gap(format!("all {skipped} samples undefined")));
                continue;
            }
            pooled.extend_from_slice(&values);
            pooled_skipped += skipped;
            out.records.push(record(context.name(), cell, side, &values, skipped));
        }
        if p.pooled && !pooled.is_empty() {
            out.records.push(record(ALL_CONTEXTS, cell, side, &pooled, pooled_skipped));
        }
    }
    Ok(out)
}

/// Content hash of everything that determines a cell's output.
fn cell_hash(p: &ProtocolConfig, scene_json: &str, names: &[String], coords: &[f64]) -> String {
    let mut sans_grid = p.clone();
    for a in &mut sans_grid.theta_w {
        a.values.clear();
    }
    let key = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "protocol": sans_grid,
        "scene": scene_json,
        "axes": names,
        "coords": coords.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
    });
    hex::encode(Sha256::digest(key.to_string().as_bytes()))
}

fn read_cached(path: &Path) -> Option<CellOutput> {
    serde_json::from_str(&fs::read_to_string(path).ok()?).ok()
}

fn write_cached(path: &Path, out: &CellOutput) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_vec(out)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

fn simulate(p: &ProtocolConfig, scene: &SceneGraph, cache: Option<&Path>) -> Result<Manifold> {
    let names = p.axis_names();
    let cells = grid(p);
    let scene_json = scene.to_json();
    if let Some(dir) = cache {
        fs::create_dir_all(dir)?;
    }
    let paths: Vec<Option<std::path::PathBuf>> = cells
        .iter()
        .map(|c| cache.map(|d| d.join(format!("{}.json", cell_hash(p, &scene_json, &names, c)))))
        .collect();
    let cached: Vec<Option<CellOutput>> = paths.iter().map(|path| path.as_deref().and_then(read_cached)).collect();

    let mut sim = Sim {
        p,
        scene,
        names: names.clone(),
        reference: None,
    };
    if p.model == ModelKind::OC && cached.iter().any(Option::is_none) {
        sim.reference = Some(sim.make_reference()?);
    }
    let outputs: Vec<CellOutput> = cells
        .par_iter()
        .zip(cached.into_par_iter())
        .zip(paths.par_iter())
        .map(|((coords, hit), path)| -> Result<CellOutput> {
            if let Some(out) = hit {
                return Ok(out);
            }
            let out = sim.cell(coords)?;
            if let Some(path) = path {
                write_cached(path, &out)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut m = Manifold {
        model: p.model,
        theta_w_names: names,
        theta_v_names: p.theta_v_names(),
        records: Vec::new(),
        gaps: Vec::new(),
    };
    for out in outputs {
        m.records.extend(out.records);
        m.gaps.extend(out.gaps);
    }
    Ok(m)
}

/// Frames of an ingested sequence that form theta_W cells: every frame but
/// the reference for OC, every frame with a successor for BC/GC/PS, and a
/// single image-wide cell for DS. A `frame` axis restricts the list.
fn ingest_frames(p: &ProtocolConfig, seq: &IngestedSequence) -> Vec<usize> {
    let n = seq.frames.len();
    let all: Vec<usize> = match p.model {
        ModelKind::OC => (0..n).filter(|&f| f != seq.reference).collect(),
        ModelKind::BC | ModelKind::GC | ModelKind::PS => (0..n.saturating_sub(1)).collect(),
        ModelKind::DS => return vec![0],
    };
    match p.theta_w.iter().find(|a| a.name == "frame") {
        Some(axis) => all.into_iter().filter(|&f| axis.values.contains(&(f as f64))).collect(),
        None => all,
    }
}

fn evaluate_ingested(p: &ProtocolConfig, seq: &IngestedSequence) -> Result<Manifold> {
    if let Some(a) = p.theta_w.iter().find(|a| a.name != "frame") {
        return Err(Error::InvalidConfig(format!("axis `{}` cannot be swept on recorded data", a.name)));
    }
    let gray: Vec<GrayImage> = seq.frames.iter().map(to_gray).collect();
    let names: Vec<String> = if p.model == ModelKind::DS { Vec::new() } else { vec!["frame".into()] };
    let mut m = Manifold {
        model: p.model,
        theta_w_names: names.clone(),
        theta_v_names: p.theta_v_names(),
        records: Vec::new(),
        gaps: Vec::new(),
    };
    if p.model == ModelKind::DS {
        let (w, h) = (seq.frames[0].width, seq.frames[0].height);
        let samples: Vec<Vec<[f64; 3]>> = (0..w * h).map(|i| seq.frames.iter().map(|f| f.data[i]).collect()).collect();
        let s = ds_angular_error(&samples, p.threshold_deg)?;
        m.records.push(CriterionRecord {
            context: ALL_CONTEXTS.into(),
            theta_w: Vec::new(),
            theta_v: Vec::new(),
            mean: s.mean_deg,
            std: s.std_deg,
            n: s.pixels,
            skipped: s.excluded,
            fraction_below: Some(s.fraction_below),
        });
        return Ok(m);
    }

    let zero = FlowField::filled(gray[0].width, gray[0].height, [0.0, 0.0]);
    let flow_at = |f: usize| -> Result<&FlowField> {
        match seq.flows.get(f).and_then(Option::as_ref) {
            Some(flow) => Ok(flow),
            None if p.zero_flow && p.model != ModelKind::PS => Ok(&zero),
            None => Err(Error::MissingBuffer(format!("flow for frame pair ({f}, {})", f + 1))),
        }
    };
    for f in ingest_frames(p, seq) {
        let coords = [f as f64];
        let cell = Cell {
            names: &names,
            coords: &coords,
            key: 0,
        };
        let eval = |patch: &Patch| -> Result<f64> {
            match p.model {
                ModelKind::OC => oc_measure(&patch_values(&gray[seq.reference], patch), &patch_values(&gray[f], patch)),
                ModelKind::BC | ModelKind::GC => {
                    let pair = MotionPair {
                        frame_t: &gray[f],
                        frame_t1: &gray[f + 1],
                        flow: flow_at(f)?,
                        occlusion: None,
                    };
                    if p.model == ModelKind::GC {
                        gc_variance(&pair, patch, p.exclude_occluded)
                    } else {
                        bc_variance(&pair, patch, p.exclude_occluded)
                    }
                }
                ModelKind::PS if p.temporal => {
                    if f == 0 {
                        return Err(Error::MissingBuffer("flow before the first frame".into()));
                    }
                    let stack = FlowStack::SpatioTemporal {
                        prev: flow_at(f - 1)?,
                        current: flow_at(f)?,
                        next: flow_at(f + 1)?,
                    };
                    ps_variance(stack, patch)
                }
                ModelKind::PS => ps_variance(FlowStack::Spatial(flow_at(f)?), patch),
                ModelKind::DS => unreachable!("handled above"),
            }
        };
        // annotated patches grouped by side, then context, in annotation order
        let mut sides: Vec<usize> = seq.patches.iter().map(|q| q.side).collect();
        sides.sort_unstable();
        sides.dedup();
        for side in sides {
            let mut contexts: Vec<SpatialContext> = Vec::new();
            for q in seq.patches.iter().filter(|q| q.side == side) {
                if !contexts.contains(&q.context) {
                    contexts.push(q.context);
                }
            }
            let mut pooled = Vec::new();
            let mut pooled_skipped = 0;
            for context in contexts {
                let mut values = Vec::new();
                let mut skipped = 0;
                for q in seq.patches.iter().filter(|q| q.side == side && q.context == context) {
                    match eval(q) {
                        Ok(v) => values.push(v),
                        Err(e) if undefined(&e) => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
                if values.is_empty() {
                    m.gaps.push(Gap {
                        context: context.name().into(),
                        theta_w: coords.to_vec(),
                        theta_v: vec![side as f64],
                        reason: format!("all {skipped} samples undefined"),
                    });
                    continue;
                }
                pooled.extend_from_slice(&values);
                pooled_skipped += skipped;
                m.records.push(record(context.name(), &cell, side, &values, skipped));
            }
            if p.pooled && !pooled.is_empty() {
                m.records.push(record(ALL_CONTEXTS, &cell, side, &pooled, pooled_skipped));
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::super::{AxisSpec, SceneSource};
    use super::*;
    use crate::render::SensorConfig;

    fn small(model: ModelKind, preset: &str) -> ProtocolConfig {
        let mut p = ProtocolConfig::new(model, Source::Simulate(SceneSource::Preset(preset.into())));
        p.render = RenderConfig::new(48, 36, 2);
        p.sides = vec![5];
        p.patches_per_cell = 4;
        p
    }

    #[test]
    fn grid_is_row_major() {
        let mut p = small(ModelKind::OC, "street");
        p.theta_w = vec![AxisSpec::new("illumination_level", vec![1.0, 2.0]), AxisSpec::new("frame", vec![0.0, 1.0, 2.0])];
        let g = grid(&p);
        assert_eq!(g.len(), 6);
        assert_eq!(g[1], vec![1.0, 1.0]);
        assert_eq!(g[3], vec![2.0, 0.0]);
    }

    #[test]
    fn oc_identical_frames_give_one() {
        // ambient-only scene with no dynamic objects: current frame equals the reference
        let mut scene = crate::presets::street_scene().without_dynamic_objects().ambient_only();
        scene.dynamics = Default::default();
        let mut p = small(ModelKind::OC, "street");
        p.source = Source::Simulate(SceneSource::Graph(Box::new(scene)));
        p.common_random_numbers = true;
        p.sensor = None;
        p.contexts = vec![SpatialContext::Diffuse];
        let m = run_sweep(&p).unwrap();
        assert_eq!(m.records.len(), 1);
        assert_eq!(m.records[0].mean, 1.0);
    }

    #[test]
    fn cells_are_independent() {
        let mut p = small(ModelKind::OC, "street");
        p.sensor = Some(SensorConfig::default());
        p.contexts = vec![SpatialContext::Diffuse, SpatialContext::Edge];
        p.theta_w = vec![AxisSpec::new("illumination_level", vec![0.5, 1.5, 3.0])];
        let full = run_sweep(&p).unwrap();
        p.theta_w = vec![AxisSpec::new("illumination_level", vec![1.5])];
        let one = run_sweep(&p).unwrap();
        let from_full: Vec<_> = full.records.iter().filter(|r| r.theta_w == vec![1.5]).cloned().collect();
        assert_eq!(from_full, one.records);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = small(ModelKind::BC, "two_box");
        p.contexts = vec![SpatialContext::SameSurface, SpatialContext::Occluded];
        p.theta_w = vec![AxisSpec::new("light_scale", vec![1.0, 2.0])];
        let opts = SweepOptions {
            base_dir: None,
            cache_dir: Some(dir.path()),
        };
        let a = run_sweep_with(&p, opts).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
        let b = run_sweep_with(&p, opts).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a, run_sweep(&p).unwrap());
    }

    #[test]
    fn ps_temporal_needs_neighbours() {
        let mut p = small(ModelKind::PS, "two_box");
        p.temporal = true;
        p.contexts = vec![SpatialContext::SameSurface];
        p.theta_w = vec![AxisSpec::new("frame", vec![0.0, 2.0])];
        let m = run_sweep(&p).unwrap();
        assert_eq!(m.gaps.len(), 1);
        assert_eq!(m.gaps[0].theta_w, vec![0.0]);
        assert_eq!(m.records.len(), 1);
    }

    #[test]
    fn ds_fog_is_coplanar() {
        let mut p = small(ModelKind::DS, "street");
        p.sensor = None;
        p.theta_w = vec![AxisSpec::new("weather", vec![WeatherTag::Fog.index() as f64])];
        let m = run_sweep(&p).unwrap();
        assert!(m.records[0].mean < 1e-6, "{:?}", m.records[0]);
        assert_eq!(m.records[0].fraction_below, Some(1.0));
    }
}
