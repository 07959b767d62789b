use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use visval::io::{encode_flo, encode_pfm_gray, encode_pfm_rgb, encode_ppm};
use visval::patches::classify_contexts;
use visval::render::{
    apply_sensor, compute_flow, render_frame, render_ground_truth, GrayImage, Grid, LdrImage, RadianceImage,
    RenderConfig, SensorConfig,
};
use visval::rng::{derive, label_key};
use visval::scenegen::{apply_dynamics, sample_scene, SceneConfig, SceneGraph};

use crate::manifest::Recorder;
use crate::Globals;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn sample(g: &Globals, config: &Path, out: &Path) -> Result<()> {
    let text = read(config)?;
    let seed = g.seed.unwrap_or(0);
    let mut rec = Recorder::new("sample", g.dry_run);
    rec.input("config", text.as_bytes());
    rec.seed("scene", seed);
    let cfg = SceneConfig::from_json(&text).with_context(|| format!("scene config {}", config.display()))?;
    let scene = rec.stage("sample", || sample_scene(&cfg, seed))?;
    rec.write(out, (scene.to_json() + "\n").as_bytes())?;
    let manifest = rec.finish(&out.with_extension("manifest.json"))?;
    g.say(format!(
        "sampled {} objects into {}",
        scene.objects.len(),
        out.display()
    ));
    g.paths(&manifest.outputs);
    Ok(())
}

/// Inclusive frame range `a..b`, or a single frame `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRange {
    pub first: usize,
    pub last: usize,
}

impl std::str::FromStr for FrameRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad frame `{v}`: {e}"));
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let f = parse(s)?;
                (f, f)
            }
        };
        if last < first {
            return Err(format!("empty frame range {s}"));
        }
        Ok(Self { first, last })
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Scene graph JSON.
    pub scene: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub spp: usize,
    /// Inclusive range, e.g. `0..3`.
    #[arg(long, default_value = "0")]
    pub frames: FrameRange,
    #[arg(long, default_value_t = 320)]
    pub width: usize,
    #[arg(long, default_value_t = 240)]
    pub height: usize,
    #[arg(long, default_value_t = 1)]
    pub bounces: usize,
    /// Sensor config JSON; the default sensor is used otherwise.
    #[arg(long)]
    pub sensor: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Per-frame sidecar echoing the render settings and listing the files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSidecar {
    pub frame: usize,
    pub scene: PathBuf,
    pub seed: u64,
    pub render: RenderConfig,
    pub sensor: SensorConfig,
    pub files: BTreeMap<String, String>,
}

fn gray(img: &Grid<f64>) -> Vec<u8> {
    encode_pfm_gray(img)
}

fn mask_ppm(mask: &Grid<bool>) -> Vec<u8> {
    encode_ppm(&LdrImage {
        bits: 8,
        pixels: mask.map(|&m| if m { [255; 3] } else { [0; 3] }),
    })
}

fn ids_json(scene_gt: &visval::render::GroundTruthBuffers) -> Result<String> {
    let px = &scene_gt.pixels;
    let v = serde_json::json!({
        "width": px.width,
        "height": px.height,
        "object_id": px.data.iter().map(|p| p.object_id).collect::<Vec<_>>(),
        "material_id": px.data.iter().map(|p| p.material_id).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string(&v)? + "\n")
}

pub fn render(g: &Globals, args: &RenderArgs) -> Result<()> {
    let text = read(&args.scene)?;
    let scene = SceneGraph::from_json(&text).with_context(|| format!("scene {}", args.scene.display()))?;
    let sensor = match &args.sensor {
        Some(p) => serde_json::from_str::<SensorConfig>(&read(p)?).with_context(|| format!("sensor {}", p.display()))?,
        None => SensorConfig::default(),
    };
    sensor.validate()?;
    let seed = g.seed.unwrap_or(0);
    let mut cfg = RenderConfig::new(args.width, args.height, args.spp);
    cfg.max_bounces = args.bounces;
    cfg.validate()?;
    let frames = args.frames;
    if !scene.dynamics.is_empty() && frames.last >= scene.dynamics.frames {
        return Err(visval::Error::FrameOutOfRange {
            frame: frames.last,
            frames: scene.dynamics.frames,
        }
        .into());
    }

    let mut rec = Recorder::new("render", g.dry_run);
    rec.input("scene", text.as_bytes());
    rec.input("render", serde_json::to_string(&cfg)?.as_bytes());
    rec.input("sensor", serde_json::to_string(&sensor)?.as_bytes());
    rec.input("frames", format!("{}..{}", frames.first, frames.last).as_bytes());
    rec.seed("master", seed);

    let states: Vec<SceneGraph> = (frames.first..=frames.last)
        .map(|t| apply_dynamics(&scene, t))
        .collect::<visval::Result<_>>()?;

    let dir = &args.out_dir;
    for f in frames.first..=frames.last {
        let i = f - frames.first;
        let state = &states[i];
        let name = |suffix: &str| format!("frame_{f:04}.{suffix}");
        let mut files = BTreeMap::new();
        let mut frame_cfg = cfg.clone();
        frame_cfg.rng_seed = derive(seed, &[label_key("render"), f as u64]);
        let mut frame_sensor = sensor.clone();
        frame_sensor.noise_seed = derive(seed, &[label_key("noise"), sensor.noise_seed, f as u64]);

        let mut emit = |rec: &mut Recorder, key: &str, file: String, bytes: &dyn Fn() -> Result<Vec<u8>>| -> Result<()> {
            let bytes = if rec.dry_run() { Vec::new() } else { bytes()? };
            rec.write(&dir.join(&file), &bytes)?;
            files.insert(key.to_string(), file);
            Ok(())
        };

        if g.dry_run {
            for (key, suffix) in [
                ("radiance", "pfm"),
                ("image", "ppm"),
                ("depth", "depth.pfm"),
                ("normal", "normal.pfm"),
                ("reflectance", "reflectance.pfm"),
                ("shadow", "shadow.pfm"),
                ("ids", "ids.json"),
                ("contexts", "contexts.json"),
            ] {
                emit(&mut rec, key, name(suffix), &|| Ok(Vec::new()))?;
            }
            if states.len() > i + 1 {
                emit(&mut rec, "flow", name("flo"), &|| Ok(Vec::new()))?;
                emit(&mut rec, "occlusion", name("occlusion.ppm"), &|| Ok(Vec::new()))?;
            }
        } else {
            let hdr: RadianceImage = rec.stage(&format!("render {f}"), || render_frame(state, &frame_cfg));
            let ldr = apply_sensor(&hdr, &frame_sensor)?;
            let gt = rec.stage(&format!("ground truth {f}"), || match states.get(i + 1) {
                Some(next) => compute_flow(state, next, &cfg),
                None => Ok(render_ground_truth(state, &cfg)),
            })?;
            let contexts = classify_contexts(&gt, None)?;
            let depth: GrayImage = gt.depth();
            emit(&mut rec, "radiance", name("pfm"), &|| Ok(encode_pfm_rgb(&hdr)))?;
            emit(&mut rec, "image", name("ppm"), &|| Ok(encode_ppm(&ldr)))?;
            emit(&mut rec, "depth", name("depth.pfm"), &|| Ok(gray(&depth)))?;
            emit(&mut rec, "normal", name("normal.pfm"), &|| {
                Ok(encode_pfm_rgb(&gt.pixels.map(|p| p.normal)))
            })?;
            emit(&mut rec, "reflectance", name("reflectance.pfm"), &|| {
                Ok(encode_pfm_rgb(&gt.pixels.map(|p| p.reflectance)))
            })?;
            emit(&mut rec, "shadow", name("shadow.pfm"), &|| {
                Ok(gray(&gt.pixels.map(|p| p.shadow_fraction)))
            })?;
            emit(&mut rec, "ids", name("ids.json"), &|| Ok(ids_json(&gt)?.into_bytes()))?;
            emit(&mut rec, "contexts", name("contexts.json"), &|| Ok(contexts.to_rle_json().into_bytes()))?;
            if let (Some(flow), Some(occ)) = (&gt.flow, &gt.occlusion) {
                emit(&mut rec, "flow", name("flo"), &|| Ok(encode_flo(flow)))?;
                emit(&mut rec, "occlusion", name("occlusion.ppm"), &|| Ok(mask_ppm(occ)))?;
            }
        }

        let sidecar = FrameSidecar {
            frame: f,
            scene: args.scene.clone(),
            seed,
            render: frame_cfg,
            sensor: frame_sensor,
            files,
        };
        rec.write(&dir.join(name("json")), (serde_json::to_string_pretty(&sidecar)? + "\n").as_bytes())?;
    }
    let count = frames.last - frames.first + 1;
    let manifest = rec.finish(&dir.join("manifest.json"))?;
    if g.dry_run {
        g.say(format!(
            "would render {count} frame(s) at {}x{} and {} spp into {}",
            cfg.width,
            cfg.height,
            cfg.samples_per_pixel,
            dir.display()
        ));
    } else {
        g.say(format!("rendered {count} frame(s) into {}", dir.display()));
    }
    g.paths(&manifest.outputs);
    Ok(())
}
