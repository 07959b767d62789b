//! Characterization protocol: sweeps criterion measures over grids of scene
//! (theta_W) and model (theta_V) parameters, assembles manifolds, marginalizes
//! them and compares context rankings between data sources.

mod ingest;
mod manifold;
mod ranking;
mod svg;
mod sweep;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patches::{SpatialContext, DEFAULT_SIDES};
use crate::presets;
use crate::render::{RenderConfig, SensorConfig, WeatherTag};
use crate::scenegen::{sample_scene, SceneConfig, SceneGraph};
use crate::validators::CriterionKind;

pub use ingest::{ingest_sequence, Annotation, AnnotatedPatch, IngestedSequence};
pub use manifold::{marginalize, CriterionRecord, Gap, Integration, Manifold, Marginal, MarginalRow};
pub use ranking::{compare_rankings, rank_items, RankingComparison};
pub use svg::heatmap_svg;
pub use sweep::{cell_count, run_sweep, run_sweep_with, SweepOptions};

/// Scene parameters a sweep can vary.
pub const THETA_W_AXES: [&str; 5] = ["frame", "illumination_level", "light_scale", "beta_scale", "weather"];

/// Context label of pooled records and of the dichromatic measure, which is
/// evaluated over whole images.
pub const ALL_CONTEXTS: &str = "All";

/// Vision model whose assumption is validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    OC,
    BC,
    GC,
    PS,
    DS,
}

impl ModelKind {
    pub fn criterion(self) -> CriterionKind {
        match self {
            ModelKind::OC => CriterionKind::RhoOC,
            ModelKind::BC => CriterionKind::VarBC,
            ModelKind::GC => CriterionKind::VarGC,
            ModelKind::PS => CriterionKind::VarPS,
            ModelKind::DS => CriterionKind::AngErrDS,
        }
    }

    pub fn name(self) -> &'static str {
        self.criterion().name()
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [ModelKind::OC, ModelKind::BC, ModelKind::GC, ModelKind::PS, ModelKind::DS]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
    }

    /// Whether the model has a patch-size parameter.
    pub fn uses_patches(self) -> bool {
        self != ModelKind::DS
    }
}

/// Where the scene of a simulated sweep comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneSource {
    /// `street` or `two_box`.
    Preset(String),
    /// Scene graph JSON file; relative paths resolve against the protocol file.
    Path(PathBuf),
    Graph(Box<SceneGraph>),
    Sample { config: Box<SceneConfig>, seed: u64 },
}

impl SceneSource {
    pub fn load(&self, base: Option<&Path>) -> Result<SceneGraph> {
        match self {
            SceneSource::Preset(name) => match name.as_str() {
                "street" => Ok(presets::street_scene()),
                "two_box" => Ok(presets::two_box_scene()),
                other => Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
            },
            SceneSource::Path(p) => {
                let path = resolve(base, p);
                SceneGraph::from_json(&std::fs::read_to_string(path)?)
            }
            SceneSource::Graph(g) => {
                g.validate()?;
                Ok((**g).clone())
            }
            SceneSource::Sample { config, seed } => sample_scene(config, *seed),
        }
    }
}

pub(crate) fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

/// Simulated or real image data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Simulate(SceneSource),
    Ingest { directory: PathBuf, annotations: PathBuf },
}

/// One theta_W axis and its grid values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub values: Vec<f64>,
}

impl AxisSpec {
    pub fn new(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// `count` evenly spaced values from `from` to `to` inclusive.
    pub fn linspace(name: &str, from: f64, to: f64, count: usize) -> Self {
        let values = match count {
            0 => Vec::new(),
            1 => vec![from],
            _ => (0..count).map(|i| from + (to - from) * i as f64 / (count - 1) as f64).collect(),
        };
        Self::new(name, values)
    }
}

fn default_render() -> RenderConfig {
    RenderConfig::default()
}

fn default_sensor() -> Option<SensorConfig> {
    Some(SensorConfig::default())
}

fn default_sides() -> Vec<usize> {
    DEFAULT_SIDES.to_vec()
}

fn default_contexts() -> Vec<SpatialContext> {
    use SpatialContext::*;
    vec![Homogeneous, Diffuse, Specular, ShadowRegion, ShadowBoundary, Edge, Corner, Occluded]
}

fn default_patches() -> usize {
    20
}

fn default_threshold() -> f64 {
    3.0
}

fn default_beta_levels() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}

/// A characterization protocol (the JSON document read by `visval sweep`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub model: ModelKind,
    pub source: Source,
    #[serde(default = "default_render")]
    pub render: RenderConfig,
    /// Camera model applied to rendered frames; `null` evaluates the linear
    /// HDR radiance directly.
    #[serde(default = "default_sensor")]
    pub sensor: Option<SensorConfig>,
    #[serde(default)]
    pub theta_w: Vec<AxisSpec>,
    /// Patch sides (theta_V); ignored by DS.
    #[serde(default = "default_sides")]
    pub sides: Vec<usize>,
    #[serde(default = "default_contexts")]
    pub contexts: Vec<SpatialContext>,
    #[serde(default = "default_patches")]
    pub patches_per_cell: usize,
    #[serde(default)]
    pub seed: u64,
    /// DS angular threshold in degrees.
    #[serde(default = "default_threshold")]
    pub threshold_deg: f64,
    /// BC/GC: drop ground-truth occluded pixels from the residuals.
    #[serde(default)]
    pub exclude_occluded: bool,
    /// BC/GC on ingested data: assume zero flow when no `.flo` file is given.
    #[serde(default)]
    pub zero_flow: bool,
    /// Render every frame with the same Monte Carlo seed.
    #[serde(default)]
    pub common_random_numbers: bool,
    /// PS: spatio-temporal differences instead of spatial only.
    #[serde(default)]
    pub temporal: bool,
    /// DS: density multipliers at which each weather condition is observed.
    #[serde(default = "default_beta_levels")]
    pub beta_levels: Vec<f64>,
    /// Also emit records pooling every sampled patch of a cell.
    #[serde(default)]
    pub pooled: bool,
}

impl ProtocolConfig {
    pub fn new(model: ModelKind, source: Source) -> Self {
        Self {
            model,
            source,
            render: default_render(),
            sensor: default_sensor(),
            theta_w: Vec::new(),
            sides: default_sides(),
            contexts: default_contexts(),
            patches_per_cell: default_patches(),
            seed: 0,
            threshold_deg: default_threshold(),
            exclude_occluded: false,
            zero_flow: false,
            common_random_numbers: false,
            temporal: false,
            beta_levels: default_beta_levels(),
            pooled: false,
        }
    }

    /// Global illumination ramp: the current frame's light sources scaled
    /// over `levels` steps.
    pub fn illumination_ramp(model: ModelKind, source: Source, levels: usize) -> Self {
        let mut p = Self::new(model, source);
        p.theta_w.push(AxisSpec::linspace("illumination_level", 0.1, 4.0, levels));
        p
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: ProtocolConfig = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.render.validate()?;
        if let Some(s) = &self.sensor {
            s.validate()?;
        }
        let mut seen = Vec::new();
        for axis in &self.theta_w {
            if !THETA_W_AXES.contains(&axis.name.as_str()) {
                return Err(Error::UnknownAxis(axis.name.clone()));
            }
            if seen.contains(&axis.name) {
                return Err(Error::InvalidConfig(format!("axis `{}` given twice", axis.name)));
            }
            seen.push(axis.name.clone());
            if axis.values.is_empty() {
                return Err(Error::InvalidConfig(format!("axis `{}` has no values", axis.name)));
            }
            for &v in &axis.values {
                let integral = v >= 0.0 && v.fract() == 0.0;
                let ok = match axis.name.as_str() {
                    "frame" => integral,
                    "weather" => integral && WeatherTag::from_index(v as usize).is_some(),
                    _ => v.is_finite() && v >= 0.0,
                };
                if !ok {
                    return Err(Error::InvalidConfig(format!("value {v} not valid on axis `{}`", axis.name)));
                }
            }
        }
        if self.model.uses_patches() {
            if self.sides.is_empty() || self.contexts.is_empty() {
                return Err(Error::InvalidConfig("sides and contexts must be non-empty".into()));
            }
            if let Some(s) = self.sides.iter().find(|&&s| s == 0 || s % 2 == 0) {
                return Err(Error::InvalidConfig(format!("patch side {s} must be odd")));
            }
        }
        if self.patches_per_cell == 0 {
            return Err(Error::InvalidConfig("patches_per_cell must be >= 1".into()));
        }
        if self.model == ModelKind::DS && (self.beta_levels.len() < 3 || self.beta_levels.iter().any(|b| !(*b > 0.0))) {
            return Err(Error::InvalidConfig("DS needs at least 3 positive beta levels".into()));
        }
        if !(self.threshold_deg > 0.0) {
            return Err(Error::InvalidConfig("threshold_deg must be positive".into()));
        }
        Ok(())
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.theta_w.iter().map(|a| a.name.clone()).collect()
    }

    pub fn theta_v_names(&self) -> Vec<String> {
        if self.model.uses_patches() {
            vec!["side".into()]
        } else {
            Vec::new()
        }
    }
}
