use std::path::PathBuf;

use crate::patches::SpatialContext;

/// Every failure the library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("could not place {class} object #{index} after {attempts} attempts")]
    PlacementFailure {
        class: String,
        index: usize,
        attempts: usize,
    },

    #[error("footprint [{x0}, {x1}] x [{z0}, {z1}] lies outside the world bounds")]
    OutOfBounds { x0: f64, x1: f64, z0: f64, z1: f64 },

    #[error("unresolved parameter path `{0}`")]
    UnresolvedPath(String),

    #[error("frame {frame} outside script range 0..{frames}")]
    FrameOutOfRange { frame: usize, frames: usize },

    #[error("invalid dynamics script: {0}")]
    InvalidScript(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("anisotropy {0} outside (-1, 1)")]
    PhaseDomain(f64),

    #[error("object identity sets differ between frames")]
    IdentityMismatch,

    #[error("missing buffer: {0}")]
    MissingBuffer(String),

    #[error("no eligible {context:?} patch of side {side}")]
    EmptyContext { context: SpatialContext, side: usize },

    #[error("requested {requested} {context:?} patches of side {side}, only {available} eligible")]
    NotEnoughPatches {
        context: SpatialContext,
        side: usize,
        requested: usize,
        available: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("every pixel of the patch is occluded or leaves the image")]
    AllOccluded,

    #[error("patch side {0} too small (need at least 5)")]
    PatchTooSmall(usize),

    #[error("rank-deficient observations")]
    RankDeficient,

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("label sets differ: {0:?}")]
    LabelMismatch(Vec<String>),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("malformed annotation: {0}")]
    Annotation(String),

    #[error("missing frame {0}")]
    MissingFrame(PathBuf),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
