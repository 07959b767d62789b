use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_flo, read_ppm};
use crate::patches::{Patch, SpatialContext};
use crate::render::{FlowField, RadianceImage};

/// Hand-labelled square patch of a recorded sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedPatch {
    pub x: usize,
    pub y: usize,
    pub side: usize,
    pub context: SpatialContext,
}

/// Annotation file of a recorded sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    /// Index of the reference frame (OC compares every frame against it).
    #[serde(default)]
    pub reference_frame: usize,
    /// Explicit frame file names; by default every `.ppm` in the directory,
    /// ordered by the number in the file name.
    #[serde(default)]
    pub frames: Option<Vec<PathBuf>>,
    pub patches: Vec<AnnotatedPatch>,
}

/// Frames, labelled patches and optional ground-truth flow of a recorded
/// sequence.
#[derive(Debug, Clone)]
pub struct IngestedSequence {
    pub paths: Vec<PathBuf>,
    /// Normalized RGB.
    pub frames: Vec<RadianceImage>,
    pub reference: usize,
    pub patches: Vec<Patch>,
    /// `flows[i]` maps frame `i` to `i + 1`, read from `<frame stem>.flo` when present.
    pub flows: Vec<Option<FlowField>>,
}

fn frame_number(p: &Path) -> Option<u64> {
    let stem = p.file_stem()?.to_str()?;
    let digits: String = stem.chars().rev().take_while(|c| c.is_ascii_digit()).collect();
    digits.chars().rev().collect::<String>().parse().ok()
}

fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm")) {
            let n = frame_number(&p)
                .ok_or_else(|| Error::Annotation(format!("frame file {} carries no number", p.display())))?;
            frames.push((n, p));
        }
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

/// Loads a directory of numbered PPM frames with its annotation file.
pub fn ingest_sequence(directory: &Path, annotation: &Path) -> Result<IngestedSequence> {
    let text = fs::read_to_string(annotation)?;
    let ann: Annotation = serde_json::from_str(&text).map_err(|e| Error::Annotation(e.to_string()))?;
    let paths = match &ann.frames {
        Some(list) => list.iter().map(|p| directory.join(p)).collect(),
        None => list_frames(directory)?,
    };
    if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
        return Err(Error::MissingFrame(missing.clone()));
    }
    if paths.len() < 2 {
        return Err(Error::Annotation(format!("need at least 2 frames, found {}", paths.len())));
    }
    if ann.reference_frame >= paths.len() {
        return Err(Error::Annotation(format!(
            "reference frame {} outside 0..{}",
            ann.reference_frame,
            paths.len()
        )));
    }
    let frames: Vec<RadianceImage> = paths.iter().map(|p| Ok(read_ppm(p)?.to_unit())).collect::<Result<_>>()?;
    let (w, h) = (frames[0].width, frames[0].height);
    if let Some((i, f)) = frames.iter().enumerate().find(|(_, f)| f.width != w || f.height != h) {
        return Err(Error::SizeMismatch(format!(
            "frame {i} is {}x{}, frame 0 is {w}x{h}",
            f.width, f.height
        )));
    }
    let mut patches = Vec::with_capacity(ann.patches.len());
    for a in &ann.patches {
        let p = Patch::new(a.x, a.y, a.side, a.context);
        if !p.fits(w, h) {
            return Err(Error::Annotation(format!(
                "patch at ({}, {}) of side {} outside the {w}x{h} frame",
                a.x, a.y, a.side
            )));
        }
        patches.push(p);
    }
    let mut flows = Vec::with_capacity(paths.len() - 1);
    for p in &paths[..paths.len() - 1] {
        let flo = p.with_extension("flo");
        flows.push(if flo.is_file() {
            let f = read_flo(&flo)?;
            if f.width != w || f.height != h {
                return Err(Error::SizeMismatch(format!("{} is {}x{}", flo.display(), f.width, f.height)));
            }
            Some(f)
        } else {
            None
        });
    }
    Ok(IngestedSequence {
        paths,
        frames,
        reference: ann.reference_frame,
        patches,
        flows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::write_ppm;
    use crate::render::{Grid, LdrImage};

    fn frame(dir: &Path, name: &str, v: u16) {
        let img = LdrImage {
            bits: 8,
            pixels: Grid::from_fn(8, 6, |x, y| [v + x as u16, v + y as u16, v]),
        };
        write_ppm(&dir.join(name), &img).unwrap();
    }

    fn annotation(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("ann.json");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn numbered_frames_in_numeric_order() {
        let d = tempfile::tempdir().unwrap();
        frame(d.path(), "f10.ppm", 30);
        frame(d.path(), "f2.ppm", 20);
        let a = annotation(d.path(), r#"{"patches":[{"x":0,"y":0,"side":3,"context":"Diffuse"}]}"#);
        let s = ingest_sequence(d.path(), &a).unwrap();
        assert!(s.paths[0].ends_with("f2.ppm"));
        assert_eq!(s.frames.len(), 2);
        assert_eq!(s.flows, vec![None]);
    }

    #[test]
    fn out_of_bounds_patch_rejected() {
        let d = tempfile::tempdir().unwrap();
        frame(d.path(), "0.ppm", 10);
        frame(d.path(), "1.ppm", 11);
        let a = annotation(d.path(), r#"{"patches":[{"x":6,"y":0,"side":3,"context":"Edge"}]}"#);
        assert!(matches!(ingest_sequence(d.path(), &a), Err(Error::Annotation(_))));
    }

    #[test]
    fn missing_listed_frame() {
        let d = tempfile::tempdir().unwrap();
        frame(d.path(), "0.ppm", 10);
        let a = annotation(d.path(), r#"{"frames":["0.ppm","1.ppm"],"patches":[]}"#);
        assert!(matches!(ingest_sequence(d.path(), &a), Err(Error::MissingFrame(_))));
    }

    #[test]
    fn malformed_annotation() {
        let d = tempfile::tempdir().unwrap();
        frame(d.path(), "0.ppm", 10);
        frame(d.path(), "1.ppm", 10);
        let a = annotation(d.path(), r#"{"patches":[{"x":0,"y":0,"side":3,"context":"Sky"}]}"#);
        assert!(matches!(ingest_sequence(d.path(), &a), Err(Error::Annotation(_))));
    }
}
