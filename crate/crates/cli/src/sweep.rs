use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use visval::characterize::{
    cell_count, heatmap_svg, ingest_sequence, run_sweep_with, Manifold, ModelKind, ProtocolConfig, Source,
    SweepOptions,
};

use crate::manifest::Recorder;
use crate::Globals;

/// Full renders a protocol performs, assuming no cached cells.
pub fn estimated_renders(p: &ProtocolConfig, cells: usize) -> usize {
    if matches!(p.source, Source::Ingest { .. }) {
        return 0;
    }
    match p.model {
        ModelKind::OC => cells + usize::from(cells > 0),
        ModelKind::BC | ModelKind::GC => 2 * cells,
        ModelKind::PS => 0,
        ModelKind::DS => cells,
    }
}

/// Hashes everything the protocol reads: its own text, the scene and any
/// ingested files.
fn hash_inputs(rec: &mut Recorder, p: &ProtocolConfig, text: &[u8], base: Option<&Path>) -> Result<()> {
    rec.input("protocol", text);
    match &p.source {
        Source::Simulate(src) => rec.input("scene", src.load(base)?.to_json().as_bytes()),
        Source::Ingest { directory, annotations } => {
            let join = |q: &Path| match base {
                Some(b) if q.is_relative() => b.join(q),
                _ => q.to_path_buf(),
            };
            let ann = join(annotations);
            let seq = ingest_sequence(&join(directory), &ann)?;
            rec.input("annotations", &fs::read(&ann)?);
            for path in &seq.paths {
                rec.input(&path.display().to_string(), &fs::read(path)?);
                let flo = path.with_extension("flo");
                if flo.is_file() {
                    rec.input(&flo.display().to_string(), &fs::read(&flo)?);
                }
            }
        }
    }
    Ok(())
}

fn svg_axes(m: &Manifold) -> Option<(String, String)> {
    let all: Vec<&String> = m.theta_w_names.iter().chain(&m.theta_v_names).collect();
    let x = all.first()?;
    let y = m.theta_v_names.first().filter(|v| v != x).or_else(|| all.get(1).copied())?;
    Some(((*x).clone(), y.clone()))
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Writes the manifold CSV, the gap list and one heatmap per context.
pub fn emit_manifold(rec: &mut Recorder, m: &Manifold, out_dir: &Path) -> Result<()> {
    rec.write(&out_dir.join("manifold.csv"), m.to_csv()?.as_bytes())?;
    rec.write(&out_dir.join("gaps.csv"), m.gaps_csv()?.as_bytes())?;
    if let Some((x, y)) = svg_axes(m) {
        for c in m.contexts() {
            if m.records.iter().any(|r| r.context == c) {
                let svg = heatmap_svg(m, &c, &x, &y)?;
                rec.write(&out_dir.join(format!("heatmap_{}.svg", file_safe(&c))), svg.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn execute(g: &Globals, mut p: ProtocolConfig, text: &[u8], base: Option<&Path>, out_dir: &Path, cache: bool, command: &str) -> Result<()> {
    if let Some(s) = g.seed {
        p.seed = s;
    }
    p.validate()?;
    let mut rec = Recorder::new(command, g.dry_run);
    hash_inputs(&mut rec, &p, text, base)?;
    rec.seed("protocol", p.seed);
    let cells = cell_count(&p, base)?;
    let renders = estimated_renders(&p, cells);
    if g.dry_run {
        if g.porcelain {
            println!("{}", serde_json::json!({ "cells": cells, "renders": renders }));
        } else {
            println!("{cells} cells, about {renders} renders");
        }
        return Ok(());
    }
    let cache_dir = out_dir.join("cells");
    let opts = SweepOptions {
        base_dir: base,
        cache_dir: cache.then_some(cache_dir.as_path()),
    };
    let m = rec.stage("sweep", || run_sweep_with(&p, opts))?;
    emit_manifold(&mut rec, &m, out_dir)?;
    let manifest = rec.finish(&out_dir.join("manifest.json"))?;
    g.say(format!(
        "{} records, {} gaps over {cells} cells in {}",
        m.records.len(),
        m.gaps.len(),
        out_dir.display()
    ));
    g.paths(&manifest.outputs);
    Ok(())
}

pub fn sweep(g: &Globals, protocol: &Path, out_dir: &Path, cache: bool) -> Result<()> {
    let text = fs::read(protocol).with_context(|| format!("reading {}", protocol.display()))?;
    let p = ProtocolConfig::from_json(&String::from_utf8_lossy(&text))
        .with_context(|| format!("protocol {}", protocol.display()))?;
    let base = protocol.parent().filter(|d| !d.as_os_str().is_empty());
    execute(g, p, &text, base, out_dir, cache, "sweep")
}

pub fn ingest(
    g: &Globals,
    directory: &Path,
    annotations: &Path,
    model: &str,
    protocol: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let kind = ModelKind::from_name(model)
        .ok_or_else(|| visval::Error::InvalidConfig(format!("unknown model `{model}`")))?;
    let source = Source::Ingest {
        directory: directory.to_path_buf(),
        annotations: annotations.to_path_buf(),
    };
    let (mut p, text) = match protocol {
        Some(path) => {
            let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let p = ProtocolConfig::from_json(&String::from_utf8_lossy(&text))
                .with_context(|| format!("protocol {}", path.display()))?;
            (p, text)
        }
        None => (ProtocolConfig::new(kind, source.clone()), Vec::new()),
    };
    p.model = kind;
    p.source = source;
    let text = [text, serde_json::to_vec(&p)?].concat();
    execute(g, p, &text, None, out_dir, false, "ingest")
}
