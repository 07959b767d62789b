use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use visval::characterize::{
    compare_rankings, heatmap_svg, marginalize, rank_items, Integration, Manifold, Marginal, RankingComparison,
    ALL_CONTEXTS,
};
use visval::render::WeatherTag;
use visval::Error;

use crate::manifest::Recorder;
use crate::{By, Globals, Rule};

fn load(path: &Path) -> Result<Manifold> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Manifold::from_csv(&text).with_context(|| format!("manifold {}", path.display()))
}

/// Contexts to rank: every labelled context, or the pooled one when it is
/// the only one present.
fn ranked_contexts(m: &Manifold) -> Vec<String> {
    let named: Vec<String> = m.contexts().into_iter().filter(|c| c != ALL_CONTEXTS).collect();
    if named.is_empty() {
        m.contexts()
    } else {
        named
    }
}

/// Mean criterion per label, each record weighted by its sample count.
pub fn label_values(m: &Manifold, by: By) -> Result<Vec<(String, f64)>> {
    match by {
        By::Context => Ok(ranked_contexts(m)
            .into_iter()
            .filter_map(|c| m.pooled(&c).map(|(mean, _, _)| (c, mean)))
            .collect()),
        By::Weather => {
            let axis = m
                .theta_w_names
                .iter()
                .position(|n| n == "weather")
                .ok_or_else(|| Error::UnknownAxis("weather".into()))?;
            let contexts = ranked_contexts(m);
            let mut acc: Vec<(usize, f64, usize)> = Vec::new();
            for r in m.records.iter().filter(|r| contexts.contains(&r.context)) {
                let w = r.theta_w[axis] as usize;
                match acc.iter_mut().find(|a| a.0 == w) {
                    Some(a) => {
                        a.1 += r.mean * r.n as f64;
                        a.2 += r.n;
                    }
                    None => acc.push((w, r.mean * r.n as f64, r.n)),
                }
            }
            acc.iter()
                .filter(|a| a.2 > 0)
                .map(|&(w, sum, n)| {
                    let tag = WeatherTag::from_index(w)
                        .ok_or_else(|| Error::InvalidConfig(format!("weather index {w}")))?;
                    Ok((tag.name().to_string(), sum / n as f64))
                })
                .collect()
        }
    }
}

#[derive(Debug, Serialize)]
struct Entry {
    label: String,
    value: f64,
    rank: f64,
}

#[derive(Debug, Serialize)]
struct Side {
    manifold: PathBuf,
    entries: Vec<Entry>,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    model: String,
    by: String,
    larger_is_better: bool,
    a: Side,
    b: Side,
    comparison: RankingComparison,
}

fn side(path: &Path, values: &[(String, f64)], larger: bool) -> (Side, Vec<(String, f64)>) {
    let ranks = rank_items(values, larger);
    let entries = values
        .iter()
        .zip(&ranks)
        .map(|((l, v), (_, r))| Entry {
            label: l.clone(),
            value: *v,
            rank: *r,
        })
        .collect();
    (
        Side {
            manifold: path.to_path_buf(),
            entries,
        },
        ranks,
    )
}

pub fn compare(g: &Globals, a: &Path, b: &Path, by: By, out: Option<&Path>) -> Result<()> {
    let (ma, mb) = (load(a)?, load(b)?);
    if ma.model != mb.model {
        return Err(Error::InvalidConfig(format!(
            "cannot compare a {} manifold with a {} manifold",
            ma.model.name(),
            mb.model.name()
        ))
        .into());
    }
    let larger = ma.model.criterion().larger_is_better();
    let (side_a, ranks_a) = side(a, &label_values(&ma, by)?, larger);
    let (side_b, ranks_b) = side(b, &label_values(&mb, by)?, larger);
    let comparison = compare_rankings(&ranks_a, &ranks_b)?;
    let report = CompareReport {
        model: ma.model.name().into(),
        by: match by {
            By::Context => "context".into(),
            By::Weather => "weather".into(),
        },
        larger_is_better: larger,
        a: side_a,
        b: side_b,
        comparison,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = out {
        let mut rec = Recorder::new("compare", g.dry_run);
        rec.input("a", &fs::read(a)?);
        rec.input("b", &fs::read(b)?);
        rec.input("by", report.by.as_bytes());
        rec.write(path, text.as_bytes())?;
        rec.finish(&path.with_extension("manifest.json"))?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Debug, Serialize)]
struct ContextSummary {
    context: String,
    mean: f64,
    std: f64,
    n: usize,
    rank: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    model: String,
    larger_is_better: bool,
    contexts: Vec<ContextSummary>,
    marginals: Vec<Marginal>,
}

pub fn report(g: &Globals, manifold: &Path, out_dir: &Path, axes: &[String], rule: Rule) -> Result<()> {
    let text = fs::read(manifold).with_context(|| format!("reading {}", manifold.display()))?;
    let m = load(manifold)?;
    let larger = m.model.criterion().larger_is_better();
    let pooled: Vec<(String, (f64, f64, usize))> = m
        .contexts()
        .into_iter()
        .filter_map(|c| m.pooled(&c).map(|s| (c, s)))
        .collect();
    let values: Vec<(String, f64)> = pooled.iter().map(|(c, s)| (c.clone(), s.0)).collect();
    let ranks = rank_items(&values, larger);
    let contexts = pooled
        .iter()
        .zip(&ranks)
        .map(|((c, (mean, std, n)), (_, rank))| ContextSummary {
            context: c.clone(),
            mean: *mean,
            std: *std,
            n: *n,
            rank: *rank,
        })
        .collect();
    let mode = match rule {
        Rule::Sum => Integration::Sum,
        Rule::Trapezoid => Integration::Trapezoid,
    };
    let marginals = axes
        .iter()
        .map(|a| marginalize(&m, a, mode, &[]))
        .collect::<visval::Result<Vec<_>>>()?;
    let report = Report {
        model: m.model.name().into(),
        larger_is_better: larger,
        contexts,
        marginals,
    };

    let mut rec = Recorder::new("report", g.dry_run);
    rec.input("manifold", &text);
    rec.input("marginalize", axes.join(",").as_bytes());
    rec.input("integration", format!("{rule:?}").as_bytes());
    rec.write(&out_dir.join("report.json"), (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    let all: Vec<&String> = m.theta_w_names.iter().chain(&m.theta_v_names).collect();
    if all.len() >= 2 {
        for c in m.contexts() {
            let svg = heatmap_svg(&m, &c, all[0], all[all.len() - 1])?;
            let name: String = c.chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
            rec.write(&out_dir.join(format!("heatmap_{name}.svg")), svg.as_bytes())?;
        }
    }
    let manifest = rec.finish(&out_dir.join("manifest.json"))?;
    g.say(format!("report for {} contexts in {}", report.contexts.len(), out_dir.display()));
    g.paths(&manifest.outputs);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use visval::characterize::{CriterionRecord, ModelKind};

    fn record(context: &str, weather: f64, mean: f64, n: usize) -> CriterionRecord {
        CriterionRecord {
            context: context.into(),
            theta_w: vec![weather],
            theta_v: vec![],
            mean,
            std: 0.0,
            n,
            skipped: 0,
            fraction_below: None,
        }
    }

    #[test]
    fn weather_groups_are_count_weighted() {
        let m = Manifold {
            model: ModelKind::OC,
            theta_w_names: vec!["weather".into()],
            theta_v_names: vec![],
            records: vec![
                record("Diffuse", 0.0, 1.0, 3),
                record("Edge", 0.0, 0.0, 1),
                record("Diffuse", 1.0, 0.5, 2),
                record(ALL_CONTEXTS, 1.0, 9.0, 2),
            ],
            gaps: vec![],
        };
        let v = label_values(&m, By::Weather).unwrap();
        assert_eq!(v, vec![("Clear".into(), 0.75), ("Fog".into(), 0.5)]);
        let c = label_values(&m, By::Context).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn weather_needs_the_axis() {
        let m = Manifold {
            model: ModelKind::OC,
            theta_w_names: vec!["frame".into()],
            theta_v_names: vec![],
            records: vec![],
            gaps: vec![],
        };
        assert!(label_values(&m, By::Weather).is_err());
    }
}
