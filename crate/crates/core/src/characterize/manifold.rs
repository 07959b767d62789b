use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ModelKind;
use crate::error::{Error, Result};

/// Aggregate of one criterion over the patches of one (cell, context).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    pub context: String,
    pub theta_w: Vec<f64>,
    pub theta_v: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
    /// Samples dropped as undefined (constant patches, fully occluded, ...).
    #[serde(default)]
    pub skipped: usize,
    /// DS only: fraction of observation angles under the threshold.
    #[serde(default)]
    pub fraction_below: Option<f64>,
}

/// A (cell, context) without a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub context: String,
    pub theta_w: Vec<f64>,
    pub theta_v: Vec<f64>,
    pub reason: String,
}

/// Sampled criterion surface `E = f(theta_W, theta_V)` per context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifold {
    pub model: ModelKind,
    pub theta_w_names: Vec<String>,
    pub theta_v_names: Vec<String>,
    pub records: Vec<CriterionRecord>,
    pub gaps: Vec<Gap>,
}

fn csv_err(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "manifold CSV",
        detail: detail.into(),
    }
}

impl Manifold {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["model".to_string(), "context".to_string()];
        h.extend(self.theta_w_names.iter().map(|n| format!("theta_w_{n}")));
        h.extend(self.theta_v_names.iter().map(|n| format!("theta_v_{n}")));
        h.extend(["mean_E", "std_E", "n"].map(String::from));
        h
    }

    /// CSV with header `model,context,theta_w_<name>...,theta_v_<name>...,mean_E,std_E,n`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header())?;
        for r in &self.records {
            let mut row = vec![self.model.name().to_string(), r.context.clone()];
            row.extend(r.theta_w.iter().chain(&r.theta_v).map(|v| v.to_string()));
            row.extend([r.mean.to_string(), r.std.to_string(), r.n.to_string()]);
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| csv_err(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Gap list as CSV: `context,theta_w_<name>...,theta_v_<name>...,reason`.
    pub fn gaps_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut h = vec!["context".to_string()];
        h.extend(self.theta_w_names.iter().map(|n| format!("theta_w_{n}")));
        h.extend(self.theta_v_names.iter().map(|n| format!("theta_v_{n}")));
        h.push("reason".into());
        w.write_record(h)?;
        for g in &self.gaps {
            let mut row = vec![g.context.clone()];
            row.extend(g.theta_w.iter().chain(&g.theta_v).map(|v| v.to_string()));
            row.push(g.reason.clone());
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| csv_err(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses a manifold CSV. Gaps are not part of the file and come back empty.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let k = header.len();
        if k < 5 || header[0] != "model" || header[1] != "context" || header[k - 3..] != ["mean_E", "std_E", "n"] {
            return Err(csv_err(format!("unexpected header {header:?}")));
        }
        let mut theta_w_names = Vec::new();
        let mut theta_v_names = Vec::new();
        for h in &header[2..k - 3] {
            if let Some(n) = h.strip_prefix("theta_w_") {
                if !theta_v_names.is_empty() {
                    return Err(csv_err("theta_w column after theta_v"));
                }
                theta_w_names.push(n.to_string());
            } else if let Some(n) = h.strip_prefix("theta_v_") {
                theta_v_names.push(n.to_string());
            } else {
                return Err(csv_err(format!("unexpected column `{h}`")));
            }
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| csv_err(format!("not a number: `{s}`"))) };
        let mut model = None;
        let mut records = Vec::new();
        for row in r.records() {
            let row = row?;
            let m = ModelKind::from_name(&row[0]).ok_or_else(|| csv_err(format!("unknown model `{}`", &row[0])))?;
            if model.is_some_and(|p| p != m) {
                return Err(csv_err("mixed models in one file"));
            }
            model = Some(m);
            let nw = theta_w_names.len();
            let nv = theta_v_names.len();
            records.push(CriterionRecord {
                context: row[1].to_string(),
                theta_w: (0..nw).map(|i| num(&row[2 + i])).collect::<Result<_>>()?,
                theta_v: (0..nv).map(|i| num(&row[2 + nw + i])).collect::<Result<_>>()?,
                mean: num(&row[k - 3])?,
                std: num(&row[k - 2])?,
                n: row[k - 1].parse().map_err(|_| csv_err(format!("bad count `{}`", &row[k - 1])))?,
                skipped: 0,
                fraction_below: None,
            });
        }
        Ok(Self {
            model: model.ok_or_else(|| csv_err("no records"))?,
            theta_w_names,
            theta_v_names,
            records,
            gaps: Vec::new(),
        })
    }

    /// Contexts in order of first appearance.
    pub fn contexts(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in self.records.iter().map(|r| &r.context).chain(self.gaps.iter().map(|g| &g.context)) {
            if !out.contains(r) {
                out.push(r.clone());
            }
        }
        out
    }

    /// Pooled mean and population std of a context over all its cells,
    /// weighting each cell by its sample count.
    pub fn pooled(&self, context: &str) -> Option<(f64, f64, usize)> {
        let rs: Vec<&CriterionRecord> = self.records.iter().filter(|r| r.context == context).collect();
        let n: usize = rs.iter().map(|r| r.n).sum();
        if n == 0 {
            return None;
        }
        let mean = rs.iter().map(|r| r.mean * r.n as f64).sum::<f64>() / n as f64;
        let second = rs.iter().map(|r| (r.std * r.std + r.mean * r.mean) * r.n as f64).sum::<f64>() / n as f64;
        Some((mean, (second - mean * mean).max(0.0).sqrt(), n))
    }

    /// Mean over cells (unweighted) of a context's per-cell means.
    pub fn context_mean(&self, context: &str) -> Option<f64> {
        let v: Vec<f64> = self.records.iter().filter(|r| r.context == context).map(|r| r.mean).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    fn axis(&self, name: &str) -> Result<Axis> {
        if name == "context" {
            return Ok(Axis::Context);
        }
        if let Some(i) = self.theta_w_names.iter().position(|n| n == name) {
            return Ok(Axis::ThetaW(i));
        }
        if let Some(i) = self.theta_v_names.iter().position(|n| n == name) {
            return Ok(Axis::ThetaV(i));
        }
        Err(Error::UnknownAxis(name.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Axis {
    Context,
    ThetaW(usize),
    ThetaV(usize),
}

/// How values are accumulated along the marginalized axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Integration {
    /// Plain sum over the grid points.
    #[default]
    Sum,
    /// Trapezoid rule over the axis coordinates (plain sum for the context axis).
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    /// `None` when the context axis itself was integrated out.
    pub context: Option<String>,
    pub coords: Vec<f64>,
    pub value: f64,
    /// Axis points (or contexts) with no record; the value covers the rest only.
    pub missing: Vec<String>,
}

/// Manifold integrated along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub axis: String,
    pub coord_names: Vec<String>,
    pub rows: Vec<MarginalRow>,
}

impl Marginal {
    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.missing.is_empty())
    }
}

type Key = (Option<String>, Vec<u64>);

/// Integrates the mean criterion along `axis` (a theta_W or theta_V name, or
/// `context`). Records of contexts in `exclude` are left out. Grid points
/// where another row has a value but this one does not are listed in
/// `missing` rather than filled in.
pub fn marginalize(m: &Manifold, axis: &str, mode: Integration, exclude: &[&str]) -> Result<Marginal> {
    let ax = m.axis(axis)?;
    let mut coord_names: Vec<String> = Vec::new();
    for (i, n) in m.theta_w_names.iter().enumerate() {
        if ax != Axis::ThetaW(i) {
            coord_names.push(n.clone());
        }
    }
    for (i, n) in m.theta_v_names.iter().enumerate() {
        if ax != Axis::ThetaV(i) {
            coord_names.push(n.clone());
        }
    }

    let label = |v: f64| v.to_string();
    // every point of the integrated axis seen anywhere
    let mut axis_points: Vec<(f64, String)> = Vec::new();
    let mut groups: BTreeMap<Key, (Vec<f64>, Vec<(f64, String, f64)>)> = BTreeMap::new();
    let mut order: Vec<Key> = Vec::new();
    let entries = m
        .records
        .iter()
        .map(|r| (&r.context, &r.theta_w, &r.theta_v, Some(r.mean)))
        .chain(m.gaps.iter().map(|g| (&g.context, &g.theta_w, &g.theta_v, None)));
    for (context, tw, tv, value) in entries {
        if exclude.contains(&context.as_str()) {
            continue;
        }
        let mut coords = Vec::new();
        let mut point = (0.0, String::new());
        for (i, &v) in tw.iter().enumerate() {
            if ax == Axis::ThetaW(i) {
                point = (v, label(v));
            } else {
                coords.push(v);
            }
        }
        for (i, &v) in tv.iter().enumerate() {
            if ax == Axis::ThetaV(i) {
                point = (v, label(v));
            } else {
                coords.push(v);
            }
        }
        let ctx = if ax == Axis::Context {
            point = (0.0, context.clone());
            None
        } else {
            Some(context.clone())
        };
        if !axis_points.iter().any(|p| p.1 == point.1) {
            axis_points.push(point.clone());
        }
        let key = (ctx, coords.iter().map(|v| v.to_bits()).collect());
        let entry = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            (coords.clone(), Vec::new())
        });
        if let Some(v) = value {
            entry.1.push((point.0, point.1, v));
        }
    }

    let mut rows = Vec::new();
    for key in order {
        let (coords, mut pts) = groups.remove(&key).expect("grouped key");
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let missing: Vec<String> = axis_points
            .iter()
            .filter(|p| !pts.iter().any(|q| q.1 == p.1))
            .map(|p| p.1.clone())
            .collect();
        let value = match (mode, ax) {
            (Integration::Trapezoid, Axis::ThetaW(_) | Axis::ThetaV(_)) if pts.len() > 1 => {
                pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].2 + w[1].2) / 2.0).sum()
            }
            _ => pts.iter().map(|p| p.2).sum(),
        };
        rows.push(MarginalRow {
            context: key.0,
            coords,
            value,
            missing,
        });
    }
    Ok(Marginal {
        axis: axis.into(),
        coord_names,
        rows,
    })
}
