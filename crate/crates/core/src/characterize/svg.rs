use std::fmt::Write;

use super::manifold::Manifold;
use crate::error::{Error, Result};

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * 4.0;
    let i = (t.floor() as usize).min(3);
    let f = t - i as f64;
    let c: Vec<u8> = (0..3)
        .map(|k| (VIRIDIS[i][k] + f * (VIRIDIS[i + 1][k] - VIRIDIS[i][k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn coords_of(m: &Manifold) -> impl Fn(&super::CriterionRecord, &str) -> Option<f64> {
    let w = m.theta_w_names.clone();
    let v = m.theta_v_names.clone();
    move |r, name| {
        if let Some(i) = w.iter().position(|n| n == name) {
            return r.theta_w.get(i).copied();
        }
        v.iter().position(|n| n == name).and_then(|i| r.theta_v.get(i).copied())
    }
}

/// Heatmap of a context's mean criterion over two axes. Any other axis is
/// held at the first value it takes in the manifold; missing cells are left
/// hatched grey.
pub fn heatmap_svg(m: &Manifold, context: &str, x_axis: &str, y_axis: &str) -> Result<String> {
    let all: Vec<String> = m.theta_w_names.iter().chain(&m.theta_v_names).cloned().collect();
    for a in [x_axis, y_axis] {
        if !all.iter().any(|n| n == a) {
            return Err(Error::UnknownAxis(a.into()));
        }
    }
    let get = coords_of(m);
    let fixed: Vec<(String, f64)> = all
        .iter()
        .filter(|n| *n != x_axis && *n != y_axis)
        .filter_map(|n| m.records.first().and_then(|r| get(r, n)).map(|v| (n.clone(), v)))
        .collect();
    let rows: Vec<_> = m
        .records
        .iter()
        .filter(|r| r.context == context && fixed.iter().all(|(n, v)| get(r, n) == Some(*v)))
        .collect();
    let mut xs: Vec<f64> = rows.iter().filter_map(|r| get(r, x_axis)).collect();
    let mut ys: Vec<f64> = rows.iter().filter_map(|r| get(r, y_axis)).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.mean), b.max(r.mean)));
    let span = if hi > lo { hi - lo } else { 1.0 };

    let (cw, ch, left, top) = (14.0, 14.0, 70.0, 30.0);
    let width = left + cw * xs.len().max(1) as f64 + 20.0;
    let height = top + ch * ys.len().max(1) as f64 + 50.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><pattern id="gap" width="4" height="4" patternUnits="userSpaceOnUse"><path d="M0,4 L4,0" stroke="grey"/></pattern></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="16">{} {context}: mean E in [{lo:.4}, {hi:.4}]</text>"#,
        m.model.name()
    );
    for (j, &y) in ys.iter().enumerate() {
        let py = top + ch * (ys.len() - 1 - j) as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y}</text>"#, left - 4.0, py + ch - 3.0);
        for (i, &x) in xs.iter().enumerate() {
            let px = left + cw * i as f64;
            let cell = rows.iter().find(|r| get(r, x_axis) == Some(x) && get(r, y_axis) == Some(y));
            let fill = match cell {
                Some(r) => color((r.mean - lo) / span),
                None => "url(#gap)".into(),
            };
            let _ = writeln!(s, r#"<rect x="{px}" y="{py}" width="{cw}" height="{ch}" fill="{fill}"/>"#);
        }
    }
    let base = top + ch * ys.len() as f64;
    for (i, &x) in xs.iter().enumerate().step_by(xs.len().div_ceil(10).max(1)) {
        let px = left + cw * i as f64 + cw / 2.0;
        let _ = writeln!(s, r#"<text x="{px}" y="{}" text-anchor="middle">{x}</text>"#, base + 12.0);
    }
    let _ = writeln!(s, r#"<text x="{left}" y="{}">{x_axis}</text>"#, base + 30.0);
    let _ = writeln!(
        s,
        r#"<text x="12" y="{}" transform="rotate(-90 12 {})">{y_axis}</text>"#,
        top + 40.0,
        top + 40.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}
