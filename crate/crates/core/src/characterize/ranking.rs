use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::validators::{average_ranks, spearman_rho};

/// Ranks of labelled values, 1 = best. Ties share their average rank.
pub fn rank_items(items: &[(String, f64)], larger_is_better: bool) -> Vec<(String, f64)> {
    let keys: Vec<f64> = items.iter().map(|(_, v)| if larger_is_better { -v } else { *v }).collect();
    items.iter().map(|(l, _)| l.clone()).zip(average_ranks(&keys)).collect()
}

/// Agreement between two rankings of the same labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingComparison {
    pub labels: Vec<String>,
    pub ranks_a: Vec<f64>,
    pub ranks_b: Vec<f64>,
    /// Spearman correlation of the two rank vectors; `None` when either
    /// ranking is all ties.
    pub correlation: Option<f64>,
    /// `rank_b - rank_a` per label.
    pub deltas: Vec<f64>,
}

/// Compares two rankings; labels are matched by name and reported in the
/// order of `a`.
pub fn compare_rankings(a: &[(String, f64)], b: &[(String, f64)]) -> Result<RankingComparison> {
    let la: BTreeSet<&String> = a.iter().map(|(l, _)| l).collect();
    let lb: BTreeSet<&String> = b.iter().map(|(l, _)| l).collect();
    if la != lb || la.len() != a.len() || lb.len() != b.len() {
        let diff: Vec<String> = la.symmetric_difference(&lb).map(|s| s.to_string()).collect();
        return Err(Error::LabelMismatch(diff));
    }
    let labels: Vec<String> = a.iter().map(|(l, _)| l.clone()).collect();
    let ranks_a: Vec<f64> = a.iter().map(|(_, r)| *r).collect();
    let ranks_b: Vec<f64> = labels
        .iter()
        .map(|l| b.iter().find(|(m, _)| m == l).map(|(_, r)| *r).expect("same label set"))
        .collect();
    let correlation = match spearman_rho(&ranks_a, &ranks_b) {
        Ok(r) => Some(r),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };
    let deltas = ranks_a.iter().zip(&ranks_b).map(|(x, y)| y - x).collect();
    Ok(RankingComparison {
        labels,
        ranks_a,
        ranks_b,
        correlation,
        deltas,
    })
}
