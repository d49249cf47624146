use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;
use crate::ml::{group_kfold, SolverParams};
use crate::stats::{mann_whitney, spearman, univariate_f1, Direction, DEFAULT_ALPHA};

/// Correlations above this magnitude are highlighted in the univariate table.
pub const BOLD_RHO: f64 = 0.2;
/// Cross-set pairs above this magnitude are flagged by the audit.
pub const AUDIT_THRESHOLD: f64 = 0.7;

fn finite_pairs(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .unzip()
}

fn finite_mean(x: &[f64]) -> Option<f64> {
    let v: Vec<f64> = x.iter().copied().filter(|v| v.is_finite()).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateRow {
    pub feature: String,
    pub mean: Option<f64>,
    /// Spearman's rho with the score; `None` when undefined or not significant.
    pub xy_corr: Option<f64>,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub bold: bool,
}

/// Per-feature mean and significance-masked Spearman correlation with `scores`.
pub fn univariate_table(m: &FeatureMatrix, scores: &[f64]) -> Vec<UnivariateRow> {
    m.names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col = m.column(j);
            let (x, y) = finite_pairs(&col, scores);
            let corr = spearman(&x, &y).ok();
            let xy_corr = corr.filter(|c| c.p_value <= DEFAULT_ALPHA).map(|c| c.rho);
            UnivariateRow {
                feature: name.clone(),
                mean: finite_mean(&col),
                xy_corr,
                rho: corr.map(|c| c.rho),
                p_value: corr.map(|c| c.p_value),
                bold: xy_corr.is_some_and(|r| r.abs() > BOLD_RHO),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub feature: String,
    pub org_mean: Option<f64>,
    pub tgt_mean: Option<f64>,
    /// Direction of translations relative to originals.
    pub direction: Direction,
    pub p_value: Option<f64>,
    pub f1: Option<f64>,
}

/// Mann-Whitney comparison of translated against original documents plus
/// the grouped univariate macro-F1 of each feature.
pub fn frequency_comparison(
    org: &FeatureMatrix,
    tgt: &FeatureMatrix,
    k: usize,
    params: &SolverParams,
) -> Vec<FrequencyRow> {
    let n = org.n_rows() + tgt.n_rows();
    let labels: Vec<bool> = (0..n).map(|i| i >= org.n_rows()).collect();
    let groups: Vec<String> = org
        .rows
        .iter()
        .map(|r| format!("org:{}", r.group))
        .chain(tgt.rows.iter().map(|r| format!("tgt:{}", r.group)))
        .collect();
    let plan = group_kfold(&groups, k.min(n), params.seed).ok();
    org.names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let a: Vec<f64> = tgt
                .column_by_name(name)
                .unwrap_or_default()
                .into_iter()
                .filter(|v| v.is_finite())
                .collect();
            let b: Vec<f64> = org.column(j).into_iter().filter(|v| v.is_finite()).collect();
            let test = mann_whitney(&a, &b, DEFAULT_ALPHA).ok();
            let mut col = org.column(j);
            col.extend(tgt.column_by_name(name).unwrap_or_default());
            let f1 = plan
                .as_ref()
                .and_then(|p| univariate_f1(&col, &labels, p, params));
            FrequencyRow {
                feature: name.clone(),
                org_mean: finite_mean(&b),
                tgt_mean: finite_mean(&a),
                direction: test.map(|t| t.direction).unwrap_or(Direction::None),
                p_value: test.map(|t| t.p_value),
                f1,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub translationese: String,
    pub difficulty: String,
    pub rho: Option<f64>,
    pub flagged: bool,
}

/// Spearman correlation of every translationese column with every
/// difficulty column over rows sharing an id.
pub fn audit_cross_collinearity(
    translationese: &FeatureMatrix,
    difficulty: &FeatureMatrix,
) -> Vec<AuditRow> {
    let index: std::collections::HashMap<&str, usize> = translationese
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    let joined: Vec<(usize, usize)> = difficulty
        .rows
        .iter()
        .enumerate()
        .filter_map(|(d, r)| index.get(r.id.as_str()).map(|&t| (t, d)))
        .collect();
    let mut out = Vec::new();
    for (a, tname) in translationese.names.iter().enumerate() {
        let x: Vec<f64> = joined.iter().map(|&(t, _)| translationese.data[t][a]).collect();
        for (b, dname) in difficulty.names.iter().enumerate() {
            let y: Vec<f64> = joined.iter().map(|&(_, d)| difficulty.data[d][b]).collect();
            let (xs, ys) = finite_pairs(&x, &y);
            let rho = spearman(&xs, &ys).ok().map(|c| c.rho);
            out.push(AuditRow {
                translationese: tname.clone(),
                difficulty: dname.clone(),
                rho,
                flagged: rho.is_some_and(|r| r.abs() > AUDIT_THRESHOLD),
            });
        }
    }
    out
}
