//! Normalization, skew correction, filtering and scaling of feature matrices.
//!
//! [`normalize`] is stateless and applied to whole datasets. Everything else
//! is fitted on training rows into a [`FittedPipeline`] and then applied to
//! any row set.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::difficulty::{normalization_of, DIFFICULTY_NAMES};
use crate::matrix::{FeatureMatrix, MatrixError, Normalization, Stage};
use crate::stats::{median, pearson};

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("matrix is at stage {found:?}, expected {expected:?}")]
    Stage { expected: Stage, found: Stage },
    #[error("row {0} has zero words")]
    ZeroWordCount(String),
    #[error("row {0} has zero sentences")]
    ZeroSentences(String),
    #[error("column {0} has no registered normalization")]
    UnknownColumn(String),
    #[error("column {column} is log-transformed but has negative value {value}")]
    NegativeLog { column: String, value: f64 },
    #[error("column {0} has zero variance on the training rows")]
    ZeroVariance(String),
    #[error("column {0} has no observed values on the training rows")]
    AllMissing(String),
    #[error("need at least {need} features, got {got}")]
    TooFewFeatures { need: usize, got: usize },
    #[error("datasets disagree on feature names")]
    ColumnMismatch,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("invalid pipeline file: {0}")]
    Json(String),
}

/// Normalization kind of a translationese or difficulty column.
pub fn registered_normalization(name: &str) -> Option<Normalization> {
    crate::translationese::spec(name)
        .map(|s| s.normalization)
        .or_else(|| DIFFICULTY_NAMES.contains(&name).then(|| normalization_of(name)))
}

/// Divides per-word columns by the row word count and per-sentence-average
/// columns by the row sentence count.
pub fn normalize(
    m: &FeatureMatrix,
    kind_of: impl Fn(&str) -> Option<Normalization>,
) -> Result<FeatureMatrix, PreprocessError> {
    if m.stage != Stage::Raw {
        return Err(PreprocessError::Stage {
            expected: Stage::Raw,
            found: m.stage,
        });
    }
    let kinds = m
        .names
        .iter()
        .map(|n| kind_of(n).ok_or_else(|| PreprocessError::UnknownColumn(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = m.clone();
    out.stage = Stage::Normalized;
    for (meta, row) in out.rows.iter().zip(out.data.iter_mut()) {
        for (v, kind) in row.iter_mut().zip(&kinds) {
            match kind {
                Normalization::PerWord => {
                    if meta.word_count == 0 {
                        return Err(PreprocessError::ZeroWordCount(meta.id.clone()));
                    }
                    *v /= meta.word_count as f64;
                }
                Normalization::PerSentenceAverage => {
                    if meta.n_sentences == 0 {
                        return Err(PreprocessError::ZeroSentences(meta.id.clone()));
                    }
                    *v /= meta.n_sentences as f64;
                }
                Normalization::None => {}
            }
        }
    }
    Ok(out)
}

/// Sample-size adjusted Fisher skewness `G1` of the finite values; `None`
/// with fewer than 3 values or zero variance.
pub fn adjusted_skewness(values: &[f64]) -> Option<f64> {
    let x: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = x.len() as f64;
    if x.len() < 3 {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    if x.iter().all(|v| *v == x[0]) || m2 == 0.0 {
        return None;
    }
    let s2 = m2 * n / (n - 1.0);
    Some(n * n / ((n - 1.0) * (n - 2.0)) * m3 / s2.powf(1.5))
}

fn population_variance(values: &[f64]) -> Option<f64> {
    let x: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if x.is_empty() {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    Some(x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

/// True when the column has no two distinct finite values.
pub fn is_constant(values: &[f64]) -> bool {
    let mut it = values.iter().filter(|v| v.is_finite());
    match it.next() {
        None => true,
        Some(first) => it.all(|v| v == first),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowVarianceDrop {
    pub name: String,
    /// `shared` when in the bottom set of every dataset, `padded` otherwise.
    pub rationale: String,
    pub mean_rank: f64,
}

/// Features with the lowest variance across all datasets: those in the
/// bottom `k` of every dataset, padded by mean variance rank up to `k`.
pub fn low_variance_filter(
    datasets: &[FeatureMatrix],
    k: usize,
) -> Result<Vec<LowVarianceDrop>, PreprocessError> {
    let Some(first) = datasets.first() else {
        return Ok(Vec::new());
    };
    let names = &first.names;
    if names.len() < k {
        return Err(PreprocessError::TooFewFeatures {
            need: k,
            got: names.len(),
        });
    }
    let mut rank_sum = vec![0.0; names.len()];
    let mut shared: Option<BTreeSet<usize>> = None;
    for d in datasets {
        let d = d
            .select_columns(names)
            .map_err(|_| PreprocessError::ColumnMismatch)?;
        let var: Vec<f64> = (0..names.len())
            .map(|j| population_variance(&d.column(j)).unwrap_or(0.0))
            .collect();
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| var[a].total_cmp(&var[b]).then_with(|| names[a].cmp(&names[b])));
        for (rank, &j) in order.iter().enumerate() {
            rank_sum[j] += (rank + 1) as f64;
        }
        let bottom: BTreeSet<usize> = order[..k].iter().copied().collect();
        shared = Some(match shared {
            None => bottom,
            Some(s) => s.intersection(&bottom).copied().collect(),
        });
    }
    let shared = shared.unwrap_or_default();
    let mean_rank: Vec<f64> = rank_sum.iter().map(|r| r / datasets.len() as f64).collect();
    let mut out: Vec<LowVarianceDrop> = shared
        .iter()
        .map(|&j| LowVarianceDrop {
            name: names[j].clone(),
            rationale: "shared".into(),
            mean_rank: mean_rank[j],
        })
        .collect();
    let mut rest: Vec<usize> = (0..names.len()).filter(|j| !shared.contains(j)).collect();
    rest.sort_by(|&a, &b| {
        mean_rank[a]
            .total_cmp(&mean_rank[b])
            .then_with(|| names[a].cmp(&names[b]))
    });
    for j in rest.into_iter().take(k.saturating_sub(out.len())) {
        out.push(LowVarianceDrop {
            name: names[j].clone(),
            rationale: "padded".into(),
            mean_rank: mean_rank[j],
        });
    }
    Ok(out)
}

/// Pearson's r over rows where both values are finite.
pub fn pairwise_pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .filter(|(u, v)| u.is_finite() && v.is_finite())
        .map(|(u, v)| (*u, *v))
        .unzip();
    pearson(&x, &y).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearDrop {
    pub name: String,
    pub partner: String,
    pub r: f64,
}

/// Greedy removal over pairs with `|r| > r_max`, strongest first (name order
/// on equal `|r|`). Of each pair still intact the lower-scoring member goes;
/// `None` scores lowest and equal scores drop the later name. `score` is
/// called at most once per feature and only for features in some violating
/// pair.
pub fn collinearity_filter(
    names: &[String],
    columns: &[Vec<f64>],
    r_max: f64,
    mut score: impl FnMut(usize) -> Option<f64>,
) -> (Vec<usize>, Vec<CollinearDrop>) {
    let d = names.len();
    let mut pairs = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if let Some(r) = pairwise_pearson(&columns[a], &columns[b]) {
                if r.abs() > r_max {
                    pairs.push((a, b, r));
                }
            }
        }
    }
    pairs.sort_by(|p, q| {
        q.2.abs()
            .total_cmp(&p.2.abs())
            .then_with(|| names[p.0].cmp(&names[q.0]))
            .then_with(|| names[p.1].cmp(&names[q.1]))
    });
    let mut cache: HashMap<usize, Option<f64>> = HashMap::new();
    let mut alive = vec![true; d];
    let mut drops = Vec::new();
    for (a, b, r) in pairs {
        if !(alive[a] && alive[b]) {
            continue;
        }
        let sa = *cache.entry(a).or_insert_with(|| score(a));
        let sb = *cache.entry(b).or_insert_with(|| score(b));
        let key = |s: Option<f64>| s.filter(|v| v.is_finite()).unwrap_or(f64::NEG_INFINITY);
        let (ka, kb) = (key(sa), key(sb));
        let drop_a = ka < kb || (ka == kb && names[a] > names[b]);
        let (lost, kept) = if drop_a { (a, b) } else { (b, a) };
        alive[lost] = false;
        drops.push(CollinearDrop {
            name: names[lost].clone(),
            partner: names[kept].clone(),
            r,
        });
    }
    ((0..d).filter(|&j| alive[j]).collect(), drops)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "filter")]
pub enum DropReason {
    LowVariance,
    Constant,
    Collinearity { partner: String, r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDecision {
    pub name: String,
    pub normalization: Option<Normalization>,
    pub skewness: Option<f64>,
    pub log_applied: bool,
    pub imputation: Option<f64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub dropped_by: Option<DropReason>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub skew_threshold: f64,
    pub r_max: f64,
    /// Names removed up front by the shared low-variance rule.
    pub low_variance_drop: Vec<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            skew_threshold: 1.0,
            r_max: 0.85,
            low_variance_drop: Vec::new(),
        }
    }
}

/// Per-column decisions learned on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub skew_threshold: f64,
    pub r_max: f64,
    pub columns: Vec<ColumnDecision>,
}

fn log1p_checked(name: &str, v: f64) -> Result<f64, PreprocessError> {
    if v < 0.0 {
        return Err(PreprocessError::NegativeLog {
            column: name.to_string(),
            value: v,
        });
    }
    Ok(v.ln_1p())
}

/// Replaces columns whose skewness exceeds `threshold` with `ln(1 + x)`;
/// returns the per-column skewness and decision.
pub fn conditional_log1p(
    m: &FeatureMatrix,
    threshold: f64,
) -> Result<(FeatureMatrix, Vec<(Option<f64>, bool)>), PreprocessError> {
    if m.stage != Stage::Normalized {
        return Err(PreprocessError::Stage {
            expected: Stage::Normalized,
            found: m.stage,
        });
    }
    let decisions: Vec<(Option<f64>, bool)> = (0..m.n_cols())
        .map(|j| {
            let g = adjusted_skewness(&m.column(j));
            (g, g.is_some_and(|g| g > threshold))
        })
        .collect();
    let mut out = m.clone();
    out.stage = Stage::Transformed;
    for row in &mut out.data {
        for (j, v) in row.iter_mut().enumerate() {
            if decisions[j].1 && !v.is_nan() {
                *v = log1p_checked(&m.names[j], *v)?;
            }
        }
    }
    Ok((out, decisions))
}

/// Training medians, means and population standard deviations, the
/// statistics applied by [`FittedPipeline::transform`].
pub fn fit_standardizer(columns: &[Vec<f64>], names: &[String]) -> Result<Vec<(f64, f64, f64)>, PreprocessError> {
    columns
        .iter()
        .zip(names)
        .map(|(c, name)| {
            let med = median(c);
            if med.is_nan() {
                return Err(PreprocessError::AllMissing(name.clone()));
            }
            let filled: Vec<f64> = c.iter().map(|v| if v.is_finite() { *v } else { med }).collect();
            let n = filled.len() as f64;
            let mean = filled.iter().sum::<f64>() / n;
            let sd = (filled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd == 0.0 || !sd.is_finite() {
                return Err(PreprocessError::ZeroVariance(name.clone()));
            }
            Ok((med, mean, sd))
        })
        .collect()
}

impl FittedPipeline {
    /// Fits on a normalized training matrix. `tie_break` receives a column
    /// index of `train` and that column after the skew transform.
    pub fn fit(
        train: &FeatureMatrix,
        cfg: &PreprocessConfig,
        mut tie_break: impl FnMut(usize, &[f64]) -> Option<f64>,
    ) -> Result<Self, PreprocessError> {
        if train.stage != Stage::Normalized {
            return Err(PreprocessError::Stage {
                expected: Stage::Normalized,
                found: train.stage,
            });
        }
        let low: BTreeSet<&str> = cfg.low_variance_drop.iter().map(String::as_str).collect();
        let mut columns: Vec<ColumnDecision> = train
            .names
            .iter()
            .map(|n| ColumnDecision {
                name: n.clone(),
                normalization: registered_normalization(n),
                skewness: None,
                log_applied: false,
                imputation: None,
                mean: None,
                sd: None,
                dropped_by: None,
            })
            .collect();
        let mut values: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for (j, col) in columns.iter_mut().enumerate() {
            if low.contains(col.name.as_str()) {
                col.dropped_by = Some(DropReason::LowVariance);
                continue;
            }
            let raw = train.column(j);
            if is_constant(&raw) {
                col.dropped_by = Some(DropReason::Constant);
                continue;
            }
            col.skewness = adjusted_skewness(&raw);
            col.log_applied = col.skewness.is_some_and(|g| g > cfg.skew_threshold);
            let transformed = if col.log_applied {
                raw.iter()
                    .map(|&v| if v.is_nan() { Ok(v) } else { log1p_checked(&col.name, v) })
                    .collect::<Result<Vec<f64>, _>>()?
            } else {
                raw
            };
            values.insert(j, transformed);
        }
        let idx: Vec<usize> = values.keys().copied().collect();
        let names: Vec<String> = idx.iter().map(|&j| train.names[j].clone()).collect();
        let cols: Vec<Vec<f64>> = values.values().cloned().collect();
        let (kept, drops) = collinearity_filter(&names, &cols, cfg.r_max, |i| {
            tie_break(idx[i], &cols[i])
        });
        for d in drops {
            let j = train.column_index(&d.name).expect("known column");
            columns[j].dropped_by = Some(DropReason::Collinearity {
                partner: d.partner,
                r: d.r,
            });
        }
        let kept_cols: Vec<Vec<f64>> = kept.iter().map(|&i| cols[i].clone()).collect();
        let kept_names: Vec<String> = kept.iter().map(|&i| names[i].clone()).collect();
        let params = fit_standardizer(&kept_cols, &kept_names)?;
        for (&i, (med, mean, sd)) in kept.iter().zip(params) {
            let c = &mut columns[idx[i]];
            c.imputation = Some(med);
            c.mean = Some(mean);
            c.sd = Some(sd);
        }
        Ok(FittedPipeline {
            skew_threshold: cfg.skew_threshold,
            r_max: cfg.r_max,
            columns,
        })
    }

    pub fn kept_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.dropped_by.is_none())
            .map(|c| c.name.clone())
            .collect()
    }

    /// Applies the fitted decisions to a normalized matrix, returning the
    /// kept columns scaled.
    pub fn transform(&self, m: &FeatureMatrix) -> Result<FeatureMatrix, PreprocessError> {
        if m.stage != Stage::Normalized {
            return Err(PreprocessError::Stage {
                expected: Stage::Normalized,
                found: m.stage,
            });
        }
        let kept: Vec<&ColumnDecision> =
            self.columns.iter().filter(|c| c.dropped_by.is_none()).collect();
        let names: Vec<&str> = kept.iter().map(|c| c.name.as_str()).collect();
        let mut out = m.select_columns(&names)?;
        out.stage = Stage::Scaled;
        for row in &mut out.data {
            for (v, c) in row.iter_mut().zip(&kept) {
                let mut x = *v;
                if x.is_nan() {
                    x = c.imputation.expect("kept column is fitted");
                } else if c.log_applied {
                    x = log1p_checked(&c.name, x)?;
                }
                *v = (x - c.mean.expect("fitted")) / c.sd.expect("fitted");
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pipeline serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PreprocessError> {
        serde_json::from_str(text).map_err(|e| PreprocessError::Json(e.to_string()))
    }
}
