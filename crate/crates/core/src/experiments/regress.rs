use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{RegressionReport, RegressionRow, ShapRow};
use super::tables::{audit_cross_collinearity, univariate_table};
use super::{resolve_subset, ExperimentConfig, ExperimentError, ScoreRow, Unit};
use crate::difficulty::SOURCE_SUBSET;
use crate::matrix::FeatureMatrix;
use crate::ml::{
    group_kfold, linear_shap, rfecv, train_linear_svr, Estimator, FoldPlan, LinearModel, Targets,
};
use crate::preprocess::{normalize, registered_normalization, FittedPipeline};
use crate::stats::{mean_sd, r_squared, regression_metrics, spearman};

struct Fitted {
    pipeline: FittedPipeline,
    model: LinearModel,
    n_after_filters: usize,
}

impl Fitted {
    fn design(&self, m: &FeatureMatrix) -> Result<Vec<Vec<f64>>, ExperimentError> {
        Ok(self
            .pipeline
            .transform(m)?
            .select_columns(&self.model.feature_names)?
            .data)
    }
}

fn abs_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(u, _)| u.is_finite())
        .map(|(u, v)| (*u, *v))
        .unzip();
    spearman(&a, &b).ok().map(|c| c.rho.abs())
}

fn fit_regressor(
    train: &FeatureMatrix,
    y: &[f64],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Fitted, ExperimentError> {
    let params = cfg.model.solver(seed);
    let inner = group_kfold(&train.groups(), cfg.run.inner_k, seed)?;
    let pipeline = FittedPipeline::fit(train, &cfg.preprocess.pipeline(), |_, col| {
        abs_spearman(col, y)
    })?;
    let scaled = pipeline.transform(train)?;
    let rf = rfecv(
        &Estimator::Svr(params),
        &scaled.data,
        Targets::Values(y),
        &inner,
        cfg.model.min_features,
    )?;
    let names: Vec<String> = rf.selected.iter().map(|&j| scaled.names[j].clone()).collect();
    let x = scaled.select_columns(&names)?.data;
    let mut model = train_linear_svr(&x, y, &params)?;
    model.feature_names = names;
    Ok(Fitted {
        pipeline,
        model,
        n_after_filters: scaled.n_cols(),
    })
}

fn run_subset(
    cfg: &ExperimentConfig,
    name: &str,
    x: &FeatureMatrix,
    y: &[f64],
    plan: &FoldPlan,
) -> Result<RegressionRow, ExperimentError> {
    let seed = cfg.run.seed;
    let folds: Vec<(Vec<usize>, Vec<f64>)> = (0..plan.k)
        .into_par_iter()
        .map(|fold| -> Result<_, ExperimentError> {
            let tr = plan.train_indices(fold);
            let te = plan.test_indices(fold);
            let ytr: Vec<f64> = tr.iter().map(|&i| y[i]).collect();
            let f = fit_regressor(&x.select_rows(&tr), &ytr, cfg, seed + fold as u64)?;
            let pred = f.model.decisions(&f.design(&x.select_rows(&te))?);
            Ok((te, pred))
        })
        .collect::<Result<_, _>>()?;
    let mut oof = vec![f64::NAN; y.len()];
    let mut fold_r2 = Vec::new();
    let mut fold_rho = Vec::new();
    for (te, pred) in &folds {
        let truth: Vec<f64> = te.iter().map(|&i| y[i]).collect();
        fold_r2.push(r_squared(pred, &truth).ok());
        fold_rho.push(spearman(pred, &truth).ok().map(|c| c.rho));
        for (&i, &p) in te.iter().zip(pred) {
            oof[i] = p;
        }
    }
    let metrics = regression_metrics(&oof, y).map_err(|e| ExperimentError::Report(e.to_string()))?;
    let defined: Vec<f64> = fold_r2.iter().flatten().copied().collect();
    let (r2_mean, r2_sd) = mean_sd(&defined);

    let all: Vec<usize> = (0..y.len()).collect();
    let f = fit_regressor(&x.select_rows(&all), y, cfg, seed)?;
    let design = f.design(x)?;
    let shap = linear_shap(&f.model, &f.model.feature_names, &design, &design)?;
    let mut shap_rows: Vec<ShapRow> = f
        .model
        .feature_names
        .iter()
        .zip(&f.model.weights)
        .zip(shap.mean_abs().into_iter().zip(shap.mean()))
        .map(|((feature, &weight), (mean_abs, mean))| ShapRow {
            feature: feature.clone(),
            weight,
            mean_abs,
            mean,
        })
        .collect();
    shap_rows.sort_by(|a, b| b.mean_abs.total_cmp(&a.mean_abs).then_with(|| a.feature.cmp(&b.feature)));
    Ok(RegressionRow {
        subset: name.to_string(),
        n_input: x.n_cols(),
        n_after_filters: f.n_after_filters,
        n_selected: f.model.feature_names.len(),
        selected: f.model.feature_names.clone(),
        rho: metrics.rho,
        rho_p: metrics.rho_p,
        r2: metrics.r2,
        mae: metrics.mae,
        fold_r2,
        fold_rho,
        r2_mean,
        r2_sd,
        shap: shap_rows,
    })
}

/// Mean score per group, in order of first appearance.
fn aggregate_scores(m: &FeatureMatrix, y: &[f64]) -> Vec<f64> {
    let mut sums: HashMap<&str, (f64, usize)> = HashMap::new();
    for (r, v) in m.rows.iter().zip(y) {
        let e = sums.entry(r.group.as_str()).or_default();
        e.0 += v;
        e.1 += 1;
    }
    let agg = m.aggregate_by_group();
    agg.rows
        .iter()
        .map(|r| {
            let (s, n) = sums[r.group.as_str()];
            s / n as f64
        })
        .collect()
}

/// Support vector regression of out-of-fold translatedness on each
/// configured difficulty subset. `translationese` (raw, translated side) is
/// only used for the cross-set collinearity audit.
pub fn run_regression(
    cfg: &ExperimentConfig,
    difficulty_raw: &FeatureMatrix,
    scores: &[ScoreRow],
    translationese: Option<&FeatureMatrix>,
) -> Result<RegressionReport, ExperimentError> {
    let norm = normalize(difficulty_raw, registered_normalization)?;
    let by_id: HashMap<&str, f64> = scores.iter().map(|s| (s.id.as_str(), s.score)).collect();
    let keep: Vec<usize> = (0..norm.n_rows())
        .filter(|&i| by_id.contains_key(norm.rows[i].id.as_str()))
        .collect();
    let n_unscored = norm.n_rows() - keep.len();
    if keep.is_empty() {
        return Err(ExperimentError::NoScoredRows);
    }
    if n_unscored > 0 {
        log::warn!("{n_unscored} difficulty rows have no translatedness score");
    }
    let mut m = norm.select_rows(&keep);
    let mut y: Vec<f64> = m.rows.iter().map(|r| by_id[r.id.as_str()]).collect();
    if cfg.data.unit == Unit::Document {
        y = aggregate_scores(&m, &y);
        m = m.aggregate_by_group();
    }
    let seed = cfg.run.seed;
    if cfg.data.shuffle {
        y.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5348_5546));
    }
    let plan = group_kfold(&m.groups(), cfg.run.k, seed)?;
    let mut rows = Vec::new();
    for name in &cfg.data.subsets {
        let names = resolve_subset(name)?;
        let missing: Vec<String> = names
            .iter()
            .filter(|n| m.column_index(n).is_none())
            .map(|n| n.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(ExperimentError::MissingFeatures(missing));
        }
        let x = m.select_columns(&names)?;
        rows.push(run_subset(cfg, name, &x, &y, &plan)?);
    }
    let univariate = univariate_table(&m, &y);
    let audit = match translationese {
        Some(t) => {
            let t = normalize(t, registered_normalization)?;
            let src: Vec<&str> = SOURCE_SUBSET
                .iter()
                .copied()
                .filter(|n| m.column_index(n).is_some())
                .collect();
            let d = m.select_columns(&src)?;
            let t = if cfg.data.unit == Unit::Document {
                t.aggregate_by_group()
            } else {
                t
            };
            Some(audit_cross_collinearity(&t, &d))
        }
        None => None,
    };
    Ok(RegressionReport {
        mode: cfg.data.mode,
        lpair: cfg.data.lpair,
        unit: cfg.data.unit,
        seed,
        k: cfg.run.k,
        inner_k: cfg.run.inner_k,
        shuffled: cfg.data.shuffle,
        n_rows: m.n_rows(),
        n_unscored,
        subsets: rows,
        univariate,
        audit,
        inputs: Vec::new(),
    })
}
