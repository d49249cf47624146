use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ClassificationReport, FoldSummary, ShapRow};
use super::tables::frequency_comparison;
use super::{ExperimentConfig, ExperimentError, ScoreRow, Unit};
use crate::matrix::{FeatureMatrix, Stage};
use crate::ml::{
    group_kfold, linear_shap, macro_f1, rfecv, sigmoid_train, train_linear_svc, Estimator,
    LinearModel, RfecvResult, Targets,
};
use crate::preprocess::{normalize, registered_normalization, FittedPipeline};
use crate::stats::{mean_sd, univariate_f1};

/// Folds used to fit the sigmoid on out-of-fold decision values.
const CALIBRATION_FOLDS: usize = 3;

/// A fitted preprocessing pipeline and calibrated classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringModel {
    pub unit: Unit,
    pub pipeline: FittedPipeline,
    pub model: LinearModel,
}

impl ScoringModel {
    fn design(&self, normalized: &FeatureMatrix) -> Result<Vec<Vec<f64>>, ExperimentError> {
        let scaled = self.pipeline.transform(normalized)?;
        Ok(scaled.select_columns(&self.model.feature_names)?.data)
    }

    /// Calibrated translatedness of each row of a normalized matrix.
    pub fn probabilities(&self, normalized: &FeatureMatrix) -> Result<Vec<f64>, ExperimentError> {
        self.design(normalized)?
            .iter()
            .map(|r| self.model.probability(r).map_err(ExperimentError::from))
            .collect()
    }

    /// Normalizes (and for document models aggregates) a raw matrix, then scores it.
    pub fn score_raw(&self, raw: &FeatureMatrix) -> Result<Vec<ScoreRow>, ExperimentError> {
        let mut m = normalize(raw, registered_normalization)?;
        if self.unit == Unit::Document {
            m = m.aggregate_by_group();
        }
        let p = self.probabilities(&m)?;
        Ok(m.rows
            .iter()
            .zip(p)
            .map(|(r, score)| ScoreRow {
                id: r.id.clone(),
                group: r.group.clone(),
                fold: None,
                score,
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Report(format!("model file: {e}")))
    }
}

fn project(x: &[Vec<f64>], rows: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|&r| x[r].clone()).collect()
}

/// Fits preprocessing, feature selection, the SVM and its calibration on a
/// normalized training matrix.
pub fn fit_classifier(
    train: &FeatureMatrix,
    y: &[bool],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(ScoringModel, RfecvResult, Vec<String>), ExperimentError> {
    let params = cfg.model.solver(seed);
    let groups = train.groups();
    let inner = group_kfold(&groups, cfg.run.inner_k, seed)?;
    let pipeline = FittedPipeline::fit(train, &cfg.preprocess.pipeline(), |_, col| {
        univariate_f1(col, y, &inner, &params)
    })?;
    let scaled = pipeline.transform(train)?;
    let filtered = scaled.names.clone();
    let rf = rfecv(
        &Estimator::Svc(params),
        &scaled.data,
        Targets::Classes(y),
        &inner,
        cfg.model.min_features,
    )?;
    let names: Vec<String> = rf.selected.iter().map(|&j| filtered[j].clone()).collect();
    let x = scaled.select_columns(&names)?.data;
    let mut model = train_linear_svc(&x, y, &params)?;
    model.feature_names = names;

    let calib = group_kfold(&groups, CALIBRATION_FOLDS, seed.wrapping_add(1))?;
    let mut dec = vec![0.0; x.len()];
    for f in 0..CALIBRATION_FOLDS {
        let tr = calib.train_indices(f);
        let yt: Vec<bool> = tr.iter().map(|&i| y[i]).collect();
        let m = train_linear_svc(&project(&x, &tr), &yt, &params)?;
        for i in calib.test_indices(f) {
            dec[i] = m.decision(&x[i]);
        }
    }
    let model = model.with_calibration(sigmoid_train(&dec, y)?);
    Ok((
        ScoringModel {
            unit: cfg.data.unit,
            pipeline,
            model,
        },
        rf,
        filtered,
    ))
}

/// Everything produced by a classification run.
#[derive(Debug, Clone)]
pub struct ClassificationOutcome {
    pub report: ClassificationReport,
    /// Out-of-fold calibrated scores of the translated rows.
    pub scores: Vec<ScoreRow>,
    /// Model refitted on all rows.
    pub model: ScoringModel,
}

fn prepare(raw: &FeatureMatrix, unit: Unit) -> Result<FeatureMatrix, ExperimentError> {
    let m = normalize(raw, registered_normalization)?;
    Ok(match unit {
        Unit::Segment => m,
        Unit::Document => m.aggregate_by_group(),
    })
}

/// Grouped cross-validated translationese classification of originals
/// (`org_raw`) against translations (`tgt_raw`), both raw.
pub fn run_classification(
    cfg: &ExperimentConfig,
    org_raw: &FeatureMatrix,
    tgt_raw: &FeatureMatrix,
) -> Result<ClassificationOutcome, ExperimentError> {
    if org_raw.n_rows() == 0 {
        return Err(ExperimentError::MissingSide("original"));
    }
    if tgt_raw.n_rows() == 0 {
        return Err(ExperimentError::MissingSide("translated"));
    }
    let unit = cfg.data.unit;
    let org = prepare(org_raw, unit)?;
    let tgt = prepare(tgt_raw, unit)?;
    let mut all = org.clone();
    for r in &mut all.rows {
        r.group = format!("org:{}", r.group);
    }
    let mut tagged_tgt = tgt.clone();
    for r in &mut tagged_tgt.rows {
        r.group = format!("tgt:{}", r.group);
    }
    all = all.concat(&tagged_tgt)?;
    debug_assert_eq!(all.stage, Stage::Normalized);
    let n_org = org.n_rows();
    let mut y: Vec<bool> = (0..all.n_rows()).map(|i| i >= n_org).collect();
    let seed = cfg.run.seed;
    if cfg.data.shuffle {
        y.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5348_5546));
    }
    let plan = group_kfold(&all.groups(), cfg.run.k, seed)?;

    let folds: Vec<(FoldSummary, Vec<usize>, Vec<f64>)> = (0..plan.k)
        .into_par_iter()
        .map(|fold| -> Result<_, ExperimentError> {
            let train_idx = plan.train_indices(fold);
            let test_idx = plan.test_indices(fold);
            let train = all.select_rows(&train_idx);
            let test = all.select_rows(&test_idx);
            let ytr: Vec<bool> = train_idx.iter().map(|&i| y[i]).collect();
            let yte: Vec<bool> = test_idx.iter().map(|&i| y[i]).collect();
            let (model, _, filtered) = fit_classifier(&train, &ytr, cfg, seed + fold as u64)?;
            let p = model.probabilities(&test)?;
            let pred: Vec<bool> = p.iter().map(|&v| v > 0.5).collect();
            let f1 = macro_f1(&pred, &yte)?;
            let summary = FoldSummary {
                fold,
                n_train: train_idx.len(),
                n_test: test_idx.len(),
                score: f1,
                n_after_filters: filtered.len(),
                selected: model.model.feature_names.clone(),
            };
            Ok((summary, test_idx, p))
        })
        .collect::<Result<_, _>>()?;

    let mut oof = vec![f64::NAN; all.n_rows()];
    let mut fold_of = vec![0usize; all.n_rows()];
    let mut summaries = Vec::new();
    for (s, idx, p) in folds {
        for (&i, v) in idx.iter().zip(p) {
            oof[i] = v;
            fold_of[i] = s.fold;
        }
        summaries.push(s);
    }
    let fold_f1: Vec<f64> = summaries.iter().map(|s| s.score).collect();
    let (f1_mean, f1_sd) = mean_sd(&fold_f1);
    let pooled: Vec<bool> = oof.iter().map(|&v| v > 0.5).collect();
    let pooled_f1 = macro_f1(&pooled, &y)?;

    let (model, rf, filtered) = fit_classifier(&all, &y, cfg, seed)?;
    let design = model.design(&all)?;
    let shap = linear_shap(&model.model, &model.model.feature_names, &design, &design)?;
    let mut shap_rows: Vec<ShapRow> = model
        .model
        .feature_names
        .iter()
        .zip(&model.model.weights)
        .zip(shap.mean_abs().into_iter().zip(shap.mean()))
        .map(|((f, &w), (mean_abs, mean))| ShapRow {
            feature: f.clone(),
            weight: w,
            mean_abs,
            mean,
        })
        .collect();
    shap_rows.sort_by(|a, b| b.mean_abs.total_cmp(&a.mean_abs).then_with(|| a.feature.cmp(&b.feature)));

    let (org_docs, tgt_docs) = match unit {
        Unit::Segment => (org.aggregate_by_group(), tgt.aggregate_by_group()),
        Unit::Document => (org.clone(), tgt.clone()),
    };
    let frequency = frequency_comparison(&org_docs, &tgt_docs, cfg.run.k, &cfg.model.solver(seed));

    let scores = (n_org..all.n_rows())
        .map(|i| ScoreRow {
            id: tgt.rows[i - n_org].id.clone(),
            group: tgt.rows[i - n_org].group.clone(),
            fold: Some(fold_of[i]),
            score: oof[i],
        })
        .collect();

    let report = ClassificationReport {
        mode: cfg.data.mode,
        lpair: cfg.data.lpair,
        unit,
        seed,
        k: cfg.run.k,
        inner_k: cfg.run.inner_k,
        shuffled: cfg.data.shuffle,
        n_org,
        n_tgt: tgt.n_rows(),
        n_features: all.n_cols(),
        n_after_filters: filtered.len(),
        selected: model.model.feature_names.clone(),
        fold_f1,
        f1_mean,
        f1_sd,
        pooled_f1,
        rfecv_scores: rf.scores,
        shap: shap_rows,
        folds: summaries,
        frequency,
        inputs: Vec::new(),
    };
    Ok(ClassificationOutcome {
        report,
        scores,
        model,
    })
}

