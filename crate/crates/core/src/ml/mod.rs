//! Linear models, calibration and model selection.

mod folds;
mod platt;
mod rfecv;
mod shap;
pub mod svm;

pub use folds::{group_kfold, FoldPlan};
pub use platt::{platt_calibrate, sigmoid_train, Platt};
pub use rfecv::{rfecv, Estimator, RfecvResult, Targets};
pub use shap::{linear_shap, ShapAttribution};
pub use svm::{SolverParams, SolverStats};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlError {
    #[error("only one class present")]
    SingleClass,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{groups} groups cannot fill {k} folds")]
    TooFewGroups { groups: usize, k: usize },
    #[error("model is not calibrated")]
    Uncalibrated,
    #[error("feature names differ: model has {model:?}, input has {input:?}")]
    FeatureMismatch {
        model: Vec<String>,
        input: Vec<String>,
    },
    #[error("empty input")]
    Empty,
    #[error("non-finite cross-validation score for {0} features")]
    NonFiniteScore(usize),
    #[error("invalid model file: {0}")]
    Json(String),
}

pub(crate) fn check_finite(x: &[Vec<f64>]) -> Result<(), MlError> {
    if x.iter().flatten().any(|v| !v.is_finite()) {
        Err(MlError::NonFinite)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svc,
    Svr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub epsilon: f64,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub seed: u64,
    pub solver: SolverStats,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn decisions(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|r| self.decision(r)).collect()
    }

    pub fn calibration(&self) -> Option<Platt> {
        Some(Platt {
            a: self.a?,
            b: self.b?,
        })
    }

    pub fn with_calibration(mut self, p: Platt) -> Self {
        self.a = Some(p.a);
        self.b = Some(p.b);
        self
    }

    /// Calibrated probability of the positive class.
    pub fn probability(&self, x: &[f64]) -> Result<f64, MlError> {
        let p = self.calibration().ok_or(MlError::Uncalibrated)?;
        Ok(p.probability(self.decision(x)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        serde_json::from_str(text).map_err(|e| MlError::Json(e.to_string()))
    }
}

fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn width(x: &[Vec<f64>]) -> usize {
    x.first().map(Vec::len).unwrap_or(0)
}

/// Linear SVM classifier; `y` is `true` for the positive (translated) class.
pub fn train_linear_svc(
    x: &[Vec<f64>],
    y: &[bool],
    params: &SolverParams,
) -> Result<LinearModel, MlError> {
    train_linear_svc_warm(x, y, params, None).map(|(m, _)| m)
}

/// As [`train_linear_svc`], starting from dual variables of an earlier fit on the same rows.
pub fn train_linear_svc_warm(
    x: &[Vec<f64>],
    y: &[bool],
    params: &SolverParams,
    alpha0: Option<&[f64]>,
) -> Result<(LinearModel, Vec<f64>), MlError> {
    let sol = svm::solve_svc(x, y, params, alpha0)?;
    Ok((
        LinearModel {
            kind: ModelKind::Svc,
            feature_names: default_names(width(x)),
            weights: sol.weights,
            bias: sol.bias,
            c: params.c,
            epsilon: params.epsilon,
            a: None,
            b: None,
            seed: params.seed,
            solver: sol.stats,
        },
        sol.alpha,
    ))
}

/// Epsilon-SVR. Targets are centred before solving so the regularized bias
/// only models deviations from the training mean.
pub fn train_linear_svr(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SolverParams,
) -> Result<LinearModel, MlError> {
    train_linear_svr_warm(x, y, params, None).map(|(m, _)| m)
}

pub fn train_linear_svr_warm(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SolverParams,
    beta0: Option<&[f64]>,
) -> Result<(LinearModel, Vec<f64>), MlError> {
    if y.is_empty() {
        return Err(MlError::Empty);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let centred: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let sol = svm::solve_svr(x, &centred, params, beta0)?;
    Ok((
        LinearModel {
            kind: ModelKind::Svr,
            feature_names: default_names(width(x)),
            weights: sol.weights,
            bias: sol.bias + mean,
            c: params.c,
            epsilon: params.epsilon,
            a: None,
            b: None,
            seed: params.seed,
            solver: sol.stats,
        },
        sol.alpha,
    ))
}

/// Calibrated probability of being a translation.
pub fn translatedness_score(model: &LinearModel, x: &[f64]) -> Result<f64, MlError> {
    model.probability(x)
}

/// Unweighted mean of the two per-class F1 scores; a class absent from both
/// predictions and gold labels scores 0.
pub fn macro_f1(pred: &[bool], gold: &[bool]) -> Result<f64, MlError> {
    if pred.is_empty() {
        return Err(MlError::Empty);
    }
    if pred.len() != gold.len() {
        return Err(MlError::Shape(format!("{} vs {}", pred.len(), gold.len())));
    }
    let f1 = |class: bool| {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fnn = 0usize;
        for (&p, &g) in pred.iter().zip(gold) {
            match (p == class, g == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                _ => {}
            }
        }
        let denom = 2 * tp + fp + fnn;
        if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    Ok((f1(false) + f1(true)) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_one_dimension() {
        let x: Vec<Vec<f64>> = [-1.0, -1.2, -0.8, 1.0, 1.1, 0.9]
            .iter()
            .map(|v| vec![*v])
            .collect();
        let y = [false, false, false, true, true, true];
        let m = train_linear_svc(&x, &y, &SolverParams::default()).unwrap();
        for (r, &label) in x.iter().zip(&y) {
            assert_eq!(m.decision(r) > 0.0, label);
        }
        assert!(m.solver.converged);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert_eq!(
            train_linear_svc(&x, &[true, true], &SolverParams::default()),
            Err(MlError::SingleClass)
        );
        let bad = vec![vec![f64::NAN], vec![2.0]];
        assert_eq!(
            train_linear_svc(&bad, &[true, false], &SolverParams::default()),
            Err(MlError::NonFinite)
        );
    }

    #[test]
    fn macro_f1_cases() {
        let gold = [true, true, false, false];
        assert_eq!(macro_f1(&gold, &gold).unwrap(), 1.0);
        let all_tgt = [true; 4];
        assert!((macro_f1(&all_tgt, &gold).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(macro_f1(&[], &[]).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let m = train_linear_svc(&x, &[false, false, true, true], &SolverParams::default())
            .unwrap()
            .with_calibration(Platt { a: -1.0, b: 0.0 });
        let json = m.to_json();
        assert!(json.contains("\"A\": -1.0"));
        assert_eq!(LinearModel::from_json(&json).unwrap(), m);
    }
}
