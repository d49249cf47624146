use serde::{Deserialize, Serialize};

use super::{LinearModel, MlError};

/// Exact Shapley values of a linear decision function under feature
/// independence: `w_j * (x_j - mean_j)`, with `base` the decision at the
/// background mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapAttribution {
    pub feature_names: Vec<String>,
    pub base: f64,
    /// One row per explained sample.
    pub contributions: Vec<Vec<f64>>,
}

impl ShapAttribution {
    /// Mean signed contribution per feature.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.contributions.len().max(1) as f64;
        (0..self.feature_names.len())
            .map(|j| self.contributions.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }

    pub fn mean_abs(&self) -> Vec<f64> {
        let n = self.contributions.len().max(1) as f64;
        (0..self.feature_names.len())
            .map(|j| self.contributions.iter().map(|r| r[j].abs()).sum::<f64>() / n)
            .collect()
    }
}

pub fn linear_shap(
    model: &LinearModel,
    names: &[String],
    x: &[Vec<f64>],
    background: &[Vec<f64>],
) -> Result<ShapAttribution, MlError> {
    if names != model.feature_names.as_slice() {
        return Err(MlError::FeatureMismatch {
            model: model.feature_names.clone(),
            input: names.to_vec(),
        });
    }
    if background.is_empty() {
        return Err(MlError::Empty);
    }
    let d = names.len();
    if x.iter().chain(background).any(|r| r.len() != d) {
        return Err(MlError::Shape(format!("rows must have {d} columns")));
    }
    let mut bg = vec![0.0; d];
    for r in background {
        for (m, v) in bg.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut bg {
        *m /= background.len() as f64;
    }
    let contributions = x
        .iter()
        .map(|r| {
            (0..d)
                .map(|j| model.weights[j] * (r[j] - bg[j]))
                .collect()
        })
        .collect();
    Ok(ShapAttribution {
        feature_names: names.to_vec(),
        base: model.decision(&bg),
        contributions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::{train_linear_svc, SolverParams};

    #[test]
    fn contributions_sum_to_decision() {
        let x = vec![
            vec![0.0, 1.0],
            vec![1.0, 0.5],
            vec![2.0, 2.0],
            vec![3.0, 0.0],
        ];
        let mut m = train_linear_svc(&x, &[false, false, true, true], &SolverParams::default())
            .unwrap();
        m.feature_names = vec!["a".into(), "b".into()];
        let s = linear_shap(&m, &m.feature_names.clone(), &x, &x).unwrap();
        for (r, c) in x.iter().zip(&s.contributions) {
            assert!((s.base + c.iter().sum::<f64>() - m.decision(r)).abs() < 1e-12);
        }
        assert!(linear_shap(&m, &["b".into(), "a".into()], &x, &x).is_err());
    }
}
