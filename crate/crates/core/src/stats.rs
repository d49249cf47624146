//! Rank statistics, significance tests and regression metrics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("need at least {need} values, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("constant input, statistic undefined")]
    Constant,
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    None,
}

impl Direction {
    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::None => "--",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub direction: Direction,
    pub n: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Average (1-based) ranks, ties sharing the mean of their positions.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_pair(x: &[f64], y: &[f64], need: usize) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::Length(x.len(), y.len()));
    }
    if x.len() < need {
        return Err(StatsError::TooFew {
            need,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y, 2)?;
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho with a two-sided t-approximation p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    check_pair(x, y, 3)?;
    let rho = pearson(&mid_ranks(x), &mid_ranks(y))?;
    let n = x.len();
    let df = (n - 2) as f64;
    let p_value = if (1.0 - rho * rho) <= 0.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { rho, p_value, n })
}

/// Two-sided Mann-Whitney U test of `a` against `b` (normal approximation with
/// tie and continuity correction). The direction describes `a`.
pub fn mann_whitney(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult, StatsError> {
    for s in [a, b] {
        if s.len() < 3 {
            return Err(StatsError::TooFew {
                need: 3,
                got: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = mid_ranks(&pooled);
    let ra: f64 = ranks[..a.len()].iter().sum();
    let u = ra - na * (na + 1.0) / 2.0;
    let n = na + nb;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let mu = na * nb / 2.0;
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let diff = u - mu;
        let z = (diff.abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.sf(z)).min(1.0)
    };
    let direction = if p_value > alpha {
        Direction::None
    } else if u > mu {
        Direction::Up
    } else if u < mu {
        Direction::Down
    } else {
        Direction::None
    };
    Ok(TestResult {
        statistic: u,
        p_value,
        direction,
        n: (a.len(), b.len()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub rho: Option<f64>,
    pub rho_p: Option<f64>,
    pub r2: Option<f64>,
    pub mae: f64,
}

pub fn r_squared(pred: &[f64], truth: &[f64]) -> Result<f64, StatsError> {
    check_pair(pred, truth, 1)?;
    let m = mean(truth);
    let ss_tot: f64 = truth.iter().map(|t| (t - m).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(StatsError::Constant);
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn regression_metrics(pred: &[f64], truth: &[f64]) -> Result<RegressionMetrics, StatsError> {
    check_pair(pred, truth, 3)?;
    let corr = spearman(pred, truth).ok();
    let mae = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64;
    Ok(RegressionMetrics {
        rho: corr.map(|c| c.rho),
        rho_p: corr.map(|c| c.p_value),
        r2: r_squared(pred, truth).ok(),
        mae,
    })
}

/// Mean and standard deviation (population convention).
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64;
    (m, var.sqrt())
}

/// Median of the finite values; NaN when there are none.
pub fn median(x: &[f64]) -> f64 {
    let mut v: Vec<f64> = x.iter().copied().filter(|v| v.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Pooled out-of-fold macro-F1 of a linear SVM on a single feature,
/// standardized per training fold with median imputation. `None` when the
/// column is constant or a training fold lacks a class.
pub fn univariate_f1(
    column: &[f64],
    labels: &[bool],
    plan: &crate::ml::FoldPlan,
    params: &crate::ml::SolverParams,
) -> Option<f64> {
    if column.len() != labels.len() || column.len() != plan.assignments.len() {
        return None;
    }
    let mut pred = vec![false; column.len()];
    for fold in 0..plan.k {
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        let train_vals: Vec<f64> = train.iter().map(|&i| column[i]).collect();
        let med = median(&train_vals);
        if med.is_nan() {
            return None;
        }
        let fill = |v: f64| if v.is_finite() { v } else { med };
        let filled: Vec<f64> = train_vals.iter().map(|&v| fill(v)).collect();
        let (m, sd) = mean_sd(&filled);
        if sd == 0.0 {
            return None;
        }
        let x: Vec<Vec<f64>> = filled.iter().map(|v| vec![(v - m) / sd]).collect();
        let y: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let model = crate::ml::train_linear_svc(&x, &y, params).ok()?;
        for &i in &test {
            pred[i] = model.decision(&[(fill(column[i]) - m) / sd]) > 0.0;
        }
    }
    crate::ml::macro_f1(&pred, labels).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_f1_separating_and_constant() {
        let groups: Vec<String> = (0..20).map(|i| format!("d{i}")).collect();
        let plan = crate::ml::group_kfold(&groups, 5, 1).unwrap();
        let labels: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let x: Vec<f64> = labels.iter().map(|&l| if l { 2.0 } else { -2.0 }).collect();
        let p = crate::ml::SolverParams::default();
        assert_eq!(univariate_f1(&x, &labels, &plan, &p), Some(1.0));
        assert_eq!(univariate_f1(&[1.0; 20], &labels, &plan, &p), None);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(mid_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn spearman_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let rev = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman(&x, &x).unwrap().rho, 1.0);
        assert_eq!(spearman(&x, &rev).unwrap().rho, -1.0);
        assert_eq!(spearman(&x, &[1.0; 5]), Err(StatsError::Constant));
    }

    #[test]
    fn mann_whitney_disjoint() {
        let r = mann_whitney(&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0], 0.05).unwrap();
        assert_eq!((r.statistic, r.direction), (0.0, Direction::Down));
        let flipped = mann_whitney(&[6.0, 7.0, 8.0, 9.0, 10.0], &[1.0, 2.0, 3.0, 4.0, 5.0], 0.05).unwrap();
        assert_eq!(flipped.direction, Direction::Up);
        assert_eq!(flipped.p_value, r.p_value);
        let same = mann_whitney(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 0.05).unwrap();
        assert_eq!(same.direction, Direction::None);
        let tied = mann_whitney(&[2.0; 4], &[2.0; 5], 0.05).unwrap();
        assert_eq!((tied.p_value, tied.direction), (1.0, Direction::None));
    }

    #[test]
    fn metrics_identity_and_mean() {
        let t = [1.0, 2.0, 4.0, 8.0];
        let m = regression_metrics(&t, &t).unwrap();
        assert_eq!((m.rho, m.r2, m.mae), (Some(1.0), Some(1.0), 0.0));
        let flat = [3.75; 4];
        assert_eq!(r_squared(&flat, &t).unwrap(), 0.0);
        assert!(r_squared(&t, &[1.0; 4]).is_err());
    }
}
