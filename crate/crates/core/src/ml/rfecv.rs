use serde::{Deserialize, Serialize};

use super::{macro_f1, train_linear_svc_warm, train_linear_svr_warm, FoldPlan, MlError, SolverParams};
use crate::stats::r_squared;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Scored by macro-F1.
    Svc(SolverParams),
    /// Scored by R^2.
    Svr(SolverParams),
}

#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Classes(&'a [bool]),
    Values(&'a [f64]),
}

impl Targets<'_> {
    fn len(&self) -> usize {
        match self {
            Targets::Classes(y) => y.len(),
            Targets::Values(y) => y.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfecvResult {
    /// Column indices kept, ascending.
    pub selected: Vec<usize>,
    /// `(n_features, mean CV score)` from the full set down to the minimum.
    pub scores: Vec<(usize, f64)>,
    /// 1 for selected columns; eliminated columns rank by how late they went.
    pub ranking: Vec<usize>,
}

fn project(x: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|&r| cols.iter().map(|&c| x[r][c]).collect())
        .collect()
}

struct Fit {
    weights: Vec<f64>,
    bias: f64,
    dual: Vec<f64>,
}

fn fit(
    est: &Estimator,
    x: &[Vec<f64>],
    y: &Targets,
    rows: &[usize],
    warm: Option<&[f64]>,
) -> Result<Fit, MlError> {
    let (m, dual) = match (est, y) {
        (Estimator::Svc(p), Targets::Classes(y)) => {
            let yy: Vec<bool> = rows.iter().map(|&r| y[r]).collect();
            train_linear_svc_warm(x, &yy, p, warm)?
        }
        (Estimator::Svr(p), Targets::Values(y)) => {
            let yy: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
            train_linear_svr_warm(x, &yy, p, warm)?
        }
        _ => return Err(MlError::Shape("estimator and target kind differ".into())),
    };
    Ok(Fit {
        weights: m.weights,
        bias: m.bias,
        dual,
    })
}

fn score(fit: &Fit, x: &[Vec<f64>], y: &Targets, rows: &[usize]) -> f64 {
    let dec: Vec<f64> = x
        .iter()
        .map(|r| r.iter().zip(&fit.weights).map(|(a, w)| a * w).sum::<f64>() + fit.bias)
        .collect();
    match y {
        Targets::Classes(y) => {
            let pred: Vec<bool> = dec.iter().map(|&d| d > 0.0).collect();
            let gold: Vec<bool> = rows.iter().map(|&r| y[r]).collect();
            macro_f1(&pred, &gold).unwrap_or(f64::NAN)
        }
        Targets::Values(y) => {
            let truth: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
            r_squared(&dec, &truth).unwrap_or(f64::NAN)
        }
    }
}

fn weakest(weights: &[f64]) -> usize {
    let mut best = 0;
    for (i, w) in weights.iter().enumerate() {
        if w.abs() < weights[best].abs() {
            best = i;
        }
    }
    best
}

/// Eliminates one feature at a time on `rows`, calling `visit` with the
/// active columns and the fit before each drop. Returns the columns in
/// elimination order.
fn eliminate(
    est: &Estimator,
    x: &[Vec<f64>],
    y: &Targets,
    rows: &[usize],
    stop_at: usize,
    mut visit: impl FnMut(&[usize], &Fit),
) -> Result<Vec<usize>, MlError> {
    let d = x.first().map(Vec::len).unwrap_or(0);
    let mut active: Vec<usize> = (0..d).collect();
    let mut dropped = Vec::new();
    let mut dual: Option<Vec<f64>> = None;
    loop {
        let xs = project(x, rows, &active);
        let f = fit(est, &xs, y, rows, dual.as_deref())?;
        visit(&active, &f);
        if active.len() <= stop_at {
            break;
        }
        let j = weakest(&f.weights);
        dropped.push(active.remove(j));
        dual = Some(f.dual);
    }
    Ok(dropped)
}

/// Recursive feature elimination with grouped cross-validation, one feature
/// per step. The feature count with the best mean score wins, fewer
/// features on ties, and the elimination path is then replayed on all rows.
pub fn rfecv(
    est: &Estimator,
    x: &[Vec<f64>],
    y: Targets,
    plan: &FoldPlan,
    min_features: usize,
) -> Result<RfecvResult, MlError> {
    if x.is_empty() {
        return Err(MlError::Empty);
    }
    if y.len() != x.len() || plan.assignments.len() != x.len() {
        return Err(MlError::Shape(format!(
            "{} rows, {} targets, {} fold assignments",
            x.len(),
            y.len(),
            plan.assignments.len()
        )));
    }
    let d = x[0].len();
    let min_features = min_features.max(1).min(d);
    let mut totals = vec![0.0; d + 1];
    for fold in 0..plan.k {
        let train = plan.train_indices(fold);
        let test = plan.test_indices(fold);
        eliminate(est, x, &y, &train, min_features, |active, f| {
            let xt = project(x, &test, active);
            totals[active.len()] += score(f, &xt, &y, &test);
        })?;
    }
    let mut scores = Vec::new();
    for count in (min_features..=d).rev() {
        let s = totals[count] / plan.k as f64;
        if !s.is_finite() {
            return Err(MlError::NonFiniteScore(count));
        }
        scores.push((count, s));
    }
    let best = scores
        .iter()
        .copied()
        .fold(None::<(usize, f64)>, |acc, (c, s)| match acc {
            Some((_, bs)) if bs > s => acc,
            _ => Some((c, s)),
        })
        .map(|(c, _)| c)
        .expect("at least one count");
    let all: Vec<usize> = (0..x.len()).collect();
    let dropped = eliminate(est, x, &y, &all, best, |_, _| {})?;
    let mut ranking = vec![1; d];
    let n_dropped = dropped.len();
    for (step, &j) in dropped.iter().enumerate() {
        ranking[j] = n_dropped - step + 1;
    }
    let selected = (0..d).filter(|&j| ranking[j] == 1).collect();
    Ok(RfecvResult {
        selected,
        scores,
        ranking,
    })
}
