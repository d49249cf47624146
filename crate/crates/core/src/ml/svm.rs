//! Dual coordinate descent for L2-regularized linear SVC (hinge loss) and
//! SVR (epsilon-insensitive loss). The bias is learned as the weight of a
//! constant feature equal to 1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_finite, MlError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub c: f64,
    /// Width of the insensitive tube (regression only).
    pub epsilon: f64,
    /// Stop once the duality gap is at most `tol * max(1, primal)`.
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            c: 1.0,
            epsilon: 0.1,
            tol: 1e-4,
            max_passes: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub passes: usize,
    pub primal: f64,
    pub dual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Dual variables, usable as a warm start on the same rows.
    pub alpha: Vec<f64>,
    pub stats: SolverStats,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    d: usize,
    qd: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(x: &'a [Vec<f64>]) -> Result<Self, MlError> {
        check_finite(x)?;
        let d = x.first().map(|r| r.len()).unwrap_or(0);
        if x.iter().any(|r| r.len() != d) {
            return Err(MlError::Shape("ragged feature rows".into()));
        }
        let qd = x.iter().map(|r| dot(r, r) + 1.0).collect();
        Ok(Problem { x, d, qd })
    }

    /// Decision value with the augmented weight vector (bias last).
    fn f(&self, w: &[f64], i: usize) -> f64 {
        dot(&w[..self.d], &self.x[i]) + w[self.d]
    }

    fn axpy(&self, w: &mut [f64], i: usize, a: f64) {
        for (wj, xj) in w[..self.d].iter_mut().zip(&self.x[i]) {
            *wj += a * xj;
        }
        w[self.d] += a;
    }
}

/// Projected-gradient spread below which a shrunk sweep counts as settled.
const SHRINK_EPS: f64 = 1e-3;
/// Sweeps between duality-gap checks while shrinking.
const GAP_EVERY: usize = 10;

fn warm(alpha0: Option<&[f64]>, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    match alpha0 {
        Some(a) if a.len() == n => a.iter().map(|v| v.clamp(lo, hi)).collect(),
        _ => vec![0.0; n],
    }
}

/// Hinge-loss classifier; labels are `true` for the positive class.
pub fn solve_svc(
    x: &[Vec<f64>],
    y: &[bool],
    params: &SolverParams,
    alpha0: Option<&[f64]>,
) -> Result<DualSolution, MlError> {
    let p = Problem::new(x)?;
    let n = x.len();
    if y.len() != n {
        return Err(MlError::Shape(format!("{n} rows, {} labels", y.len())));
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(MlError::SingleClass);
    }
    let c = params.c;
    let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    let mut alpha = warm(alpha0, n, 0.0, c);
    let mut w = vec![0.0; p.d + 1];
    for i in 0..n {
        if alpha[i] != 0.0 {
            p.axpy(&mut w, i, alpha[i] * ys[i]);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut stats = SolverStats::default();
    let objectives = |w: &[f64], alpha: &[f64]| {
        let ww = dot(w, w);
        let loss: f64 = (0..n).map(|i| (1.0 - ys[i] * p.f(w, i)).max(0.0)).sum();
        let primal = 0.5 * ww + c * loss;
        let dual = alpha.iter().sum::<f64>() - 0.5 * ww;
        (primal, dual)
    };
    // Variables stuck at a bound are shrunk out of the sweep until the
    // remaining ones are optimal, then everything is revisited.
    let mut active = n;
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
    for pass in 1..=params.max_passes {
        order[..active].shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0;
        while s < active {
            let i = order[s];
            let g = ys[i] * p.f(&w, i) - 1.0;
            let mut pg = g;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                pg = g.min(0.0);
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                }
                pg = g.max(0.0);
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let new = (alpha[i] - g / p.qd[i]).clamp(0.0, c);
                let delta = new - alpha[i];
                if delta != 0.0 {
                    alpha[i] = new;
                    p.axpy(&mut w, i, delta * ys[i]);
                }
            }
            s += 1;
        }
        let settled = pg_max - pg_min <= SHRINK_EPS;
        if active == n || settled || pass % GAP_EVERY == 0 || pass == params.max_passes {
            let (primal, dual) = objectives(&w, &alpha);
            stats = SolverStats {
                passes: pass,
                primal,
                dual,
                converged: primal - dual <= params.tol * primal.abs().max(1.0),
            };
            if stats.converged {
                break;
            }
        }
        if settled {
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
        } else {
            pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
            pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
        }
    }
    if !stats.converged {
        log::debug!(
            "svc solver stopped after {} passes with gap {:.3e}",
            stats.passes,
            stats.primal - stats.dual
        );
    }
    let bias = w[p.d];
    w.truncate(p.d);
    Ok(DualSolution {
        weights: w,
        bias,
        alpha,
        stats,
    })
}

/// Epsilon-insensitive regressor.
pub fn solve_svr(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SolverParams,
    beta0: Option<&[f64]>,
) -> Result<DualSolution, MlError> {
    let p = Problem::new(x)?;
    let n = x.len();
    if y.len() != n {
        return Err(MlError::Shape(format!("{n} rows, {} targets", y.len())));
    }
    if n == 0 {
        return Err(MlError::Shape("no rows".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(MlError::NonFinite);
    }
    let (c, eps) = (params.c, params.epsilon);
    let mut beta = warm(beta0, n, -c, c);
    let mut w = vec![0.0; p.d + 1];
    for i in 0..n {
        if beta[i] != 0.0 {
            p.axpy(&mut w, i, beta[i]);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut stats = SolverStats::default();
    let objectives = |w: &[f64], beta: &[f64]| {
        let ww = dot(w, w);
        let loss: f64 = (0..n).map(|i| ((p.f(w, i) - y[i]).abs() - eps).max(0.0)).sum();
        let primal = 0.5 * ww + c * loss;
        let dual = -(0.5 * ww - dot(y, beta) + eps * beta.iter().map(|b| b.abs()).sum::<f64>());
        (primal, dual)
    };
    let mut active = n;
    let mut gmax_old = f64::INFINITY;
    for pass in 1..=params.max_passes {
        order[..active].shuffle(&mut rng);
        let mut gmax = 0.0f64;
        let mut s = 0;
        while s < active {
            let i = order[s];
            let h = p.qd[i];
            let g = p.f(&w, i) - y[i];
            let (gp, gn) = (g + eps, g - eps);
            let b = beta[i];
            let violation = if b == 0.0 {
                if gp < 0.0 {
                    -gp
                } else if gn > 0.0 {
                    gn
                } else if gp > gmax_old && gn < -gmax_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                } else {
                    0.0
                }
            } else if b >= c {
                if gp > 0.0 {
                    gp
                } else if gp < -gmax_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                } else {
                    0.0
                }
            } else if b <= -c {
                if gn < 0.0 {
                    -gn
                } else if gn > gmax_old {
                    active -= 1;
                    order.swap(s, active);
                    continue;
                } else {
                    0.0
                }
            } else if b > 0.0 {
                gp.abs()
            } else {
                gn.abs()
            };
            gmax = gmax.max(violation);
            let z = if gp < h * b {
                -gp / h
            } else if gn > h * b {
                -gn / h
            } else {
                -b
            };
            let new = (b + z).clamp(-c, c);
            let delta = new - b;
            if delta != 0.0 {
                beta[i] = new;
                p.axpy(&mut w, i, delta);
            }
            s += 1;
        }
        let settled = gmax <= SHRINK_EPS;
        if active == n || settled || pass % GAP_EVERY == 0 || pass == params.max_passes {
            let (primal, dual) = objectives(&w, &beta);
            stats = SolverStats {
                passes: pass,
                primal,
                dual,
                converged: primal - dual <= params.tol * primal.abs().max(1.0),
            };
            if stats.converged {
                break;
            }
        }
        if settled {
            active = n;
            gmax_old = f64::INFINITY;
        } else {
            gmax_old = gmax;
        }
    }
    if !stats.converged {
        log::debug!(
            "svr solver stopped after {} passes with gap {:.3e}",
            stats.passes,
            stats.primal - stats.dual
        );
    }
    let bias = w[p.d];
    w.truncate(p.d);
    Ok(DualSolution {
        weights: w,
        bias,
        alpha: beta,
        stats,
    })
}
