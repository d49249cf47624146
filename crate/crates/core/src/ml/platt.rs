use serde::{Deserialize, Serialize};

use super::{LinearModel, MlError};

/// Sigmoid calibration `P(positive | f) = 1 / (1 + exp(A f + B))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Platt {
    pub a: f64,
    pub b: f64,
}

impl Platt {
    pub fn probability(&self, decision: f64) -> f64 {
        let z = self.a * decision + self.b;
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }
}

fn objective(dec: &[f64], t: &[f64], a: f64, b: f64) -> f64 {
    dec.iter()
        .zip(t)
        .map(|(&f, &ti)| {
            let z = f * a + b;
            if z >= 0.0 {
                ti * z + (-z).exp().ln_1p()
            } else {
                (ti - 1.0) * z + z.exp().ln_1p()
            }
        })
        .sum()
}

/// Fits (A, B) by Newton's method with backtracking on the regularized
/// targets `(n+ + 1) / (n+ + 2)` and `1 / (n- + 2)`.
pub fn sigmoid_train(dec: &[f64], labels: &[bool]) -> Result<Platt, MlError> {
    if dec.len() != labels.len() {
        return Err(MlError::Shape(format!("{} vs {}", dec.len(), labels.len())));
    }
    if dec.iter().any(|v| !v.is_finite()) {
        return Err(MlError::NonFinite);
    }
    let prior1 = labels.iter().filter(|&&l| l).count() as f64;
    let prior0 = labels.len() as f64 - prior1;
    if prior1 == 0.0 || prior0 == 0.0 {
        return Err(MlError::SingleClass);
    }
    const MAX_ITER: usize = 100;
    const MIN_STEP: f64 = 1e-10;
    const SIGMA: f64 = 1e-12;
    const EPS: f64 = 1e-5;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l { hi } else { lo }).collect();
    let mut a = 0.0;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let mut fval = objective(dec, &t, a, b);
    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&f, &ti) in dec.iter().zip(&t) {
            let z = f * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
            let d1 = ti - p;
            g1 += f * d1;
            g2 += d1;
        }
        if g1.abs() < EPS && g2.abs() < EPS {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(dec, &t, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            log::debug!("platt line search failed");
            break;
        }
    }
    Ok(Platt { a, b })
}

/// Calibrates `model` on held-out rows.
pub fn platt_calibrate(
    model: &LinearModel,
    x_holdout: &[Vec<f64>],
    y_holdout: &[bool],
) -> Result<LinearModel, MlError> {
    let dec = model.decisions(x_holdout);
    let p = sigmoid_train(&dec, y_holdout)?;
    Ok(model.clone().with_calibration(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero() {
        assert_eq!(Platt { a: -1.0, b: 0.0 }.probability(0.0), 0.5);
    }

    #[test]
    fn separated_holdout_is_monotone() {
        let dec = [-2.0, -1.5, -1.0, 1.0, 1.5, 2.0];
        let y = [false, false, false, true, true, true];
        let p = sigmoid_train(&dec, &y).unwrap();
        assert!(p.a < 0.0);
        let probs: Vec<f64> = dec.iter().map(|&f| p.probability(f)).collect();
        assert!(probs.windows(2).all(|w| w[0] < w[1]));
        for (pr, &l) in probs.iter().zip(&y) {
            assert_eq!(*pr > 0.5, l);
        }
        assert!(sigmoid_train(&dec, &[true; 6]).is_err());
    }
}
