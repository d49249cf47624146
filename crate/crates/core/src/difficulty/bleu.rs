use std::collections::HashMap;

use super::DifficultyError;

const MAX_ORDER: usize = 4;

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut out = HashMap::new();
    for w in tokens.windows(n) {
        *out.entry(w).or_insert(0) += 1;
    }
    out
}

/// Sentence-level BLEU on pre-tokenized input with exponential smoothing and
/// effective n-gram order, matching the usual sentence-BLEU defaults.
pub fn pseudo_bleu(reference: &[&str], prediction: &[&str]) -> Result<f64, DifficultyError> {
    if reference.is_empty() {
        return Err(DifficultyError::EmptyReference);
    }
    let mut correct = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    for n in 1..=MAX_ORDER {
        let hyp = ngram_counts(prediction, n);
        let refs = ngram_counts(reference, n);
        total[n - 1] = prediction.len().saturating_sub(n - 1);
        correct[n - 1] = hyp
            .iter()
            .map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0)))
            .sum();
    }
    if correct.iter().all(|&c| c == 0) {
        return Ok(0.0);
    }
    let mut precisions = [0.0f64; MAX_ORDER];
    let mut smooth = 1.0;
    let mut order = MAX_ORDER;
    for n in 1..=MAX_ORDER {
        if total[n - 1] == 0 {
            break;
        }
        order = n;
        precisions[n - 1] = if correct[n - 1] == 0 {
            smooth *= 2.0;
            100.0 / (smooth * total[n - 1] as f64)
        } else {
            100.0 * correct[n - 1] as f64 / total[n - 1] as f64
        };
    }
    let (hyp_len, ref_len) = (prediction.len() as f64, reference.len() as f64);
    let bp = if hyp_len < ref_len {
        (1.0 - ref_len / hyp_len).exp()
    } else {
        1.0
    };
    let log_sum: f64 = precisions[..order].iter().map(|p| p.ln()).sum();
    Ok(bp * (log_sum / order as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_and_empty() {
        let r = toks("we must vote now");
        assert!((pseudo_bleu(&r, &r).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(pseudo_bleu(&r, &[]).unwrap(), 0.0);
        assert!(pseudo_bleu(&[], &r).is_err());
    }
}
