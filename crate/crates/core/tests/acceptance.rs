//! One line per acceptance criterion; exits non-zero if any fails.
//!
//! Set `MEDLOAD_EPIC_DIR` to a written en-de subcorpus directory to run the
//! corpus reproduction checks; they are skipped otherwise.

mod common;

use std::time::Instant;

use common::{lognormal_vec, matrix_from_columns, normal_vec};
use medload::conllu::{CorpusLayout, LanguagePair, Mode};
use medload::difficulty::{
    defined_entropies, extract_difficulty_vector, pseudo_bleu, solution_entropy,
    DifficultyResources, TableVariant, TokenFilter, TranslationTable,
};
use medload::experiments::synth::{synthetic_difficulty, synthetic_translationese, write_synthetic_corpus};
use medload::experiments::{run_classification, run_regression, ExperimentConfig, ExperimentInputs, Report, Task};
use medload::matrix::Stage;
use medload::ml::{
    group_kfold, linear_shap, rfecv, train_linear_svc, train_linear_svr, Estimator, SolverParams,
    Targets,
};
use medload::preprocess::{adjusted_skewness, FittedPipeline, PreprocessConfig};
use medload::stats::median;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn entropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(1..=8);
        let counts: Vec<u64> = (0..k).map(|_| rng.random_range(1..100)).collect();
        let mut t = TranslationTable::new(TableVariant::Lemmas);
        for (i, &c) in counts.iter().enumerate() {
            t.add("x".into(), format!("y{i}"), c);
        }
        let total: u64 = counts.iter().sum();
        let brute: f64 = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum();
        let h = solution_entropy("x", &t).unwrap_or(f64::NAN);
        worst = worst.max((h - brute).abs());
    }
    let mut t = TranslationTable::new(TableVariant::Lemmas);
    t.add("x".into(), "a".into(), 1);
    t.add("x".into(), "b".into(), 1);
    let uniform = solution_entropy("x", &t);
    check(
        worst <= 1e-12 && uniform == Some(1.0),
        format!("max |H - brute| = {worst:.1e}, uniform-2 = {uniform:?}"),
    )
}

fn fallback() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic_corpus(dir.path(), LanguagePair::EnDe, 6, 8, 3).unwrap();
    let corpus = CorpusLayout::new(dir.path(), Mode::Written, LanguagePair::EnDe).load().unwrap();
    let res = DifficultyResources::build(&corpus.pairs, &corpus.pairs);
    let defined = defined_entropies(&corpus.pairs, &res.lemmas, TokenFilter::All);
    let med = median(&defined);
    let n = defined.len() as f64;
    let mean = defined.iter().sum::<f64>() / n;
    let sd = (defined.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let policy = res.fallback_lemmas.unwrap();
    let stats_ok = policy.median == med && (policy.sd - sd).abs() <= 1e-12;

    let mut exact = 0;
    for (i, pair) in corpus.pairs.iter().enumerate() {
        let mut p = pair.clone();
        for s in &mut p.source.sentences {
            for t in &mut s.tokens {
                t.lemma = format!("unseen{i}_{}", t.id);
            }
        }
        let v = extract_difficulty_vector(&p, &res).get("tot_entropy").unwrap();
        if v == p.source.word_count() as f64 * (policy.median + 2.0 * policy.sd) {
            exact += 1;
        }
    }
    check(
        stats_ok && exact == corpus.pairs.len(),
        format!("{exact}/{} segments exact; median {med:.4}, sd {sd:.4}", corpus.pairs.len()),
    )
}

fn bleu() -> Outcome {
    let rows = common::bleu_fixture();
    let worst = rows
        .iter()
        .map(|(r, h, b)| (pseudo_bleu(&common::words(r), &common::words(h)).unwrap() - b).abs())
        .fold(0.0, f64::max);
    let w = common::words("the committee adopted the report");
    let identity = pseudo_bleu(&w, &w).unwrap();
    let empty = pseudo_bleu(&w, &[]).unwrap();
    check(
        rows.len() == 50 && worst <= 1e-6 && (identity - 100.0).abs() < 1e-9 && empty == 0.0,
        format!("{} pairs, max diff {worst:.1e}; identity {identity:.6}; empty {empty}", rows.len()),
    )
}

fn group_leakage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for c in 0..100 {
        let n_groups = rng.random_range(5..60);
        let k = rng.random_range(2..=n_groups.min(10));
        let groups: Vec<String> = (0..n_groups)
            .flat_map(|g| vec![format!("doc{g}"); rng.random_range(1..25)])
            .collect();
        let plan = group_kfold(&groups, k, c).unwrap();
        for f in 0..k {
            let test: std::collections::HashSet<&str> =
                plan.test_indices(f).iter().map(|&i| groups[i].as_str()).collect();
            violations += plan.train_indices(f).iter().filter(|&&i| test.contains(groups[i].as_str())).count();
        }
    }
    check(violations == 0, format!("100 configurations, {violations} leaked rows"))
}

fn shap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut rows = 0;
    for m in 0..40 {
        let d = rng.random_range(1..8);
        let x: Vec<Vec<f64>> = (0..80).map(|_| normal_vec(&mut rng, d)).collect();
        let model = if m % 2 == 0 {
            let y: Vec<bool> = x.iter().map(|r| r[0] + rng.random_range(-1.0..1.0) > 0.0).collect();
            train_linear_svc(&x, &y, &SolverParams::default()).unwrap()
        } else {
            let y: Vec<f64> = x.iter().map(|r| r.iter().sum::<f64>() + rng.random_range(-1.0..1.0)).collect();
            train_linear_svr(&x, &y, &SolverParams::default()).unwrap()
        };
        let names = model.feature_names.clone();
        let s = linear_shap(&model, &names, &x, &x[..40]).unwrap();
        for (r, c) in x.iter().zip(&s.contributions) {
            worst = worst.max((c.iter().sum::<f64>() - (model.decision(r) - s.base)).abs());
            rows += 1;
        }
    }
    check(worst <= 1e-9, format!("40 models, {rows} rows, max error {worst:.1e}"))
}

fn preprocessing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let names = ["a", "b", "c", "d"];
    let cols: Vec<Vec<f64>> = (0..4).map(|j| lognormal_vec(&mut rng, 400, 0.5 + 0.25 * j as f64)).collect();
    let m = matrix_from_columns(&names, &cols, 4, Stage::Normalized);
    let cfg = PreprocessConfig { r_max: 1.0, ..PreprocessConfig::default() };
    let p = FittedPipeline::fit(&m, &cfg, |_, _| None).unwrap();
    let mut skew_ok = true;
    let mut transformed = 0;
    for (c, col) in p.columns.iter().zip(&cols) {
        let g = adjusted_skewness(col).unwrap();
        if g > 1.0 {
            let after = adjusted_skewness(&col.iter().map(|v| v.ln_1p()).collect::<Vec<_>>()).unwrap();
            skew_ok &= c.log_applied && after < g;
            transformed += 1;
        } else {
            skew_ok &= !c.log_applied;
        }
    }
    let t = p.transform(&m).unwrap();
    let (mut max_mu, mut max_sd) = (0.0f64, 0.0f64);
    for j in 0..t.n_cols() {
        let c = t.column(j);
        let n = c.len() as f64;
        let mu = c.iter().sum::<f64>() / n;
        let pop_sd = (c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
        max_mu = max_mu.max(mu.abs());
        max_sd = max_sd.max((pop_sd - 1.0).abs());
    }
    check(
        skew_ok && transformed > 0 && max_mu < 1e-9 && max_sd < 1e-9,
        format!("{transformed}/4 columns log-transformed; max |mean| {max_mu:.1e}, max |sd - 1| {max_sd:.1e}"),
    )
}

fn classification_cfg(shuffle: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.data.synthetic = true;
    cfg.data.shuffle = shuffle;
    cfg
}

fn classification() -> (Outcome, String) {
    let cfg = classification_cfg(false);
    let start = Instant::now();
    let (org, tgt, _) = synthetic_translationese(&cfg.synthetic, cfg.run.seed);
    let real = run_classification(&cfg, &org, &tgt).unwrap().report;
    let secs = start.elapsed().as_secs_f64();
    let shuffled = run_classification(&classification_cfg(true), &org, &tgt).unwrap().report;
    let n = real.n_org + real.n_tgt;
    let ok = real.f1_mean >= 0.95 && (shuffled.f1_mean - 0.5).abs() <= 0.07 && secs < 300.0 && n == 4000;
    let json = Report::Classify(real.clone()).to_json();
    (
        check(
            ok,
            format!(
                "{n} segments: macro-F1 {:.4}, shuffled {:.4}, {secs:.1}s",
                real.f1_mean, shuffled.f1_mean
            ),
        ),
        json,
    )
}

fn regression_cfg(shuffle: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.data.synthetic = true;
    cfg.data.task = Task::Regress;
    cfg.data.shuffle = shuffle;
    cfg
}

fn regression() -> (Outcome, String) {
    let cfg = regression_cfg(false);
    let (m, scores) = synthetic_difficulty(&cfg.synthetic, cfg.run.seed);
    let real = run_regression(&cfg, &m, &scores, None).unwrap();
    let shuffled = run_regression(&regression_cfg(true), &m, &scores, None).unwrap();
    let r2 = |name: &str| {
        real.subsets.iter().find(|s| s.subset == name).and_then(|s| s.r2).unwrap_or(f64::NAN)
    };
    let min_rho = real.subsets.iter().map(|s| s.rho.unwrap_or(f64::NAN)).fold(f64::INFINITY, f64::min);
    let max_null = shuffled.subsets.iter().map(|s| s.r2.unwrap_or(f64::NAN)).fold(f64::NEG_INFINITY, f64::max);
    let best_single = r2("source").max(r2("transfer"));
    let combined = r2("source+transfer");
    let ok = min_rho >= 0.30 && max_null <= 0.02 && combined >= best_single - 0.02;
    let json = Report::Regress(real.clone()).to_json();
    (
        check(
            ok,
            format!(
                "min rho {min_rho:.3}; shuffled max R2 {max_null:.4}; source+transfer R2 {combined:.3} vs best single {best_single:.3}"
            ),
        ),
        json,
    )
}

fn rfecv_floor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 120;
    let y: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let x: Vec<Vec<f64>> = y
        .iter()
        .map(|&l| {
            let mut row = normal_vec(&mut rng, 6);
            row[0] = if l { 1.0 } else { -1.0 } + 0.1 * row[0];
            row
        })
        .collect();
    let groups: Vec<String> = (0..n).map(|i| format!("d{}", i / 4)).collect();
    let plan = group_kfold(&groups, 5, 1).unwrap();
    let r = rfecv(&Estimator::Svc(SolverParams::default()), &x, Targets::Classes(&y), &plan, 2).unwrap();
    check(
        r.selected.len() == 2 && r.selected.contains(&0),
        format!("selected columns {:?}", r.selected),
    )
}

fn determinism(first_cls: &str, first_reg: &str) -> Outcome {
    let (_, cls) = classification();
    let (_, reg) = regression();
    check(
        cls == first_cls && reg == first_reg,
        format!("classification report identical: {}, regression report identical: {}", cls == first_cls, reg == first_reg),
    )
}

fn epic() -> Outcome {
    let Ok(dir) = std::env::var("MEDLOAD_EPIC_DIR") else {
        return Outcome::Skip("MEDLOAD_EPIC_DIR not set".into());
    };
    let mut cfg = ExperimentConfig::default();
    cfg.data.corpus = Some(dir.into());
    cfg.data.mode = Mode::Written;
    cfg.data.lpair = LanguagePair::EnDe;
    cfg.data.task = Task::Regress;
    let inputs = match ExperimentInputs::load(&cfg) {
        Ok(i) => i,
        Err(e) => return Outcome::Fail(format!("loading corpus: {e}")),
    };
    let (org, tgt, diff) = (inputs.org.unwrap(), inputs.tgt.unwrap(), inputs.difficulty.unwrap());
    let outcome = run_classification(&cfg, &org, &tgt).unwrap();
    let f1 = 100.0 * outcome.report.f1_mean;
    let reg = run_regression(&cfg, &diff, &outcome.scores, None).unwrap();
    let r2 = reg
        .subsets
        .iter()
        .find(|s| s.subset == "source+transfer")
        .and_then(|s| s.r2)
        .unwrap_or(f64::NAN);
    check(
        (f1 - 60.85).abs() <= 3.0 * 2.61 && (r2 - 0.21).abs() <= 0.05,
        format!("macro-F1 {f1:.2} (60.85 +- 7.83), source+transfer R2 {r2:.3} (0.21 +- 0.05)"),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, o: Outcome| {
        let (tag, detail) = match o {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name}: {detail}");
    };
    report("entropy", entropy());
    report("fallback", fallback());
    report("pseudo_bleu", bleu());
    report("groupkfold_leakage", group_leakage());
    report("shap_additivity", shap());
    report("preprocessing", preprocessing());
    let (o, cls) = classification();
    report("classification_sanity", o);
    let (o, reg) = regression();
    report("regression_sanity", o);
    report("rfecv_floor", rfecv_floor());
    report("determinism", determinism(&cls, &reg));
    report("corpus_reproduction", epic());
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
