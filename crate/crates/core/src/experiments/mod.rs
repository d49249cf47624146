//! The experiment grid: translatedness classification, difficulty
//! regression and the descriptive tables around them.

mod classify;
mod config;
mod inputs;
mod regress;
mod report;
pub mod synth;
mod tables;

pub use classify::{fit_classifier, run_classification, ClassificationOutcome, ScoringModel};
pub use config::{
    resolve_subset, DataConfig, ExperimentConfig, ModelConfig, PreprocessSection, RunConfig,
    SyntheticConfig, Task, Unit,
};
pub use inputs::{extract_difficulty, extract_translationese, load_corpus, ExperimentInputs};
pub use regress::run_regression;
pub use report::{
    bar_chart_svg, heatmap_svg, ClassificationReport, FoldSummary, InputDigest, RegressionReport,
    RegressionRow, Report, ShapRow,
};
pub use tables::{
    audit_cross_collinearity, frequency_comparison, univariate_table, AuditRow, FrequencyRow,
    UnivariateRow, AUDIT_THRESHOLD, BOLD_RHO,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conllu::CorpusError;
use crate::matrix::MatrixError;
use crate::ml::MlError;
use crate::preprocess::PreprocessError;
use crate::translationese::{LexiconError, TranslationeseError};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown feature subset {0:?}")]
    UnknownSubset(String),
    #[error("no {0} segments for the requested language")]
    MissingSide(&'static str),
    #[error("features missing from the extraction output: {0:?}")]
    MissingFeatures(Vec<String>),
    #[error("regression needs translatedness scores (data.scores)")]
    MissingScores,
    #[error("no difficulty row has a translatedness score")]
    NoScoredRows,
    #[error("scores file line {line}: {message}")]
    Scores { line: usize, message: String },
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Translationese(#[from] TranslationeseError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

impl ExperimentError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

/// Translatedness of one row, with the outer fold that scored it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub group: String,
    pub fold: Option<usize>,
    pub score: f64,
}

const SCORE_HEADER: &str = "id\tgroup\tfold\tscore";

pub fn scores_to_tsv(rows: &[ScoreRow]) -> String {
    let mut out = format!("{SCORE_HEADER}\n");
    for r in rows {
        let fold = r.fold.map(|f| f.to_string()).unwrap_or_else(|| "NA".into());
        out.push_str(&format!("{}\t{}\t{fold}\t{}\n", r.id, r.group, r.score));
    }
    out
}

pub fn scores_from_tsv(text: &str) -> Result<Vec<ScoreRow>, ExperimentError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h == SCORE_HEADER => {}
        _ => {
            return Err(ExperimentError::Scores {
                line: 1,
                message: format!("expected header {SCORE_HEADER:?}"),
            })
        }
    }
    lines
        .map(|(i, l)| {
            let bad = |m: &str| ExperimentError::Scores {
                line: i + 1,
                message: m.to_string(),
            };
            let c: Vec<&str> = l.split('\t').collect();
            if c.len() != 4 {
                return Err(bad("expected 4 columns"));
            }
            let fold = match c[2] {
                "NA" => None,
                f => Some(f.parse().map_err(|_| bad("invalid fold"))?),
            };
            let score: f64 = c[3].parse().map_err(|_| bad("invalid score"))?;
            if !score.is_finite() {
                return Err(bad("non-finite score"));
            }
            Ok(ScoreRow {
                id: c[0].to_string(),
                group: c[1].to_string(),
                fold,
                score,
            })
        })
        .collect()
}

/// Runs `f` on a pool of `jobs` threads (all cores when 0).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}), using the global pool");
            f()
        }
    }
}
