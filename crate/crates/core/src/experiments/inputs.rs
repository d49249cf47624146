use std::path::{Path, PathBuf};

use super::synth::{synthetic_difficulty, synthetic_translationese};
use super::{scores_from_tsv, ExperimentConfig, ExperimentError, ScoreRow, Task};
use crate::conllu::{Corpus, CorpusLayout, Segment};
use crate::difficulty::{difficulty_matrix, DifficultyResources};
use crate::matrix::{FeatureMatrix, Stage};
use crate::translationese::{translationese_matrix, Lexicon};

/// Raw matrices for one experiment plus the files they were read from.
#[derive(Debug, Clone, Default)]
pub struct ExperimentInputs {
    pub org: Option<FeatureMatrix>,
    pub tgt: Option<FeatureMatrix>,
    pub difficulty: Option<FeatureMatrix>,
    pub scores: Option<Vec<ScoreRow>>,
    pub files: Vec<PathBuf>,
}

fn read(path: &Path, files: &mut Vec<PathBuf>) -> Result<String, ExperimentError> {
    files.push(path.to_path_buf());
    std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))
}

fn read_matrix(path: &Path, files: &mut Vec<PathBuf>) -> Result<FeatureMatrix, ExperimentError> {
    let text = read(path, files)?;
    FeatureMatrix::from_tsv(&text, Stage::Raw).map_err(|e| ExperimentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn recount<'a>(m: &mut FeatureMatrix, segs: impl Iterator<Item = &'a Segment>, include_punct: bool) {
    for (row, s) in m.rows.iter_mut().zip(segs) {
        row.word_count = s.word_count_with(include_punct);
    }
}

/// Loads the configured corpus and drops segments shorter than `min_tokens`.
pub fn load_corpus(cfg: &ExperimentConfig, dir: &Path) -> Result<Corpus, ExperimentError> {
    let corpus = CorpusLayout::new(dir, cfg.data.mode, cfg.data.lpair).load()?;
    let (corpus, report) = corpus.filter_short_segments(cfg.preprocess.min_tokens);
    if report.removed_originals + report.removed_pairs > 0 {
        log::info!(
            "dropped {} original segments and {} pairs under {} words",
            report.removed_originals,
            report.removed_pairs,
            cfg.preprocess.min_tokens
        );
    }
    Ok(corpus)
}

/// Raw translationese matrices of the originals and the translations.
pub fn extract_translationese(
    corpus: &Corpus,
    lexicons: Option<&Path>,
    include_punct: bool,
) -> Result<(FeatureMatrix, FeatureMatrix), ExperimentError> {
    let language = corpus.lpair.target();
    let lexicon = match lexicons {
        Some(dir) => Lexicon::from_dir(dir, language)?,
        None => Lexicon::bundled(language),
    };
    let mut org = translationese_matrix(&corpus.originals, language, &lexicon)?;
    recount(&mut org, corpus.originals.iter(), include_punct);
    let mut tgt = translationese_matrix(corpus.targets(), language, &lexicon)?;
    recount(&mut tgt, corpus.targets(), include_punct);
    Ok((org, tgt))
}

/// Raw difficulty matrix of all pairs, with tables built on the same pairs.
pub fn extract_difficulty(corpus: &Corpus, include_punct: bool) -> FeatureMatrix {
    let res = DifficultyResources::build(&corpus.pairs, &corpus.pairs);
    let mut m = difficulty_matrix(&corpus.pairs, &res);
    recount(&mut m, corpus.sources(), include_punct);
    m
}

impl ExperimentInputs {
    /// Collects what `cfg.data.task` needs: generated data, a corpus, or
    /// previously extracted TSVs.
    pub fn load(cfg: &ExperimentConfig) -> Result<Self, ExperimentError> {
        let d = &cfg.data;
        let mut out = ExperimentInputs::default();
        let include_punct = cfg.preprocess.include_punct;
        if d.synthetic {
            match d.task {
                Task::Classify => {
                    let (org, tgt, _) = synthetic_translationese(&cfg.synthetic, cfg.run.seed);
                    out.org = Some(org);
                    out.tgt = Some(tgt);
                }
                Task::Regress => {
                    let (m, s) = synthetic_difficulty(&cfg.synthetic, cfg.run.seed);
                    out.difficulty = Some(m);
                    out.scores = Some(s);
                }
            }
        } else if let Some(dir) = &d.corpus {
            let corpus = load_corpus(cfg, dir)?;
            let (org, tgt) = extract_translationese(&corpus, d.lexicons.as_deref(), include_punct)?;
            if d.task == Task::Regress {
                out.difficulty = Some(extract_difficulty(&corpus, include_punct));
            }
            out.org = Some(org);
            out.tgt = Some(tgt);
            out.files.push(dir.clone());
        }
        if let Some(p) = &d.org_features {
            out.org = Some(read_matrix(p, &mut out.files)?);
        }
        if let Some(p) = &d.tgt_features {
            out.tgt = Some(read_matrix(p, &mut out.files)?);
        }
        if let Some(p) = &d.difficulty_features {
            out.difficulty = Some(read_matrix(p, &mut out.files)?);
        }
        if let Some(p) = &d.scores {
            let text = read(p, &mut out.files)?;
            out.scores = Some(scores_from_tsv(&text)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::LanguagePair;
    use crate::experiments::synth::write_synthetic_corpus;

    #[test]
    fn corpus_inputs_cover_both_tasks() {
        let dir = tempfile::tempdir().unwrap();
        write_synthetic_corpus(dir.path(), LanguagePair::EnDe, 4, 5, 3).unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.data.corpus = Some(dir.path().to_path_buf());
        cfg.data.task = Task::Regress;
        let inputs = ExperimentInputs::load(&cfg).unwrap();
        let (org, tgt) = (inputs.org.unwrap(), inputs.tgt.unwrap());
        assert_eq!(org.n_cols(), 37);
        assert_eq!(tgt.n_rows(), inputs.difficulty.as_ref().unwrap().n_rows());
        assert!(inputs.scores.is_none());

        cfg.preprocess.include_punct = true;
        let with = ExperimentInputs::load(&cfg).unwrap().org.unwrap();
        assert!(with.rows.iter().zip(&org.rows).all(|(a, b)| a.word_count >= b.word_count));
    }
}
