use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::conllu::{LanguagePair, Mode};
use crate::difficulty::{subset, DIFFICULTY_NAMES};
use crate::ml::SolverParams;
use crate::preprocess::PreprocessConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Segment,
    Document,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Regress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub k: usize,
    /// Folds for RFECV and the collinearity tie-break inside each training fold.
    pub inner_k: usize,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            k: 10,
            inner_k: 5,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Subcorpus directory in the layout read by `CorpusLayout`.
    pub corpus: Option<PathBuf>,
    /// Raw translationese TSVs, used instead of `corpus`.
    pub org_features: Option<PathBuf>,
    pub tgt_features: Option<PathBuf>,
    /// Raw difficulty TSV, used instead of `corpus`.
    pub difficulty_features: Option<PathBuf>,
    /// Out-of-fold translatedness scores written by a classification run.
    pub scores: Option<PathBuf>,
    /// Lexicon directory overriding the bundled lists.
    pub lexicons: Option<PathBuf>,
    /// Generate data from `[synthetic]` instead of reading it.
    pub synthetic: bool,
    /// Permute labels (classify) or scores (regress) as a null control.
    pub shuffle: bool,
    pub mode: Mode,
    pub lpair: LanguagePair,
    pub unit: Unit,
    pub task: Task,
    pub subsets: Vec<String>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            corpus: None,
            org_features: None,
            tgt_features: None,
            difficulty_features: None,
            scores: None,
            lexicons: None,
            synthetic: false,
            shuffle: false,
            mode: Mode::Written,
            lpair: LanguagePair::EnDe,
            unit: Unit::Segment,
            task: Task::Classify,
            subsets: vec!["source".into(), "transfer".into(), "source+transfer".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub skew_threshold: f64,
    pub r_max: f64,
    pub low_variance_drop: Vec<String>,
    pub min_tokens: usize,
    /// Count punctuation in the per-word denominator.
    pub include_punct: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            skew_threshold: 1.0,
            r_max: 0.85,
            low_variance_drop: Vec::new(),
            min_tokens: 4,
            include_punct: false,
        }
    }
}

impl PreprocessSection {
    pub fn pipeline(&self) -> PreprocessConfig {
        PreprocessConfig {
            skew_threshold: self.skew_threshold,
            r_max: self.r_max,
            low_variance_drop: self.low_variance_drop.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub c: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub min_features: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            c: 1.0,
            epsilon: 0.1,
            tol: 1e-4,
            max_passes: 1000,
            min_features: 2,
        }
    }
}

impl ModelConfig {
    pub fn solver(&self, seed: u64) -> SolverParams {
        SolverParams {
            c: self.c,
            epsilon: self.epsilon,
            tol: self.tol,
            max_passes: self.max_passes,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub docs: usize,
    pub segments_per_doc: usize,
    /// Classification: number of features with a planted class shift.
    pub shifted: usize,
    /// Size of the planted shift in standard deviations.
    pub shift: f64,
    /// Regression: standard deviation of the noise added to the latent score.
    pub noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            docs: 200,
            segments_per_doc: 20,
            shifted: 5,
            shift: 2.0,
            noise: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub data: DataConfig,
    pub preprocess: PreprocessSection,
    pub model: ModelConfig,
    pub synthetic: SyntheticConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let d = &mut cfg.data;
        for p in [
            &mut d.corpus,
            &mut d.org_features,
            &mut d.tgt_features,
            &mut d.difficulty_features,
            &mut d.scores,
            &mut d.lexicons,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.run.k < 2 {
            return bad("run.k must be at least 2");
        }
        if self.run.inner_k < 2 {
            return bad("run.inner_k must be at least 2");
        }
        if !(self.model.c > 0.0) || !(self.model.tol > 0.0) || self.model.epsilon < 0.0 {
            return bad("model.c and model.tol must be positive, model.epsilon non-negative");
        }
        if self.model.min_features == 0 {
            return bad("model.min_features must be at least 1");
        }
        if self.data.task == Task::Regress {
            for s in &self.data.subsets {
                resolve_subset(s)?;
            }
        }
        Ok(())
    }
}

/// Feature names of a subset such as `source`, `it` or `source+transfer`,
/// in canonical column order.
pub fn resolve_subset(name: &str) -> Result<Vec<&'static str>, ExperimentError> {
    let mut wanted = Vec::new();
    for part in name.split('+') {
        let names =
            subset(part.trim()).ok_or_else(|| ExperimentError::UnknownSubset(name.to_string()))?;
        wanted.extend(names);
    }
    Ok(DIFFICULTY_NAMES
        .iter()
        .copied()
        .filter(|n| wanted.contains(n))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::from_toml(
            "[run]\nseed = 7\n[data]\ntask = \"regress\"\nsubsets = [\"it\"]\nunit = \"document\"\n",
        )
        .unwrap();
        assert_eq!(cfg.run.seed, 7);
        assert_eq!(cfg.run.k, 10);
        assert_eq!(cfg.data.unit, Unit::Document);
        assert_eq!(cfg.model.min_features, 2);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_subsets() {
        assert!(ExperimentConfig::from_toml("[run]\nseeds = 1\n").is_err());
        assert!(matches!(
            ExperimentConfig::from_toml("[data]\ntask = \"regress\"\nsubsets = [\"lexical\"]\n"),
            Err(ExperimentError::UnknownSubset(_))
        ));
    }

    #[test]
    fn combined_subset_is_union() {
        let st = resolve_subset("source+transfer").unwrap();
        assert_eq!(st.len(), 22);
        assert_eq!(resolve_subset("it").unwrap().len(), 9);
    }
}
