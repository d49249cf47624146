//! The 22 translation-difficulty indicators computed over segment pairs.
//!
//! Source features describe the source segment alone; transfer features use
//! the target side, the word links and corpus-level translation tables.
//! Sentence-level source measures are stored as sums over sentences, like the
//! translationese vector, and become averages in normalization.

mod alignment;
mod bleu;
mod entropy;
mod surprisal;
mod syntax;

pub use alignment::{mean_alignment, AlignUnit};
pub use bleu::pseudo_bleu;
pub use entropy::{
    build_translation_table, defined_entropies, segment_entropy, solution_entropy,
    subtree_alignments, subtree_signature, subtree_signature_at, FallbackPolicy, TableCoverage,
    TableVariant, TranslationTable,
};
pub use surprisal::{avg_surprisal, Channel, TokenFilter, Unit};
pub use syntax::{
    lexical_profile, n_clauses, sentence_lex_dens, syntactic_complexity, LexicalProfile,
    SyntacticComplexity,
};

use serde::{Deserialize, Serialize};

use crate::conllu::SegmentPair;
use crate::matrix::{row_id, FeatureMatrix, Normalization, RowMeta, Stage};

#[derive(Debug, thiserror::Error)]
pub enum DifficultyError {
    #[error("token {token} lacks {key}")]
    MissingAnnotation { key: &'static str, token: String },
    #[error("no eligible tokens")]
    NoEligibleTokens,
    #[error("empty reference")]
    EmptyReference,
    #[error("entropy fallback not initialized")]
    FallbackNotInitialized,
    #[error("translation table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// Column order of difficulty tables.
pub const DIFFICULTY_NAMES: [&str; 22] = [
    "bleu",
    "mean_align",
    "mean_align_content",
    "mean_cosine",
    "mt_AvS",
    "mt_AvS_content",
    "mt_AvS_subw",
    "src_branching",
    "src_gpt_AvS",
    "src_gpt_AvS_content",
    "src_gpt_AvS_subw",
    "src_lex_dens",
    "src_mdd",
    "src_mwe",
    "src_n_clauses",
    "src_numerals",
    "src_propn",
    "src_tree_depth",
    "src_wlen",
    "tot_entropy",
    "tot_entropy_content",
    "tot_entropy_trees",
];

pub fn normalization_of(name: &str) -> Normalization {
    match name {
        "src_mwe" | "src_numerals" | "src_propn" => Normalization::PerWord,
        "src_tree_depth" | "src_branching" | "src_mdd" | "src_lex_dens" => {
            Normalization::PerSentenceAverage
        }
        _ => Normalization::None,
    }
}

pub const SOURCE_SUBSET: [&str; 12] = [
    "src_gpt_AvS",
    "src_gpt_AvS_content",
    "src_gpt_AvS_subw",
    "src_tree_depth",
    "src_branching",
    "src_mdd",
    "src_n_clauses",
    "src_lex_dens",
    "src_wlen",
    "src_mwe",
    "src_numerals",
    "src_propn",
];

pub const TRANSFER_SUBSET: [&str; 10] = [
    "mt_AvS",
    "mt_AvS_content",
    "mt_AvS_subw",
    "mean_align",
    "mean_align_content",
    "mean_cosine",
    "tot_entropy",
    "tot_entropy_content",
    "tot_entropy_trees",
    "bleu",
];

pub const IT_SUBSET: [&str; 9] = [
    "src_gpt_AvS",
    "src_gpt_AvS_content",
    "src_gpt_AvS_subw",
    "mt_AvS",
    "mt_AvS_content",
    "mt_AvS_subw",
    "tot_entropy",
    "tot_entropy_content",
    "tot_entropy_trees",
];

pub const STRUCTURE_SUBSET: [&str; 13] = [
    "src_tree_depth",
    "src_branching",
    "src_mdd",
    "src_n_clauses",
    "src_lex_dens",
    "src_wlen",
    "src_mwe",
    "src_numerals",
    "src_propn",
    "mean_align",
    "mean_align_content",
    "mean_cosine",
    "bleu",
];

pub const SUBSET_NAMES: [&str; 5] = ["all", "source", "transfer", "it", "structure"];

/// Feature names of a named subset.
pub fn subset(name: &str) -> Option<Vec<&'static str>> {
    match name {
        "all" => Some(DIFFICULTY_NAMES.to_vec()),
        "source" => Some(SOURCE_SUBSET.to_vec()),
        "transfer" => Some(TRANSFER_SUBSET.to_vec()),
        "it" => Some(IT_SUBSET.to_vec()),
        "structure" => Some(STRUCTURE_SUBSET.to_vec()),
        _ => None,
    }
}

/// Translation tables and entropy fallbacks of one subcorpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DifficultyResources {
    pub lemmas: TranslationTable,
    pub content_lemmas: TranslationTable,
    pub subtrees: TranslationTable,
    pub fallback_lemmas: Option<FallbackPolicy>,
    pub fallback_content: Option<FallbackPolicy>,
    pub fallback_subtrees: Option<FallbackPolicy>,
    pub coverage: TableCoverage,
}

impl DifficultyResources {
    /// Builds the tables from `table_pairs` and the fallbacks from `pairs`,
    /// the subcorpus being analysed.
    pub fn build(table_pairs: &[SegmentPair], pairs: &[SegmentPair]) -> Self {
        let (lemmas, coverage) = build_translation_table(table_pairs, TableVariant::Lemmas);
        let (content_lemmas, _) = build_translation_table(table_pairs, TableVariant::ContentLemmas);
        let (subtrees, _) = build_translation_table(table_pairs, TableVariant::Subtrees);
        Self::from_tables(lemmas, content_lemmas, subtrees, coverage, pairs)
    }

    pub fn from_tables(
        lemmas: TranslationTable,
        content_lemmas: TranslationTable,
        subtrees: TranslationTable,
        coverage: TableCoverage,
        pairs: &[SegmentPair],
    ) -> Self {
        let fb = |t: &TranslationTable, f: TokenFilter| {
            let policy = FallbackPolicy::from_entropies(&defined_entropies(pairs, t, f));
            if policy.is_none() {
                log::warn!("no defined {} entropies; fallback is zero", t.variant.as_str());
            }
            Some(policy.unwrap_or(FallbackPolicy { median: 0.0, sd: 0.0 }))
        };
        DifficultyResources {
            fallback_lemmas: fb(&lemmas, TokenFilter::All),
            fallback_content: fb(&content_lemmas, TokenFilter::Content),
            fallback_subtrees: fb(&subtrees, TokenFilter::All),
            lemmas,
            content_lemmas,
            subtrees,
            coverage,
        }
    }
}

/// Raw difficulty values in [`DIFFICULTY_NAMES`] order; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyVector {
    pub values: Vec<Option<f64>>,
}

impl DifficultyVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        DIFFICULTY_NAMES
            .iter()
            .position(|n| *n == name)
            .and_then(|i| self.values[i])
    }

    pub fn missing(&self) -> Vec<&'static str> {
        DIFFICULTY_NAMES
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.is_none())
            .map(|(n, _)| *n)
            .collect()
    }
}

fn ok_or_missing(name: &str, r: Result<f64, DifficultyError>) -> Option<f64> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            log::debug!("{name} missing: {e}");
            None
        }
    }
}

pub fn extract_difficulty_vector(
    pair: &SegmentPair,
    res: &DifficultyResources,
) -> DifficultyVector {
    let src = &pair.source;
    let tgt = &pair.target;
    let syn: Vec<SyntacticComplexity> = src.sentences.iter().map(syntactic_complexity).collect();
    let lex = lexical_profile(src);
    let reference: Vec<&str> = tgt.tokens().map(|t| t.form.as_str()).collect();
    let prediction: Option<Vec<&str>> = tgt
        .tokens()
        .map(|t| t.annotations.pred_form.as_deref())
        .collect();
    let values = DIFFICULTY_NAMES
        .iter()
        .map(|&name| match name {
            "bleu" => prediction
                .as_ref()
                .and_then(|p| ok_or_missing(name, pseudo_bleu(&reference, p))),
            "mean_align" => mean_alignment(pair, TokenFilter::All, AlignUnit::Words),
            "mean_align_content" => mean_alignment(pair, TokenFilter::Content, AlignUnit::Words),
            "mean_cosine" => mean_alignment(pair, TokenFilter::All, AlignUnit::Subtrees),
            "mt_AvS" => ok_or_missing(name, avg_surprisal(tgt, Channel::Mt, TokenFilter::All, Unit::Token)),
            "mt_AvS_content" => ok_or_missing(
                name,
                avg_surprisal(tgt, Channel::Mt, TokenFilter::Content, Unit::Token),
            ),
            "mt_AvS_subw" => ok_or_missing(
                name,
                avg_surprisal(tgt, Channel::Mt, TokenFilter::All, Unit::Subword),
            ),
            "src_gpt_AvS" => ok_or_missing(
                name,
                avg_surprisal(src, Channel::SrcLm, TokenFilter::All, Unit::Token),
            ),
            "src_gpt_AvS_content" => ok_or_missing(
                name,
                avg_surprisal(src, Channel::SrcLm, TokenFilter::Content, Unit::Token),
            ),
            "src_gpt_AvS_subw" => ok_or_missing(
                name,
                avg_surprisal(src, Channel::SrcLm, TokenFilter::All, Unit::Subword),
            ),
            "src_branching" => Some(syn.iter().map(|s| s.branching).sum()),
            "src_tree_depth" => Some(syn.iter().map(|s| s.tree_depth).sum()),
            "src_mdd" => Some(syn.iter().map(|s| s.mdd).sum()),
            "src_lex_dens" => Some(src.sentences.iter().map(sentence_lex_dens).sum()),
            "src_mwe" => Some(lex.mwe as f64),
            "src_n_clauses" => Some(n_clauses(src) as f64),
            "src_numerals" => Some(lex.numerals as f64),
            "src_propn" => Some(lex.propn as f64),
            "src_wlen" => Some(lex.wlen),
            "tot_entropy" => ok_or_missing(
                name,
                segment_entropy(pair, &res.lemmas, res.fallback_lemmas.as_ref(), TokenFilter::All),
            ),
            "tot_entropy_content" => ok_or_missing(
                name,
                segment_entropy(
                    pair,
                    &res.content_lemmas,
                    res.fallback_content.as_ref(),
                    TokenFilter::Content,
                ),
            ),
            "tot_entropy_trees" => ok_or_missing(
                name,
                segment_entropy(
                    pair,
                    &res.subtrees,
                    res.fallback_subtrees.as_ref(),
                    TokenFilter::All,
                ),
            ),
            other => unreachable!("unknown difficulty feature {other}"),
        })
        .collect();
    DifficultyVector { values }
}

/// One raw row per pair, keyed by the target segment and sized by the source.
pub fn difficulty_matrix(pairs: &[SegmentPair], res: &DifficultyResources) -> FeatureMatrix {
    use rayon::prelude::*;
    let rows: Vec<DifficultyVector> = pairs
        .par_iter()
        .map(|p| extract_difficulty_vector(p, res))
        .collect();
    let mut m = FeatureMatrix::new(
        DIFFICULTY_NAMES.iter().map(|s| s.to_string()).collect(),
        Stage::Raw,
    );
    for (p, v) in pairs.iter().zip(rows) {
        let meta = RowMeta {
            id: row_id(&p.target.doc_id, &p.target.seg_id),
            group: p.target.doc_id.clone(),
            word_count: p.source.word_count(),
            n_sentences: p.source.sentences.len(),
        };
        let values = v.values.iter().map(|x| x.unwrap_or(f64::NAN)).collect();
        m.push(meta, values).expect("fixed width");
    }
    m
}
