//! The 37 delexicalised translationese indicators.
//!
//! Values produced here are raw: counts for per-word features, sums of
//! per-sentence values for per-sentence-average features, and ratios for the
//! rest. [`crate::preprocess::normalize`] turns them into comparable rates.

mod lexicon;
mod registry;
pub mod rules;

pub use lexicon::{parse_list, Lexicon, LexiconError};
pub use registry::{
    feature_names, registry_tsv, spec, FeatureKind, FeatureSpec, Rule, Selector, REGISTRY,
};

use crate::conllu::{Language, Segment};
use crate::matrix::{row_id, FeatureMatrix, FeatureVector, RowMeta, Stage};

#[derive(Debug, thiserror::Error)]
pub enum TranslationeseError {
    #[error("lexicon {0} is empty")]
    EmptyLexicon(&'static str),
    #[error("lexicon is for {lexicon}, segment is {segment}")]
    LanguageMismatch { lexicon: Language, segment: Language },
}

fn apply_rule(
    rule: Rule,
    segment: &Segment,
    language: Language,
    lexicon: &Lexicon,
) -> Result<f64, TranslationeseError> {
    use rules::*;
    Ok(match rule {
        Rule::AdvmodExcludingNeg => advmod_excluding_neg(segment) as f64,
        Rule::AdvmodVerb => advmod_verb(segment) as f64,
        Rule::Epist => lexicon_markers(segment, &lexicon.epist_items)? as f64,
        Rule::MeanSentWc => segment.token_count() as f64,
        Rule::Mhd => segment.sentences.iter().map(mhd).sum(),
        Rule::Mpred => mpred(segment, language, lexicon) as f64,
        Rule::Negs => negs(segment) as f64,
        Rule::Nnargs => nnargs(segment),
        Rule::OblObj => obl_obj(segment),
        Rule::Ppron => ppron(segment, lexicon) as f64,
        Rule::Relcl => segment
            .sentences
            .iter()
            .map(|s| relcl(s, language, lexicon))
            .sum::<usize>() as f64,
        Rule::Ttr => segment
            .sentences
            .iter()
            .map(|s| sentence_textual(s).1)
            .sum(),
        Rule::VoNoun => vo_noun(segment) as f64,
        Rule::Vorfeld => vorfeld(segment, language),
    })
}

/// Evaluates one registry entry on a segment.
pub fn evaluate(
    spec: &FeatureSpec,
    segment: &Segment,
    language: Language,
    lexicon: &Lexicon,
) -> Result<f64, TranslationeseError> {
    Ok(match spec.selector {
        Selector::Deprel(rels) => rules::count_deprel(segment, rels) as f64,
        Selector::Upos(tags) => rules::count_upos(segment, tags) as f64,
        Selector::Morph { key, value, upos } => rules::count_morph(segment, key, value, upos) as f64,
        Selector::Rule(r) => apply_rule(r, segment, language, lexicon)?,
    })
}

/// Raw values of every registry feature, in registry order.
pub fn extract_translationese_vector(
    segment: &Segment,
    language: Language,
    registry: &[FeatureSpec],
    lexicon: &Lexicon,
) -> Result<FeatureVector, TranslationeseError> {
    if lexicon.language != language {
        return Err(TranslationeseError::LanguageMismatch {
            lexicon: lexicon.language,
            segment: language,
        });
    }
    let values = registry
        .iter()
        .map(|s| evaluate(s, segment, language, lexicon))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureVector {
        names: registry.iter().map(|s| s.name).collect(),
        values,
    })
}

/// One raw row per segment, in input order.
pub fn translationese_matrix<'a>(
    segments: impl IntoIterator<Item = &'a Segment>,
    language: Language,
    lexicon: &Lexicon,
) -> Result<FeatureMatrix, TranslationeseError> {
    use rayon::prelude::*;
    let segments: Vec<&Segment> = segments.into_iter().collect();
    let vectors = segments
        .par_iter()
        .map(|s| extract_translationese_vector(s, language, &REGISTRY, lexicon))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = FeatureMatrix::new(
        REGISTRY.iter().map(|s| s.name.to_string()).collect(),
        Stage::Raw,
    );
    for (s, v) in segments.iter().zip(vectors) {
        let meta = RowMeta {
            id: row_id(&s.doc_id, &s.seg_id),
            group: s.doc_id.clone(),
            word_count: s.word_count(),
            n_sentences: s.sentences.len(),
        };
        m.push(meta, v.values).expect("fixed width");
    }
    Ok(m)
}
