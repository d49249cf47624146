//! Translatedness scoring and translation-difficulty analytics over
//! UD-annotated parallel corpora.

pub mod conllu;
pub mod matrix;
pub mod translationese;
pub mod difficulty;
pub mod stats;
pub mod ml;
pub mod preprocess;
pub mod experiments;
