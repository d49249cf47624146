//! Word lists backing the lexicon-driven indicators.
//!
//! Bundled lists are compiled in; [`Lexicon::from_dir`] loads edited copies
//! with the same file names.

use std::path::Path;

use crate::conllu::Language;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("lexicon list {0} is empty")]
    Empty(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub language: Language,
    /// Epistemic stance items, each a sequence of lowercased words.
    pub epist_items: Vec<Vec<String>>,
    pub modal_adjectives: Vec<String>,
    /// Empty for English, where modal auxiliaries are found by their xpos tag.
    pub core_modal_verbs: Vec<String>,
    pub relative_pronouns: Vec<String>,
    pub personal_pronouns: Vec<String>,
}

const EN_EPIST: &str = include_str!("../../data/lexicons/en/epist.txt");
const EN_MODAL_ADJ: &str = include_str!("../../data/lexicons/en/modal_adjectives.txt");
const EN_REL: &str = include_str!("../../data/lexicons/en/relative_pronouns.txt");
const EN_PERS: &str = include_str!("../../data/lexicons/en/personal_pronouns.txt");
const DE_EPIST: &str = include_str!("../../data/lexicons/de/epist.txt");
const DE_MODAL_ADJ: &str = include_str!("../../data/lexicons/de/modal_adjectives.txt");
const DE_MODAL_VERBS: &str = include_str!("../../data/lexicons/de/modal_verbs.txt");
const DE_REL: &str = include_str!("../../data/lexicons/de/relative_pronouns.txt");
const DE_PERS: &str = include_str!("../../data/lexicons/de/personal_pronouns.txt");

/// One item per line; blank lines and `#` comments are skipped.
pub fn parse_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn split_items(items: Vec<String>) -> Vec<Vec<String>> {
    items
        .into_iter()
        .map(|i| i.split_whitespace().map(str::to_string).collect())
        .collect()
}

impl Lexicon {
    pub fn bundled(language: Language) -> Self {
        match language {
            Language::En => Lexicon {
                language,
                epist_items: split_items(parse_list(EN_EPIST)),
                modal_adjectives: parse_list(EN_MODAL_ADJ),
                core_modal_verbs: Vec::new(),
                relative_pronouns: parse_list(EN_REL),
                personal_pronouns: parse_list(EN_PERS),
            },
            Language::De => Lexicon {
                language,
                epist_items: split_items(parse_list(DE_EPIST)),
                modal_adjectives: parse_list(DE_MODAL_ADJ),
                core_modal_verbs: parse_list(DE_MODAL_VERBS),
                relative_pronouns: parse_list(DE_REL),
                personal_pronouns: parse_list(DE_PERS),
            },
        }
    }

    /// Loads `<dir>/<lang>/*.txt`, falling back to the bundled list for absent files.
    pub fn from_dir(dir: &Path, language: Language) -> Result<Self, LexiconError> {
        let mut lex = Self::bundled(language);
        let base = dir.join(language.as_str());
        let read = |name: &str| -> Result<Option<Vec<String>>, LexiconError> {
            let path = base.join(name);
            if !path.exists() {
                return Ok(None);
            }
            let text = std::fs::read_to_string(&path).map_err(|source| LexiconError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let list = parse_list(&text);
            if list.is_empty() {
                return Err(LexiconError::Empty(path.display().to_string()));
            }
            Ok(Some(list))
        };
        if let Some(l) = read("epist.txt")? {
            lex.epist_items = split_items(l);
        }
        if let Some(l) = read("modal_adjectives.txt")? {
            lex.modal_adjectives = l;
        }
        if let Some(l) = read("modal_verbs.txt")? {
            lex.core_modal_verbs = l;
        }
        if let Some(l) = read("relative_pronouns.txt")? {
            lex.relative_pronouns = l;
        }
        if let Some(l) = read("personal_pronouns.txt")? {
            lex.personal_pronouns = l;
        }
        Ok(lex)
    }
}
