//! CoNLL-U ingestion with the extended MISC annotation layer.
//!
//! Segments are delimited by `# seg_id = ...` comments and documents by
//! `# newdoc id = ...`. A segment may span several sentences. Token MISC
//! columns may carry the surprisal and alignment annotations produced by the
//! annotation sidecar:
//!
//! | key        | meaning                                         |
//! |------------|-------------------------------------------------|
//! | `Srp`      | source language-model surprisal (bits)          |
//! | `SrpSub`   | comma-joined subword surprisals (bits)          |
//! | `MtSrp`    | forced-decoding NMT surprisal (bits)            |
//! | `MtSrpSub` | comma-joined NMT subword surprisals (bits)      |
//! | `Align`    | word alignment score in `[0, 1]`                |
//! | `Pred`     | NMT argmax token under the gold prefix          |
//!
//! Unknown MISC keys are preserved verbatim.

mod corpus;
mod parallel;
mod parse;
mod types;

pub use corpus::{Corpus, CorpusLayout, FilterReport};
pub use parallel::{
    load_parallel, read_links, read_manifest, read_subtree_links, LinkRow, ManifestRow,
    ParallelLoad, SubtreeLinkRow,
};
pub use parse::{parse_document, write_document};
pub use types::{
    Annotations, Document, Features, Language, LanguagePair, Misc, Mode, SegmentMeta, Segment,
    SegmentPair, Sentence, Side, SubtreeLink, Token, WordLink,
};

use std::fmt;

/// Upos tags treated as content words.
pub const CONTENT_UPOS: [&str; 5] = ["NOUN", "PROPN", "VERB", "ADJ", "ADV"];

pub fn is_content_upos(upos: &str) -> bool {
    CONTENT_UPOS.contains(&upos)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected 10 tab-separated columns, found {0}")]
    Arity(usize),
    #[error("invalid token id {0:?}")]
    BadId(String),
    #[error("token id {found} out of sequence (expected {expected})")]
    IdSequence { expected: usize, found: usize },
    #[error("invalid head {0:?}")]
    BadHead(String),
    #[error("head out of range: head {head} in sentence of {len} tokens")]
    HeadOutOfRange { head: usize, len: usize },
    #[error("token {0} is its own head")]
    SelfHead(usize),
    #[error("sentence has no root")]
    NoRoot,
    #[error("sentence has {0} roots")]
    MultipleRoots(usize),
    #[error("cyclic tree through token {0}")]
    Cycle(usize),
    #[error("duplicate seg_id {seg:?} in document {doc:?}")]
    DuplicateSegment { doc: String, seg: String },
    #[error("sentence outside of a segment (missing `# seg_id`)")]
    MissingSegment,
    #[error("segment outside of a document (missing `# newdoc id`)")]
    MissingDocument,
    #[error("malformed feature {0:?}")]
    BadFeature(String),
    #[error("malformed MISC value {key}={value:?}")]
    BadMisc { key: String, value: String },
    #[error("negative surprisal {key}={value}")]
    NegativeSurprisal { key: String, value: f64 },
    #[error("alignment score {0} outside [0, 1]")]
    AlignRange(f64),
    #[error("unknown {key} value {value:?}")]
    BadMeta { key: String, value: String },
}

/// Parse error with the 1-based line where it was detected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Table {
        path: String,
        line: usize,
        message: String,
    },
    #[error("manifest references unknown segments: {}", join_keys(.0))]
    UnknownSegments(Vec<(String, String)>),
    #[error("many-to-many mapping (unsupported) in manifest rows {rows:?}")]
    ManyToMany { rows: Vec<usize> },
    #[error("invalid link {0}")]
    BadLink(String),
}

fn join_keys(keys: &[(String, String)]) -> String {
    keys.iter()
        .map(|(d, s)| format!("({d},{s})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
