use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Org,
    Src,
    Tgt,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Org => "org",
            Side::Src => "src",
            Side::Tgt => "tgt",
        }
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "org" => Ok(Side::Org),
            "src" => Ok(Side::Src),
            "tgt" => Ok(Side::Tgt),
            _ => Err(format!("unknown side {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    De,
    En,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::De => "de",
            Language::En => "en",
        }
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "de" => Ok(Language::De),
            "en" => Ok(Language::En),
            _ => Err(format!("unsupported language {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Written,
    Spoken,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Written => "written",
            Mode::Spoken => "spoken",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "written" => Ok(Mode::Written),
            "spoken" => Ok(Mode::Spoken),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

/// Translation direction, named source-then-target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguagePair {
    DeEn,
    EnDe,
}

impl LanguagePair {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguagePair::DeEn => "deen",
            LanguagePair::EnDe => "ende",
        }
    }

    pub fn source(self) -> Language {
        match self {
            LanguagePair::DeEn => Language::De,
            LanguagePair::EnDe => Language::En,
        }
    }

    pub fn target(self) -> Language {
        match self {
            LanguagePair::DeEn => Language::En,
            LanguagePair::EnDe => Language::De,
        }
    }

    /// Language of the text on `side`; originals are comparable texts in the target language.
    pub fn language_of(self, side: Side) -> Language {
        match side {
            Side::Src => self.source(),
            Side::Tgt | Side::Org => self.target(),
        }
    }
}

impl FromStr for LanguagePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "deen" => Ok(LanguagePair::DeEn),
            "ende" => Ok(LanguagePair::EnDe),
            _ => Err(format!("unknown language pair {s:?}")),
        }
    }
}

/// Morphological features in column order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Features(pub Vec<(String, String)>);

impl Features {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_key(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    /// True if `key` is present and one of its comma-separated values equals `value`.
    pub fn has_value(&self, key: &str, value: &str) -> bool {
        self.get(key)
            .map(|v| v.split(',').any(|part| part == value))
            .unwrap_or(false)
    }

    /// True if any feature carries `value` among its comma-separated values.
    pub fn any_value(&self, value: &str) -> bool {
        self.0
            .iter()
            .any(|(_, v)| v.split(',').any(|part| part == value))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Raw MISC entries in column order; entries without `=` keep an empty value and no separator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Misc(pub Vec<(String, Option<String>)>);

impl Misc {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.as_deref())
    }
}

/// Typed view of the recognized MISC keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Annotations {
    pub src_surprisal: Option<f64>,
    pub src_surprisal_subwords: Option<Vec<f64>>,
    pub mt_surprisal: Option<f64>,
    pub mt_surprisal_subwords: Option<Vec<f64>>,
    pub align_score: Option<f64>,
    pub pred_form: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: Option<String>,
    pub feats: Features,
    /// 0 for the root, otherwise the 1-based id of the head.
    pub head: usize,
    pub deprel: String,
    /// Raw DEPS column.
    pub deps: String,
    pub misc: Misc,
    pub annotations: Annotations,
}

impl Token {
    /// Token with no xpos, feats or MISC entries.
    pub fn new(
        id: usize,
        form: &str,
        lemma: &str,
        upos: &str,
        head: usize,
        deprel: &str,
    ) -> Self {
        Token {
            id,
            form: form.to_string(),
            lemma: lemma.to_string(),
            upos: upos.to_string(),
            xpos: None,
            feats: Features::default(),
            head,
            deprel: deprel.to_string(),
            deps: "_".to_string(),
            misc: Misc::default(),
            annotations: Annotations::default(),
        }
    }

    /// Replaces the features with `Key=Value|Key=Value` pairs (`_` for none).
    pub fn with_feats(mut self, feats: &str) -> Self {
        self.feats = Features(
            feats
                .split('|')
                .filter(|p| !p.is_empty() && *p != "_")
                .filter_map(|p| p.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        );
        self
    }

    pub fn with_xpos(mut self, xpos: &str) -> Self {
        self.xpos = Some(xpos.to_string());
        self
    }

    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }

    pub fn is_content(&self) -> bool {
        super::is_content_upos(&self.upos)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    /// Comment lines (including the leading `#`) preceding the tokens.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    /// Multiword-range and empty-node lines, keyed by the index of the token they precede.
    pub extra_lines: Vec<(usize, String)>,
    children: Vec<Vec<usize>>,
    root: usize,
}

impl Sentence {
    /// Builds the tree index. Callers must have validated the heads.
    pub(crate) fn from_validated(
        comments: Vec<String>,
        tokens: Vec<Token>,
        extra_lines: Vec<(usize, String)>,
    ) -> Self {
        let mut children = vec![Vec::new(); tokens.len()];
        let mut root = 0;
        for (i, t) in tokens.iter().enumerate() {
            if t.head == 0 {
                root = i;
            } else {
                children[t.head - 1].push(i);
            }
        }
        Sentence {
            comments,
            tokens,
            extra_lines,
            children,
            root,
        }
    }

    /// Builds a sentence from tokens, checking the single-root tree invariants.
    pub fn new(tokens: Vec<Token>) -> Result<Self, super::ParseErrorKind> {
        validate_tree(&tokens)?;
        Ok(Self::from_validated(Vec::new(), tokens, Vec::new()))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// 0-based index of the root token.
    pub fn root(&self) -> usize {
        self.root
    }

    /// 0-based indices of the dependents of token `i`, in surface order.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// 0-based index of the head of token `i`, `None` for the root.
    pub fn head_of(&self, i: usize) -> Option<usize> {
        match self.tokens[i].head {
            0 => None,
            h => Some(h - 1),
        }
    }

    /// Number of edges between the root and token `i`.
    pub fn depth(&self, i: usize) -> usize {
        let mut d = 0;
        let mut cur = i;
        while let Some(h) = self.head_of(cur) {
            d += 1;
            cur = h;
        }
        d
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| !t.is_punct()).count()
    }
}

/// Checks heads in range, no self loops, exactly one root and no cycles.
pub(crate) fn validate_tree(tokens: &[Token]) -> Result<(), super::ParseErrorKind> {
    use super::ParseErrorKind as K;
    let n = tokens.len();
    for t in tokens {
        if t.head > n {
            return Err(K::HeadOutOfRange { head: t.head, len: n });
        }
        if t.head == t.id {
            return Err(K::SelfHead(t.id));
        }
    }
    let roots = tokens.iter().filter(|t| t.head == 0).count();
    match roots {
        0 => return Err(K::NoRoot),
        1 => {}
        r => return Err(K::MultipleRoots(r)),
    }
    // 0 = unvisited, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; n];
    for start in 0..n {
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            match state[cur] {
                2 => break,
                1 => return Err(K::Cycle(cur + 1)),
                _ => {}
            }
            state[cur] = 1;
            path.push(cur);
            match tokens[cur].head {
                0 => break,
                h => cur = h - 1,
            }
        }
        for p in path {
            state[p] = 2;
        }
    }
    Ok(())
}

/// Side, language and mode applied to every segment of a parsed document
/// unless overridden by `# side =`, `# lang =` or `# mode =` comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentMeta {
    pub side: Side,
    pub language: Language,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub doc_id: String,
    pub seg_id: String,
    pub side: Side,
    pub language: Language,
    pub mode: Mode,
    pub sentences: Vec<Sentence>,
}

impl Segment {
    /// Count of non-punctuation tokens.
    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(Sentence::word_count).sum()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Word count, optionally counting punctuation tokens as words.
    pub fn word_count_with(&self, include_punct: bool) -> usize {
        if include_punct {
            self.token_count()
        } else {
            self.word_count()
        }
    }

    /// All tokens in surface order across sentences.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Token at a 1-based position in the flattened segment.
    pub fn token_at(&self, position: usize) -> Option<&Token> {
        position.checked_sub(1).and_then(|p| self.tokens().nth(p))
    }

    /// (sentence index, token index) for a 1-based flattened position.
    pub fn locate(&self, position: usize) -> Option<(usize, usize)> {
        let mut p = position.checked_sub(1)?;
        for (si, s) in self.sentences.iter().enumerate() {
            if p < s.len() {
                return Some((si, p));
            }
            p -= s.len();
        }
        None
    }

    pub fn key(&self) -> (String, String) {
        (self.doc_id.clone(), self.seg_id.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub segments: Vec<Segment>,
}

impl Document {
    pub fn find(&self, doc_id: &str, seg_id: &str) -> Option<&Segment> {
        self.segments
            .iter()
            .find(|s| s.doc_id == doc_id && s.seg_id == seg_id)
    }
}

/// Word alignment link between 1-based flattened token positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordLink {
    pub src: usize,
    pub tgt: usize,
    pub score: f64,
}

/// Alignment between two depth-1 subtrees, each identified by the 1-based
/// flattened position of its head token.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubtreeLink {
    pub src_head: usize,
    pub tgt_head: usize,
    pub cosine: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPair {
    pub source: Segment,
    pub target: Segment,
    pub links: Vec<WordLink>,
    pub subtree_links: Vec<SubtreeLink>,
}
