use std::collections::BTreeMap;
use std::path::PathBuf;

use super::parallel::{load_parallel, read_links, read_manifest, read_subtree_links};
use super::{
    parse_document, CorpusError, Document, LanguagePair, Mode, Segment, SegmentMeta,
    SegmentPair, Side,
};

/// One (mode, language pair) subcorpus: comparable originals in the target
/// language plus the aligned source/target pairs.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub mode: Mode,
    pub lpair: LanguagePair,
    pub originals: Vec<Segment>,
    pub pairs: Vec<SegmentPair>,
    pub unmatched_src: Vec<(String, String)>,
    pub unmatched_tgt: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub removed_originals: usize,
    pub removed_pairs: usize,
}

impl Corpus {
    /// Target segments, one per pair.
    pub fn targets(&self) -> impl Iterator<Item = &Segment> {
        self.pairs.iter().map(|p| &p.target)
    }

    pub fn sources(&self) -> impl Iterator<Item = &Segment> {
        self.pairs.iter().map(|p| &p.source)
    }

    /// Segments of one side grouped by document id.
    pub fn documents(&self, side: Side) -> BTreeMap<&str, Vec<&Segment>> {
        let mut out: BTreeMap<&str, Vec<&Segment>> = BTreeMap::new();
        let segs: Vec<&Segment> = match side {
            Side::Org => self.originals.iter().collect(),
            Side::Src => self.sources().collect(),
            Side::Tgt => self.targets().collect(),
        };
        for s in segs {
            out.entry(s.doc_id.as_str()).or_default().push(s);
        }
        out
    }

    /// Removes segments with fewer than `min_tokens` words, together with any
    /// pair either of whose sides is removed.
    pub fn filter_short_segments(self, min_tokens: usize) -> (Corpus, FilterReport) {
        let keep = |s: &Segment| s.word_count() >= min_tokens;
        let n_org = self.originals.len();
        let n_pairs = self.pairs.len();
        let originals: Vec<Segment> = self.originals.into_iter().filter(|s| keep(s)).collect();
        let pairs: Vec<SegmentPair> = self
            .pairs
            .into_iter()
            .filter(|p| keep(&p.source) && keep(&p.target))
            .collect();
        let report = FilterReport {
            removed_originals: n_org - originals.len(),
            removed_pairs: n_pairs - pairs.len(),
        };
        if originals.is_empty() && pairs.is_empty() && (n_org > 0 || n_pairs > 0) {
            log::warn!("all segments removed by the {min_tokens}-word filter");
        }
        (
            Corpus {
                originals,
                pairs,
                ..self
            },
            report,
        )
    }
}

/// On-disk layout of one subcorpus directory:
///
/// ```text
/// <dir>/org.conllu            originals in the target language (optional)
/// <dir>/src.conllu            sources (optional, with tgt.conllu)
/// <dir>/tgt.conllu            translations
/// <dir>/manifest.tsv          doc_id  src_seg  tgt_seg
/// <dir>/links.tsv             word links (optional)
/// <dir>/subtree_links.tsv     subtree links (optional)
/// ```
#[derive(Debug, Clone)]
pub struct CorpusLayout {
    pub dir: PathBuf,
    pub mode: Mode,
    pub lpair: LanguagePair,
}

impl CorpusLayout {
    pub fn new(dir: impl Into<PathBuf>, mode: Mode, lpair: LanguagePair) -> Self {
        CorpusLayout {
            dir: dir.into(),
            mode,
            lpair,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn read(&self, name: &str) -> Result<Option<(String, String)>, CorpusError> {
        let path = self.path(name);
        if !path.exists() {
            return Ok(None);
        }
        let shown = path.display().to_string();
        std::fs::read_to_string(&path)
            .map(|t| Some((t, shown.clone())))
            .map_err(|source| CorpusError::Io { path: shown, source })
    }

    /// Parses one side's CoNLL-U file, if present.
    pub fn load_side(&self, side: Side) -> Result<Option<Document>, CorpusError> {
        let Some((text, path)) = self.read(&format!("{side}.conllu"))? else {
            return Ok(None);
        };
        let meta = SegmentMeta {
            side,
            language: self.lpair.language_of(side),
            mode: self.mode,
        };
        parse_document(&text, meta)
            .map(Some)
            .map_err(|source| CorpusError::Parse { path, source })
    }

    pub fn load(&self) -> Result<Corpus, CorpusError> {
        let originals = self.load_side(Side::Org)?.unwrap_or_default().segments;
        let src = self.load_side(Side::Src)?;
        let tgt = self.load_side(Side::Tgt)?;
        let mut corpus = Corpus {
            mode: self.mode,
            lpair: self.lpair,
            originals,
            pairs: Vec::new(),
            unmatched_src: Vec::new(),
            unmatched_tgt: Vec::new(),
        };
        let (src, tgt) = match (src, tgt) {
            (Some(s), Some(t)) => (s, t),
            (None, Some(t)) => {
                // translations without sources: every target is unmatched
                corpus.unmatched_tgt = t.segments.iter().map(Segment::key).collect();
                return Ok(corpus);
            }
            _ => return Ok(corpus),
        };
        let manifest = match self.read("manifest.tsv")? {
            Some((text, path)) => read_manifest(&text, &path)?,
            None => Vec::new(),
        };
        let links = match self.read("links.tsv")? {
            Some((text, path)) => read_links(&text, &path)?,
            None => Vec::new(),
        };
        let subtree_links = match self.read("subtree_links.tsv")? {
            Some((text, path)) => read_subtree_links(&text, &path)?,
            None => Vec::new(),
        };
        let load = load_parallel(&src, &tgt, &manifest, &links, &subtree_links)?;
        for (d, s) in &load.unmatched_tgt {
            log::warn!("target segment ({d},{s}) has no manifest row");
        }
        corpus.pairs = load.pairs;
        corpus.unmatched_src = load.unmatched_src;
        corpus.unmatched_tgt = load.unmatched_tgt;
        Ok(corpus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Language, Sentence, Token};

    fn seg(id: &str, words: usize, side: Side) -> Segment {
        let tokens = (1..=words)
            .map(|i| Token {
                id: i,
                form: format!("w{i}"),
                lemma: format!("w{i}"),
                upos: "NOUN".into(),
                xpos: None,
                feats: Default::default(),
                head: if i == 1 { 0 } else { 1 },
                deprel: if i == 1 { "root".into() } else { "dep".into() },
                deps: "_".into(),
                misc: Default::default(),
                annotations: Default::default(),
            })
            .collect();
        Segment {
            doc_id: "d".into(),
            seg_id: id.into(),
            side,
            language: Language::En,
            mode: Mode::Written,
            sentences: vec![Sentence::new(tokens).unwrap()],
        }
    }

    fn corpus(lengths: &[usize]) -> Corpus {
        Corpus {
            mode: Mode::Written,
            lpair: LanguagePair::DeEn,
            originals: lengths
                .iter()
                .enumerate()
                .map(|(i, &n)| seg(&format!("o{i}"), n, Side::Org))
                .collect(),
            pairs: lengths
                .iter()
                .enumerate()
                .map(|(i, &n)| SegmentPair {
                    source: seg(&format!("s{i}"), 5, Side::Src),
                    target: seg(&format!("s{i}"), n, Side::Tgt),
                    links: vec![],
                    subtree_links: vec![],
                })
                .collect(),
            unmatched_src: vec![],
            unmatched_tgt: vec![],
        }
    }

    #[test]
    fn strict_four_word_threshold() {
        let (c, report) = corpus(&[3, 4, 10]).filter_short_segments(4);
        assert_eq!(c.originals.len(), 2);
        assert_eq!(c.pairs.len(), 2);
        assert_eq!(
            report,
            FilterReport {
                removed_originals: 1,
                removed_pairs: 1
            }
        );
    }

    #[test]
    fn unchanged_when_all_long() {
        let (c, report) = corpus(&[4, 5, 6]).filter_short_segments(4);
        assert_eq!(c.originals.len(), 3);
        assert_eq!(c.pairs.len(), 3);
        assert_eq!(report, FilterReport::default());
    }

    #[test]
    fn filter_is_idempotent() {
        let (once, _) = corpus(&[1, 3, 4, 8, 2]).filter_short_segments(4);
        let (twice, report) = once.clone().filter_short_segments(4);
        assert_eq!(once.originals, twice.originals);
        assert_eq!(once.pairs, twice.pairs);
        assert_eq!(report, FilterReport::default());
    }
}
