use std::collections::BTreeSet;

use crate::conllu::{Segment, Sentence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntacticComplexity {
    /// Nodes on the longest root-to-leaf path.
    pub tree_depth: f64,
    /// Mean number of dependents over tokens that have any.
    pub branching: f64,
    /// Mean linear distance between dependents and heads.
    pub mdd: f64,
}

pub fn syntactic_complexity(sentence: &Sentence) -> SyntacticComplexity {
    let n = sentence.len();
    let tree_depth = (0..n).map(|i| sentence.depth(i) + 1).max().unwrap_or(0);
    let heads: Vec<usize> = (0..n)
        .map(|i| sentence.children(i).len())
        .filter(|&c| c > 0)
        .collect();
    let branching = if heads.is_empty() {
        0.0
    } else {
        heads.iter().sum::<usize>() as f64 / heads.len() as f64
    };
    let dists: Vec<usize> = (0..n)
        .filter_map(|i| sentence.head_of(i).map(|h| h.abs_diff(i)))
        .collect();
    let mdd = if dists.is_empty() {
        0.0
    } else {
        dists.iter().sum::<usize>() as f64 / dists.len() as f64
    };
    SyntacticComplexity {
        tree_depth: tree_depth as f64,
        branching,
        mdd,
    }
}

const CLAUSAL: [&str; 5] = ["csubj", "advcl", "acl", "xcomp", "ccomp"];

fn base_deprel(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

/// One matrix clause per sentence plus every clausal dependent (subtypes included).
pub fn n_clauses(segment: &Segment) -> usize {
    segment.sentences.len()
        + segment
            .tokens()
            .filter(|t| CLAUSAL.contains(&base_deprel(&t.deprel)))
            .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalProfile {
    pub lex_dens: f64,
    pub wlen: f64,
    pub mwe: usize,
    pub numerals: usize,
    pub propn: usize,
}

/// Unique (lemma, upos) content pairs over all tokens of one sentence.
pub fn sentence_lex_dens(sentence: &Sentence) -> f64 {
    if sentence.is_empty() {
        return 0.0;
    }
    let unique: BTreeSet<(String, &str)> = sentence
        .tokens
        .iter()
        .filter(|t| t.is_content())
        .map(|t| (t.lemma.to_lowercase(), t.upos.as_str()))
        .collect();
    unique.len() as f64 / sentence.len() as f64
}

const MWE_RELS: [&str; 3] = ["flat", "fixed", "compound"];

/// Connected groups of tokens joined by multiword relations, restricted to
/// tokens accepted by `member`. Each group is reported by its topmost token.
fn multiword_groups(sentence: &Sentence, member: impl Fn(usize) -> bool) -> Vec<(usize, usize)> {
    let n = sentence.len();
    let mut top: Vec<usize> = (0..n).collect();
    for (i, t) in top.iter_mut().enumerate() {
        if !member(i) {
            continue;
        }
        let mut cur = i;
        while MWE_RELS.contains(&base_deprel(&sentence.tokens[cur].deprel)) {
            match sentence.head_of(cur) {
                Some(h) if member(h) => cur = h,
                _ => break,
            }
        }
        *t = cur;
    }
    let mut sizes = vec![0usize; n];
    for i in (0..n).filter(|&i| member(i)) {
        sizes[top[i]] += 1;
    }
    (0..n)
        .filter(|&i| sizes[i] > 0)
        .map(|i| (i, sizes[i]))
        .collect()
}

/// Segment-level lexical measures; `lex_dens` is averaged over sentences.
pub fn lexical_profile(segment: &Segment) -> LexicalProfile {
    let words: Vec<usize> = segment
        .tokens()
        .filter(|t| !t.is_punct())
        .map(|t| t.form.chars().count())
        .collect();
    let wlen = if words.is_empty() {
        0.0
    } else {
        words.iter().sum::<usize>() as f64 / words.len() as f64
    };
    let mut mwe = 0;
    let mut numerals = 0;
    let mut propn = 0;
    for s in &segment.sentences {
        mwe += multiword_groups(s, |_| true)
            .into_iter()
            .filter(|&(top, size)| {
                size > 1 && !matches!(s.tokens[top].upos.as_str(), "NUM" | "PROPN")
            })
            .count();
        numerals += multiword_groups(s, |i| s.tokens[i].upos == "NUM").len();
        propn += multiword_groups(s, |i| s.tokens[i].upos == "PROPN").len();
    }
    let n = segment.sentences.len();
    let lex_dens = if n == 0 {
        0.0
    } else {
        segment.sentences.iter().map(sentence_lex_dens).sum::<f64>() / n as f64
    };
    LexicalProfile {
        lex_dens,
        wlen,
        mwe,
        numerals,
        propn,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Language, Mode, Side, Token};

    fn tok(id: usize, form: &str, upos: &str, head: usize, deprel: &str) -> Token {
        Token::new(id, form, form, upos, head, deprel)
    }

    fn seg(sentences: Vec<Sentence>) -> Segment {
        Segment {
            doc_id: "d".into(),
            seg_id: "s".into(),
            side: Side::Src,
            language: Language::En,
            mode: Mode::Written,
            sentences,
        }
    }

    #[test]
    fn chain_and_star() {
        let chain = Sentence::new(vec![
            tok(1, "a", "X", 0, "root"),
            tok(2, "b", "X", 1, "dep"),
            tok(3, "c", "X", 2, "dep"),
        ])
        .unwrap();
        let c = syntactic_complexity(&chain);
        assert_eq!((c.tree_depth, c.branching, c.mdd), (3.0, 1.0, 1.0));
        let star = Sentence::new(vec![
            tok(1, "a", "X", 2, "dep"),
            tok(2, "b", "X", 0, "root"),
            tok(3, "c", "X", 2, "dep"),
            tok(4, "d", "X", 2, "dep"),
        ])
        .unwrap();
        let c = syntactic_complexity(&star);
        assert_eq!((c.tree_depth, c.branching), (2.0, 3.0));
        assert!((c.mdd - 4.0 / 3.0).abs() < 1e-12);
        let one = Sentence::new(vec![tok(1, "a", "X", 0, "root")]).unwrap();
        let c = syntactic_complexity(&one);
        assert_eq!((c.tree_depth, c.branching, c.mdd), (1.0, 0.0, 0.0));
    }

    #[test]
    fn clause_counts() {
        let simple = Sentence::new(vec![tok(1, "go", "VERB", 0, "root")]).unwrap();
        assert_eq!(n_clauses(&seg(vec![simple.clone()])), 1);
        let two = Sentence::new(vec![
            tok(1, "said", "VERB", 0, "root"),
            tok(2, "go", "VERB", 1, "ccomp"),
            tok(3, "when", "VERB", 1, "advcl"),
        ])
        .unwrap();
        assert_eq!(n_clauses(&seg(vec![two])), 3);
        let rel = Sentence::new(vec![
            tok(1, "man", "NOUN", 0, "root"),
            tok(2, "slept", "VERB", 1, "acl:relcl"),
        ])
        .unwrap();
        assert_eq!(n_clauses(&seg(vec![simple, rel])), 3);
    }

    #[test]
    fn lexical_measures() {
        let s = Sentence::new(vec![
            tok(1, "the", "DET", 3, "det"),
            tok(2, "big", "ADJ", 3, "amod"),
            tok(3, "cat", "NOUN", 0, "root"),
        ])
        .unwrap();
        assert!((lexical_profile(&seg(vec![s])).lex_dens - 2.0 / 3.0).abs() < 1e-12);
        let s = Sentence::new(vec![
            tok(1, "cat", "NOUN", 0, "root"),
            tok(2, "sleeps", "VERB", 1, "dep"),
            tok(3, ".", "PUNCT", 1, "punct"),
        ])
        .unwrap();
        assert_eq!(lexical_profile(&seg(vec![s])).wlen, 4.5);
    }

    #[test]
    fn multiword_units() {
        let s = Sentence::new(vec![
            tok(1, "New", "PROPN", 0, "root"),
            tok(2, "York", "PROPN", 1, "flat"),
            tok(3, "police", "NOUN", 4, "compound"),
            tok(4, "officers", "NOUN", 1, "appos"),
            tok(5, "twenty", "NUM", 6, "compound"),
            tok(6, "five", "NUM", 4, "nummod"),
            tok(7, "3", "NUM", 4, "nummod"),
        ])
        .unwrap();
        let p = lexical_profile(&seg(vec![s]));
        assert_eq!(p.propn, 1);
        assert_eq!(p.mwe, 1);
        assert_eq!(p.numerals, 2);
    }
}
