use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::conllu::{Segment, SegmentPair, Sentence, Token};

use super::{DifficultyError, TokenFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableVariant {
    Lemmas,
    ContentLemmas,
    Subtrees,
}

impl TableVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            TableVariant::Lemmas => "lemmas",
            TableVariant::ContentLemmas => "content-lemmas",
            TableVariant::Subtrees => "subtrees",
        }
    }
}

/// Counts of target realisations per source item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationTable {
    pub variant: TableVariant,
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
    /// Identifiers of the corpus splits the counts came from.
    pub splits: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableCoverage {
    pub pairs: usize,
    pub pairs_without_links: usize,
}

/// Median plus two standard deviations of the defined per-unit entropies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallbackPolicy {
    pub median: f64,
    pub sd: f64,
}

impl FallbackPolicy {
    pub fn value(&self) -> f64 {
        self.median + 2.0 * self.sd
    }

    /// Median and sample standard deviation of `entropies`; `None` for an empty set.
    pub fn from_entropies(entropies: &[f64]) -> Option<Self> {
        if entropies.is_empty() {
            return None;
        }
        let mut v = entropies.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        let sd = if n < 2 {
            0.0
        } else {
            let mean = v.iter().sum::<f64>() / n as f64;
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(FallbackPolicy { median, sd })
    }
}

fn lemma_key(t: &Token) -> String {
    t.lemma.to_lowercase()
}

/// Depth-1 subtree signature: head upos plus the sorted (deprel, upos) of its dependents.
pub fn subtree_signature(sentence: &Sentence, head: usize) -> String {
    let mut deps: Vec<String> = sentence
        .children(head)
        .iter()
        .map(|&c| format!("{}:{}", sentence.tokens[c].deprel, sentence.tokens[c].upos))
        .collect();
    deps.sort();
    format!("{}({})", sentence.tokens[head].upos, deps.join(","))
}

/// Signature of the subtree headed at a 1-based flattened position, if that token has dependents.
pub fn subtree_signature_at(segment: &Segment, position: usize) -> Option<String> {
    let (s, i) = segment.locate(position)?;
    let sentence = &segment.sentences[s];
    (!sentence.children(i).is_empty()).then(|| subtree_signature(sentence, i))
}

/// Aligned (source position, target position) subtree heads of a pair. Word
/// links between two subtree heads stand in when no subtree links were ingested.
pub fn subtree_alignments(pair: &SegmentPair) -> Vec<(usize, usize)> {
    if !pair.subtree_links.is_empty() {
        return pair
            .subtree_links
            .iter()
            .map(|l| (l.src_head, l.tgt_head))
            .collect();
    }
    pair.links
        .iter()
        .filter(|l| {
            subtree_signature_at(&pair.source, l.src).is_some()
                && subtree_signature_at(&pair.target, l.tgt).is_some()
        })
        .map(|l| (l.src, l.tgt))
        .collect()
}

impl TranslationTable {
    pub fn new(variant: TableVariant) -> Self {
        TranslationTable {
            variant,
            counts: BTreeMap::new(),
            splits: Vec::new(),
        }
    }

    pub fn add(&mut self, source: String, target: String, n: u64) {
        *self
            .counts
            .entry(source)
            .or_default()
            .entry(target)
            .or_insert(0) += n;
    }

    pub fn total(&self, source: &str) -> u64 {
        self.counts
            .get(source)
            .map(|m| m.values().sum())
            .unwrap_or(0)
    }

    /// P(target | source).
    pub fn probability(&self, source: &str, target: &str) -> Option<f64> {
        let total = self.total(source);
        let c = *self.counts.get(source)?.get(target)?;
        Some(c as f64 / total as f64)
    }

    /// Adds the counts of `other`; split ids are unioned.
    pub fn merge(&mut self, other: &TranslationTable) {
        for (s, targets) in &other.counts {
            for (t, &n) in targets {
                self.add(s.clone(), t.clone(), n);
            }
        }
        let splits: BTreeSet<String> = self.splits.drain(..).chain(other.splits.clone()).collect();
        self.splits = splits.into_iter().collect();
    }

    /// `src_lemma  tgt_lemma  count` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("src_lemma\ttgt_lemma\tcount\n");
        for (s, targets) in &self.counts {
            for (t, n) in targets {
                out.push_str(&format!("{s}\t{t}\t{n}\n"));
            }
        }
        out
    }

    pub fn from_tsv(
        text: &str,
        variant: TableVariant,
        splits: Vec<String>,
    ) -> Result<Self, DifficultyError> {
        let mut table = TranslationTable::new(variant);
        table.splits = splits;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "src_lemma\ttgt_lemma\tcount")) => {}
            _ => {
                return Err(DifficultyError::Table {
                    line: 1,
                    message: "expected header src_lemma\ttgt_lemma\tcount".into(),
                })
            }
        }
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let count = match cols.as_slice() {
                [_, _, c] => c.parse::<u64>().ok().filter(|&c| c >= 1),
                _ => None,
            };
            let Some(count) = count else {
                return Err(DifficultyError::Table {
                    line: i + 1,
                    message: format!("bad row {line:?}"),
                });
            };
            table.add(cols[0].to_string(), cols[1].to_string(), count);
        }
        Ok(table)
    }
}

/// Counts aligned source-to-target units over `pairs`.
pub fn build_translation_table(
    pairs: &[SegmentPair],
    variant: TableVariant,
) -> (TranslationTable, TableCoverage) {
    let mut table = TranslationTable::new(variant);
    let mut coverage = TableCoverage {
        pairs: pairs.len(),
        pairs_without_links: 0,
    };
    for p in pairs {
        match variant {
            TableVariant::Lemmas | TableVariant::ContentLemmas => {
                if p.links.is_empty() {
                    coverage.pairs_without_links += 1;
                }
                for l in &p.links {
                    let (Some(s), Some(t)) = (p.source.token_at(l.src), p.target.token_at(l.tgt))
                    else {
                        continue;
                    };
                    if s.is_punct() || (variant == TableVariant::ContentLemmas && !s.is_content()) {
                        continue;
                    }
                    table.add(lemma_key(s), lemma_key(t), 1);
                }
            }
            TableVariant::Subtrees => {
                let aligned = subtree_alignments(p);
                if aligned.is_empty() {
                    coverage.pairs_without_links += 1;
                }
                for (s, t) in aligned {
                    if let (Some(s), Some(t)) = (
                        subtree_signature_at(&p.source, s),
                        subtree_signature_at(&p.target, t),
                    ) {
                        table.add(s, t, 1);
                    }
                }
            }
        }
    }
    (table, coverage)
}

/// Entropy in bits of the target distribution of `source`. `None` when the
/// item is absent or was observed only once, which calls for the fallback.
pub fn solution_entropy(source: &str, table: &TranslationTable) -> Option<f64> {
    let targets = table.counts.get(source)?;
    let total: u64 = targets.values().sum();
    if total < 2 {
        return None;
    }
    let h = targets
        .values()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum::<f64>();
    Some(h.max(0.0))
}

/// Source units of a pair for one table variant, each with its table key and
/// whether it is aligned in this pair.
fn units(pair: &SegmentPair, variant: TableVariant, filter: TokenFilter) -> Vec<(String, bool)> {
    match variant {
        TableVariant::Lemmas | TableVariant::ContentLemmas => {
            let aligned: BTreeSet<usize> = pair.links.iter().map(|l| l.src).collect();
            pair.source
                .tokens()
                .enumerate()
                .filter(|(_, t)| !t.is_punct() && filter.admits(t))
                .filter(|(_, t)| variant != TableVariant::ContentLemmas || t.is_content())
                .map(|(i, t)| (lemma_key(t), aligned.contains(&(i + 1))))
                .collect()
        }
        TableVariant::Subtrees => {
            let aligned: BTreeSet<usize> =
                subtree_alignments(pair).into_iter().map(|(s, _)| s).collect();
            (1..=pair.source.token_count())
                .filter_map(|pos| {
                    subtree_signature_at(&pair.source, pos).map(|sig| (sig, aligned.contains(&pos)))
                })
                .collect()
        }
    }
}

/// Entropies of the aligned, non-singleton source units in `pairs`, one per occurrence.
pub fn defined_entropies(
    pairs: &[SegmentPair],
    table: &TranslationTable,
    filter: TokenFilter,
) -> Vec<f64> {
    pairs
        .iter()
        .flat_map(|p| units(p, table.variant, filter))
        .filter(|(_, aligned)| *aligned)
        .filter_map(|(key, _)| solution_entropy(&key, table))
        .collect()
}

/// Sum of per-unit entropies over the source side of `pair`, substituting the
/// fallback for unaligned units and singleton or unseen items.
pub fn segment_entropy(
    pair: &SegmentPair,
    table: &TranslationTable,
    fallback: Option<&FallbackPolicy>,
    filter: TokenFilter,
) -> Result<f64, DifficultyError> {
    let fallback = fallback.ok_or(DifficultyError::FallbackNotInitialized)?;
    let mut defined = 0.0;
    let mut n_fallback = 0usize;
    for (key, aligned) in units(pair, table.variant, filter) {
        match aligned.then(|| solution_entropy(&key, table)).flatten() {
            Some(h) => defined += h,
            None => n_fallback += 1,
        }
    }
    Ok(defined + n_fallback as f64 * fallback.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, &str, u64)]) -> TranslationTable {
        let mut t = TranslationTable::new(TableVariant::Lemmas);
        for (s, g, n) in rows {
            t.add(s.to_string(), g.to_string(), *n);
        }
        t
    }

    #[test]
    fn probabilities_and_entropy() {
        let t = table(&[("haus", "house", 3), ("haus", "home", 1)]);
        assert_eq!(t.probability("haus", "house"), Some(0.75));
        assert!((solution_entropy("haus", &t).unwrap() - 0.8112781244591328).abs() < 1e-12);
        let t = table(&[("a", "x", 1), ("a", "y", 1), ("b", "x", 5), ("c", "z", 1)]);
        assert_eq!(solution_entropy("a", &t), Some(1.0));
        assert_eq!(solution_entropy("b", &t), Some(0.0));
        assert_eq!(solution_entropy("c", &t), None);
        assert_eq!(solution_entropy("zz", &t), None);
    }

    #[test]
    fn fallback_value() {
        let f = FallbackPolicy { median: 1.0, sd: 0.5 };
        assert_eq!(f.value(), 2.0);
        let f = FallbackPolicy::from_entropies(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(f.median, 2.5);
        assert!(FallbackPolicy::from_entropies(&[]).is_none());
    }

    #[test]
    fn tsv_round_trip() {
        let t = table(&[("haus", "house", 3), ("haus", "home", 1)]);
        let back = TranslationTable::from_tsv(&t.to_tsv(), TableVariant::Lemmas, vec![]).unwrap();
        assert_eq!(back, t);
        assert!(TranslationTable::from_tsv("a\tb\n", TableVariant::Lemmas, vec![]).is_err());
    }

    #[test]
    fn merge_adds_counts() {
        let mut a = table(&[("x", "y", 1)]);
        a.merge(&table(&[("x", "y", 2), ("z", "w", 1)]));
        assert_eq!(a, table(&[("x", "y", 3), ("z", "w", 1)]));
    }
}
