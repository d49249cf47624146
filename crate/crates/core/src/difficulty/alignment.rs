use crate::conllu::SegmentPair;

use super::TokenFilter;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignUnit {
    Words,
    Subtrees,
}

/// Mean link score over the filtered units; `None` when no link qualifies.
///
/// Word links come from the pair's link table, or from the inline `Align`
/// scores of source tokens when the pair has none. The content filter applies
/// to the source token of each link.
pub fn mean_alignment(pair: &SegmentPair, filter: TokenFilter, unit: AlignUnit) -> Option<f64> {
    let scores: Vec<f64> = match unit {
        AlignUnit::Words if !pair.links.is_empty() => pair
            .links
            .iter()
            .filter(|l| pair.source.token_at(l.src).is_some_and(|t| filter.admits(t)))
            .map(|l| l.score)
            .collect(),
        AlignUnit::Words => pair
            .source
            .tokens()
            .filter(|t| filter.admits(t))
            .filter_map(|t| t.annotations.align_score)
            .collect(),
        AlignUnit::Subtrees => pair.subtree_links.iter().map(|l| l.cosine).collect(),
    };
    if scores.is_empty() {
        None
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    }
}
