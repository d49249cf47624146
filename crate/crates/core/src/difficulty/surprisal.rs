use crate::conllu::{Segment, Token};

use super::DifficultyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// Monolingual language-model surprisal of the source (`Srp`, `SrpSub`).
    SrcLm,
    /// Forced-decoding translation-model surprisal of the target (`MtSrp`, `MtSrpSub`).
    Mt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenFilter {
    All,
    Content,
}

impl TokenFilter {
    pub fn admits(self, t: &Token) -> bool {
        match self {
            TokenFilter::All => true,
            TokenFilter::Content => t.is_content(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Token,
    Subword,
}

/// Mean surprisal in bits over the tokens admitted by `filter`. Subword
/// surprisals are flattened before averaging.
pub fn avg_surprisal(
    segment: &Segment,
    channel: Channel,
    filter: TokenFilter,
    unit: Unit,
) -> Result<f64, DifficultyError> {
    let mut values: Vec<f64> = Vec::new();
    for (pos, t) in segment.tokens().enumerate() {
        if !filter.admits(t) {
            continue;
        }
        let a = &t.annotations;
        let missing = || DifficultyError::MissingAnnotation {
            key: match (channel, unit) {
                (Channel::SrcLm, Unit::Token) => "Srp",
                (Channel::SrcLm, Unit::Subword) => "SrpSub",
                (Channel::Mt, Unit::Token) => "MtSrp",
                (Channel::Mt, Unit::Subword) => "MtSrpSub",
            },
            token: format!("{}:{}#{} {:?}", segment.doc_id, segment.seg_id, pos + 1, t.form),
        };
        match (channel, unit) {
            (Channel::SrcLm, Unit::Token) => values.push(a.src_surprisal.ok_or_else(missing)?),
            (Channel::Mt, Unit::Token) => values.push(a.mt_surprisal.ok_or_else(missing)?),
            (Channel::SrcLm, Unit::Subword) => {
                values.extend(a.src_surprisal_subwords.as_ref().ok_or_else(missing)?)
            }
            (Channel::Mt, Unit::Subword) => {
                values.extend(a.mt_surprisal_subwords.as_ref().ok_or_else(missing)?)
            }
        }
    }
    if values.is_empty() {
        return Err(DifficultyError::NoEligibleTokens);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
