use std::fmt;

use crate::matrix::Normalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    DeprelCount,
    UposCount,
    MorphCount,
    RuleBased,
    Textual,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::DeprelCount => "deprel-count",
            FeatureKind::UposCount => "upos-count",
            FeatureKind::MorphCount => "morph-count",
            FeatureKind::RuleBased => "rule-based",
            FeatureKind::Textual => "textual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    AdvmodExcludingNeg,
    AdvmodVerb,
    Epist,
    MeanSentWc,
    Mhd,
    Mpred,
    Negs,
    Nnargs,
    OblObj,
    Ppron,
    Relcl,
    Ttr,
    VoNoun,
    Vorfeld,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::AdvmodExcludingNeg => "advmod_excluding_neg",
            Rule::AdvmodVerb => "advmod_verb",
            Rule::Epist => "epist",
            Rule::MeanSentWc => "mean_sent_wc",
            Rule::Mhd => "mhd",
            Rule::Mpred => "mpred",
            Rule::Negs => "negs",
            Rule::Nnargs => "nnargs",
            Rule::OblObj => "obl_obj",
            Rule::Ppron => "ppron",
            Rule::Relcl => "relcl",
            Rule::Ttr => "ttr",
            Rule::VoNoun => "vo_noun",
            Rule::Vorfeld => "vorfeld",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Deprel(&'static [&'static str]),
    Upos(&'static [&'static str]),
    /// Feature `key` containing `value`, optionally restricted to some upos tags.
    Morph {
        key: &'static str,
        value: &'static str,
        upos: Option<&'static [&'static str]>,
    },
    Rule(Rule),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Deprel(rels) => write!(f, "deprel={}", rels.join(",")),
            Selector::Upos(tags) => write!(f, "upos={}", tags.join(",")),
            Selector::Morph { key, value, upos } => {
                write!(f, "feats={key}={value}")?;
                if let Some(u) = upos {
                    write!(f, ";upos={}", u.join(","))?;
                }
                Ok(())
            }
            Selector::Rule(r) => write!(f, "rule={}", r.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub kind: FeatureKind,
    pub selector: Selector,
    pub normalization: Normalization,
}

const fn deprel(name: &'static str, rels: &'static [&'static str]) -> FeatureSpec {
    FeatureSpec {
        name,
        kind: FeatureKind::DeprelCount,
        selector: Selector::Deprel(rels),
        normalization: Normalization::PerWord,
    }
}

const fn rule(name: &'static str, r: Rule, kind: FeatureKind, n: Normalization) -> FeatureSpec {
    FeatureSpec {
        name,
        kind,
        selector: Selector::Rule(r),
        normalization: n,
    }
}

const VERBAL: &[&str] = &["VERB", "AUX"];

use FeatureKind::{RuleBased, Textual};
use Normalization::{None as Unnormalized, PerSentenceAverage, PerWord};

/// The 37 translationese indicators, in alphabetical order.
pub const REGISTRY: [FeatureSpec; 37] = [
    deprel("acl", &["acl"]),
    deprel("advcl", &["advcl"]),
    rule("advmod", Rule::AdvmodExcludingNeg, RuleBased, PerWord),
    rule("advmod_verb", Rule::AdvmodVerb, RuleBased, PerWord),
    deprel("amod", &["amod"]),
    deprel("appos", &["appos"]),
    deprel("aux", &["aux"]),
    deprel("aux:pass", &["aux:pass"]),
    deprel("case", &["case"]),
    deprel("ccomp", &["ccomp"]),
    deprel("conj", &["conj"]),
    deprel("cop", &["cop"]),
    rule("epist", Rule::Epist, RuleBased, PerWord),
    FeatureSpec {
        name: "fin",
        kind: FeatureKind::MorphCount,
        selector: Selector::Morph { key: "VerbForm", value: "Fin", upos: None },
        normalization: PerWord,
    },
    FeatureSpec {
        name: "inf",
        kind: FeatureKind::MorphCount,
        selector: Selector::Morph { key: "VerbForm", value: "Inf", upos: None },
        normalization: PerWord,
    },
    deprel("mark", &["mark"]),
    rule("mean_sent_wc", Rule::MeanSentWc, Textual, PerSentenceAverage),
    rule("mhd", Rule::Mhd, RuleBased, PerSentenceAverage),
    rule("mpred", Rule::Mpred, RuleBased, PerWord),
    rule("negs", Rule::Negs, RuleBased, PerWord),
    deprel("nmod", &["nmod"]),
    FeatureSpec {
        name: "nn",
        kind: FeatureKind::UposCount,
        selector: Selector::Upos(&["NOUN"]),
        normalization: PerWord,
    },
    rule("nnargs", Rule::Nnargs, RuleBased, Unnormalized),
    deprel("nsubj", &["nsubj"]),
    deprel("nummod", &["nummod"]),
    deprel("obj", &["obj"]),
    deprel("obl", &["obl"]),
    rule("obl_obj", Rule::OblObj, RuleBased, Unnormalized),
    deprel("parataxis", &["parataxis"]),
    FeatureSpec {
        name: "pastv",
        kind: FeatureKind::MorphCount,
        selector: Selector::Morph { key: "Tense", value: "Past", upos: Some(VERBAL) },
        normalization: PerWord,
    },
    rule("ppron", Rule::Ppron, RuleBased, PerWord),
    FeatureSpec {
        name: "prep",
        kind: FeatureKind::UposCount,
        selector: Selector::Upos(&["ADP"]),
        normalization: PerWord,
    },
    rule("relcl", Rule::Relcl, RuleBased, PerWord),
    rule("ttr", Rule::Ttr, Textual, PerSentenceAverage),
    rule("vo_noun", Rule::VoNoun, RuleBased, PerWord),
    rule("vorfeld", Rule::Vorfeld, RuleBased, Unnormalized),
    deprel("xcomp", &["xcomp"]),
];

pub fn feature_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|s| s.name).collect()
}

pub fn spec(name: &str) -> Option<&'static FeatureSpec> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Registry dump: `name  kind  selector  normalization`.
pub fn registry_tsv() -> String {
    let mut out = String::from("name\tkind\tselector\tnormalization\n");
    for s in &REGISTRY {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            s.name,
            s.kind.as_str(),
            s.selector,
            s.normalization.as_str()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn exactly_the_37_names() {
        let expected = "acl advcl advmod advmod_verb amod appos aux aux:pass case ccomp conj cop \
                        epist fin inf mark mean_sent_wc mhd mpred negs nmod nn nnargs nsubj nummod \
                        obj obl obl_obj parataxis pastv ppron prep relcl ttr vo_noun vorfeld xcomp";
        let expected: Vec<&str> = expected.split_whitespace().collect();
        assert_eq!(feature_names(), expected);
        let unique: HashSet<_> = feature_names().into_iter().collect();
        assert_eq!(unique.len(), 37);
    }

    #[test]
    fn reserved_predictors_absent() {
        for reserved in ["lex_dens", "n_clauses", "mdd"] {
            assert!(spec(reserved).is_none());
        }
    }

    #[test]
    fn dump_has_header_and_rows() {
        let tsv = registry_tsv();
        assert_eq!(tsv.lines().count(), 38);
        assert!(tsv.contains("aux:pass\tdeprel-count\tdeprel=aux:pass\tper-word"));
        assert!(tsv.contains("pastv\tmorph-count\tfeats=Tense=Past;upos=VERB,AUX\tper-word"));
    }
}
