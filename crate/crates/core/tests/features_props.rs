mod common;

use common::{meta, random_document_text, random_segment};
use medload::conllu::{parse_document, Language, Segment, SegmentPair};
use medload::difficulty::{
    avg_surprisal, extract_difficulty_vector, pseudo_bleu, solution_entropy, Channel,
    DifficultyResources, TableVariant, TokenFilter, TranslationTable, Unit, DIFFICULTY_NAMES,
};
use medload::translationese::{extract_translationese_vector, Lexicon, Selector, REGISTRY};
use proptest::prelude::*;

/// (upos, feats, deprel) straight from the text columns.
fn raw_columns(text: &str) -> Vec<(String, String, String)> {
    text.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[3].to_string(), c[5].to_string(), c[7].to_string())
        })
        .collect()
}

fn feats_contain(feats: &str, key: &str, value: &str) -> bool {
    feats.split('|').any(|kv| {
        kv.split_once('=')
            .is_some_and(|(k, v)| k == key && v.split(',').any(|x| x == value))
    })
}

fn brute_force(selector: &Selector, cols: &[(String, String, String)]) -> Option<f64> {
    let n = match selector {
        Selector::Deprel(rels) => cols.iter().filter(|c| rels.contains(&c.2.as_str())).count(),
        Selector::Upos(tags) => cols.iter().filter(|c| tags.contains(&c.0.as_str())).count(),
        Selector::Morph { key, value, upos } => cols
            .iter()
            .filter(|c| feats_contain(&c.1, key, value))
            .filter(|c| upos.is_none_or(|u| u.contains(&c.0.as_str())))
            .count(),
        Selector::Rule(_) => return None,
    };
    Some(n as f64)
}

fn table_from(entries: &[(u8, u8, u64)]) -> TranslationTable {
    let mut t = TranslationTable::new(TableVariant::Lemmas);
    for &(s, g, n) in entries {
        t.add(format!("s{s}"), format!("t{g}"), n);
    }
    t
}

fn pair(source: Segment, target: Segment) -> SegmentPair {
    SegmentPair { source, target, links: vec![], subtree_links: vec![] }
}

fn annotated_segment(seed: u64, language: Language) -> Segment {
    let text = random_document_text(seed, 1, true);
    parse_document(&text, meta(language)).unwrap().segments.remove(0)
}

#[test]
fn selector_features_match_brute_force_on_fifty_segments() {
    let lexicon = Lexicon::bundled(Language::De);
    for seed in 0..50 {
        let text = random_document_text(seed, 1, false);
        let cols = raw_columns(&text);
        let seg = parse_document(&text, meta(Language::De)).unwrap().segments.remove(0);
        let v = extract_translationese_vector(&seg, Language::De, &REGISTRY, &lexicon).unwrap();
        for (spec, value) in REGISTRY.iter().zip(&v.values) {
            if let Some(expected) = brute_force(&spec.selector, &cols) {
                assert_eq!(*value, expected, "{} on seed {seed}", spec.name);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translationese_values_are_in_range(seed in any::<u64>(), german in any::<bool>()) {
        let language = if german { Language::De } else { Language::En };
        let seg = random_segment(seed, language);
        let lexicon = Lexicon::bundled(language);
        let v = extract_translationese_vector(&seg, language, &REGISTRY, &lexicon).unwrap();
        prop_assert!(v.values.iter().all(|x| x.is_finite() && *x >= 0.0));
        let n_sent = seg.sentences.len() as f64;
        prop_assert!(v.get("ttr").unwrap() / n_sent <= 1.0 + 1e-12);
        for name in ["nnargs", "obl_obj", "vorfeld"] {
            prop_assert!(v.get(name).unwrap() <= 1.0, "{}", name);
        }
        if !german {
            prop_assert_eq!(v.get("vorfeld"), Some(0.0));
        }
        let again = extract_translationese_vector(&seg, language, &REGISTRY, &lexicon).unwrap();
        prop_assert_eq!(again, v);
    }

    #[test]
    fn entropy_is_bounded_and_matches_brute_force(
        counts in prop::collection::vec(1u64..50, 1..9),
    ) {
        let entries: Vec<(u8, u8, u64)> = counts.iter().enumerate().map(|(i, &c)| (0, i as u8, c)).collect();
        let t = table_from(&entries);
        let total: u64 = counts.iter().sum();
        let h = solution_entropy("s0", &t);
        if total < 2 {
            prop_assert!(h.is_none());
        } else {
            let h = h.unwrap();
            let brute: f64 = counts
                .iter()
                .map(|&c| c as f64 / total as f64)
                .map(|p| -p * p.log2())
                .sum();
            prop_assert!((h - brute).abs() < 1e-12);
            prop_assert!(h >= 0.0 && h <= (counts.len() as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn table_merge_is_commutative_and_associative(
        a in prop::collection::vec((0u8..4, 0u8..4, 1u64..5), 0..12),
        b in prop::collection::vec((0u8..4, 0u8..4, 1u64..5), 0..12),
        c in prop::collection::vec((0u8..4, 0u8..4, 1u64..5), 0..12),
    ) {
        let (ta, tb, tc) = (table_from(&a), table_from(&b), table_from(&c));
        let mut ab = ta.clone();
        ab.merge(&tb);
        let mut ba = tb.clone();
        ba.merge(&ta);
        prop_assert_eq!(&ab, &ba);
        let mut ab_c = ab.clone();
        ab_c.merge(&tc);
        let mut bc = tb.clone();
        bc.merge(&tc);
        let mut a_bc = ta.clone();
        a_bc.merge(&bc);
        prop_assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn bleu_of_identity_is_100(words in prop::collection::vec("[a-e]{1,3}", 1..20)) {
        let w: Vec<&str> = words.iter().map(String::as_str).collect();
        prop_assert!((pseudo_bleu(&w, &w).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn average_surprisal_lies_between_extremes(seed in any::<u64>()) {
        let seg = annotated_segment(seed, Language::En);
        let tokens: Vec<f64> = seg.tokens().map(|t| t.annotations.src_surprisal.unwrap()).collect();
        let subwords: Vec<f64> = seg
            .tokens()
            .flat_map(|t| t.annotations.src_surprisal_subwords.clone().unwrap())
            .collect();
        for (unit, values) in [(Unit::Token, &tokens), (Unit::Subword, &subwords)] {
            let avg = avg_surprisal(&seg, Channel::SrcLm, TokenFilter::All, unit).unwrap();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(avg >= lo - 1e-12 && avg <= hi + 1e-12);
        }
    }

    #[test]
    fn source_features_ignore_the_target(seed in any::<u64>()) {
        let source = annotated_segment(seed, Language::En);
        let a = pair(source.clone(), annotated_segment(seed ^ 0x5555, Language::De));
        let b = pair(source, annotated_segment(seed ^ 0xaaaa, Language::De));
        let res = DifficultyResources::build(&[], &[]);
        let (va, vb) = (extract_difficulty_vector(&a, &res), extract_difficulty_vector(&b, &res));
        for name in DIFFICULTY_NAMES.iter().filter(|n| n.starts_with("src_")) {
            prop_assert_eq!(va.get(name), vb.get(name), "{}", name);
        }
    }
}
