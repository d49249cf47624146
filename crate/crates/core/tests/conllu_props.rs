mod common;

use common::{meta, random_document_text, random_tree_lines};
use medload::conllu::{
    parse_document, write_document, Corpus, Language, LanguagePair, Mode, ParseErrorKind,
    SegmentPair,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn heads_of(lines: &str) -> Vec<usize> {
    lines
        .lines()
        .map(|l| l.split('\t').nth(6).unwrap().parse().unwrap())
        .collect()
}

fn with_heads(lines: &str, heads: &[usize]) -> String {
    lines
        .lines()
        .zip(heads)
        .map(|(l, h)| {
            let mut c: Vec<String> = l.split('\t').map(str::to_string).collect();
            c[6] = h.to_string();
            c.join("\t") + "\n"
        })
        .collect()
}

fn wrap(lines: &str) -> String {
    format!("# newdoc id = d1\n# seg_id = s1\n{lines}\n")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn write_then_parse_is_identity(seed in any::<u64>(), segments in 1usize..6, annotate in any::<bool>()) {
        let text = random_document_text(seed, segments, annotate);
        let doc = parse_document(&text, meta(Language::De)).unwrap();
        let written = write_document(&doc);
        prop_assert_eq!(&written, &text);
        prop_assert_eq!(parse_document(&written, meta(Language::De)).unwrap(), doc);
    }

    #[test]
    fn parsed_sentences_are_single_rooted_trees(seed in any::<u64>()) {
        let doc = parse_document(&random_document_text(seed, 3, false), meta(Language::En)).unwrap();
        for s in doc.segments.iter().flat_map(|g| &g.sentences) {
            let roots = s.tokens.iter().filter(|t| t.head == 0).count();
            prop_assert_eq!(roots, 1);
            prop_assert_eq!(s.tokens[s.root()].head, 0);
            for i in 0..s.len() {
                // Walking up from any token reaches the root within len steps.
                let mut cur = i;
                let mut steps = 0;
                while let Some(h) = s.head_of(cur) {
                    cur = h;
                    steps += 1;
                    prop_assert!(steps <= s.len());
                }
                prop_assert_eq!(cur, s.root());
                prop_assert_eq!(s.depth(i), steps);
            }
        }
    }

    #[test]
    fn injected_cycles_are_rejected(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lines = loop {
            let l = random_tree_lines(&mut rng, 9, false);
            let h = heads_of(&l);
            if h.iter().any(|&x| x != 0 && h[x - 1] != 0) {
                break l;
            }
        };
        let mut heads = heads_of(&lines);
        // A non-root token i with a child j: making j the head of i closes a cycle.
        let i = (0..heads.len())
            .find(|&i| heads[i] != 0 && heads.contains(&(i + 1)))
            .unwrap();
        let j = heads.iter().position(|&h| h == i + 1).unwrap();
        heads[i] = j + 1;
        let err = parse_document(&wrap(&with_heads(&lines, &heads)), meta(Language::En)).unwrap_err();
        prop_assert!(matches!(err.kind, ParseErrorKind::Cycle(_)), "{:?}", err);
    }

    #[test]
    fn short_segment_filter_is_idempotent(seed in any::<u64>(), min in 0usize..12) {
        let org = parse_document(&random_document_text(seed, 6, false), meta(Language::De)).unwrap();
        let src = parse_document(&random_document_text(seed ^ 1, 6, false), meta(Language::En)).unwrap();
        let tgt = parse_document(&random_document_text(seed ^ 2, 6, false), meta(Language::De)).unwrap();
        let pairs: Vec<SegmentPair> = src
            .segments
            .into_iter()
            .zip(tgt.segments)
            .map(|(source, target)| SegmentPair { source, target, links: vec![], subtree_links: vec![] })
            .collect();
        let corpus = Corpus {
            mode: Mode::Written,
            lpair: LanguagePair::EnDe,
            originals: org.segments,
            pairs,
            unmatched_src: vec![],
            unmatched_tgt: vec![],
        };
        let (once, _) = corpus.filter_short_segments(min);
        prop_assert!(once.originals.iter().all(|s| s.word_count() >= min));
        let (twice, report) = once.clone().filter_short_segments(min);
        prop_assert_eq!(report.removed_originals + report.removed_pairs, 0);
        prop_assert_eq!(twice.originals, once.originals);
        prop_assert_eq!(twice.pairs, once.pairs);
    }
}

#[test]
fn self_head_and_missing_root_are_rejected() {
    let self_head = "1\ta\ta\tNOUN\t_\t_\t1\troot\t_\t_\n";
    let e = parse_document(&wrap(self_head), meta(Language::En)).unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::SelfHead(1));

    let no_root = "1\ta\ta\tNOUN\t_\t_\t2\tnsubj\t_\t_\n2\tb\tb\tVERB\t_\t_\t1\tobj\t_\t_\n";
    let e = parse_document(&wrap(no_root), meta(Language::En)).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::NoRoot | ParseErrorKind::Cycle(_)));
}

#[test]
fn misc_schema_round_trips_with_annotations() {
    let line = "1\tHaus\tHaus\tNOUN\t_\t_\t0\troot\t_\tSrp=3.5|SrpSub=1.5,2.0|MtSrp=0.25|MtSrpSub=0.25|Align=0.75|Pred=Haus\n";
    let doc = parse_document(&wrap(line), meta(Language::De)).unwrap();
    let t = &doc.segments[0].sentences[0].tokens[0];
    let a = &t.annotations;
    assert_eq!(a.src_surprisal, Some(3.5));
    assert_eq!(a.src_surprisal_subwords.as_deref(), Some(&[1.5, 2.0][..]));
    assert_eq!(a.mt_surprisal, Some(0.25));
    assert_eq!(a.align_score, Some(0.75));
    assert_eq!(a.pred_form.as_deref(), Some("Haus"));
    assert_eq!(write_document(&doc), wrap(line));

    let bad = line.replace("Align=0.75", "Align=1.5");
    let e = parse_document(&wrap(&bad), meta(Language::De)).unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::AlignRange(_)));
}
