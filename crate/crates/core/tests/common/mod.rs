#![allow(dead_code)]

use medload::conllu::{parse_document, Language, Mode, Segment, SegmentMeta, Side};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEPRELS: [&str; 16] = [
    "nsubj", "obj", "aux", "aux:pass", "advmod", "amod", "case", "det", "acl", "acl:relcl",
    "conj", "obl", "nmod", "mark", "ccomp", "punct",
];
pub const UPOS: [&str; 10] = [
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "AUX", "PART", "PUNCT",
];
pub const FEATS: [&str; 7] = [
    "_",
    "VerbForm=Fin",
    "VerbForm=Inf",
    "PronType=Int,Rel",
    "Polarity=Neg",
    "Tense=Past|VerbForm=Fin",
    "Number=Sing",
];

/// One random tree as CoNLL-U token lines; every head points to a node
/// introduced earlier in a random order, so the result is always a tree.
pub fn random_tree_lines(rng: &mut ChaCha8Rng, max_len: usize, annotate: bool) -> String {
    let n = rng.random_range(1..=max_len);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut heads = vec![0usize; n];
    for k in 1..n {
        heads[order[k]] = order[rng.random_range(0..k)] + 1;
    }
    let mut out = String::new();
    for (i, &head) in heads.iter().enumerate() {
        let upos = UPOS[rng.random_range(0..UPOS.len())];
        let deprel = if head == 0 {
            "root"
        } else {
            DEPRELS[rng.random_range(0..DEPRELS.len())]
        };
        let feats = FEATS[rng.random_range(0..FEATS.len())];
        let w = rng.random_range(0..6);
        let misc = if annotate {
            let a: f64 = rng.random_range(0.1..8.0);
            let b: f64 = rng.random_range(0.1..8.0);
            format!("Srp={:.4}|SrpSub={:.4},{:.4}|MtSrp={:.4}", a + b, a, b, b)
        } else {
            "_".to_string()
        };
        out.push_str(&format!(
            "{}\tw{w}\tl{w}\t{upos}\t_\t{feats}\t{head}\t{deprel}\t_\t{misc}\n",
            i + 1
        ));
    }
    out
}

/// A document of `segments` random segments with up to three sentences each.
pub fn random_document_text(seed: u64, segments: usize, annotate: bool) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("# newdoc id = d1\n");
    for s in 1..=segments {
        out.push_str(&format!("# seg_id = s{s}\n"));
        for _ in 0..rng.random_range(1..=3) {
            out.push_str(&random_tree_lines(&mut rng, 9, annotate));
            out.push('\n');
        }
    }
    out
}

pub fn meta(language: Language) -> SegmentMeta {
    SegmentMeta {
        side: Side::Tgt,
        language,
        mode: Mode::Written,
    }
}

pub fn random_segment(seed: u64, language: Language) -> Segment {
    let doc = parse_document(&random_document_text(seed, 1, false), meta(language))
        .expect("generated trees are valid");
    doc.segments.into_iter().next().unwrap()
}

/// `(reference, hypothesis, bleu)` rows of the reference sentence-BLEU fixture.
pub fn bleu_fixture() -> Vec<(String, String, f64)> {
    let text = include_str!("../fixtures/sentence_bleu_reference.tsv");
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            (c[0].to_string(), c[1].to_string(), c[2].parse().unwrap())
        })
        .collect()
}

pub fn words(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

/// Column-major values as a matrix at `stage`, one document per `per_doc` rows.
pub fn matrix_from_columns(
    names: &[&str],
    columns: &[Vec<f64>],
    per_doc: usize,
    stage: medload::matrix::Stage,
) -> medload::matrix::FeatureMatrix {
    use medload::matrix::{FeatureMatrix, RowMeta};
    let mut m = FeatureMatrix::new(names.iter().map(|s| s.to_string()).collect(), stage);
    for i in 0..columns[0].len() {
        let meta = RowMeta {
            id: format!("d{}:s{i}", i / per_doc),
            group: format!("d{}", i / per_doc),
            word_count: 10,
            n_sentences: 1,
        };
        m.push(meta, columns.iter().map(|c| c[i]).collect()).unwrap();
    }
    m
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect()
}

pub fn lognormal_vec(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Vec<f64> {
    normal_vec(rng, n).into_iter().map(|z| (sigma * z).exp()).collect()
}
