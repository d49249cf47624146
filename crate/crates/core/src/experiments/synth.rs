//! Synthetic corpora with planted effects.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ExperimentError, ScoreRow, SyntheticConfig};
use crate::conllu::LanguagePair;
use crate::difficulty::{normalization_of, DIFFICULTY_NAMES};
use crate::matrix::{row_id, FeatureMatrix, Normalization, RowMeta, Stage};
use crate::translationese::REGISTRY;

fn raw_value(v: f64, kind: Normalization, meta: &RowMeta) -> f64 {
    match kind {
        Normalization::PerWord => v * meta.word_count as f64,
        Normalization::PerSentenceAverage => v * meta.n_sentences as f64,
        Normalization::None => v,
    }
}

fn random_meta(rng: &mut ChaCha8Rng, doc: &str, seg: usize) -> RowMeta {
    RowMeta {
        id: row_id(doc, &format!("s{seg}")),
        group: doc.to_string(),
        word_count: rng.random_range(8..=40),
        n_sentences: rng.random_range(1..=3),
    }
}

/// Raw translationese matrices for originals and translations. Half the
/// documents are translations, whose `shifted` features have their latent
/// normal variable moved by `shift` standard deviations. Returns the
/// matrices and the shifted names.
pub fn synthetic_translationese(
    cfg: &SyntheticConfig,
    seed: u64,
) -> (FeatureMatrix, FeatureMatrix, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = REGISTRY.iter().map(|s| s.name.to_string()).collect();
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.shuffle(&mut rng);
    let shifted: Vec<usize> = order[..cfg.shifted.min(names.len())].to_vec();
    let mu: Vec<f64> = names.iter().map(|_| rng.random_range(-3.0..0.0)).collect();
    let mut org = FeatureMatrix::new(names.clone(), Stage::Raw);
    let mut tgt = FeatureMatrix::new(names.clone(), Stage::Raw);
    for d in 0..cfg.docs {
        let translated = d >= cfg.docs / 2;
        let doc = format!("{}{d:04}", if translated { "t" } else { "o" });
        for s in 1..=cfg.segments_per_doc {
            let meta = random_meta(&mut rng, &doc, s);
            let values = REGISTRY
                .iter()
                .enumerate()
                .map(|(j, spec)| {
                    let mut z: f64 = rng.sample(StandardNormal);
                    if translated && shifted.contains(&j) {
                        z += cfg.shift;
                    }
                    raw_value((mu[j] + 0.4 * z).exp(), spec.normalization, &meta)
                })
                .collect();
            let m = if translated { &mut tgt } else { &mut org };
            m.push(meta, values).expect("fixed width");
        }
    }
    let mut shifted_names: Vec<String> = shifted.iter().map(|&j| names[j].clone()).collect();
    shifted_names.sort();
    (org, tgt, shifted_names)
}

/// Features driving the synthetic score: one source and two transfer features.
pub const PLANTED_DIFFICULTY: [&str; 3] = ["src_gpt_AvS", "mt_AvS", "tot_entropy"];

/// Raw difficulty matrix over translated segments and translatedness
/// scores equal to a logistic function of the planted latent variables plus
/// noise. Two percent of `bleu` values are missing.
pub fn synthetic_difficulty(cfg: &SyntheticConfig, seed: u64) -> (FeatureMatrix, Vec<ScoreRow>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = DIFFICULTY_NAMES.iter().map(|s| s.to_string()).collect();
    let mu: Vec<f64> = names.iter().map(|_| rng.random_range(-1.0..2.0)).collect();
    let mut m = FeatureMatrix::new(names.clone(), Stage::Raw);
    let mut scores = Vec::new();
    let docs = (cfg.docs / 2).max(1);
    for d in 0..docs {
        let doc = format!("t{d:04}");
        for s in 1..=cfg.segments_per_doc {
            let meta = random_meta(&mut rng, &doc, s);
            let z: Vec<f64> = names.iter().map(|_| rng.sample(StandardNormal)).collect();
            let mut latent = 0.0;
            let values = names
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    if PLANTED_DIFFICULTY.contains(&name.as_str()) {
                        latent += z[j] / (PLANTED_DIFFICULTY.len() as f64).sqrt();
                    }
                    if name == "bleu" && rng.random::<f64>() < 0.02 {
                        return f64::NAN;
                    }
                    raw_value((mu[j] + 0.4 * z[j]).exp(), normalization_of(name), &meta)
                })
                .collect();
            latent += cfg.noise * rng.sample::<f64, _>(StandardNormal);
            scores.push(ScoreRow {
                id: meta.id.clone(),
                group: meta.group.clone(),
                fold: None,
                score: 1.0 / (1.0 + (-latent).exp()),
            });
            m.push(meta, values).expect("fixed width");
        }
    }
    (m, scores)
}

struct Lex {
    dets: [&'static str; 2],
    adjs: [&'static str; 4],
    nouns: [(&'static str, &'static str); 5],
    verbs: [(&'static str, &'static str); 4],
    neg: &'static str,
    pron: &'static str,
}

const EN: Lex = Lex {
    dets: ["the", "a"],
    adjs: ["big", "new", "old", "small"],
    nouns: [
        ("report", "report"),
        ("council", "council"),
        ("member", "member"),
        ("proposal", "proposal"),
        ("Europe", "Europe"),
    ],
    verbs: [
        ("supports", "support"),
        ("rejects", "reject"),
        ("needs", "need"),
        ("changes", "change"),
    ],
    neg: "not",
    pron: "it",
};

const DE: Lex = Lex {
    dets: ["der", "ein"],
    adjs: ["große", "neue", "alte", "kleine"],
    nouns: [
        ("Bericht", "Bericht"),
        ("Rat", "Rat"),
        ("Antrag", "Antrag"),
        ("Vorschlag", "Vorschlag"),
        ("Europa", "Europa"),
    ],
    verbs: [
        ("unterstützt", "unterstützen"),
        ("ablehnt", "ablehnen"),
        ("braucht", "brauchen"),
        ("ändert", "ändern"),
    ],
    neg: "nicht",
    pron: "es",
};

struct Row {
    form: String,
    lemma: String,
    upos: &'static str,
    feats: &'static str,
    head: usize,
    deprel: &'static str,
}

/// One declarative SVO sentence; the shape is fully determined by `choice`
/// so that aligned sentences in both languages have the same length.
fn sentence(lex: &Lex, choice: &[usize; 6]) -> Vec<Row> {
    let [det, adj, subj, verb, obj, variant] = *choice;
    let proper = |i: usize| i == 4;
    let mut rows = Vec::new();
    let noun_upos = |i| if proper(i) { "PROPN" } else { "NOUN" };
    if variant % 3 == 0 {
        rows.push(Row {
            form: lex.pron.into(),
            lemma: lex.pron.into(),
            upos: "PRON",
            feats: "Person=3|PronType=Prs",
            head: 0,
            deprel: "nsubj",
        });
    } else {
        rows.push(Row {
            form: lex.dets[det].into(),
            lemma: lex.dets[det].into(),
            upos: "DET",
            feats: "PronType=Art",
            head: 0,
            deprel: "det",
        });
        rows.push(Row {
            form: lex.adjs[adj].into(),
            lemma: lex.adjs[adj].into(),
            upos: "ADJ",
            feats: "Degree=Pos",
            head: 0,
            deprel: "amod",
        });
        rows.push(Row {
            form: lex.nouns[subj].0.into(),
            lemma: lex.nouns[subj].1.into(),
            upos: noun_upos(subj),
            feats: "Number=Sing",
            head: 0,
            deprel: "nsubj",
        });
    }
    let subj_pos = rows.len();
    if variant % 2 == 1 {
        rows.push(Row {
            form: lex.neg.into(),
            lemma: lex.neg.into(),
            upos: "PART",
            feats: "Polarity=Neg",
            head: 0,
            deprel: "advmod",
        });
    }
    rows.push(Row {
        form: lex.verbs[verb].0.into(),
        lemma: lex.verbs[verb].1.into(),
        upos: "VERB",
        feats: "Mood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin",
        head: 0,
        deprel: "root",
    });
    let verb_pos = rows.len();
    rows.push(Row {
        form: lex.dets[0].into(),
        lemma: lex.dets[0].into(),
        upos: "DET",
        feats: "PronType=Art",
        head: 0,
        deprel: "det",
    });
    rows.push(Row {
        form: lex.nouns[obj].0.into(),
        lemma: lex.nouns[obj].1.into(),
        upos: noun_upos(obj),
        feats: "Number=Sing",
        head: verb_pos,
        deprel: "obj",
    });
    let obj_pos = rows.len();
    rows.push(Row {
        form: ".".into(),
        lemma: ".".into(),
        upos: "PUNCT",
        feats: "_",
        head: verb_pos,
        deprel: "punct",
    });
    for (i, r) in rows.iter_mut().enumerate() {
        let pos = i + 1;
        r.head = match r.deprel {
            "det" if pos + 1 == obj_pos => obj_pos,
            "det" | "amod" => subj_pos,
            "nsubj" | "advmod" => verb_pos,
            _ => r.head,
        };
    }
    rows
}

#[derive(Clone, Copy, PartialEq)]
enum Layer {
    Plain,
    Source,
    Target,
}

fn render(
    out: &mut String,
    rows: &[Row],
    layer: Layer,
    rng: &mut ChaCha8Rng,
) {
    for (i, r) in rows.iter().enumerate() {
        let misc = match layer {
            Layer::Plain => "_".to_string(),
            Layer::Source => {
                let a: f64 = rng.random_range(0.5..6.0);
                let b: f64 = rng.random_range(0.5..6.0);
                format!(
                    "Srp={:.4}|SrpSub={a:.4},{b:.4}|Align={:.3}",
                    a + b,
                    rng.random_range(0.3..1.0)
                )
            }
            Layer::Target => {
                let a: f64 = rng.random_range(0.2..5.0);
                let pred = if rng.random::<f64>() < 0.8 { r.form.as_str() } else { "<unk>" };
                format!("MtSrp={a:.4}|MtSrpSub={a:.4}|Pred={pred}")
            }
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t_\t{}\t{}\t{}\t_\t{misc}",
            i + 1,
            r.form,
            r.lemma,
            r.upos,
            r.feats,
            r.head,
            r.deprel
        );
    }
    out.push('\n');
}

/// Writes a small annotated subcorpus (`org`, `src`, `tgt`, manifest and
/// word links) in the on-disk layout. Sentences are aligned one to one and
/// token to token.
pub fn write_synthetic_corpus(
    dir: &Path,
    lpair: LanguagePair,
    docs: usize,
    segments_per_doc: usize,
    seed: u64,
) -> Result<(), ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (src_lex, tgt_lex) = match lpair {
        LanguagePair::EnDe => (&EN, &DE),
        LanguagePair::DeEn => (&DE, &EN),
    };
    let mut org = String::new();
    let mut src = String::new();
    let mut tgt = String::new();
    let mut manifest = String::from("doc_id\tsrc_seg\ttgt_seg\n");
    let mut links = String::from("doc_id\tsrc_seg\ttgt_seg\tsrc_tok\ttgt_tok\tscore\n");
    let pick = |rng: &mut ChaCha8Rng| -> [usize; 6] {
        [
            rng.random_range(0..2),
            rng.random_range(0..4),
            rng.random_range(0..5),
            rng.random_range(0..4),
            rng.random_range(0..5),
            rng.random_range(0..6),
        ]
    };
    for d in 0..docs {
        let doc = format!("d{d:03}");
        let odoc = format!("o{d:03}");
        let _ = writeln!(src, "# newdoc id = {doc}");
        let _ = writeln!(tgt, "# newdoc id = {doc}");
        let _ = writeln!(org, "# newdoc id = {odoc}");
        for s in 1..=segments_per_doc {
            let seg = format!("s{s}");
            let n_sent = rng.random_range(1..=2);
            let _ = writeln!(manifest, "{doc}\t{seg}\t{seg}");
            let (mut s_off, mut t_off) = (0, 0);
            for k in 0..n_sent {
                let choice = pick(&mut rng);
                let mut tgt_choice = choice;
                // translations lean towards pronoun subjects and negation
                if rng.random::<f64>() < 0.5 {
                    tgt_choice[5] = 3;
                }
                let s_rows = sentence(src_lex, &choice);
                let t_rows = sentence(tgt_lex, &tgt_choice);
                if k == 0 {
                    let _ = writeln!(src, "# seg_id = {seg}");
                    let _ = writeln!(tgt, "# seg_id = {seg}");
                }
                render(&mut src, &s_rows, Layer::Source, &mut rng);
                render(&mut tgt, &t_rows, Layer::Target, &mut rng);
                for i in 0..s_rows.len().min(t_rows.len()) {
                    let score: f64 = rng.random_range(0.5..1.0);
                    let _ = writeln!(
                        links,
                        "{doc}\t{seg}\t{seg}\t{}\t{}\t{score:.3}",
                        s_off + i + 1,
                        t_off + i + 1
                    );
                }
                s_off += s_rows.len();
                t_off += t_rows.len();
            }
            let _ = writeln!(org, "# seg_id = {seg}");
            for _ in 0..n_sent {
                let choice = pick(&mut rng);
                render(&mut org, &sentence(tgt_lex, &choice), Layer::Plain, &mut rng);
            }
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    for (name, text) in [
        ("org.conllu", org),
        ("src.conllu", src),
        ("tgt.conllu", tgt),
        ("manifest.tsv", manifest),
        ("links.tsv", links),
    ] {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| ExperimentError::io(&p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{CorpusLayout, Mode};

    #[test]
    fn corpus_round_trips_through_the_loader() {
        let dir = tempfile::tempdir().unwrap();
        write_synthetic_corpus(dir.path(), LanguagePair::EnDe, 3, 4, 1).unwrap();
        let c = CorpusLayout::new(dir.path(), Mode::Written, LanguagePair::EnDe)
            .load()
            .unwrap();
        assert_eq!(c.pairs.len(), 12);
        assert_eq!(c.originals.len(), 12);
        assert!(c.pairs.iter().all(|p| !p.links.is_empty()));
        let t = &c.pairs[0].target.sentences[0].tokens[0];
        assert!(t.annotations.mt_surprisal.is_some() && t.annotations.pred_form.is_some());
    }

    #[test]
    fn planted_shift_is_visible() {
        let cfg = SyntheticConfig {
            docs: 20,
            segments_per_doc: 5,
            ..SyntheticConfig::default()
        };
        let (org, tgt, shifted) = synthetic_translationese(&cfg, 3);
        assert_eq!((org.n_rows(), tgt.n_rows(), shifted.len()), (50, 50, 5));
        let (d, s) = synthetic_difficulty(&cfg, 3);
        assert_eq!((d.n_rows(), s.len()), (50, 50));
        assert!(s.iter().all(|r| r.score > 0.0 && r.score < 1.0));
    }
}
