use crate::conllu::{Language, Segment, Sentence, Token};

use super::{Lexicon, TranslationeseError};

pub fn count_deprel(segment: &Segment, relations: &[&str]) -> usize {
    segment
        .tokens()
        .filter(|t| relations.contains(&t.deprel.as_str()))
        .count()
}

pub fn count_upos(segment: &Segment, tags: &[&str]) -> usize {
    segment
        .tokens()
        .filter(|t| tags.contains(&t.upos.as_str()))
        .count()
}

/// Tokens whose `key` feature contains `value`, optionally restricted by upos.
pub fn count_morph(segment: &Segment, key: &str, value: &str, upos: Option<&[&str]>) -> usize {
    segment
        .tokens()
        .filter(|t| t.feats.has_value(key, value))
        .filter(|t| upos.is_none_or(|u| u.contains(&t.upos.as_str())))
        .count()
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn lemma_or_form_in(t: &Token, list: &[String]) -> bool {
    let (l, f) = (lower(&t.lemma), lower(&t.form));
    list.iter().any(|x| *x == l || *x == f)
}

/// A sentence not closed by a question mark.
pub fn is_declarative(sentence: &Sentence) -> bool {
    sentence
        .tokens
        .iter()
        .rev()
        .find(|t| t.is_punct())
        .is_none_or(|t| !t.form.contains('?'))
}

pub fn advmod_excluding_neg(segment: &Segment) -> usize {
    segment
        .tokens()
        .filter(|t| t.deprel == "advmod" && !t.feats.any_value("Neg"))
        .count()
}

/// `advmod` dependents of verbs and auxiliaries.
pub fn advmod_verb(segment: &Segment) -> usize {
    segment
        .sentences
        .iter()
        .map(|s| {
            (0..s.len())
                .filter(|&i| s.tokens[i].deprel == "advmod")
                .filter(|&i| {
                    s.head_of(i)
                        .is_some_and(|h| matches!(s.tokens[h].upos.as_str(), "VERB" | "AUX"))
                })
                .count()
        })
        .sum()
}

/// Mean number of edges from the root to each non-root token; 0 for a single token.
pub fn mhd(sentence: &Sentence) -> f64 {
    let n = sentence.len();
    if n < 2 {
        return 0.0;
    }
    let total: usize = (0..n).map(|i| sentence.depth(i)).sum();
    total as f64 / (n - 1) as f64
}

const CORE_ARGS: [&str; 3] = ["nsubj", "obj", "iobj"];

/// Share of nominal core arguments among all core arguments.
pub fn nnargs(segment: &Segment) -> f64 {
    let args: Vec<&Token> = segment
        .tokens()
        .filter(|t| CORE_ARGS.contains(&t.deprel.as_str()))
        .collect();
    if args.is_empty() {
        return 0.0;
    }
    let nominal = args
        .iter()
        .filter(|t| matches!(t.upos.as_str(), "NOUN" | "PROPN"))
        .count();
    nominal as f64 / args.len() as f64
}

const COMMA_WINDOW: usize = 3;

/// Relative pronouns in a declarative sentence.
pub fn relcl(sentence: &Sentence, language: Language, lexicon: &Lexicon) -> usize {
    if !is_declarative(sentence) {
        return 0;
    }
    let toks = &sentence.tokens;
    match language {
        Language::En => (0..toks.len())
            .filter(|&i| {
                let t = &toks[i];
                t.upos == "PRON"
                    && lexicon.relative_pronouns.contains(&lower(&t.form))
                    && sentence
                        .head_of(i)
                        .is_some_and(|h| toks[h].deprel == "acl:relcl")
            })
            .count(),
        Language::De => {
            let commas: Vec<usize> = (0..toks.len()).filter(|&i| toks[i].form == ",").collect();
            (0..toks.len())
                .filter(|&i| {
                    let t = &toks[i];
                    let lemma = lower(&t.lemma);
                    t.upos == "PRON"
                        && t.feats.has_value("PronType", "Rel")
                        && (lemma_or_form_in(t, &lexicon.relative_pronouns)
                            || lemma.contains("wo"))
                        && commas.iter().any(|&c| c.abs_diff(i) <= COMMA_WINDOW)
                })
                .count()
        }
    }
}

/// Occurrences of lexicon items as contiguous lemma (or form) sequences,
/// counted at most once per start position.
pub fn lexicon_markers(segment: &Segment, items: &[Vec<String>]) -> Result<usize, TranslationeseError> {
    if items.is_empty() || items.iter().all(|i| i.is_empty()) {
        return Err(TranslationeseError::EmptyLexicon("epist"));
    }
    let mut count = 0;
    for s in &segment.sentences {
        let lemmas: Vec<String> = s.tokens.iter().map(|t| lower(&t.lemma)).collect();
        let forms: Vec<String> = s.tokens.iter().map(|t| lower(&t.form)).collect();
        for start in 0..s.len() {
            let hit = items.iter().filter(|i| !i.is_empty()).any(|item| {
                start + item.len() <= s.len()
                    && item.iter().enumerate().all(|(k, w)| {
                        lemmas[start + k] == *w || forms[start + k] == *w
                    })
            });
            if hit {
                count += 1;
            }
        }
    }
    Ok(count)
}

const EN_FUTURE: [&str; 5] = ["will", "shall", "'ll", "wo", "sha"];
const HAVE_WINDOW: usize = 3;

fn has_aux_child(sentence: &Sentence, i: usize) -> bool {
    sentence
        .children(i)
        .iter()
        .any(|&c| sentence.tokens[c].upos == "AUX")
}

fn is_modal_adjective(sentence: &Sentence, i: usize, lexicon: &Lexicon) -> bool {
    let t = &sentence.tokens[i];
    t.upos == "ADJ" && lemma_or_form_in(t, &lexicon.modal_adjectives) && has_aux_child(sentence, i)
}

/// Non-auxiliary "have" followed within a few tokens by an infinitive, with
/// no nominal in between (which would make it a causative).
fn is_modal_have(sentence: &Sentence, i: usize) -> bool {
    let toks = &sentence.tokens;
    if toks[i].upos == "AUX" || lower(&toks[i].lemma) != "have" {
        return false;
    }
    for j in i + 1..toks.len().min(i + 1 + HAVE_WINDOW) {
        let t = &toks[j];
        if matches!(t.upos.as_str(), "NOUN" | "PROPN" | "PRON") {
            return false;
        }
        if t.upos == "VERB" && t.feats.has_value("VerbForm", "Inf") {
            return true;
        }
    }
    false
}

pub fn mpred(segment: &Segment, language: Language, lexicon: &Lexicon) -> usize {
    let mut count = 0;
    for s in &segment.sentences {
        for (i, t) in s.tokens.iter().enumerate() {
            let modal = match language {
                Language::En => {
                    (t.xpos.as_deref() == Some("MD")
                        && !EN_FUTURE.contains(&lower(&t.lemma).as_str())
                        && !EN_FUTURE.contains(&lower(&t.form).as_str()))
                        || is_modal_have(s, i)
                }
                Language::De => {
                    matches!(t.upos.as_str(), "VERB" | "AUX")
                        && lexicon.core_modal_verbs.contains(&lower(&t.lemma))
                }
            };
            if modal || is_modal_adjective(s, i, lexicon) {
                count += 1;
            }
        }
    }
    count
}

pub fn ppron(segment: &Segment, lexicon: &Lexicon) -> usize {
    segment
        .tokens()
        .filter(|t| {
            t.upos == "PRON"
                && t.feats.has_key("Person")
                && !t.feats.has_value("Poss", "Yes")
                && lexicon.personal_pronouns.contains(&lower(&t.form))
        })
        .count()
}

/// Tokens carrying a negative polarity value, or a negation lemma.
pub fn negs(segment: &Segment) -> usize {
    segment
        .tokens()
        .filter(|t| {
            t.feats.any_value("Neg") || matches!(lower(&t.lemma).as_str(), "not" | "nicht" | "n't")
        })
        .count()
}

/// obl / (obl + obj), 0 without either.
pub fn obl_obj(segment: &Segment) -> f64 {
    let obl = count_deprel(segment, &["obl"]);
    let obj = count_deprel(segment, &["obj"]);
    if obl + obj == 0 {
        0.0
    } else {
        obl as f64 / (obl + obj) as f64
    }
}

/// Nominal direct objects following their head.
pub fn vo_noun(segment: &Segment) -> usize {
    segment
        .tokens()
        .filter(|t| t.deprel == "obj" && t.upos == "NOUN" && t.head != 0 && t.id > t.head)
        .count()
}

/// Index of the finite verb of the main clause: the root if finite, else a
/// finite auxiliary or copula attached to it.
fn finite_main_verb(sentence: &Sentence) -> Option<usize> {
    let root = sentence.root();
    if sentence.tokens[root].feats.has_value("VerbForm", "Fin") {
        return Some(root);
    }
    sentence.children(root).iter().copied().find(|&c| {
        let t = &sentence.tokens[c];
        (t.deprel == "cop" || t.deprel == "aux" || t.deprel.starts_with("aux:"))
            && t.feats.has_value("VerbForm", "Fin")
    })
}

/// Fraction of declarative sentences with a finite main verb preceded by
/// exactly one clause-level constituent. German only; 0 otherwise.
pub fn vorfeld(segment: &Segment, language: Language) -> f64 {
    if language != Language::De {
        return 0.0;
    }
    let mut eligible = 0usize;
    let mut v2 = 0usize;
    for s in segment.sentences.iter().filter(|s| is_declarative(s)) {
        let Some(fin) = finite_main_verb(s) else {
            continue;
        };
        eligible += 1;
        let root = s.root();
        let mut heads = s.children(root).to_vec();
        if root != fin {
            heads.push(root);
        }
        let before = heads
            .iter()
            .filter(|&&c| c != fin && c < fin)
            .filter(|&&c| !matches!(s.tokens[c].deprel.as_str(), "punct" | "cc"))
            .count();
        if before == 1 {
            v2 += 1;
        }
    }
    if eligible == 0 {
        0.0
    } else {
        v2 as f64 / eligible as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextualMeasures {
    pub mean_sent_wc: f64,
    pub ttr: f64,
}

/// Token count and lowercased type/token ratio of one sentence.
pub fn sentence_textual(sentence: &Sentence) -> (usize, f64) {
    let n = sentence.len();
    if n == 0 {
        return (0, 0.0);
    }
    let mut types: Vec<String> = sentence.tokens.iter().map(|t| lower(&t.form)).collect();
    types.sort();
    types.dedup();
    (n, types.len() as f64 / n as f64)
}

/// Per-sentence token count and type/token ratio, averaged over sentences.
pub fn textual_measures(segment: &Segment) -> TextualMeasures {
    let n = segment.sentences.len();
    if n == 0 {
        return TextualMeasures { mean_sent_wc: 0.0, ttr: 0.0 };
    }
    let (wc, ttr) = segment
        .sentences
        .iter()
        .map(sentence_textual)
        .fold((0usize, 0.0), |(a, b), (w, t)| (a + w, b + t));
    TextualMeasures {
        mean_sent_wc: wc as f64 / n as f64,
        ttr: ttr / n as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{Mode, Side};

    fn tok(id: usize, form: &str, upos: &str, head: usize, deprel: &str) -> Token {
        Token::new(id, form, &form.to_lowercase(), upos, head, deprel)
    }

    fn sent(tokens: Vec<Token>) -> Sentence {
        Sentence::new(tokens).unwrap()
    }

    fn seg(sentences: Vec<Sentence>, language: Language) -> Segment {
        Segment {
            doc_id: "d".into(),
            seg_id: "s".into(),
            side: Side::Tgt,
            language,
            mode: Mode::Written,
            sentences,
        }
    }

    fn en(sentences: Vec<Sentence>) -> Segment {
        seg(sentences, Language::En)
    }

    #[test]
    fn deprel_counts_are_exact() {
        let s = en(vec![sent(vec![
            tok(1, "it", "PRON", 3, "nsubj:pass"),
            tok(2, "was", "AUX", 3, "aux:pass"),
            tok(3, "seen", "VERB", 0, "root"),
            tok(4, "has", "AUX", 3, "aux"),
        ])]);
        assert_eq!(count_deprel(&s, &["aux:pass"]), 1);
        assert_eq!(count_deprel(&s, &["aux"]), 1);
        assert_eq!(count_deprel(&s, &["nsubj"]), 0);
        assert_eq!(count_deprel(&s, &[]), 0);
    }

    #[test]
    fn morph_multi_values() {
        let s = en(vec![sent(vec![
            tok(1, "who", "PRON", 2, "nsubj").with_feats("PronType=Int,Rel"),
            tok(2, "runs", "VERB", 0, "root").with_feats("VerbForm=Fin"),
            tok(3, "ran", "VERB", 2, "conj").with_feats("Tense=Past|VerbForm=Fin"),
        ])]);
        assert_eq!(count_morph(&s, "PronType", "Rel", None), 1);
        assert_eq!(count_morph(&s, "VerbForm", "Fin", None), 2);
        assert_eq!(count_morph(&s, "Tense", "Past", Some(&["NOUN"])), 0);
        assert_eq!(count_morph(&s, "Mood", "Ind", None), 0);
    }

    #[test]
    fn advmod_negatives() {
        let s = en(vec![sent(vec![
            tok(1, "not", "PART", 4, "advmod").with_feats("Polarity=Neg"),
            tok(2, "very", "ADV", 3, "advmod"),
            tok(3, "quickly", "ADV", 4, "advmod"),
            tok(4, "ran", "VERB", 0, "root"),
        ])]);
        assert_eq!(advmod_excluding_neg(&s), 2);
        assert_eq!(advmod_verb(&s), 2);
        assert_eq!(negs(&s), 1);
    }

    #[test]
    fn mean_hierarchical_distance() {
        let chain = sent(vec![
            tok(1, "a", "X", 0, "root"),
            tok(2, "b", "X", 1, "dep"),
            tok(3, "c", "X", 2, "dep"),
        ]);
        assert_eq!(mhd(&chain), 1.5);
        let star = sent(vec![
            tok(1, "a", "X", 2, "dep"),
            tok(2, "b", "X", 0, "root"),
            tok(3, "c", "X", 2, "dep"),
            tok(4, "d", "X", 2, "dep"),
        ]);
        assert_eq!(mhd(&star), 1.0);
        assert_eq!(mhd(&sent(vec![tok(1, "a", "X", 0, "root")])), 0.0);
    }

    #[test]
    fn nominal_argument_ratio() {
        let s = en(vec![sent(vec![
            tok(1, "Anna", "PROPN", 2, "nsubj"),
            tok(2, "gave", "VERB", 0, "root"),
            tok(3, "him", "PRON", 2, "iobj"),
            tok(4, "it", "PRON", 2, "obj"),
            tok(5, "books", "NOUN", 7, "nsubj"),
            tok(6, ",", "PUNCT", 2, "punct"),
            tok(7, "fall", "VERB", 2, "parataxis"),
        ])]);
        assert_eq!(nnargs(&s), 0.5);
        let none = en(vec![sent(vec![tok(1, "go", "VERB", 0, "root")])]);
        assert_eq!(nnargs(&none), 0.0);
    }

    fn the_cat_that_slept() -> Sentence {
        sent(vec![
            tok(1, "the", "DET", 2, "det"),
            tok(2, "cat", "NOUN", 0, "root"),
            tok(3, "that", "PRON", 4, "nsubj"),
            tok(4, "slept", "VERB", 2, "acl:relcl"),
        ])
    }

    #[test]
    fn english_relative_clause() {
        let lex = Lexicon::bundled(Language::En);
        assert_eq!(relcl(&the_cat_that_slept(), Language::En, &lex), 1);
        let mut q = the_cat_that_slept().tokens;
        q.push(tok(5, "?", "PUNCT", 2, "punct"));
        assert_eq!(relcl(&sent(q), Language::En, &lex), 0);
        // the German rule needs PronType=Rel and a comma
        assert_eq!(relcl(&the_cat_that_slept(), Language::De, &Lexicon::bundled(Language::De)), 0);
    }

    fn german_relative(gap: usize) -> Sentence {
        // Mann , x x x der kam
        let mut toks = vec![tok(1, "Mann", "NOUN", 0, "root"), tok(2, ",", "PUNCT", 1, "punct")];
        for k in 0..gap {
            toks.push(tok(3 + k, "x", "ADV", 1, "advmod"));
        }
        let rel = 3 + gap;
        toks.push(Token::new(rel, "der", "der", "PRON", rel + 1, "nsubj").with_feats("PronType=Rel"));
        toks.push(tok(rel + 1, "kam", "VERB", 1, "acl:relcl"));
        sent(toks)
    }

    #[test]
    fn german_relative_comma_window() {
        let lex = Lexicon::bundled(Language::De);
        assert_eq!(relcl(&german_relative(0), Language::De, &lex), 1);
        assert_eq!(relcl(&german_relative(2), Language::De, &lex), 1);
        assert_eq!(relcl(&german_relative(3), Language::De, &lex), 0);
        let wo = sent(vec![
            tok(1, "Haus", "NOUN", 0, "root"),
            tok(2, ",", "PUNCT", 1, "punct"),
            Token::new(3, "worin", "worin", "PRON", 4, "obl").with_feats("PronType=Int,Rel"),
            tok(4, "wohnt", "VERB", 1, "acl:relcl"),
        ]);
        assert_eq!(relcl(&wo, Language::De, &lex), 1);
    }

    #[test]
    fn epistemic_markers() {
        let lex = Lexicon::bundled(Language::En);
        let s = en(vec![sent(vec![
            tok(1, "at", "ADP", 2, "case"),
            tok(2, "least", "ADJ", 4, "obl"),
            tok(3, "perhaps", "ADV", 4, "advmod"),
            tok(4, "go", "VERB", 0, "root"),
        ])]);
        assert_eq!(lexicon_markers(&s, &lex.epist_items).unwrap(), 2);
        let none = en(vec![sent(vec![tok(1, "go", "VERB", 0, "root")])]);
        assert_eq!(lexicon_markers(&none, &lex.epist_items).unwrap(), 0);
        assert!(lexicon_markers(&none, &[]).is_err());
    }

    #[test]
    fn modal_predicates_english() {
        let lex = Lexicon::bundled(Language::En);
        let must = en(vec![sent(vec![
            tok(1, "we", "PRON", 3, "nsubj"),
            tok(2, "must", "AUX", 3, "aux").with_xpos("MD"),
            tok(3, "go", "VERB", 0, "root"),
            tok(4, "will", "AUX", 3, "aux").with_xpos("MD"),
        ])]);
        assert_eq!(mpred(&must, Language::En, &lex), 1);
        let likely = en(vec![sent(vec![
            tok(1, "it", "PRON", 3, "nsubj"),
            tok(2, "is", "AUX", 3, "cop"),
            tok(3, "likely", "ADJ", 0, "root"),
        ])]);
        assert_eq!(mpred(&likely, Language::En, &lex), 1);
        let have_to = en(vec![sent(vec![
            tok(1, "we", "PRON", 2, "nsubj"),
            tok(2, "have", "VERB", 0, "root"),
            tok(3, "to", "PART", 4, "mark"),
            tok(4, "go", "VERB", 2, "xcomp").with_feats("VerbForm=Inf"),
        ])]);
        assert_eq!(mpred(&have_to, Language::En, &lex), 1);
        let causative = en(vec![sent(vec![
            tok(1, "we", "PRON", 2, "nsubj"),
            tok(2, "have", "VERB", 0, "root"),
            tok(3, "him", "PRON", 2, "obj"),
            tok(4, "go", "VERB", 2, "xcomp").with_feats("VerbForm=Inf"),
        ])]);
        assert_eq!(mpred(&causative, Language::En, &lex), 0);
    }

    #[test]
    fn modal_predicates_german() {
        let lex = Lexicon::bundled(Language::De);
        let s = seg(
            vec![sent(vec![
                tok(1, "wir", "PRON", 2, "nsubj"),
                Token::new(2, "können", "können", "AUX", 3, "aux").with_feats("VerbForm=Fin"),
                tok(3, "gehen", "VERB", 0, "root"),
            ])],
            Language::De,
        );
        assert_eq!(mpred(&s, Language::De, &lex), 1);
    }

    #[test]
    fn personal_pronouns() {
        let lex = Lexicon::bundled(Language::En);
        let s = en(vec![sent(vec![
            tok(1, "he", "PRON", 3, "nsubj").with_feats("Person=3"),
            tok(2, "his", "PRON", 3, "obj").with_feats("Person=3|Poss=Yes"),
            tok(3, "saw", "VERB", 0, "root"),
            tok(4, "that", "PRON", 3, "obj").with_feats("PronType=Dem"),
        ])]);
        assert_eq!(ppron(&s, &lex), 1);
    }

    #[test]
    fn object_measures() {
        let s = en(vec![sent(vec![
            tok(1, "we", "PRON", 2, "nsubj"),
            tok(2, "read", "VERB", 0, "root"),
            tok(3, "books", "NOUN", 2, "obj"),
            tok(4, "home", "NOUN", 2, "obl"),
            tok(5, "today", "NOUN", 2, "obl"),
        ])]);
        assert_eq!(vo_noun(&s), 1);
        assert!((obl_obj(&s) - 2.0 / 3.0).abs() < 1e-12);
        let empty = en(vec![sent(vec![tok(1, "go", "VERB", 0, "root")])]);
        assert_eq!(obl_obj(&empty), 0.0);
    }

    #[test]
    fn verb_second() {
        let fin = |id, form: &str, head, deprel: &str| {
            Token::new(id, form, form, "VERB", head, deprel).with_feats("VerbForm=Fin")
        };
        // Heute kam er .
        let v2 = sent(vec![
            tok(1, "Heute", "ADV", 2, "advmod"),
            fin(2, "kam", 0, "root"),
            tok(3, "er", "PRON", 2, "nsubj"),
            tok(4, ".", "PUNCT", 2, "punct"),
        ]);
        // Heute er kam .
        let v3 = sent(vec![
            tok(1, "Heute", "ADV", 3, "advmod"),
            tok(2, "er", "PRON", 3, "nsubj"),
            fin(3, "kam", 0, "root"),
            tok(4, ".", "PUNCT", 3, "punct"),
        ]);
        let s = seg(vec![v2.clone(), v3], Language::De);
        assert_eq!(vorfeld(&s, Language::De), 0.5);
        assert_eq!(vorfeld(&s, Language::En), 0.0);
        // Er hat es gesehen : the finite auxiliary carries the verb-second slot
        let aux = sent(vec![
            tok(1, "Er", "PRON", 4, "nsubj"),
            Token::new(2, "hat", "haben", "AUX", 4, "aux").with_feats("VerbForm=Fin"),
            tok(3, "es", "PRON", 4, "obj"),
            Token::new(4, "gesehen", "sehen", "VERB", 0, "root").with_feats("VerbForm=Part"),
        ]);
        assert_eq!(vorfeld(&seg(vec![aux], Language::De), Language::De), 1.0);
    }

    #[test]
    fn textual() {
        let words = ["a", "b", "c", "d", "e", "f", "g", "h", "a", "b"];
        let toks = words
            .iter()
            .enumerate()
            .map(|(i, w)| tok(i + 1, w, "X", if i == 0 { 0 } else { 1 }, if i == 0 { "root" } else { "dep" }))
            .collect();
        let m = textual_measures(&en(vec![sent(toks)]));
        assert_eq!(m.mean_sent_wc, 10.0);
        assert_eq!(m.ttr, 0.8);
        let mk = |n: usize| {
            sent((1..=n).map(|i| tok(i, "x", "X", if i == 1 { 0 } else { 1 }, "dep")).collect())
        };
        let m = textual_measures(&en(vec![mk(4), mk(6)]));
        assert_eq!(m.mean_sent_wc, 5.0);
        assert!((m.ttr - (0.25 + 1.0 / 6.0) / 2.0).abs() < 1e-12);
    }
}
