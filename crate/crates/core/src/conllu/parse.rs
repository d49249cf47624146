use std::collections::HashSet;
use std::fmt::Write;

use super::types::{validate_tree, Annotations, Features, Misc};
use super::{Document, ParseError, ParseErrorKind, Segment, SegmentMeta, Sentence, Token};

struct PendingSentence {
    first_line: usize,
    comments: Vec<String>,
    tokens: Vec<Token>,
    token_lines: Vec<usize>,
    extra_lines: Vec<(usize, String)>,
}

impl PendingSentence {
    fn new(line: usize) -> Self {
        PendingSentence {
            first_line: line,
            comments: Vec::new(),
            tokens: Vec::new(),
            token_lines: Vec::new(),
            extra_lines: Vec::new(),
        }
    }

    fn is_empty(&self) -> bool {
        self.comments.is_empty() && self.tokens.is_empty() && self.extra_lines.is_empty()
    }
}

struct State {
    meta: SegmentMeta,
    doc_id: Option<String>,
    seen: HashSet<(String, String)>,
    segments: Vec<Segment>,
    /// A `# seg_id` was read and the next sentence opens that segment.
    opening: Option<(String, usize)>,
    side_override: Option<super::Side>,
    lang_override: Option<super::Language>,
    mode_override: Option<super::Mode>,
}

fn comment_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix('=')?;
    Some(rest.trim())
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses a CoNLL-U document into segments with validated dependency trees.
pub fn parse_document(input: &str, meta: SegmentMeta) -> Result<Document, ParseError> {
    let mut state = State {
        meta,
        doc_id: None,
        seen: HashSet::new(),
        segments: Vec::new(),
        opening: None,
        side_override: None,
        lang_override: None,
        mode_override: None,
    };
    let mut pending = PendingSentence::new(1);

    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !pending.is_empty() {
                finish_sentence(&mut state, std::mem::replace(&mut pending, PendingSentence::new(lineno + 1)))?;
            } else {
                pending.first_line = lineno + 1;
            }
            continue;
        }
        if line.starts_with('#') {
            handle_comment(&mut state, line, lineno)?;
            pending.comments.push(line.to_string());
            continue;
        }
        parse_token_line(line, lineno, &mut pending)?;
    }
    if !pending.is_empty() {
        finish_sentence(&mut state, pending)?;
    }
    Ok(Document {
        segments: state.segments,
    })
}

fn handle_comment(state: &mut State, line: &str, lineno: usize) -> Result<(), ParseError> {
    if let Some(v) = comment_value(line, "newdoc id") {
        state.doc_id = Some(v.to_string());
        state.side_override = None;
        state.lang_override = None;
        state.mode_override = None;
    } else if let Some(v) = comment_value(line, "seg_id") {
        state.opening = Some((v.to_string(), lineno));
    } else if let Some(v) = comment_value(line, "side") {
        state.side_override = Some(v.parse().map_err(|_| {
            err(lineno, ParseErrorKind::BadMeta { key: "side".into(), value: v.into() })
        })?);
    } else if let Some(v) = comment_value(line, "lang") {
        state.lang_override = Some(v.parse().map_err(|_| {
            err(lineno, ParseErrorKind::BadMeta { key: "lang".into(), value: v.into() })
        })?);
    } else if let Some(v) = comment_value(line, "mode") {
        state.mode_override = Some(v.parse().map_err(|_| {
            err(lineno, ParseErrorKind::BadMeta { key: "mode".into(), value: v.into() })
        })?);
    }
    Ok(())
}

fn finish_sentence(state: &mut State, pending: PendingSentence) -> Result<(), ParseError> {
    if pending.tokens.is_empty() {
        // comment-only block, e.g. a trailing `# newdoc` before EOF
        if pending.extra_lines.is_empty() {
            return Ok(());
        }
        return Err(err(pending.first_line, ParseErrorKind::NoRoot));
    }
    let n = pending.tokens.len();
    for (t, &line) in pending.tokens.iter().zip(&pending.token_lines) {
        if t.head > n {
            return Err(err(line, ParseErrorKind::HeadOutOfRange { head: t.head, len: n }));
        }
    }
    let first_token_line = pending.token_lines[0];
    validate_tree(&pending.tokens).map_err(|kind| {
        let line = match &kind {
            ParseErrorKind::SelfHead(id) | ParseErrorKind::Cycle(id) => pending.token_lines[id - 1],
            _ => first_token_line,
        };
        err(line, kind)
    })?;
    let sentence = Sentence::from_validated(pending.comments, pending.tokens, pending.extra_lines);

    if let Some((seg_id, seg_line)) = state.opening.take() {
        let doc_id = state
            .doc_id
            .clone()
            .ok_or_else(|| err(seg_line, ParseErrorKind::MissingDocument))?;
        if !state.seen.insert((doc_id.clone(), seg_id.clone())) {
            return Err(err(
                seg_line,
                ParseErrorKind::DuplicateSegment { doc: doc_id, seg: seg_id },
            ));
        }
        state.segments.push(Segment {
            doc_id,
            seg_id,
            side: state.side_override.unwrap_or(state.meta.side),
            language: state.lang_override.unwrap_or(state.meta.language),
            mode: state.mode_override.unwrap_or(state.meta.mode),
            sentences: vec![sentence],
        });
    } else {
        match state.segments.last_mut() {
            Some(seg) if state.doc_id.as_deref() == Some(seg.doc_id.as_str()) => {
                seg.sentences.push(sentence)
            }
            _ => return Err(err(first_token_line, ParseErrorKind::MissingSegment)),
        }
    }
    Ok(())
}

fn parse_token_line(line: &str, lineno: usize, pending: &mut PendingSentence) -> Result<(), ParseError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(err(lineno, ParseErrorKind::Arity(cols.len())));
    }
    let id_col = cols[0];
    if id_col.contains('-') || id_col.contains('.') {
        // multiword range or empty node: kept verbatim, not part of the tree
        let ok = id_col
            .split(['-', '.'])
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
        if !ok {
            return Err(err(lineno, ParseErrorKind::BadId(id_col.into())));
        }
        pending.extra_lines.push((pending.tokens.len(), line.to_string()));
        return Ok(());
    }
    let id: usize = id_col
        .parse()
        .map_err(|_| err(lineno, ParseErrorKind::BadId(id_col.into())))?;
    let expected = pending.tokens.len() + 1;
    if id != expected {
        return Err(err(lineno, ParseErrorKind::IdSequence { expected, found: id }));
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| err(lineno, ParseErrorKind::BadHead(cols[6].into())))?;
    let feats = parse_feats(cols[5]).map_err(|k| err(lineno, k))?;
    let (misc, annotations) = parse_misc(cols[9]).map_err(|k| err(lineno, k))?;
    pending.tokens.push(Token {
        id,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos: cols[3].to_string(),
        xpos: (cols[4] != "_").then(|| cols[4].to_string()),
        feats,
        head,
        deprel: cols[7].to_string(),
        deps: cols[8].to_string(),
        misc,
        annotations,
    });
    pending.token_lines.push(lineno);
    Ok(())
}

fn parse_feats(col: &str) -> Result<Features, ParseErrorKind> {
    if col == "_" {
        return Ok(Features::default());
    }
    col.split('|')
        .map(|item| match item.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(ParseErrorKind::BadFeature(item.to_string())),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Features)
}

fn parse_bits(key: &str, value: &str) -> Result<f64, ParseErrorKind> {
    let v: f64 = value.parse().map_err(|_| ParseErrorKind::BadMisc {
        key: key.into(),
        value: value.into(),
    })?;
    if !v.is_finite() {
        return Err(ParseErrorKind::BadMisc { key: key.into(), value: value.into() });
    }
    if v < 0.0 {
        return Err(ParseErrorKind::NegativeSurprisal { key: key.into(), value: v });
    }
    Ok(v)
}

fn parse_bit_list(key: &str, value: &str) -> Result<Vec<f64>, ParseErrorKind> {
    value.split(',').map(|v| parse_bits(key, v)).collect()
}

fn parse_misc(col: &str) -> Result<(Misc, Annotations), ParseErrorKind> {
    let mut misc = Misc::default();
    let mut ann = Annotations::default();
    if col == "_" {
        return Ok((misc, ann));
    }
    for item in col.split('|') {
        let (key, value) = match item.split_once('=') {
            Some((k, v)) => (k, Some(v)),
            None => (item, None),
        };
        if let Some(v) = value {
            match key {
                "Srp" => ann.src_surprisal = Some(parse_bits(key, v)?),
                "SrpSub" => ann.src_surprisal_subwords = Some(parse_bit_list(key, v)?),
                "MtSrp" => ann.mt_surprisal = Some(parse_bits(key, v)?),
                "MtSrpSub" => ann.mt_surprisal_subwords = Some(parse_bit_list(key, v)?),
                "Align" => {
                    let s: f64 = v.parse().map_err(|_| ParseErrorKind::BadMisc {
                        key: key.into(),
                        value: v.into(),
                    })?;
                    if !(0.0..=1.0).contains(&s) {
                        return Err(ParseErrorKind::AlignRange(s));
                    }
                    ann.align_score = Some(s);
                }
                "Pred" => ann.pred_form = Some(v.to_string()),
                _ => {}
            }
        }
        misc.0.push((key.to_string(), value.map(str::to_string)));
    }
    Ok((misc, ann))
}

/// Serializes a document back to CoNLL-U. Token columns and MISC entries are
/// written from their stored raw text, so valid inputs round-trip unchanged.
pub fn write_document(doc: &Document) -> String {
    let mut out = String::new();
    for seg in &doc.segments {
        for sent in &seg.sentences {
            for c in &sent.comments {
                out.push_str(c);
                out.push('\n');
            }
            let mut extras = sent.extra_lines.iter().peekable();
            for (i, t) in sent.tokens.iter().enumerate() {
                while let Some((_, line)) = extras.next_if(|(pos, _)| *pos == i) {
                    out.push_str(line);
                    out.push('\n');
                }
                write_token(&mut out, t);
            }
            for (_, line) in extras {
                out.push_str(line);
                out.push('\n');
            }
            out.push('\n');
        }
    }
    out
}

fn write_token(out: &mut String, t: &Token) {
    let feats = if t.feats.is_empty() {
        "_".to_string()
    } else {
        t.feats
            .0
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("|")
    };
    let misc = if t.misc.0.is_empty() {
        "_".to_string()
    } else {
        t.misc
            .0
            .iter()
            .map(|(k, v)| match v {
                Some(v) => format!("{k}={v}"),
                None => k.clone(),
            })
            .collect::<Vec<_>>()
            .join("|")
    };
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        t.id,
        t.form,
        t.lemma,
        t.upos,
        t.xpos.as_deref().unwrap_or("_"),
        feats,
        t.head,
        t.deprel,
        t.deps,
        misc
    );
}
