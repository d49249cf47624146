use std::collections::{BTreeMap, HashMap, HashSet};

use super::{CorpusError, Document, Segment, SegmentPair, SubtreeLink, WordLink};

/// One manifest row mapping a source segment onto a target segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub doc_id: String,
    pub src_seg: String,
    pub tgt_seg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkRow {
    pub doc_id: String,
    pub src_seg: String,
    pub tgt_seg: String,
    pub link: WordLink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeLinkRow {
    pub doc_id: String,
    pub src_seg: String,
    pub tgt_seg: String,
    pub link: SubtreeLink,
}

/// Pairs plus the segments that no manifest row mentions.
#[derive(Debug, Clone, Default)]
pub struct ParallelLoad {
    pub pairs: Vec<SegmentPair>,
    pub unmatched_src: Vec<(String, String)>,
    pub unmatched_tgt: Vec<(String, String)>,
}

fn read_rows<'a>(
    text: &'a str,
    path: &str,
    header: &[&str],
) -> Result<Vec<(usize, Vec<&'a str>)>, CorpusError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !saw_header {
            saw_header = true;
            if cols == header {
                continue;
            }
            return Err(CorpusError::Table {
                path: path.to_string(),
                line: idx + 1,
                message: format!("expected header {:?}", header.join("\t")),
            });
        }
        if cols.len() != header.len() {
            return Err(CorpusError::Table {
                path: path.to_string(),
                line: idx + 1,
                message: format!("expected {} columns, found {}", header.len(), cols.len()),
            });
        }
        rows.push((idx + 1, cols));
    }
    Ok(rows)
}

fn parse_num<T: std::str::FromStr>(v: &str, path: &str, line: usize) -> Result<T, CorpusError> {
    v.parse().map_err(|_| CorpusError::Table {
        path: path.to_string(),
        line,
        message: format!("invalid number {v:?}"),
    })
}

/// Reads a manifest TSV with header `doc_id  src_seg  tgt_seg`.
pub fn read_manifest(text: &str, path: &str) -> Result<Vec<ManifestRow>, CorpusError> {
    read_rows(text, path, &["doc_id", "src_seg", "tgt_seg"])?
        .into_iter()
        .map(|(_, c)| {
            Ok(ManifestRow {
                doc_id: c[0].to_string(),
                src_seg: c[1].to_string(),
                tgt_seg: c[2].to_string(),
            })
        })
        .collect()
}

/// Reads a word-link sidecar TSV (`doc_id src_seg tgt_seg src_tok tgt_tok score`).
pub fn read_links(text: &str, path: &str) -> Result<Vec<LinkRow>, CorpusError> {
    read_rows(
        text,
        path,
        &["doc_id", "src_seg", "tgt_seg", "src_tok", "tgt_tok", "score"],
    )?
    .into_iter()
    .map(|(line, c)| {
        Ok(LinkRow {
            doc_id: c[0].to_string(),
            src_seg: c[1].to_string(),
            tgt_seg: c[2].to_string(),
            link: WordLink {
                src: parse_num(c[3], path, line)?,
                tgt: parse_num(c[4], path, line)?,
                score: parse_num(c[5], path, line)?,
            },
        })
    })
    .collect()
}

/// Reads a subtree-link sidecar TSV (`doc_id src_seg tgt_seg src_head tgt_head cosine`).
pub fn read_subtree_links(text: &str, path: &str) -> Result<Vec<SubtreeLinkRow>, CorpusError> {
    read_rows(
        text,
        path,
        &["doc_id", "src_seg", "tgt_seg", "src_head", "tgt_head", "cosine"],
    )?
    .into_iter()
    .map(|(line, c)| {
        Ok(SubtreeLinkRow {
            doc_id: c[0].to_string(),
            src_seg: c[1].to_string(),
            tgt_seg: c[2].to_string(),
            link: SubtreeLink {
                src_head: parse_num(c[3], path, line)?,
                tgt_head: parse_num(c[4], path, line)?,
                cosine: parse_num(c[5], path, line)?,
            },
        })
    })
    .collect()
}

type PairKey = (String, String, String);

/// Builds segment pairs from a manifest; word and subtree links are attached
/// by `(doc_id, src_seg, tgt_seg)`.
pub fn load_parallel(
    src_doc: &Document,
    tgt_doc: &Document,
    manifest: &[ManifestRow],
    links: &[LinkRow],
    subtree_links: &[SubtreeLinkRow],
) -> Result<ParallelLoad, CorpusError> {
    let index = |doc: &Document| -> HashMap<(String, String), usize> {
        doc.segments
            .iter()
            .enumerate()
            .map(|(i, s)| (s.key(), i))
            .collect()
    };
    let src_index = index(src_doc);
    let tgt_index = index(tgt_doc);

    let mut missing = Vec::new();
    for row in manifest {
        let s = (row.doc_id.clone(), row.src_seg.clone());
        let t = (row.doc_id.clone(), row.tgt_seg.clone());
        if !src_index.contains_key(&s) && !missing.contains(&s) {
            missing.push(s);
        }
        if !tgt_index.contains_key(&t) && !missing.contains(&t) {
            missing.push(t);
        }
    }
    if !missing.is_empty() {
        return Err(CorpusError::UnknownSegments(missing));
    }

    let mut by_src: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    let mut by_tgt: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, row) in manifest.iter().enumerate() {
        by_src
            .entry((row.doc_id.clone(), row.src_seg.clone()))
            .or_default()
            .push(i + 1);
        by_tgt
            .entry((row.doc_id.clone(), row.tgt_seg.clone()))
            .or_default()
            .push(i + 1);
    }
    let mut shared: Vec<usize> = by_src
        .values()
        .chain(by_tgt.values())
        .filter(|rows| rows.len() > 1)
        .flatten()
        .copied()
        .collect();
    if !shared.is_empty() {
        shared.sort_unstable();
        shared.dedup();
        return Err(CorpusError::ManyToMany { rows: shared });
    }

    let mut word_links: HashMap<PairKey, Vec<WordLink>> = HashMap::new();
    for l in links {
        word_links
            .entry((l.doc_id.clone(), l.src_seg.clone(), l.tgt_seg.clone()))
            .or_default()
            .push(l.link);
    }
    let mut tree_links: HashMap<PairKey, Vec<SubtreeLink>> = HashMap::new();
    for l in subtree_links {
        tree_links
            .entry((l.doc_id.clone(), l.src_seg.clone(), l.tgt_seg.clone()))
            .or_default()
            .push(l.link);
    }

    let mut pairs = Vec::with_capacity(manifest.len());
    for row in manifest {
        let key = (row.doc_id.clone(), row.src_seg.clone(), row.tgt_seg.clone());
        let source = &src_doc.segments[src_index[&(row.doc_id.clone(), row.src_seg.clone())]];
        let target = &tgt_doc.segments[tgt_index[&(row.doc_id.clone(), row.tgt_seg.clone())]];
        let links = word_links.remove(&key).unwrap_or_default();
        let subtree_links = tree_links.remove(&key).unwrap_or_default();
        check_links(source, target, &links, &subtree_links, &key)?;
        pairs.push(SegmentPair {
            source: source.clone(),
            target: target.clone(),
            links,
            subtree_links,
        });
    }
    if let Some(key) = word_links.keys().chain(tree_links.keys()).min() {
        return Err(CorpusError::BadLink(format!(
            "for ({},{},{}) which is not in the manifest",
            key.0, key.1, key.2
        )));
    }

    let src_used: HashSet<_> = by_src.keys().cloned().collect();
    let tgt_used: HashSet<_> = by_tgt.keys().cloned().collect();
    let unmatched = |doc: &Document, used: &HashSet<(String, String)>| {
        doc.segments
            .iter()
            .map(Segment::key)
            .filter(|k| !used.contains(k))
            .collect::<Vec<_>>()
    };
    Ok(ParallelLoad {
        pairs,
        unmatched_src: unmatched(src_doc, &src_used),
        unmatched_tgt: unmatched(tgt_doc, &tgt_used),
    })
}

fn check_links(
    source: &Segment,
    target: &Segment,
    links: &[WordLink],
    subtree_links: &[SubtreeLink],
    key: &PairKey,
) -> Result<(), CorpusError> {
    let (ns, nt) = (source.token_count(), target.token_count());
    let bad = |what: String| {
        CorpusError::BadLink(format!("in ({},{},{}): {what}", key.0, key.1, key.2))
    };
    for l in links {
        if l.src == 0 || l.src > ns || l.tgt == 0 || l.tgt > nt {
            return Err(bad(format!(
                "token link {}-{} outside segments of {ns} and {nt} tokens",
                l.src, l.tgt
            )));
        }
        if !(0.0..=1.0).contains(&l.score) {
            return Err(bad(format!("score {} outside [0, 1]", l.score)));
        }
    }
    for l in subtree_links {
        if l.src_head == 0 || l.src_head > ns || l.tgt_head == 0 || l.tgt_head > nt {
            return Err(bad(format!(
                "subtree link {}-{} outside segments of {ns} and {nt} tokens",
                l.src_head, l.tgt_head
            )));
        }
        if !(-1.0..=1.0).contains(&l.cosine) {
            return Err(bad(format!("cosine {} outside [-1, 1]", l.cosine)));
        }
    }
    Ok(())
}
