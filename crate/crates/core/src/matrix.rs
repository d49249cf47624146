//! Named, row-labelled feature matrices and their TSV form.
//!
//! Missing values are stored as NaN and written as `NA`.

use std::collections::HashMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

/// How a raw column becomes comparable across segments of different length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Raw count divided by the segment word count.
    PerWord,
    /// Raw value is a sum of per-sentence values; divided by the sentence count.
    PerSentenceAverage,
    None,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::PerWord => "per-word",
            Normalization::PerSentenceAverage => "per-sentence-average",
            Normalization::None => "none",
        }
    }
}

/// Named values for one unit, in a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Normalized,
    Transformed,
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowMeta {
    pub id: String,
    /// Grouping label for cross-validation (the document id).
    pub group: String,
    pub word_count: usize,
    pub n_sentences: usize,
}

/// Row identifier of a segment in every segment-keyed table.
pub fn row_id(doc_id: &str, seg_id: &str) -> String {
    format!("{doc_id}/{seg_id}")
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("row has {found} values, expected {expected}")]
    RowWidth { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<RowMeta>,
    /// Row-major values.
    pub data: Vec<Vec<f64>>,
    pub stage: Stage,
}

const META_COLUMNS: [&str; 4] = ["id", "group", "word_count", "n_sentences"];

impl FeatureMatrix {
    pub fn new(names: Vec<String>, stage: Stage) -> Self {
        FeatureMatrix {
            names,
            rows: Vec::new(),
            data: Vec::new(),
            stage,
        }
    }

    pub fn push(&mut self, meta: RowMeta, values: Vec<f64>) -> Result<(), MatrixError> {
        if values.len() != self.names.len() {
            return Err(MatrixError::RowWidth {
                expected: self.names.len(),
                found: values.len(),
            });
        }
        self.rows.push(meta);
        self.data.push(values);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.iter().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Result<Vec<f64>, MatrixError> {
        self.column_index(name)
            .map(|j| self.column(j))
            .ok_or_else(|| MatrixError::UnknownFeature(name.to_string()))
    }

    pub fn groups(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.group.clone()).collect()
    }

    /// Keeps the named columns in the given order.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, MatrixError> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n.as_ref())
                    .ok_or_else(|| MatrixError::UnknownFeature(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureMatrix {
            names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            rows: self.rows.clone(),
            data: self
                .data
                .iter()
                .map(|r| idx.iter().map(|&j| r[j]).collect())
                .collect(),
            stage: self.stage,
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        FeatureMatrix {
            names: self.names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            data: idx.iter().map(|&i| self.data[i].clone()).collect(),
            stage: self.stage,
        }
    }

    /// Row-wise concatenation; both matrices must share column names.
    pub fn concat(&self, other: &Self) -> Result<Self, MatrixError> {
        let other = other.select_columns(&self.names)?;
        let mut out = self.clone();
        out.rows.extend(other.rows);
        out.data.extend(other.data);
        Ok(out)
    }

    /// Unweighted per-group mean of every column; rows ordered by first appearance.
    pub fn aggregate_by_group(&self) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            members
                .entry(r.group.as_str())
                .or_insert_with(|| {
                    order.push(r.group.clone());
                    Vec::new()
                })
                .push(i);
        }
        let mut out = FeatureMatrix::new(self.names.clone(), self.stage);
        for g in order {
            let idx = &members[g.as_str()];
            let mut values = vec![0.0; self.n_cols()];
            for (j, v) in values.iter_mut().enumerate() {
                let present: Vec<f64> = idx
                    .iter()
                    .map(|&i| self.data[i][j])
                    .filter(|x| !x.is_nan())
                    .collect();
                *v = if present.is_empty() {
                    f64::NAN
                } else {
                    present.iter().sum::<f64>() / present.len() as f64
                };
            }
            let meta = RowMeta {
                id: g.clone(),
                group: g.clone(),
                word_count: idx.iter().map(|&i| self.rows[i].word_count).sum(),
                n_sentences: idx.iter().map(|&i| self.rows[i].n_sentences).sum(),
            };
            out.rows.push(meta);
            out.data.push(values);
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = META_COLUMNS.join("\t");
        for n in &self.names {
            out.push('\t');
            out.push_str(n);
        }
        out.push('\n');
        for (meta, row) in self.rows.iter().zip(&self.data) {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}",
                meta.id, meta.group, meta.word_count, meta.n_sentences
            );
            for v in row {
                if v.is_nan() {
                    out.push_str("\tNA");
                } else {
                    let _ = write!(out, "\t{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str, stage: Stage) -> Result<Self, MatrixError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(MatrixError::Tsv {
            line: 1,
            message: "empty table".into(),
        })?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < META_COLUMNS.len() || cols[..4] != META_COLUMNS {
            return Err(MatrixError::Tsv {
                line: hline + 1,
                message: format!("header must start with {}", META_COLUMNS.join(",")),
            });
        }
        let names: Vec<String> = cols[4..].iter().map(|s| s.to_string()).collect();
        let mut m = FeatureMatrix::new(names, stage);
        for (i, line) in lines {
            let c: Vec<&str> = line.split('\t').collect();
            if c.len() != cols.len() {
                return Err(MatrixError::Tsv {
                    line: i + 1,
                    message: format!("expected {} columns, found {}", cols.len(), c.len()),
                });
            }
            let num = |v: &str| -> Result<usize, MatrixError> {
                v.parse().map_err(|_| MatrixError::Tsv {
                    line: i + 1,
                    message: format!("invalid count {v:?}"),
                })
            };
            let meta = RowMeta {
                id: c[0].to_string(),
                group: c[1].to_string(),
                word_count: num(c[2])?,
                n_sentences: num(c[3])?,
            };
            let values = c[4..]
                .iter()
                .map(|v| {
                    if *v == "NA" {
                        Ok(f64::NAN)
                    } else {
                        v.parse::<f64>().map_err(|_| MatrixError::Tsv {
                            line: i + 1,
                            message: format!("invalid value {v:?}"),
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            m.push(meta, values)?;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str, group: &str) -> RowMeta {
        RowMeta {
            id: id.into(),
            group: group.into(),
            word_count: 10,
            n_sentences: 1,
        }
    }

    #[test]
    fn tsv_round_trip_with_missing() {
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()], Stage::Raw);
        m.push(meta("s1", "d1"), vec![1.5, f64::NAN]).unwrap();
        m.push(meta("s2", "d1"), vec![0.1, 3.0]).unwrap();
        let back = FeatureMatrix::from_tsv(&m.to_tsv(), Stage::Raw).unwrap();
        assert_eq!(back.names, m.names);
        assert_eq!(back.rows, m.rows);
        assert_eq!(back.data[1], vec![0.1, 3.0]);
        assert!(back.data[0][1].is_nan());
    }

    #[test]
    fn group_means_skip_missing() {
        let mut m = FeatureMatrix::new(vec!["a".into()], Stage::Normalized);
        m.push(meta("s1", "d1"), vec![1.0]).unwrap();
        m.push(meta("s2", "d2"), vec![5.0]).unwrap();
        m.push(meta("s3", "d1"), vec![3.0]).unwrap();
        m.push(meta("s4", "d1"), vec![f64::NAN]).unwrap();
        let agg = m.aggregate_by_group();
        assert_eq!(agg.rows.len(), 2);
        assert_eq!(agg.rows[0].id, "d1");
        assert_eq!(agg.data[0], vec![2.0]);
        assert_eq!(agg.rows[0].word_count, 30);
    }

    #[test]
    fn select_unknown_column() {
        let m = FeatureMatrix::new(vec!["a".into()], Stage::Raw);
        assert!(m.select_columns(&["zz"]).is_err());
    }
}
