//! Word vector tables and their text format.
//!
//! The format is the common word2vec/GloVe text layout: an optional
//! `V D` header line, then `word v1 ... vD` per line.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::WeatError;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub header: Option<(usize, usize)>,
    pub duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from rows in order; a repeated word keeps its first row.
    pub fn from_rows<I>(dimension: usize, rows: I) -> Result<(Self, usize), WeatError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut table = EmbeddingTable {
            dimension,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        };
        let mut duplicates = 0;
        for (n, (word, v)) in rows.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(WeatError::Format {
                    line: n + 1,
                    message: format!("expected {dimension} values, found {}", v.len()),
                });
            }
            if table.index.contains_key(&word) {
                duplicates += 1;
                continue;
            }
            table.index.insert(word.clone(), table.words.len());
            table.words.push(word);
            table.data.extend(v);
        }
        Ok((table, duplicates))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dimension..(i + 1) * self.dimension])
    }

    /// Vectors multiplied in place by a per-word factor.
    pub fn scaled(&self, factor: impl Fn(&str) -> f64) -> Self {
        let mut out = self.clone();
        for (i, w) in self.words.iter().enumerate() {
            let f = factor(w);
            for x in &mut out.data[i * self.dimension..(i + 1) * self.dimension] {
                *x *= f;
            }
        }
        out
    }

    /// Text form with header; values use the shortest round-trip decimal.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dimension);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for x in &self.data[i * self.dimension..(i + 1) * self.dimension] {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let v = parts.next()?.parse().ok()?;
    let d = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((v, d))
}

pub fn parse_embeddings(text: &str) -> Result<(EmbeddingTable, LoadStats), WeatError> {
    let mut stats = LoadStats::default();
    let mut dimension: Option<usize> = None;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();

    if let Some((_, first)) = lines.peek() {
        if let Some((v, d)) = parse_header(first) {
            if d == 0 {
                return Err(WeatError::Format {
                    line: 1,
                    message: "header declares dimension 0".into(),
                });
            }
            stats.header = Some((v, d));
            dimension = Some(d);
            lines.next();
        }
    }

    let mut seen = std::collections::HashSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|p| match p.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(WeatError::Format {
                    line: line_no,
                    message: format!("unparseable number {p:?}"),
                }),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let d = *dimension.get_or_insert(values.len());
        if values.len() != d || d == 0 {
            return Err(WeatError::Format {
                line: line_no,
                message: format!("expected {d} values, found {}", values.len()),
            });
        }
        if !seen.insert(word.to_string()) {
            stats.duplicates += 1;
            continue;
        }
        rows.push((word.to_string(), values));
    }

    let dimension = match dimension {
        Some(d) if !rows.is_empty() => d,
        _ => {
            return Err(WeatError::Format {
                line: 0,
                message: "no vectors".into(),
            })
        }
    };
    let (table, _) = EmbeddingTable::from_rows(dimension, rows)?;
    Ok((table, stats))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<(EmbeddingTable, LoadStats), WeatError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| WeatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_embeddings(&text)
}
