//! Run manifests, report documents and the summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::biasmeter::{BiasReport, DEFAULT_SIGNIFICANCE};
use crate::corpus::CorpusStream;

pub const TOOL: &str = "biaslens";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed report: {message}")]
    Malformed { path: String, message: String },
    #[error("no reports given")]
    NoReports,
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::Io { .. } => "report.io",
            ReportError::Malformed { .. } => "report.malformed",
            ReportError::NoReports => "report.no_reports",
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(digest: &[u8]) -> String {
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFingerprint {
    pub count: usize,
    pub sha256: String,
}

impl CorpusFingerprint {
    /// Hash over sentence ids, texts and timestamps in corpus order.
    pub fn of(corpus: &CorpusStream) -> Self {
        let mut h = Sha256::new();
        for s in corpus {
            h.update(s.id.as_bytes());
            h.update([0]);
            h.update(s.text.as_bytes());
            h.update([0]);
            if let Some(t) = s.timestamp {
                h.update(t.to_rfc3339().as_bytes());
            }
            h.update([0xff]);
        }
        CorpusFingerprint {
            count: corpus.total_count(),
            sha256: hex(&h.finalize()),
        }
    }
}

/// What produced a report. Worker counts and output paths are left out so
/// that reruns compare byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub config_hashes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusFingerprint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer_id: Option<String>,
    #[serde(default)]
    pub seeds: BTreeMap<String, u64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            params: BTreeMap::new(),
            config_hashes: BTreeMap::new(),
            corpus: None,
            lexicon_id: None,
            scorer_id: None,
            seeds: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn config(mut self, key: &str, bytes: &[u8]) -> Self {
        self.config_hashes
            .insert(key.to_string(), sha256_hex(bytes));
        self
    }

    pub fn corpus(mut self, corpus: &CorpusStream) -> Self {
        self.corpus = Some(CorpusFingerprint::of(corpus));
        self
    }

    pub fn lexicon(mut self, id: &str) -> Self {
        self.lexicon_id = Some(id.to_string());
        self
    }

    pub fn scorer(mut self, id: &str) -> Self {
        self.scorer_id = Some(id.to_string());
        self
    }

    pub fn seed(mut self, key: &str, seed: u64) -> Self {
        self.seeds.insert(key.to_string(), seed);
        self
    }
}

/// A report body with its manifest embedded at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub manifest: RunManifest,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Document<T> {
    pub fn new(manifest: RunManifest, body: T) -> Self {
        Document { manifest, body }
    }

    pub fn to_json(&self) -> String {
        to_json_pretty(self)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes to a temporary file in the target directory, then renames over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<(), ReportError> {
    let path = path.as_ref();
    let io = |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn parse_document<T: DeserializeOwned>(
    text: &str,
    path: &str,
) -> Result<Document<T>, ReportError> {
    serde_json::from_str(text).map_err(|e| ReportError::Malformed {
        path: path.to_string(),
        message: e.to_string(),
    })
}

pub fn parse_bias_report(text: &str, path: &str) -> Result<Document<BiasReport>, ReportError> {
    parse_document(text, path)
}

pub fn load_bias_report(path: impl AsRef<Path>) -> Result<Document<BiasReport>, ReportError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_bias_report(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryOptions {
    pub threshold: f64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            threshold: DEFAULT_SIGNIFICANCE,
        }
    }
}

pub const SUMMARY_COLUMNS: [&str; 7] = [
    "corpus",
    "pair",
    "explicit",
    "implicit",
    "difference",
    "p",
    "sig",
];

/// One row per report, in input order. `*` marks p at or below the threshold.
pub fn summarize(reports: &[BiasReport], opts: &SummaryOptions) -> Result<String, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::NoReports);
    }
    let rows: Vec<[String; 7]> = reports
        .iter()
        .map(|r| {
            [
                r.corpus.clone(),
                format!("{} vs {}", r.concept_i, r.concept_j),
                format!("{:+.4}", r.explicit_bias),
                format!("{:+.4}", r.implicit_bias),
                format!("{:+.4}", r.difference),
                format!("{:.6}", r.p_value),
                if r.p_value <= opts.threshold { "*" } else { "" }.to_string(),
            ]
        })
        .collect();
    let mut widths = SUMMARY_COLUMNS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(&SUMMARY_COLUMNS);
    for row in &rows {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let _ = writeln!(out, "* p <= {}", opts.threshold);
    Ok(out)
}
