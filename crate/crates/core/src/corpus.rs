//! Corpus ingestion: sentence segmentation, tokenization, timestamps.
//!
//! Two input formats are accepted. Plaintext is free-form UTF-8; JSONL holds
//! one `{"text", "timestamp"?, "id"?}` object per line. Both are split into
//! sentences on `.?!。？！` followed by whitespace or end of line, with every
//! newline acting as a hard boundary.

use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid UTF-8 at byte offset {offset} (line {line})")]
    InvalidUtf8 { offset: usize, line: usize },
    #[error("malformed JSON record at line {line}: {message}")]
    MalformedRecord { line: usize, message: String },
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::Io { .. } => "corpus.io",
            CorpusError::InvalidUtf8 { .. } => "corpus.invalid_utf8",
            CorpusError::MalformedRecord { .. } => "corpus.malformed_record",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Plaintext,
    Jsonl,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plaintext" | "text" | "txt" => Ok(CorpusFormat::Plaintext),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(format!(
                "unknown corpus format '{other}' (expected plaintext|jsonl)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    pub source: String,
}

impl Sentence {
    pub fn new(id: String, text: &str, timestamp: Option<DateTime<Utc>>, source: &str) -> Self {
        Sentence {
            id,
            tokens: tokenize(text),
            text: text.to_string(),
            timestamp,
            source: source.to_string(),
        }
    }
}

/// An ordered, replayable sequence of sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStream {
    sentences: Vec<Sentence>,
}

impl CorpusStream {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        CorpusStream { sentences }
    }

    pub fn total_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sentence> {
        self.sentences.iter()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn into_sentences(self) -> Vec<Sentence> {
        self.sentences
    }
}

impl FromIterator<Sentence> for CorpusStream {
    fn from_iter<T: IntoIterator<Item = Sentence>>(iter: T) -> Self {
        CorpusStream::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a CorpusStream {
    type Item = &'a Sentence;
    type IntoIter = std::slice::Iter<'a, Sentence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sentences.iter()
    }
}

/// Counters for everything ingestion skipped or downgraded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub lines: usize,
    pub records: usize,
    pub skipped_lines: usize,
    /// Byte offsets of invalid UTF-8 sequences (lenient mode only).
    pub invalid_utf8_offsets: Vec<usize>,
    pub malformed_records: usize,
    pub unparseable_timestamps: usize,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: CorpusStream,
    pub stats: IngestStats,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    pub lenient: bool,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '。' | '？'
                | '！'
                | '，'
                | '、'
                | '；'
                | '：'
                | '“'
                | '”'
                | '‘'
                | '’'
                | '（'
                | '）'
                | '《'
                | '》'
                | '「'
                | '」'
                | '【'
                | '】'
                | '…'
                | '—'
                | '–'
                | '«'
                | '»'
                | '¿'
                | '¡'
                | '·'
        )
}

/// Lowercase, whitespace-split tokens with leading and trailing punctuation
/// removed. Internal punctuation ("don't-stop") is kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| raw.trim_matches(is_punct))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!' | '。' | '？' | '！')
}

/// Splits text into trimmed, non-empty sentence strings.
pub fn segment(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for line in text.split('\n') {
        let mut start = 0;
        let mut chars = line.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if !is_terminator(c) {
                continue;
            }
            let boundary = match chars.peek() {
                None => true,
                Some(&(_, next)) => next.is_whitespace(),
            };
            if boundary {
                let end = i + c.len_utf8();
                out.push(&line[start..end]);
                start = end;
            }
        }
        out.push(&line[start..]);
    }
    out.into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Lenient timestamp parsing; naive values are taken as UTC, bare dates as
/// midnight UTC.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
    ] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc());
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
}

struct Builder<'a> {
    source: &'a str,
    sentences: Vec<Sentence>,
}

impl<'a> Builder<'a> {
    fn push_text(&mut self, text: &str, timestamp: Option<DateTime<Utc>>) {
        for seg in segment(text) {
            let tokens = tokenize(seg);
            if tokens.is_empty() {
                continue;
            }
            let id = format!("{}:{}", self.source, self.sentences.len());
            self.sentences.push(Sentence {
                id,
                text: seg.to_string(),
                tokens,
                timestamp,
                source: self.source.to_string(),
            });
        }
    }
}

/// Byte lines with their starting offsets.
fn byte_lines(bytes: &[u8]) -> impl Iterator<Item = (usize, &[u8])> {
    let mut offset = 0;
    bytes.split(|&b| b == b'\n').map(move |line| {
        let start = offset;
        offset += line.len() + 1;
        (start, line)
    })
}

fn decode_line<'b>(
    line: &'b [u8],
    start: usize,
    line_no: usize,
    opts: IngestOptions,
    stats: &mut IngestStats,
) -> Result<Option<&'b str>, CorpusError> {
    match std::str::from_utf8(line) {
        Ok(s) => Ok(Some(s)),
        Err(e) => {
            let offset = start + e.valid_up_to();
            if opts.lenient {
                stats.invalid_utf8_offsets.push(offset);
                stats.skipped_lines += 1;
                Ok(None)
            } else {
                Err(CorpusError::InvalidUtf8 {
                    offset,
                    line: line_no,
                })
            }
        }
    }
}

pub fn parse_plaintext(
    bytes: &[u8],
    source: &str,
    opts: IngestOptions,
) -> Result<Ingested, CorpusError> {
    let mut stats = IngestStats::default();
    let mut builder = Builder {
        source,
        sentences: Vec::new(),
    };
    for (idx, (start, line)) in byte_lines(bytes).enumerate() {
        if start >= bytes.len() && line.is_empty() {
            break;
        }
        stats.lines += 1;
        if let Some(text) = decode_line(line, start, idx + 1, opts, &mut stats)? {
            builder.push_text(text, None);
        }
    }
    Ok(Ingested {
        corpus: CorpusStream::new(builder.sentences),
        stats,
    })
}

#[derive(Debug, Deserialize)]
struct JsonRecord {
    text: String,
    #[serde(default)]
    timestamp: Option<String>,
    // accepted for compatibility; sentence ids are positional
    #[serde(default)]
    #[allow(dead_code)]
    id: Option<serde_json::Value>,
}

pub fn parse_jsonl(
    bytes: &[u8],
    source: &str,
    opts: IngestOptions,
) -> Result<Ingested, CorpusError> {
    let mut stats = IngestStats::default();
    let mut builder = Builder {
        source,
        sentences: Vec::new(),
    };
    for (idx, (start, line)) in byte_lines(bytes).enumerate() {
        if start >= bytes.len() && line.is_empty() {
            break;
        }
        stats.lines += 1;
        let Some(text) = decode_line(line, start, idx + 1, opts, &mut stats)? else {
            continue;
        };
        if text.trim().is_empty() {
            continue;
        }
        let record: JsonRecord = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) if opts.lenient => {
                let _ = e;
                stats.malformed_records += 1;
                stats.skipped_lines += 1;
                continue;
            }
            Err(e) => {
                return Err(CorpusError::MalformedRecord {
                    line: idx + 1,
                    message: e.to_string(),
                })
            }
        };
        stats.records += 1;
        let timestamp = match record.timestamp.as_deref() {
            None => None,
            Some(raw) => {
                let parsed = parse_timestamp(raw);
                if parsed.is_none() {
                    stats.unparseable_timestamps += 1;
                }
                parsed
            }
        };
        builder.push_text(&record.text, timestamp);
    }
    Ok(Ingested {
        corpus: CorpusStream::new(builder.sentences),
        stats,
    })
}

pub fn ingest_bytes(
    bytes: &[u8],
    format: CorpusFormat,
    source: &str,
    opts: IngestOptions,
) -> Result<Ingested, CorpusError> {
    match format {
        CorpusFormat::Plaintext => parse_plaintext(bytes, source, opts),
        CorpusFormat::Jsonl => parse_jsonl(bytes, source, opts),
    }
}

pub fn ingest(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    source: &str,
    opts: IngestOptions,
) -> Result<Ingested, CorpusError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_bytes(&bytes, format, source, opts)
}

pub fn ingest_plaintext(
    path: impl AsRef<Path>,
    source: &str,
    opts: IngestOptions,
) -> Result<Ingested, CorpusError> {
    ingest(path, CorpusFormat::Plaintext, source, opts)
}

pub fn ingest_jsonl(
    path: impl AsRef<Path>,
    source: &str,
    opts: IngestOptions,
) -> Result<Ingested, CorpusError> {
    ingest(path, CorpusFormat::Jsonl, source, opts)
}

/// Serializes sentences back to JSONL records that [`parse_jsonl`] accepts.
pub fn to_jsonl(corpus: &CorpusStream) -> String {
    let mut out = String::new();
    for s in corpus {
        let mut record = serde_json::Map::new();
        record.insert("id".into(), s.id.clone().into());
        record.insert("text".into(), s.text.clone().into());
        if let Some(ts) = s.timestamp {
            record.insert(
                "timestamp".into(),
                ts.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true)
                    .into(),
            );
        }
        out.push_str(&serde_json::Value::Object(record).to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strict() -> IngestOptions {
        IngestOptions { lenient: false }
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Rose is beautiful!"), ["rose", "is", "beautiful"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("don't-stop"), ["don't-stop"]);
        assert_eq!(tokenize("  (Hello),   “World” "), ["hello", "world"]);
    }

    #[test]
    fn two_sentence_file() {
        let got = parse_plaintext(b"Rose is beautiful. Ants bite.", "t", strict()).unwrap();
        let toks: Vec<_> = got.corpus.iter().map(|s| s.tokens.clone()).collect();
        assert_eq!(
            toks,
            vec![vec!["rose", "is", "beautiful"], vec!["ants", "bite"]]
        );
        assert_eq!(got.corpus.sentences()[1].id, "t:1");
        assert!(got.corpus.iter().all(|s| s.timestamp.is_none()));
    }

    #[test]
    fn empty_and_unterminated() {
        assert_eq!(
            parse_plaintext(b"", "t", strict())
                .unwrap()
                .corpus
                .total_count(),
            0
        );
        let got = parse_plaintext(b"flowers are nice", "t", strict()).unwrap();
        assert_eq!(got.corpus.total_count(), 1);
    }

    #[test]
    fn segmentation_rules() {
        assert_eq!(segment("a. b"), ["a.", "b"]);
        assert_eq!(segment("3.14 is pi"), ["3.14 is pi"]);
        assert_eq!(segment("one\ntwo"), ["one", "two"]);
        assert_eq!(segment("好 。 坏！"), ["好 。", "坏！"]);
        assert_eq!(segment("Really?! Yes."), ["Really?!", "Yes."]);
        assert!(segment(" \n \n").is_empty());
    }

    #[test]
    fn invalid_utf8_offset() {
        let bytes = b"ok line\nbad \xff here\nfine";
        let err = parse_plaintext(bytes, "t", strict()).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::InvalidUtf8 {
                offset: 12,
                line: 2
            }
        ));
        let got = parse_plaintext(bytes, "t", IngestOptions { lenient: true }).unwrap();
        assert_eq!(got.corpus.total_count(), 2);
        assert_eq!(got.stats.invalid_utf8_offsets, [12]);
    }

    #[test]
    fn jsonl_records() {
        let data = br#"{"text":"Rose is beautiful","timestamp":"2015-03-14T00:00:00Z"}
{"text":"Ants bite. Bees sting.","timestamp":"2016-01-02"}
{"text":"No time here"}
{"text":"Bad time","timestamp":"yesterday"}
"#;
        let got = parse_jsonl(data, "j", strict()).unwrap();
        let s = got.corpus.sentences();
        assert_eq!(s.len(), 5);
        assert_eq!(
            s[0].timestamp.unwrap().format("%Y-%m").to_string(),
            "2015-03"
        );
        assert_eq!(s[1].timestamp, s[2].timestamp);
        assert_eq!(s[1].tokens, ["ants", "bite"]);
        assert!(s[3].timestamp.is_none());
        assert!(s[4].timestamp.is_none());
        assert_eq!(got.stats.unparseable_timestamps, 1);
        assert_eq!(got.stats.records, 4);
    }

    #[test]
    fn malformed_jsonl_line() {
        let data = b"{\"text\":\"ok\"}\nnot json\n{\"txt\":1}\n";
        let err = parse_jsonl(data, "j", strict()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRecord { line: 2, .. }));
        let got = parse_jsonl(data, "j", IngestOptions { lenient: true }).unwrap();
        assert_eq!(got.corpus.total_count(), 1);
        assert_eq!(got.stats.malformed_records, 2);
    }

    #[test]
    fn timestamps() {
        let t = parse_timestamp("2015-03-14T05:00:00+08:00").unwrap();
        assert_eq!(t.to_rfc3339(), "2015-03-13T21:00:00+00:00");
        assert!(parse_timestamp("2015-03-14 10:00:00").is_some());
        assert_eq!(
            parse_timestamp("2015-12-31").unwrap().to_rfc3339(),
            "2015-12-31T00:00:00+00:00"
        );
        assert!(parse_timestamp("2015-13-01").is_none());
    }

    #[test]
    fn jsonl_export_round_trips() {
        let data = br#"{"text":"Rose is beautiful. Ants bite.","timestamp":"2015-03-14T00:00:00Z"}
{"text":"plain"}
"#;
        let first = parse_jsonl(data, "j", strict()).unwrap().corpus;
        let again = parse_jsonl(to_jsonl(&first).as_bytes(), "j", strict())
            .unwrap()
            .corpus;
        assert_eq!(first, again);
    }

    proptest! {
        #[test]
        fn tokenize_fixed_point(text in "\\PC{0,60}") {
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }

        #[test]
        fn ingestion_is_deterministic(text in "[a-zA-Z .!?\n]{0,200}") {
            let a = parse_plaintext(text.as_bytes(), "p", strict()).unwrap();
            let b = parse_plaintext(text.as_bytes(), "p", strict()).unwrap();
            prop_assert_eq!(a.corpus, b.corpus);
        }
    }
}
