//! Statement sentiment in {-1, 0, +1}.
//!
//! The built-in scorer counts positive and negative lexicon hits over the
//! whole statement; each negator flips the polarity of hits in the three
//! tokens after it. External classifiers plug in through a line protocol:
//! one escaped statement per stdin line in, one of `-1`/`0`/`1` per stdout
//! line back.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Sentence;
use crate::extract::match_spans;
use crate::lexicon::{LexiconError, WordSet};

/// Tokens after a negator whose hits it flips.
pub const NEGATION_WINDOW: usize = 3;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(300);
pub const DEFAULT_BATCH: usize = 1000;

const BUILTIN_LEXICON: &str = include_str!("../data/sentiment_lexicon.json");

#[derive(Debug, thiserror::Error)]
pub enum SentimentError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("sentiment lexicon: \"{0}\" is both positive and negative")]
    PolarityOverlap(String),
    #[error("cannot start scorer `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scorer protocol violation: expected {expected} lines, got {actual}")]
    LineCount { expected: usize, actual: usize },
    #[error("scorer protocol violation at reply line {line}: {value:?} is not -1, 0 or 1")]
    BadValue { line: usize, value: String },
    #[error("scorer exited with {status} before replying")]
    Exited { status: String },
    #[error("scorer timed out after {0:?}")]
    Timeout(Duration),
    #[error("score cache {path}: {source}")]
    Cache {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scorer spec '{0}' (expected builtin, builtin:<lexicon.json> or external:<command>)")]
    BadSpec(String),
}

impl SentimentError {
    pub fn code(&self) -> &'static str {
        match self {
            SentimentError::Lexicon(e) => e.code(),
            SentimentError::PolarityOverlap(_) => "sentiment.polarity_overlap",
            SentimentError::Spawn { .. } => "sentiment.spawn",
            SentimentError::LineCount { .. } => "sentiment.protocol.line_count",
            SentimentError::BadValue { .. } => "sentiment.protocol.value",
            SentimentError::Exited { .. } => "sentiment.exited",
            SentimentError::Timeout(_) => "sentiment.timeout",
            SentimentError::Cache { .. } => "sentiment.cache",
            SentimentError::BadSpec(_) => "sentiment.bad_spec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct SentimentScore(i8);

impl SentimentScore {
    pub const NEGATIVE: SentimentScore = SentimentScore(-1);
    pub const NEUTRAL: SentimentScore = SentimentScore(0);
    pub const POSITIVE: SentimentScore = SentimentScore(1);

    pub fn from_sign(raw: i64) -> Self {
        SentimentScore(raw.signum() as i8)
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn negated(self) -> Self {
        SentimentScore(-self.0)
    }
}

impl TryFrom<i64> for SentimentScore {
    type Error = String;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        match v {
            -1..=1 => Ok(SentimentScore(v as i8)),
            _ => Err(format!("sentiment score {v} outside {{-1, 0, 1}}")),
        }
    }
}

impl From<SentimentScore> for i64 {
    fn from(s: SentimentScore) -> i64 {
        s.0 as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    pub positive: WordSet,
    pub negative: WordSet,
    pub negators: WordSet,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentimentLexiconDoc {
    positive: Vec<String>,
    negative: Vec<String>,
    #[serde(default)]
    negators: Option<Vec<String>>,
}

pub const DEFAULT_NEGATORS: [&str; 5] = ["not", "no", "never", "n't", "hardly"];

impl SentimentLexicon {
    pub fn new(
        positive: WordSet,
        negative: WordSet,
        negators: WordSet,
    ) -> Result<Self, SentimentError> {
        if let Some(w) = positive.entries().iter().find(|w| negative.contains(w)) {
            return Err(SentimentError::PolarityOverlap(w.clone()));
        }
        Ok(SentimentLexicon {
            positive,
            negative,
            negators,
        })
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json_str(BUILTIN_LEXICON).expect("bundled sentiment lexicon is valid")
    }

    pub fn from_json_str(text: &str) -> Result<Self, SentimentError> {
        let doc: SentimentLexiconDoc = serde_json::from_str(text)
            .map_err(|e| LexiconError::Schema(format!("sentiment lexicon: {e}")))?;
        let negators = match doc.negators {
            Some(n) => WordSet::new("negators", n)?,
            None => WordSet::new("negators", DEFAULT_NEGATORS)?,
        };
        Self::new(
            WordSet::new("positive", doc.positive)?,
            WordSet::new("negative", doc.negative)?,
            negators,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SentimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Positive and negative sets exchanged.
    pub fn swapped_polarity(&self) -> Self {
        SentimentLexicon {
            positive: self.negative.relabeled("positive"),
            negative: self.positive.relabeled("negative"),
            negators: self.negators.clone(),
        }
    }

    /// Stable content hash, used in the default scorer id.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for set in [&self.positive, &self.negative, &self.negators] {
            for e in set.entries() {
                h.update(e.as_bytes());
                h.update([0]);
            }
            h.update([1]);
        }
        hex(&h.finalize()[..8])
    }

    fn negator_positions(&self, tokens: &[String]) -> Vec<usize> {
        let clitic = self.negators.contains("n't");
        let mut positions: Vec<usize> = match_spans(tokens, &self.negators)
            .into_iter()
            .map(|s| s.end - 1)
            .collect();
        if clitic {
            positions.extend(
                tokens
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.len() > 3 && t.ends_with("n't"))
                    .map(|(i, _)| i),
            );
        }
        positions.sort_unstable();
        positions.dedup();
        positions
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sign of (positive hits - negative hits), each hit flipped once per
/// negator in the [`NEGATION_WINDOW`] tokens before it.
pub fn score_tokens(tokens: &[String], lex: &SentimentLexicon) -> SentimentScore {
    let negators = lex.negator_positions(tokens);
    let polarity_at = |start: usize| -> i64 {
        let flips = negators
            .iter()
            .filter(|&&n| n < start && start - n <= NEGATION_WINDOW)
            .count();
        if flips % 2 == 0 {
            1
        } else {
            -1
        }
    };
    let is_negator = |start: usize| negators.binary_search(&start).is_ok();
    let mut raw = 0i64;
    for span in match_spans(tokens, &lex.positive) {
        if !is_negator(span.start) {
            raw += polarity_at(span.start);
        }
    }
    for span in match_spans(tokens, &lex.negative) {
        if !is_negator(span.start) {
            raw -= polarity_at(span.start);
        }
    }
    SentimentScore::from_sign(raw)
}

pub fn score_builtin(sentence: &Sentence, lex: &SentimentLexicon) -> SentimentScore {
    score_tokens(&sentence.tokens, lex)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerKind {
    Builtin(Box<SentimentLexicon>),
    External {
        command: String,
        timeout: Duration,
        batch_size: usize,
    },
}

/// A scorer plus the id recorded in reports and cache keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScorerSpec {
    pub id: String,
    pub kind: ScorerKind,
}

impl ScorerSpec {
    pub fn builtin() -> Self {
        Self::with_lexicon(SentimentLexicon::builtin())
    }

    pub fn with_lexicon(lex: SentimentLexicon) -> Self {
        ScorerSpec {
            id: format!("builtin-lexicon:{}", lex.fingerprint()),
            kind: ScorerKind::Builtin(Box::new(lex)),
        }
    }

    pub fn external(id: &str, command: &str) -> Self {
        ScorerSpec {
            id: id.to_string(),
            kind: ScorerKind::External {
                command: command.to_string(),
                timeout: DEFAULT_TIMEOUT,
                batch_size: DEFAULT_BATCH,
            },
        }
    }

    /// Parses `builtin`, `builtin:<lexicon.json>` or `external:<command>`.
    /// `id` overrides the derived scorer id.
    pub fn parse(spec: &str, id: Option<&str>) -> Result<Self, SentimentError> {
        let mut out = if spec == "builtin" {
            Self::builtin()
        } else if let Some(path) = spec.strip_prefix("builtin:") {
            Self::with_lexicon(SentimentLexicon::load(path)?)
        } else if let Some(cmd) = spec.strip_prefix("external:") {
            if cmd.trim().is_empty() {
                return Err(SentimentError::BadSpec(spec.to_string()));
            }
            Self::external(&format!("external:{}", cmd.trim()), cmd.trim())
        } else {
            return Err(SentimentError::BadSpec(spec.to_string()));
        };
        if let Some(id) = id {
            out.id = id.to_string();
        }
        Ok(out)
    }

    pub fn with_timeout(mut self, limit: Duration) -> Self {
        if let ScorerKind::External { timeout, .. } = &mut self.kind {
            *timeout = limit;
        }
        self
    }

    pub fn is_builtin(&self) -> bool {
        matches!(self.kind, ScorerKind::Builtin(_))
    }

    pub fn score(&self, sentences: &[&Sentence]) -> Result<Vec<SentimentScore>, SentimentError> {
        match &self.kind {
            ScorerKind::Builtin(lex) => Ok(sentences
                .par_iter()
                .map(|s| score_builtin(s, lex))
                .collect()),
            ScorerKind::External {
                command,
                timeout,
                batch_size,
            } => {
                let mut out = Vec::with_capacity(sentences.len());
                for batch in sentences.chunks((*batch_size).max(1)) {
                    let texts: Vec<&str> = batch.iter().map(|s| s.text.as_str()).collect();
                    out.extend(score_external(&texts, command, *timeout)?);
                }
                Ok(out)
            }
        }
    }
}

/// Escapes a statement for the adapter's one-line-per-statement stdin.
pub fn escape_line(text: &str) -> String {
    text.replace('\n', "\\n").replace('\r', "\\r")
}

/// Parses an adapter's stdout for a batch of `expected` statements.
pub fn parse_adapter_reply(
    stdout: &str,
    expected: usize,
) -> Result<Vec<SentimentScore>, SentimentError> {
    let body = stdout.strip_suffix('\n').unwrap_or(stdout);
    let lines: Vec<&str> = if body.is_empty() {
        Vec::new()
    } else {
        body.split('\n').collect()
    };
    if lines.len() != expected {
        return Err(SentimentError::LineCount {
            expected,
            actual: lines.len(),
        });
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let v = line.trim();
            let v = v.strip_prefix('+').unwrap_or(v);
            match v {
                "-1" => Ok(SentimentScore::NEGATIVE),
                "0" => Ok(SentimentScore::NEUTRAL),
                "1" => Ok(SentimentScore::POSITIVE),
                _ => Err(SentimentError::BadValue {
                    line: i + 1,
                    value: line.to_string(),
                }),
            }
        })
        .collect()
}

/// Runs `command` through `sh -c` once for the whole batch.
pub fn score_external(
    texts: &[&str],
    command: &str,
    timeout: Duration,
) -> Result<Vec<SentimentScore>, SentimentError> {
    if texts.is_empty() {
        return Ok(Vec::new());
    }
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|source| SentimentError::Spawn {
            command: command.to_string(),
            source,
        })?;

    let mut payload = String::new();
    for t in texts {
        payload.push_str(&escape_line(t));
        payload.push('\n');
    }
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        // a broken pipe surfaces as a line-count error below
        let _ = stdin.write_all(payload.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        let res = stdout.read_to_end(&mut buf).map(|_| buf);
        let _ = tx.send(res);
    });

    let output = match rx.recv_timeout(timeout) {
        Ok(res) => res.map_err(|source| SentimentError::Spawn {
            command: command.to_string(),
            source,
        })?,
        Err(_) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SentimentError::Timeout(timeout));
        }
    };
    let _ = writer.join();
    let status = child.wait().map_err(|source| SentimentError::Spawn {
        command: command.to_string(),
        source,
    })?;
    let text = String::from_utf8_lossy(&output);
    if !status.success() && text.trim().is_empty() {
        return Err(SentimentError::Exited {
            status: status.to_string(),
        });
    }
    parse_adapter_reply(&text, texts.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub sid: String,
    pub scorer: String,
    pub score: SentimentScore,
}

/// Cache key for a sentence: its id plus a digest of its text, so a
/// re-ingested corpus with shifted ids never reuses a stale score.
pub fn cache_sid(sentence: &Sentence) -> String {
    let digest = Sha256::digest(sentence.text.as_bytes());
    format!("{}#{}", sentence.id, hex(&digest[..8]))
}

/// Parses cache JSONL. Malformed lines are skipped and counted; later
/// entries win.
pub fn parse_cache(text: &str) -> (HashMap<(String, String), SentimentScore>, usize) {
    let mut map = HashMap::new();
    let mut bad = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        match serde_json::from_str::<CacheEntry>(line) {
            Ok(e) => {
                map.insert((e.sid, e.scorer), e.score);
            }
            Err(_) => bad += 1,
        }
    }
    (map, bad)
}

/// Disk-backed score cache (JSONL, append-only).
#[derive(Debug)]
pub struct ScoreCache {
    path: PathBuf,
    map: HashMap<(String, String), SentimentScore>,
    pub malformed_lines: usize,
}

impl ScoreCache {
    pub const FILE_NAME: &'static str = "sentiment_cache.jsonl";

    pub fn open(path: impl Into<PathBuf>) -> Result<Self, SentimentError> {
        let path = path.into();
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(source) => {
                return Err(SentimentError::Cache {
                    path: path.display().to_string(),
                    source,
                })
            }
        };
        let (map, malformed_lines) = parse_cache(&text);
        Ok(ScoreCache {
            path,
            map,
            malformed_lines,
        })
    }

    /// Opens `$dir/sentiment_cache.jsonl`, creating the directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Result<Self, SentimentError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|source| SentimentError::Cache {
            path: dir.display().to_string(),
            source,
        })?;
        Self::open(dir.join(Self::FILE_NAME))
    }

    pub fn get(&self, sid: &str, scorer: &str) -> Option<SentimentScore> {
        self.map
            .get(&(sid.to_string(), scorer.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn append(&mut self, entries: Vec<CacheEntry>) -> Result<(), SentimentError> {
        if entries.is_empty() {
            return Ok(());
        }
        let mut buf = String::new();
        for e in &entries {
            buf.push_str(&serde_json::to_string(e).expect("cache entry serializes"));
            buf.push('\n');
        }
        let err = |source| SentimentError::Cache {
            path: self.path.display().to_string(),
            source,
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(err)?;
        // one write per batch so concurrent appenders interleave whole lines
        file.write_all(buf.as_bytes())
            .map_err(|source| SentimentError::Cache {
                path: self.path.display().to_string(),
                source,
            })?;
        for e in entries {
            self.map.insert((e.sid, e.scorer), e.score);
        }
        Ok(())
    }
}

/// Scores every sentence, consulting and filling `cache` when given.
pub fn score_collection(
    sentences: &[&Sentence],
    spec: &ScorerSpec,
    cache: Option<&mut ScoreCache>,
) -> Result<Vec<(String, SentimentScore)>, SentimentError> {
    let sids: Vec<String> = sentences.iter().map(|s| cache_sid(s)).collect();
    let mut scores: Vec<Option<SentimentScore>> = match cache.as_deref() {
        Some(c) => sids.iter().map(|sid| c.get(sid, &spec.id)).collect(),
        None => vec![None; sentences.len()],
    };
    let missing: Vec<usize> = (0..sentences.len())
        .filter(|&i| scores[i].is_none())
        .collect();
    if !missing.is_empty() {
        let todo: Vec<&Sentence> = missing.iter().map(|&i| sentences[i]).collect();
        let fresh = spec.score(&todo)?;
        let mut new_entries = Vec::with_capacity(missing.len());
        for (&i, score) in missing.iter().zip(fresh) {
            scores[i] = Some(score);
            new_entries.push(CacheEntry {
                sid: sids[i].clone(),
                scorer: spec.id.clone(),
                score,
            });
        }
        if let Some(c) = cache {
            c.append(new_entries)?;
        }
    }
    Ok(sentences
        .iter()
        .zip(scores)
        .map(|(s, score)| (s.id.clone(), score.expect("every score filled")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn score(text: &str) -> i8 {
        score_tokens(&tokenize(text), &SentimentLexicon::builtin()).value()
    }

    fn sentence(id: &str, text: &str) -> Sentence {
        Sentence::new(id.to_string(), text, None, "t")
    }

    #[test]
    fn worked_examples() {
        assert_eq!(score("rose is beautiful"), 1);
        assert_eq!(score("this rose is not beautiful at all"), -1);
        assert_eq!(score("the rose exists"), 0);
        assert_eq!(score("Flower is not beautiful"), -1);
    }

    #[test]
    fn negation_window_and_double_negation() {
        assert_eq!(score("not not good"), 1);
        assert_eq!(score("not a b good"), -1);
        assert_eq!(score("not a b c good"), 1);
        assert_eq!(score("it isn't good"), -1);
        assert_eq!(score("good but ugly"), 0);
        assert_eq!(score("never bad"), 1);
    }

    #[test]
    fn swapped_polarity_negates() {
        let lex = SentimentLexicon::builtin();
        let swapped = lex.swapped_polarity();
        for text in [
            "rose is beautiful",
            "not ugly at all",
            "awful awful good",
            "plain",
        ] {
            let t = tokenize(text);
            assert_eq!(score_tokens(&t, &swapped), score_tokens(&t, &lex).negated());
        }
    }

    #[test]
    fn score_serde_rejects_out_of_range() {
        assert!(serde_json::from_str::<SentimentScore>("2").is_err());
        assert_eq!(
            serde_json::from_str::<SentimentScore>("-1").unwrap(),
            SentimentScore::NEGATIVE
        );
    }

    #[test]
    fn adapter_reply_parsing() {
        let got = parse_adapter_reply("1\n0\n-1\n", 3).unwrap();
        assert_eq!(
            got,
            [
                SentimentScore::POSITIVE,
                SentimentScore::NEUTRAL,
                SentimentScore::NEGATIVE
            ]
        );
        let err = parse_adapter_reply("1\n0\n", 3).unwrap_err();
        assert!(matches!(
            err,
            SentimentError::LineCount {
                expected: 3,
                actual: 2
            }
        ));
        assert!(err.to_string().contains("expected 3"));
        let err = parse_adapter_reply("0.7\n", 1).unwrap_err();
        assert!(matches!(err, SentimentError::BadValue { line: 1, .. }));
        assert!(parse_adapter_reply("", 0).unwrap().is_empty());
    }

    #[test]
    fn escape() {
        assert_eq!(escape_line("a\nb"), "a\\nb");
    }

    #[test]
    fn external_round_trip() {
        let texts = ["good", "meh", "bad"];
        let cmd = r#"while IFS= read -r l; do case "$l" in good) echo 1;; bad) echo -1;; *) echo 0;; esac; done"#;
        let got = score_external(&texts, cmd, Duration::from_secs(30)).unwrap();
        assert_eq!(
            got.iter().map(|s| s.value()).collect::<Vec<_>>(),
            [1, 0, -1]
        );

        let err = score_external(&texts, "head -n 2 | sed 's/.*/1/'", Duration::from_secs(30))
            .unwrap_err();
        assert!(matches!(
            err,
            SentimentError::LineCount {
                expected: 3,
                actual: 2
            }
        ));

        let err = score_external(&texts, "sleep 5", Duration::from_millis(200)).unwrap_err();
        assert!(matches!(err, SentimentError::Timeout(_)));
    }

    #[test]
    fn spec_parsing() {
        assert!(ScorerSpec::parse("builtin", None).unwrap().is_builtin());
        let ext = ScorerSpec::parse("external:cat", Some("mine")).unwrap();
        assert_eq!(ext.id, "mine");
        assert!(ScorerSpec::parse("magic", None).is_err());
        assert!(ScorerSpec::parse("external:  ", None).is_err());
    }

    #[test]
    fn collection_scoring_and_cache() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ScorerSpec::builtin();
        let a = sentence("t:0", "Flower is not beautiful");
        let b = sentence("t:1", "Rose is beautiful");
        assert!(score_collection(&[], &spec, None).unwrap().is_empty());

        let mut cache = ScoreCache::in_dir(dir.path()).unwrap();
        let first = score_collection(&[&a, &b], &spec, Some(&mut cache)).unwrap();
        assert_eq!(
            first,
            [
                ("t:0".to_string(), SentimentScore::NEGATIVE),
                ("t:1".to_string(), SentimentScore::POSITIVE)
            ]
        );
        let bytes = std::fs::read(dir.path().join(ScoreCache::FILE_NAME)).unwrap();

        let mut warm = ScoreCache::in_dir(dir.path()).unwrap();
        assert_eq!(warm.len(), 2);
        let second = score_collection(&[&a, &b], &spec, Some(&mut warm)).unwrap();
        assert_eq!(first, second);
        assert_eq!(
            std::fs::read(dir.path().join(ScoreCache::FILE_NAME)).unwrap(),
            bytes
        );
    }

    #[test]
    fn cache_tolerates_garbage() {
        let (map, bad) = parse_cache("{\"sid\":\"a\",\"scorer\":\"s\",\"score\":1}\nnope\n{\"sid\":\"a\",\"scorer\":\"s\",\"score\":5}\n");
        assert_eq!(map.len(), 1);
        assert_eq!(bad, 2);
    }
}
