//! Runs every checked-in fuzz seed through its parser with the same checks
//! the fuzz targets make.

use std::path::PathBuf;

use biaslens::corpus::{
    parse_jsonl, parse_plaintext, parse_timestamp, segment, to_jsonl, tokenize, IngestOptions,
};
use biaslens::extract::{parse_sentences, parse_statements};
use biaslens::lexicon::BiasLexicon;
use biaslens::report::parse_bias_report;
use biaslens::sentiment::{parse_adapter_reply, parse_cache, SentimentLexicon};
use biaslens::weat::parse_embeddings;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds for {target}");
    paths
        .into_iter()
        .map(|p| std::fs::read(p).unwrap())
        .collect()
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).expect("text seed")
}

#[test]
fn lexicon_json() {
    let mut accepted = 0;
    for s in seeds("lexicon_json") {
        if let Ok(lex) = BiasLexicon::from_json_str(text(&s)) {
            assert_eq!(
                BiasLexicon::from_json_str(&lex.to_json_string()).unwrap(),
                lex
            );
            accepted += 1;
        }
    }
    assert!(accepted >= 2);
}

#[test]
fn sentiment_lexicon_json() {
    let ok = seeds("sentiment_lexicon_json")
        .iter()
        .filter(|s| SentimentLexicon::from_json_str(text(s)).is_ok())
        .count();
    assert_eq!(ok, 1);
}

#[test]
fn corpus_plaintext() {
    for s in seeds("corpus_plaintext") {
        let lenient = parse_plaintext(&s, "f", IngestOptions { lenient: true }).unwrap();
        if let Ok(strict) = parse_plaintext(&s, "f", IngestOptions { lenient: false }) {
            assert_eq!(strict.corpus, lenient.corpus);
        }
        assert!(lenient.corpus.iter().all(|s| !s.tokens.is_empty()));
    }
}

#[test]
fn corpus_jsonl() {
    for s in seeds("corpus_jsonl") {
        let _ = parse_jsonl(&s, "f", IngestOptions { lenient: false });
        let got = parse_jsonl(&s, "f", IngestOptions { lenient: true }).unwrap();
        let back = parse_jsonl(
            to_jsonl(&got.corpus).as_bytes(),
            "f",
            IngestOptions::default(),
        )
        .unwrap();
        assert_eq!(back.corpus.total_count(), got.corpus.total_count());
    }
}

#[test]
fn timestamp() {
    let parsed = seeds("timestamp")
        .iter()
        .filter(|s| parse_timestamp(text(s)).is_some())
        .count();
    assert_eq!(parsed, 4);
}

#[test]
fn tokenize_fixed_point() {
    for s in seeds("tokenize") {
        for piece in segment(text(&s)) {
            let tokens = tokenize(piece);
            assert_eq!(tokenize(&tokens.join(" ")), tokens);
        }
    }
}

#[test]
fn partition_statements() {
    for s in seeds("partition_statements") {
        let t = text(&s);
        assert!(parse_statements(t).is_ok() || parse_sentences(t).is_ok());
    }
}

#[test]
fn embeddings() {
    let mut ok = 0;
    for s in seeds("embeddings") {
        if let Ok((table, _)) = parse_embeddings(text(&s)) {
            assert_eq!(parse_embeddings(&table.to_text()).unwrap().0, table);
            ok += 1;
        }
    }
    assert_eq!(ok, 2);
}

#[test]
fn adapter_reply() {
    for s in seeds("adapter_reply") {
        let (n, rest) = (s[0] as usize, text(&s[1..]));
        if let Ok(v) = parse_adapter_reply(rest, n) {
            assert_eq!(v.len(), n);
        }
    }
}

#[test]
fn score_cache() {
    for s in seeds("score_cache") {
        let (entries, bad) = parse_cache(text(&s));
        assert_eq!((entries.len(), bad), (2, 1));
    }
}

#[test]
fn bias_report() {
    let ok = seeds("bias_report")
        .iter()
        .filter(|s| parse_bias_report(text(s), "seed").is_ok())
        .count();
    assert_eq!(ok, 1);
}
