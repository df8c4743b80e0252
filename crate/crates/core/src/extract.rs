//! Statement extraction: label every sentence against a lexicon.
//!
//! A sentence with an attribute word plus a concept word is explicit; with an
//! attribute word plus an exemplar word (and no concept word) it is implicit.
//! Target words from both sides make it ambiguous. Everything else is rest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, CorpusError, CorpusStream, Sentence};
use crate::lexicon::{BiasLexicon, WordSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionLabel {
    ExplicitI,
    ExplicitJ,
    ImplicitI,
    ImplicitJ,
    Rest,
    Ambiguous,
}

impl PartitionLabel {
    pub const ALL: [PartitionLabel; 6] = [
        PartitionLabel::ExplicitI,
        PartitionLabel::ExplicitJ,
        PartitionLabel::ImplicitI,
        PartitionLabel::ImplicitJ,
        PartitionLabel::Rest,
        PartitionLabel::Ambiguous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PartitionLabel::ExplicitI => "explicit_i",
            PartitionLabel::ExplicitJ => "explicit_j",
            PartitionLabel::ImplicitI => "implicit_i",
            PartitionLabel::ImplicitJ => "implicit_j",
            PartitionLabel::Rest => "rest",
            PartitionLabel::Ambiguous => "ambiguous",
        }
    }

    pub fn is_explicit(self) -> bool {
        matches!(self, PartitionLabel::ExplicitI | PartitionLabel::ExplicitJ)
    }

    /// File holding this label's records in a partition directory.
    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.as_str())
    }
}

/// One word-set entry found in a token sequence, `tokens[start..end]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub entry: String,
    pub start: usize,
    pub end: usize,
}

/// Non-overlapping, longest-first, left-to-right matches of `set` entries as
/// consecutive token runs.
pub fn match_spans(tokens: &[String], set: &WordSet) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        match set.longest_match_at(tokens, i) {
            Some((idx, len)) => {
                spans.push(Span {
                    entry: set.entries()[idx].clone(),
                    start: i,
                    end: i + len,
                });
                i += len;
            }
            None => i += 1,
        }
    }
    spans
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionOptions {
    /// Maximum token gap between a target match and an attribute match.
    /// `None` means same-sentence co-occurrence is enough.
    pub max_token_distance: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub sentence: Sentence,
    pub matched_target_words: Vec<String>,
    pub matched_attribute_words: Vec<String>,
    pub label: PartitionLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub label: PartitionLabel,
    pub targets: Vec<String>,
    pub attributes: Vec<String>,
}

fn gap(a: &Span, b: &Span) -> usize {
    if a.end <= b.start {
        b.start - (a.end - 1)
    } else if b.end <= a.start {
        a.start - (b.end - 1)
    } else {
        0
    }
}

fn entries(spans: &[Span]) -> Vec<String> {
    spans.iter().map(|s| s.entry.clone()).collect()
}

/// Labels a single token sequence. Pure in (tokens, lexicon, options).
pub fn classify(
    tokens: &[String],
    lexicon: &BiasLexicon,
    opts: &PartitionOptions,
) -> Classification {
    let ap = &lexicon.attribute_pair;
    let mut attributes = match_spans(tokens, &ap.attribute_words_p);
    attributes.extend(match_spans(tokens, &ap.attribute_words_q));
    attributes.sort_by_key(|s| s.start);

    let rest = |targets: Vec<String>| Classification {
        label: PartitionLabel::Rest,
        targets,
        attributes: Vec::new(),
    };
    if attributes.is_empty() {
        return rest(Vec::new());
    }

    let cp = &lexicon.concept_pair;
    let near = |spans: Vec<Span>| -> Vec<Span> {
        match opts.max_token_distance {
            None => spans,
            Some(limit) => spans
                .into_iter()
                .filter(|t| attributes.iter().any(|a| gap(t, a) <= limit))
                .collect(),
        }
    };
    let ci = near(match_spans(tokens, &cp.concept_words_i));
    let cj = near(match_spans(tokens, &cp.concept_words_j));

    let (label, targets): (PartitionLabel, Vec<Span>) = if !ci.is_empty() || !cj.is_empty() {
        match (ci.is_empty(), cj.is_empty()) {
            (false, false) => (PartitionLabel::Ambiguous, [ci, cj].concat()),
            (false, true) => (PartitionLabel::ExplicitI, ci),
            _ => (PartitionLabel::ExplicitJ, cj),
        }
    } else {
        let ei = near(match_spans(tokens, &cp.exemplar_words_i));
        let ej = near(match_spans(tokens, &cp.exemplar_words_j));
        match (ei.is_empty(), ej.is_empty()) {
            (true, true) => return rest(Vec::new()),
            (false, false) => (PartitionLabel::Ambiguous, [ei, ej].concat()),
            (false, true) => (PartitionLabel::ImplicitI, ei),
            (true, false) => (PartitionLabel::ImplicitJ, ej),
        }
    };

    let attributes: Vec<Span> = match opts.max_token_distance {
        None => attributes,
        Some(limit) => attributes
            .into_iter()
            .filter(|a| targets.iter().any(|t| gap(t, a) <= limit))
            .collect(),
    };
    Classification {
        label,
        targets: entries(&targets),
        attributes: entries(&attributes),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCounts {
    pub explicit_i: usize,
    pub explicit_j: usize,
    pub implicit_i: usize,
    pub implicit_j: usize,
    pub rest: usize,
    pub ambiguous: usize,
    pub total: usize,
}

impl PartitionCounts {
    pub fn get(&self, label: PartitionLabel) -> usize {
        match label {
            PartitionLabel::ExplicitI => self.explicit_i,
            PartitionLabel::ExplicitJ => self.explicit_j,
            PartitionLabel::ImplicitI => self.implicit_i,
            PartitionLabel::ImplicitJ => self.implicit_j,
            PartitionLabel::Rest => self.rest,
            PartitionLabel::Ambiguous => self.ambiguous,
        }
    }

    fn bump(&mut self, label: PartitionLabel) {
        let slot = match label {
            PartitionLabel::ExplicitI => &mut self.explicit_i,
            PartitionLabel::ExplicitJ => &mut self.explicit_j,
            PartitionLabel::ImplicitI => &mut self.implicit_i,
            PartitionLabel::ImplicitJ => &mut self.implicit_j,
            PartitionLabel::Rest => &mut self.rest,
            PartitionLabel::Ambiguous => &mut self.ambiguous,
        };
        *slot += 1;
        self.total += 1;
    }
}

/// The four statement collections plus the residual corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPartition {
    pub lexicon_id: String,
    pub s_cwi: Vec<Statement>,
    pub s_cwj: Vec<Statement>,
    pub s_ewi: Vec<Statement>,
    pub s_ewj: Vec<Statement>,
    pub ambiguous: Vec<Statement>,
    pub rest: CorpusStream,
    pub counts: PartitionCounts,
}

impl CorpusPartition {
    pub fn ambiguous_count(&self) -> usize {
        self.ambiguous.len()
    }

    pub fn collection(&self, label: PartitionLabel) -> &[Statement] {
        match label {
            PartitionLabel::ExplicitI => &self.s_cwi,
            PartitionLabel::ExplicitJ => &self.s_cwj,
            PartitionLabel::ImplicitI => &self.s_ewi,
            PartitionLabel::ImplicitJ => &self.s_ewj,
            PartitionLabel::Ambiguous => &self.ambiguous,
            PartitionLabel::Rest => &[],
        }
    }

    /// Rebuilds a partition from labelled statements and rest sentences, as
    /// read back from disk.
    pub fn from_parts(lexicon_id: String, statements: Vec<Statement>, rest: Vec<Sentence>) -> Self {
        let mut part = CorpusPartition {
            lexicon_id,
            s_cwi: Vec::new(),
            s_cwj: Vec::new(),
            s_ewi: Vec::new(),
            s_ewj: Vec::new(),
            ambiguous: Vec::new(),
            rest: CorpusStream::default(),
            counts: PartitionCounts::default(),
        };
        for st in statements {
            part.counts.bump(st.label);
            match st.label {
                PartitionLabel::ExplicitI => part.s_cwi.push(st),
                PartitionLabel::ExplicitJ => part.s_cwj.push(st),
                PartitionLabel::ImplicitI => part.s_ewi.push(st),
                PartitionLabel::ImplicitJ => part.s_ewj.push(st),
                PartitionLabel::Ambiguous => part.ambiguous.push(st),
                PartitionLabel::Rest => {
                    part.counts.rest -= 1;
                    part.counts.total -= 1;
                }
            }
        }
        for _ in &rest {
            part.counts.bump(PartitionLabel::Rest);
        }
        part.rest = CorpusStream::new(rest);
        part
    }
}

pub fn partition(
    corpus: &CorpusStream,
    lexicon: &BiasLexicon,
    opts: &PartitionOptions,
) -> CorpusPartition {
    let labelled: Vec<Classification> = corpus
        .sentences()
        .par_iter()
        .map(|s| classify(&s.tokens, lexicon, opts))
        .collect();

    let mut statements = Vec::new();
    let mut rest = Vec::new();
    for (sentence, class) in corpus.iter().zip(labelled) {
        if class.label == PartitionLabel::Rest {
            rest.push(sentence.clone());
        } else {
            statements.push(Statement {
                sentence: sentence.clone(),
                matched_target_words: class.targets,
                matched_attribute_words: class.attributes,
                label: class.label,
            });
        }
    }
    CorpusPartition::from_parts(lexicon.id.clone(), statements, rest)
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub corpus: CorpusStream,
    pub removed: usize,
}

/// Drops every sentence that is explicit under any of `lexicons`.
pub fn filter_explicit(
    corpus: &CorpusStream,
    lexicons: &[BiasLexicon],
    opts: &PartitionOptions,
) -> FilterOutcome {
    let keep: Vec<bool> = corpus
        .sentences()
        .par_iter()
        .map(|s| {
            !lexicons
                .iter()
                .any(|lex| classify(&s.tokens, lex, opts).label.is_explicit())
        })
        .collect();
    let kept: Vec<Sentence> = corpus
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(s, _)| s.clone())
        .collect();
    FilterOutcome {
        removed: corpus.total_count() - kept.len(),
        corpus: CorpusStream::new(kept),
    }
}

/// One JSON object per line.
pub fn to_jsonl_lines<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn parse_lines<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>, CorpusError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError::MalformedRecord {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads statements written by [`to_jsonl_lines`]. Tokens are recomputed
/// from the text rather than trusted.
pub fn parse_statements(text: &str) -> Result<Vec<Statement>, CorpusError> {
    let mut v: Vec<Statement> = parse_lines(text)?;
    for st in &mut v {
        st.sentence.tokens = tokenize(&st.sentence.text);
    }
    Ok(v)
}

pub fn parse_sentences(text: &str) -> Result<Vec<Sentence>, CorpusError> {
    let mut v: Vec<Sentence> = parse_lines(text)?;
    for s in &mut v {
        s.tokens = tokenize(&s.text);
    }
    Ok(v)
}

/// Per-concept-pair statement counts, one row per corpus and lexicon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub lexicon_id: String,
    pub corpus: String,
    pub concept_i: String,
    pub concept_j: String,
    pub counts: PartitionCounts,
    pub options: PartitionOptions,
    pub rules: String,
}

pub const LABEL_RULES: &str = "explicit: concept word + attribute word; implicit: exemplar word + attribute word, no concept word; \
concept beats exemplar; target words from both sides -> ambiguous (excluded); any one attribute word from either attribute set suffices";

impl PartitionSummary {
    pub fn new(
        part: &CorpusPartition,
        lexicon: &BiasLexicon,
        corpus: &str,
        opts: PartitionOptions,
    ) -> Self {
        PartitionSummary {
            lexicon_id: lexicon.id.clone(),
            corpus: corpus.to_string(),
            concept_i: lexicon.concept_pair.name_i.clone(),
            concept_j: lexicon.concept_pair.name_j.clone(),
            counts: part.counts,
            options: opts,
            rules: LABEL_RULES.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_plaintext, IngestOptions};
    use crate::lexicon::tests::insect_flower_doc;

    fn lexicon() -> BiasLexicon {
        BiasLexicon::from_json_str(&insect_flower_doc().to_string()).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        crate::corpus::tokenize(s)
    }

    fn label(s: &str) -> PartitionLabel {
        classify(&toks(s), &lexicon(), &PartitionOptions::default()).label
    }

    #[test]
    fn labels_of_worked_examples() {
        // Flower is the j side in this lexicon.
        assert_eq!(label("Flower is not beautiful"), PartitionLabel::ExplicitJ);
        assert_eq!(label("Rose is beautiful"), PartitionLabel::ImplicitJ);
        assert_eq!(label("Ants crawl on the rose"), PartitionLabel::Rest);
        assert_eq!(
            label("The flower and the insect are pleasant"),
            PartitionLabel::Ambiguous
        );
        assert_eq!(
            label("The ant and the rose are ugly"),
            PartitionLabel::Ambiguous
        );
        // concept beats exemplar
        assert_eq!(
            label("The insect near the rose is ugly"),
            PartitionLabel::ExplicitI
        );
    }

    #[test]
    fn ambiguous_sentence_counted_once() {
        let corpus = parse_plaintext(
            b"The flower and the insect are pleasant.\nRose is beautiful.",
            "t",
            IngestOptions::default(),
        )
        .unwrap()
        .corpus;
        let part = partition(&corpus, &lexicon(), &PartitionOptions::default());
        assert_eq!(part.ambiguous_count(), 1);
        assert_eq!(part.counts.ambiguous, 1);
        assert_eq!(part.s_cwi.len() + part.s_cwj.len(), 0);
        assert_eq!(part.s_ewj.len(), 1);
        assert_eq!(part.counts.total, 2);
    }

    #[test]
    fn match_spans_examples() {
        let set = WordSet::new("s", ["rose"]).unwrap();
        assert_eq!(
            entries(&match_spans(&toks("rose is beautiful"), &set)),
            ["rose"]
        );
        let set = WordSet::new("s", ["new york", "york"]).unwrap();
        assert_eq!(entries(&match_spans(&toks("new york"), &set)), ["new york"]);
        assert_eq!(entries(&match_spans(&toks("york new"), &set)), ["york"]);
        let set = WordSet::new("s", ["art"]).unwrap();
        assert!(match_spans(&toks("party"), &set).is_empty());
    }

    #[test]
    fn distance_limit() {
        let lex = lexicon();
        let opts = PartitionOptions {
            max_token_distance: Some(2),
        };
        let near = classify(&toks("rose is beautiful"), &lex, &opts);
        assert_eq!(near.label, PartitionLabel::ImplicitJ);
        let far = classify(&toks("rose a b c d beautiful"), &lex, &opts);
        assert_eq!(far.label, PartitionLabel::Rest);
    }

    #[test]
    fn filter_examples() {
        let lex = lexicon();
        let corpus = parse_plaintext(
            b"Flower is not beautiful. Rose is beautiful.",
            "t",
            IngestOptions::default(),
        )
        .unwrap()
        .corpus;
        let out = filter_explicit(
            &corpus,
            std::slice::from_ref(&lex),
            &PartitionOptions::default(),
        );
        assert_eq!(out.removed, 1);
        assert_eq!(out.corpus.sentences()[0].text, "Rose is beautiful.");

        let plain = parse_plaintext(b"Rose is red. Sky.", "t", IngestOptions::default())
            .unwrap()
            .corpus;
        let out = filter_explicit(
            &plain,
            std::slice::from_ref(&lex),
            &PartitionOptions::default(),
        );
        assert_eq!(out.corpus, plain);

        let out = filter_explicit(
            &CorpusStream::default(),
            &[lex],
            &PartitionOptions::default(),
        );
        assert_eq!((out.corpus.total_count(), out.removed), (0, 0));
    }

    #[test]
    fn statements_carry_matches() {
        let corpus = parse_plaintext(b"The ugly spider.", "t", IngestOptions::default())
            .unwrap()
            .corpus;
        let part = partition(&corpus, &lexicon(), &PartitionOptions::default());
        let st = &part.s_ewi[0];
        assert_eq!(st.matched_target_words, ["spider"]);
        assert_eq!(st.matched_attribute_words, ["ugly"]);
    }

    #[test]
    fn statements_round_trip() {
        let c = crate::corpus::parse_plaintext(
            b"the ant is ugly. the rose is pleasant. nothing here.",
            "t",
            Default::default(),
        )
        .unwrap()
        .corpus;
        let part = partition(&c, &lexicon(), &PartitionOptions::default());
        let text = to_jsonl_lines(&part.s_ewi);
        assert_eq!(parse_statements(&text).unwrap(), part.s_ewi);
        let rest = to_jsonl_lines(part.rest.sentences());
        assert_eq!(parse_sentences(&rest).unwrap(), part.rest.sentences());
        assert!(matches!(
            parse_statements("{}\n"),
            Err(CorpusError::MalformedRecord { line: 1, .. })
        ));
    }
}
