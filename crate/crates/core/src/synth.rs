//! Synthetic corpora with planted sentiment, for tests and demos.
//!
//! Every targeted sentence has the shape `the <target> <verb> <attribute> <fillers>.`
//! with exactly one target word, so its partition label is known by
//! construction and its builtin score is the attribute's polarity.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusStream, Sentence};
use crate::lexicon::BiasLexicon;
use crate::rng;

pub const CONCEPT_I: [&str; 4] = ["insect", "insects", "bug", "bugs"];
pub const CONCEPT_J: [&str; 4] = ["flower", "flowers", "blossom", "blossoms"];
pub const EXEMPLAR_I: [&str; 8] = [
    "ant", "bee", "wasp", "moth", "beetle", "spider", "flea", "mosquito",
];
pub const EXEMPLAR_J: [&str; 8] = [
    "rose", "tulip", "lily", "daisy", "iris", "orchid", "violet", "lilac",
];
pub const PLEASANT: [&str; 8] = [
    "lovely",
    "beautiful",
    "pleasant",
    "wonderful",
    "delightful",
    "charming",
    "sweet",
    "gentle",
];
pub const UNPLEASANT: [&str; 8] = [
    "ugly",
    "nasty",
    "awful",
    "horrible",
    "disgusting",
    "dreadful",
    "hideous",
    "vile",
];
pub const FILLERS: [&str; 20] = [
    "garden",
    "morning",
    "today",
    "near",
    "river",
    "window",
    "market",
    "yesterday",
    "again",
    "city",
    "field",
    "house",
    "road",
    "table",
    "paper",
    "often",
    "around",
    "there",
    "here",
    "evening",
];
const VERBS: [&str; 5] = ["is", "was", "seems", "looks", "appeared"];

pub fn planted_lexicon_json() -> String {
    serde_json::json!({
        "id": "synthetic-insect-flower",
        "concept_pair": {
            "name_i": "Insect",
            "name_j": "Flower",
            "concept_words_i": CONCEPT_I,
            "concept_words_j": CONCEPT_J,
            "exemplar_words_i": EXEMPLAR_I,
            "exemplar_words_j": EXEMPLAR_J
        },
        "attribute_pair": {
            "name_p": "Pleasant",
            "name_q": "Unpleasant",
            "attribute_words_p": PLEASANT,
            "attribute_words_q": UNPLEASANT
        }
    })
    .to_string()
}

pub fn planted_lexicon() -> BiasLexicon {
    BiasLexicon::from_json_str(&planted_lexicon_json()).expect("synthetic lexicon is valid")
}

/// Probability that a sentence of each collection carries a pleasant attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarity {
    pub cwi: f64,
    pub cwj: f64,
    pub ewi: f64,
    pub ewj: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedParams {
    pub sentences: usize,
    pub explicit_fraction: f64,
    pub implicit_fraction: f64,
    pub polarity: Polarity,
    pub seed: u64,
}

impl Default for PlantedParams {
    /// Explicit statements favor i, implicit statements disfavor i.
    fn default() -> Self {
        PlantedParams {
            sentences: 50_000,
            explicit_fraction: 0.25,
            implicit_fraction: 0.25,
            polarity: Polarity {
                cwi: 0.8,
                cwj: 0.5,
                ewi: 0.2,
                ewj: 0.5,
            },
            seed: 0,
        }
    }
}

fn pick<'a>(r: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words.choose(r).copied().expect("non-empty word list")
}

fn fillers(r: &mut ChaCha8Rng, out: &mut String, n: usize) {
    for _ in 0..n {
        out.push(' ');
        out.push_str(pick(r, &FILLERS));
    }
}

fn targeted(r: &mut ChaCha8Rng, targets: &[&str], p_pleasant: f64) -> String {
    let attr = if r.gen_bool(p_pleasant) {
        pick(r, &PLEASANT)
    } else {
        pick(r, &UNPLEASANT)
    };
    let mut s = format!("the {} {} {attr}", pick(r, targets), pick(r, &VERBS));
    let n = r.gen_range(0..4);
    fillers(r, &mut s, n);
    s.push('.');
    s
}

fn filler_sentence(r: &mut ChaCha8Rng) -> String {
    let mut s = String::from("the");
    let n = r.gen_range(2..8);
    fillers(r, &mut s, n);
    s.push('.');
    s
}

/// One sentence of the planted design; `slot` is a uniform draw in [0, 1).
fn planted_sentence(r: &mut ChaCha8Rng, p: &PlantedParams, pol: &Polarity) -> String {
    let slot: f64 = r.gen();
    let e = p.explicit_fraction;
    let i = p.implicit_fraction;
    if slot < e / 2.0 {
        targeted(r, &CONCEPT_I, pol.cwi)
    } else if slot < e {
        targeted(r, &CONCEPT_J, pol.cwj)
    } else if slot < e + i / 2.0 {
        targeted(r, &EXEMPLAR_I, pol.ewi)
    } else if slot < e + i {
        targeted(r, &EXEMPLAR_J, pol.ewj)
    } else {
        filler_sentence(r)
    }
}

pub fn planted_corpus(p: &PlantedParams) -> CorpusStream {
    let mut r = rng::stream(p.seed, 0);
    (0..p.sentences)
        .map(|k| {
            let text = planted_sentence(&mut r, p, &p.polarity);
            Sentence::new(format!("synth:{k}"), &text, None, "synth")
        })
        .collect()
}

/// The planted design with no concept-word statements at all.
pub fn zero_explicit_corpus(sentences: usize, seed: u64) -> CorpusStream {
    planted_corpus(&PlantedParams {
        sentences,
        explicit_fraction: 0.0,
        implicit_fraction: 0.5,
        seed,
        ..PlantedParams::default()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftParams {
    pub months: usize,
    pub per_month: usize,
    /// Pleasant probability for concept-i statements moves linearly between these.
    pub cwi_start: f64,
    pub cwi_end: f64,
    pub seed: u64,
}

impl Default for DriftParams {
    fn default() -> Self {
        DriftParams {
            months: 12,
            per_month: 600,
            cwi_start: 0.1,
            cwi_end: 0.9,
            seed: 0,
        }
    }
}

/// JSONL lines `{"text", "timestamp"}` starting January 2015: explicit
/// sentiment toward i drifts month to month, implicit sentiment stays put.
pub fn drifting_jsonl(d: &DriftParams) -> String {
    let mut r = rng::stream(d.seed, 0);
    let mut out = String::new();
    for m in 0..d.months {
        let t = if d.months > 1 {
            m as f64 / (d.months - 1) as f64
        } else {
            0.0
        };
        let p = PlantedParams {
            sentences: d.per_month,
            explicit_fraction: 0.4,
            implicit_fraction: 0.4,
            polarity: Polarity {
                cwi: d.cwi_start + (d.cwi_end - d.cwi_start) * t,
                cwj: 0.5,
                ewi: 0.2,
                ewj: 0.5,
            },
            seed: d.seed,
        };
        let (year, month) = (2015 + m / 12, m % 12 + 1);
        for _ in 0..d.per_month {
            let text = planted_sentence(&mut r, &p, &p.polarity);
            let day = r.gen_range(1..=28);
            let hour = r.gen_range(0..24);
            let _ = writeln!(
                out,
                "{}",
                serde_json::json!({
                    "text": text,
                    "timestamp": format!("{year:04}-{month:02}-{day:02}T{hour:02}:00:00Z"),
                })
            );
        }
    }
    out
}

/// Sentences of 1 to 12 tokens drawn from every lexicon word plus fillers,
/// so all partition labels (Ambiguous included) occur.
pub fn lexicon_soup(sentences: usize, seed: u64) -> CorpusStream {
    let pool: Vec<&str> = CONCEPT_I
        .iter()
        .chain(&CONCEPT_J)
        .chain(&EXEMPLAR_I)
        .chain(&EXEMPLAR_J)
        .chain(&PLEASANT)
        .chain(&UNPLEASANT)
        .chain(&FILLERS)
        .chain(&FILLERS)
        .copied()
        .collect();
    let mut r = rng::stream(seed, 0);
    (0..sentences)
        .map(|k| {
            let n = r.gen_range(1..=12);
            let words: Vec<&str> = (0..n).map(|_| pick(&mut r, &pool)).collect();
            Sentence::new(format!("soup:{k}"), &words.join(" "), None, "soup")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{partition, PartitionOptions};

    #[test]
    fn deterministic() {
        let p = PlantedParams {
            sentences: 200,
            ..PlantedParams::default()
        };
        assert_eq!(planted_corpus(&p), planted_corpus(&p));
        let d = DriftParams {
            per_month: 10,
            ..DriftParams::default()
        };
        assert_eq!(drifting_jsonl(&d), drifting_jsonl(&d));
        assert_eq!(drifting_jsonl(&d).lines().count(), 120);
    }

    #[test]
    fn planted_sentences_are_never_ambiguous() {
        let c = planted_corpus(&PlantedParams {
            sentences: 2000,
            ..PlantedParams::default()
        });
        let part = partition(&c, &planted_lexicon(), &PartitionOptions::default());
        assert_eq!(part.counts.ambiguous, 0);
        assert!(part.counts.explicit_i > 0 && part.counts.implicit_j > 0);
    }

    #[test]
    fn zero_explicit_has_none() {
        let c = zero_explicit_corpus(1000, 1);
        let part = partition(&c, &planted_lexicon(), &PartitionOptions::default());
        assert_eq!(part.counts.explicit_i + part.counts.explicit_j, 0);
        assert!(part.counts.implicit_i > 0);
    }
}
