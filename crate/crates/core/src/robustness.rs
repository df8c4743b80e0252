//! Do the conclusions survive procedural changes?
//!
//! Three trial kinds: random exemplar subsets against the full-set baseline,
//! nested subsets S2 ⊂ S1 against each other, and the same subset under two
//! different scorers. A conclusion is the triple of signs of explicit bias,
//! implicit bias and their difference; two conclusions agree when all three
//! signs match.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biasmeter::{explicit_bias, implicit_bias, BiasError, ScoredCollections};
use crate::extract::{CorpusPartition, Statement};
use crate::lexicon::{BiasLexicon, WordSet};
use crate::rng;
use crate::sentiment::{score_collection, ScoreCache, ScorerSpec, SentimentError, SentimentScore};

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_FRACTION: f64 = 0.5;
pub const DEFAULT_S1_FRACTION: f64 = 0.75;
pub const DEFAULT_S2_FRACTION: f64 = 0.5;
pub const ZERO_BAND: f64 = 1e-12;
pub const CONSISTENCY_RULE: &str = "consistent when the signs of explicit bias, implicit bias and their difference all agree (zero band 1e-12)";

#[derive(Debug, thiserror::Error)]
pub enum RobustnessError {
    #[error("{set}: a {fraction} subset of {size} word(s) keeps {kept}, need at least 2")]
    SubsetTooSmall {
        set: String,
        size: usize,
        fraction: f64,
        kept: usize,
    },
    #[error("fraction {0} outside (0, 1]")]
    BadFraction(f64),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("baseline: {0}")]
    Baseline(#[from] BiasError),
    #[error(transparent)]
    Sentiment(#[from] SentimentError),
}

impl RobustnessError {
    pub fn code(&self) -> &'static str {
        match self {
            RobustnessError::SubsetTooSmall { .. } => "robustness.subset_too_small",
            RobustnessError::BadFraction(_) => "robustness.bad_fraction",
            RobustnessError::NoTrials => "robustness.no_trials",
            RobustnessError::Baseline(e) => e.code(),
            RobustnessError::Sentiment(e) => e.code(),
        }
    }
}

fn sign(x: f64) -> i8 {
    if x > ZERO_BAND {
        1
    } else if x < -ZERO_BAND {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusion {
    pub explicit_sign: i8,
    pub implicit_sign: i8,
    pub difference_sign: i8,
}

impl Conclusion {
    pub fn from_biases(explicit: f64, implicit: f64) -> Self {
        Conclusion {
            explicit_sign: sign(explicit),
            implicit_sign: sign(implicit),
            difference_sign: sign(explicit - implicit),
        }
    }

    pub fn from_scores(sc: &ScoredCollections) -> Result<Self, BiasError> {
        Ok(Self::from_biases(explicit_bias(sc)?, implicit_bias(sc)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    ExemplarChoice,
    SetSize,
    ClassifierChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetDraw {
    pub stage: String,
    pub exemplars_i: Vec<String>,
    pub exemplars_j: Vec<String>,
}

/// One line of the trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub draws: Vec<SubsetDraw>,
    /// Conclusions compared in this trial, in kind-specific order:
    /// the subset (choice), S1 then S2 (size), scorer a then b (classifier).
    pub conclusions: Vec<Option<Conclusion>>,
    pub consistent: bool,
    pub aborted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub kind: TrialKind,
    pub lexicon_id: String,
    pub scorer_ids: Vec<String>,
    pub trial_count: usize,
    pub consistent_trials: usize,
    pub aborted_trials: usize,
    pub consistency_percent: f64,
    pub baseline: Option<Conclusion>,
    pub fractions: Vec<f64>,
    pub seed: u64,
    pub consistency_rule: String,
    #[serde(skip)]
    pub trials: Vec<TrialRecord>,
}

impl RobustnessReport {
    fn assemble(
        kind: TrialKind,
        lexicon: &BiasLexicon,
        scorer_ids: Vec<String>,
        baseline: Option<Conclusion>,
        fractions: Vec<f64>,
        seed: u64,
        trials: Vec<TrialRecord>,
    ) -> Self {
        let consistent_trials = trials.iter().filter(|t| t.consistent).count();
        RobustnessReport {
            kind,
            lexicon_id: lexicon.id.clone(),
            scorer_ids,
            trial_count: trials.len(),
            consistent_trials,
            aborted_trials: trials.iter().filter(|t| t.aborted).count(),
            consistency_percent: 100.0 * consistent_trials as f64 / trials.len() as f64,
            baseline,
            fractions,
            seed,
            consistency_rule: CONSISTENCY_RULE.to_string(),
            trials,
        }
    }

    /// The trial log as JSONL.
    pub fn log_jsonl(&self) -> String {
        self.trials
            .iter()
            .map(|t| serde_json::to_string(t).expect("trial record serializes") + "\n")
            .collect()
    }
}

/// Percentage re-derived from a trial log alone.
pub fn consistency_from_log(log: &[TrialRecord]) -> f64 {
    100.0 * log.iter().filter(|t| t.consistent).count() as f64 / log.len() as f64
}

struct ScoredStatement<'a> {
    score: i8,
    targets: &'a [String],
}

/// Partition statements with their scores, plus the exemplar-ambiguous
/// statements that a smaller exemplar set can turn implicit.
struct Scored<'a> {
    cwi: Vec<i8>,
    cwj: Vec<i8>,
    ewi: Vec<ScoredStatement<'a>>,
    ewj: Vec<ScoredStatement<'a>>,
    ambiguous: Vec<ScoredStatement<'a>>,
}

fn exemplar_ambiguous<'a>(
    partition: &'a CorpusPartition,
    lexicon: &BiasLexicon,
) -> Vec<&'a Statement> {
    let cp = &lexicon.concept_pair;
    partition
        .ambiguous
        .iter()
        .filter(|st| {
            st.matched_target_words
                .iter()
                .all(|w| !cp.concept_words_i.contains(w) && !cp.concept_words_j.contains(w))
        })
        .collect()
}

fn score_all<'a>(
    partition: &'a CorpusPartition,
    lexicon: &BiasLexicon,
    scorer: &ScorerSpec,
    mut cache: Option<&mut ScoreCache>,
) -> Result<Scored<'a>, SentimentError> {
    let mut run = |v: Vec<&'a Statement>| -> Result<Vec<ScoredStatement<'a>>, SentimentError> {
        let sentences: Vec<_> = v.iter().map(|s| &s.sentence).collect();
        let scores = score_collection(&sentences, scorer, cache.as_deref_mut())?;
        Ok(v.iter()
            .zip(scores)
            .map(|(st, (_, s))| ScoredStatement {
                score: s.value(),
                targets: &st.matched_target_words,
            })
            .collect())
    };
    let plain = |v: Vec<ScoredStatement<'a>>| v.into_iter().map(|s| s.score).collect::<Vec<_>>();
    Ok(Scored {
        cwi: plain(run(partition.s_cwi.iter().collect())?),
        cwj: plain(run(partition.s_cwj.iter().collect())?),
        ewi: run(partition.s_ewi.iter().collect())?,
        ewj: run(partition.s_ewj.iter().collect())?,
        ambiguous: run(exemplar_ambiguous(partition, lexicon))?,
    })
}

fn to_scores(v: impl IntoIterator<Item = i8>) -> Vec<SentimentScore> {
    v.into_iter()
        .map(|x| SentimentScore::from_sign(x as i64))
        .collect()
}

impl Scored<'_> {
    /// Collections as they would come out of re-partitioning the corpus with
    /// exemplar sets restricted to `keep_i` / `keep_j`.
    fn restricted(&self, keep_i: &BTreeSet<&str>, keep_j: &BTreeSet<&str>) -> ScoredCollections {
        let hits = |st: &ScoredStatement, keep: &BTreeSet<&str>| {
            st.targets.iter().any(|w| keep.contains(w.as_str()))
        };
        let mut ewi: Vec<i8> = self
            .ewi
            .iter()
            .filter(|s| hits(s, keep_i))
            .map(|s| s.score)
            .collect();
        let mut ewj: Vec<i8> = self
            .ewj
            .iter()
            .filter(|s| hits(s, keep_j))
            .map(|s| s.score)
            .collect();
        for st in &self.ambiguous {
            match (hits(st, keep_i), hits(st, keep_j)) {
                (true, false) => ewi.push(st.score),
                (false, true) => ewj.push(st.score),
                _ => {}
            }
        }
        ScoredCollections {
            scores_cwi: to_scores(self.cwi.iter().copied()),
            scores_cwj: to_scores(self.cwj.iter().copied()),
            scores_ewi: to_scores(ewi),
            scores_ewj: to_scores(ewj),
        }
    }

    fn full(&self) -> ScoredCollections {
        ScoredCollections {
            scores_cwi: to_scores(self.cwi.iter().copied()),
            scores_cwj: to_scores(self.cwj.iter().copied()),
            scores_ewi: to_scores(self.ewi.iter().map(|s| s.score)),
            scores_ewj: to_scores(self.ewj.iter().map(|s| s.score)),
        }
    }
}

fn subset_size(set_len: usize, fraction: f64) -> usize {
    ((fraction * set_len as f64).ceil() as usize).clamp(1, set_len)
}

fn check_fraction(f: f64) -> Result<(), RobustnessError> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(RobustnessError::BadFraction(f))
    }
}

fn check_size(
    set: &WordSet,
    size: usize,
    fraction: f64,
    kept: usize,
) -> Result<(), RobustnessError> {
    if kept < 2 {
        return Err(RobustnessError::SubsetTooSmall {
            set: set.label().to_string(),
            size,
            fraction,
            kept,
        });
    }
    Ok(())
}

fn draw<'w>(words: &[&'w str], k: usize, rng: &mut impl rand::Rng) -> Vec<&'w str> {
    let mut idx = sample(rng, words.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| words[i]).collect()
}

fn as_set<'w>(v: &[&'w str]) -> BTreeSet<&'w str> {
    v.iter().copied().collect()
}

fn owned(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn outcome(sc: &ScoredCollections) -> (Option<Conclusion>, Option<String>) {
    match Conclusion::from_scores(sc) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOptions {
    pub trials: usize,
    pub fraction: f64,
    pub seed: u64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            trials: DEFAULT_TRIALS,
            fraction: DEFAULT_FRACTION,
            seed: 0,
        }
    }
}

fn exemplar_words(lexicon: &BiasLexicon) -> (Vec<&str>, Vec<&str>) {
    let cp = &lexicon.concept_pair;
    (
        cp.exemplar_words_i
            .entries()
            .iter()
            .map(String::as_str)
            .collect(),
        cp.exemplar_words_j
            .entries()
            .iter()
            .map(String::as_str)
            .collect(),
    )
}

/// Random exemplar subsets against the full-set baseline.
pub fn exemplar_choice_trial(
    partition: &CorpusPartition,
    lexicon: &BiasLexicon,
    scorer: &ScorerSpec,
    opts: &TrialOptions,
    cache: Option<&mut ScoreCache>,
) -> Result<RobustnessReport, RobustnessError> {
    check_fraction(opts.fraction)?;
    if opts.trials == 0 {
        return Err(RobustnessError::NoTrials);
    }
    let cp = &lexicon.concept_pair;
    let (words_i, words_j) = exemplar_words(lexicon);
    let (ki, kj) = (
        subset_size(words_i.len(), opts.fraction),
        subset_size(words_j.len(), opts.fraction),
    );
    check_size(&cp.exemplar_words_i, words_i.len(), opts.fraction, ki)?;
    check_size(&cp.exemplar_words_j, words_j.len(), opts.fraction, kj)?;

    let scored = score_all(partition, lexicon, scorer, cache)?;
    let baseline = Conclusion::from_scores(&scored.full())?;

    let trials: Vec<TrialRecord> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(opts.seed, t as u64);
            let si = draw(&words_i, ki, &mut r);
            let sj = draw(&words_j, kj, &mut r);
            let sc = scored.restricted(&as_set(&si), &as_set(&sj));
            let (conclusion, note) = outcome(&sc);
            TrialRecord {
                trial: t,
                seed: opts.seed,
                draws: vec![SubsetDraw {
                    stage: "subset".into(),
                    exemplars_i: owned(&si),
                    exemplars_j: owned(&sj),
                }],
                consistent: conclusion == Some(baseline),
                conclusions: vec![conclusion],
                aborted: false,
                note,
            }
        })
        .collect();
    Ok(RobustnessReport::assemble(
        TrialKind::ExemplarChoice,
        lexicon,
        vec![scorer.id.clone()],
        Some(baseline),
        vec![opts.fraction],
        opts.seed,
        trials,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeOptions {
    pub trials: usize,
    pub s1_fraction: f64,
    pub s2_fraction: f64,
    pub seed: u64,
}

impl Default for SizeOptions {
    fn default() -> Self {
        SizeOptions {
            trials: DEFAULT_TRIALS,
            s1_fraction: DEFAULT_S1_FRACTION,
            s2_fraction: DEFAULT_S2_FRACTION,
            seed: 0,
        }
    }
}

/// Nested subsets: conclusion on S1 against conclusion on S2 ⊂ S1.
pub fn set_size_trial(
    partition: &CorpusPartition,
    lexicon: &BiasLexicon,
    scorer: &ScorerSpec,
    opts: &SizeOptions,
    cache: Option<&mut ScoreCache>,
) -> Result<RobustnessReport, RobustnessError> {
    check_fraction(opts.s1_fraction)?;
    check_fraction(opts.s2_fraction)?;
    if opts.trials == 0 {
        return Err(RobustnessError::NoTrials);
    }
    let cp = &lexicon.concept_pair;
    let (words_i, words_j) = exemplar_words(lexicon);
    let s1 = (
        subset_size(words_i.len(), opts.s1_fraction),
        subset_size(words_j.len(), opts.s1_fraction),
    );
    let s2 = (
        subset_size(s1.0, opts.s2_fraction),
        subset_size(s1.1, opts.s2_fraction),
    );
    check_size(&cp.exemplar_words_i, words_i.len(), opts.s1_fraction, s1.0)?;
    check_size(&cp.exemplar_words_j, words_j.len(), opts.s1_fraction, s1.1)?;
    check_size(&cp.exemplar_words_i, s1.0, opts.s2_fraction, s2.0)?;
    check_size(&cp.exemplar_words_j, s1.1, opts.s2_fraction, s2.1)?;

    let scored = score_all(partition, lexicon, scorer, cache)?;
    let baseline = Conclusion::from_scores(&scored.full()).ok();

    let trials: Vec<TrialRecord> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(opts.seed, t as u64);
            let s1i = draw(&words_i, s1.0, &mut r);
            let s1j = draw(&words_j, s1.1, &mut r);
            let s2i = draw(&s1i, s2.0, &mut r);
            let s2j = draw(&s1j, s2.1, &mut r);
            let (c1, n1) = outcome(&scored.restricted(&as_set(&s1i), &as_set(&s1j)));
            let (c2, n2) = outcome(&scored.restricted(&as_set(&s2i), &as_set(&s2j)));
            TrialRecord {
                trial: t,
                seed: opts.seed,
                draws: vec![
                    SubsetDraw {
                        stage: "s1".into(),
                        exemplars_i: owned(&s1i),
                        exemplars_j: owned(&s1j),
                    },
                    SubsetDraw {
                        stage: "s2".into(),
                        exemplars_i: owned(&s2i),
                        exemplars_j: owned(&s2j),
                    },
                ],
                consistent: c1.is_some() && c1 == c2,
                conclusions: vec![c1, c2],
                aborted: false,
                note: n1.or(n2),
            }
        })
        .collect();
    Ok(RobustnessReport::assemble(
        TrialKind::SetSize,
        lexicon,
        vec![scorer.id.clone()],
        baseline,
        vec![opts.s1_fraction, opts.s2_fraction],
        opts.seed,
        trials,
    ))
}

/// The same exemplar subset evaluated under two scorers.
pub fn classifier_choice_trial(
    partition: &CorpusPartition,
    lexicon: &BiasLexicon,
    scorer_a: &ScorerSpec,
    scorer_b: &ScorerSpec,
    opts: &TrialOptions,
    mut cache: Option<&mut ScoreCache>,
) -> Result<RobustnessReport, RobustnessError> {
    check_fraction(opts.fraction)?;
    if opts.trials == 0 {
        return Err(RobustnessError::NoTrials);
    }
    let cp = &lexicon.concept_pair;
    let (words_i, words_j) = exemplar_words(lexicon);
    let (ki, kj) = (
        subset_size(words_i.len(), opts.fraction),
        subset_size(words_j.len(), opts.fraction),
    );
    check_size(&cp.exemplar_words_i, words_i.len(), opts.fraction, ki)?;
    check_size(&cp.exemplar_words_j, words_j.len(), opts.fraction, kj)?;

    let scored_a = score_all(partition, lexicon, scorer_a, cache.as_deref_mut());
    let scored_b = score_all(partition, lexicon, scorer_b, cache);
    let failure = match (&scored_a, &scored_b) {
        (Err(e), _) => Some(format!("scorer {}: {e}", scorer_a.id)),
        (_, Err(e)) => Some(format!("scorer {}: {e}", scorer_b.id)),
        _ => None,
    };
    let baseline = scored_a
        .as_ref()
        .ok()
        .and_then(|s| Conclusion::from_scores(&s.full()).ok());

    let trials: Vec<TrialRecord> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(opts.seed, t as u64);
            let si = draw(&words_i, ki, &mut r);
            let sj = draw(&words_j, kj, &mut r);
            let (keep_i, keep_j) = (as_set(&si), as_set(&sj));
            let draws = vec![SubsetDraw {
                stage: "subset".into(),
                exemplars_i: owned(&si),
                exemplars_j: owned(&sj),
            }];
            match (&scored_a, &scored_b) {
                (Ok(a), Ok(b)) => {
                    let (ca, na) = outcome(&a.restricted(&keep_i, &keep_j));
                    let (cb, nb) = outcome(&b.restricted(&keep_i, &keep_j));
                    TrialRecord {
                        trial: t,
                        seed: opts.seed,
                        draws,
                        consistent: ca.is_some() && ca == cb,
                        conclusions: vec![ca, cb],
                        aborted: false,
                        note: na.or(nb),
                    }
                }
                _ => TrialRecord {
                    trial: t,
                    seed: opts.seed,
                    draws,
                    conclusions: vec![None, None],
                    consistent: false,
                    aborted: true,
                    note: failure.clone(),
                },
            }
        })
        .collect();
    Ok(RobustnessReport::assemble(
        TrialKind::ClassifierChoice,
        lexicon,
        vec![scorer_a.id.clone(), scorer_b.id.clone()],
        baseline,
        vec![opts.fraction],
        opts.seed,
        trials,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_plaintext, IngestOptions};
    use crate::extract::{partition, PartitionOptions};
    use crate::sentiment::SentimentLexicon;
    use serde_json::json;

    fn lexicon() -> BiasLexicon {
        BiasLexicon::from_json_str(
            &json!({
                "id": "t",
                "concept_pair": {
                    "name_i": "Insect", "name_j": "Flower",
                    "concept_words_i": ["insect"], "concept_words_j": ["flower"],
                    "exemplar_words_i": ["ant", "bee", "wasp", "moth"],
                    "exemplar_words_j": ["rose", "lily", "iris", "tulip"]
                },
                "attribute_pair": {
                    "name_p": "P", "name_q": "Q",
                    "attribute_words_p": ["lovely"], "attribute_words_q": ["awful"]
                }
            })
            .to_string(),
        )
        .unwrap()
    }

    fn part(text: &str) -> CorpusPartition {
        let c = parse_plaintext(text.as_bytes(), "t", IngestOptions::default())
            .unwrap()
            .corpus;
        partition(&c, &lexicon(), &PartitionOptions::default())
    }

    fn uniform_corpus() -> String {
        let mut s = String::new();
        for _ in 0..3 {
            s.push_str("the insect is lovely.\nthe flower is awful.\n");
            for w in ["ant", "bee", "wasp", "moth"] {
                s.push_str(&format!("the {w} is awful.\n"));
            }
            for w in ["rose", "lily", "iris", "tulip"] {
                s.push_str(&format!("the {w} is lovely.\n"));
            }
        }
        s
    }

    #[test]
    fn full_fraction_is_always_consistent() {
        let p = part(&uniform_corpus());
        let opts = TrialOptions {
            trials: 20,
            fraction: 1.0,
            seed: 1,
        };
        let r = exemplar_choice_trial(&p, &lexicon(), &ScorerSpec::builtin(), &opts, None).unwrap();
        assert_eq!(r.consistency_percent, 100.0);
        assert_eq!(r.trials.len(), 20);
    }

    #[test]
    fn uniform_signs_survive_any_half() {
        let p = part(&uniform_corpus());
        let opts = TrialOptions {
            trials: 50,
            fraction: 0.5,
            seed: 2,
        };
        let r = exemplar_choice_trial(&p, &lexicon(), &ScorerSpec::builtin(), &opts, None).unwrap();
        assert_eq!(r.consistency_percent, 100.0);
        let size = SizeOptions {
            trials: 50,
            seed: 3,
            ..SizeOptions::default()
        };
        let r = set_size_trial(&p, &lexicon(), &ScorerSpec::builtin(), &size, None).unwrap();
        assert_eq!(r.consistency_percent, 100.0);
    }

    #[test]
    fn contrarian_exemplar_flips_some_trials() {
        // "rose" alone carries many awful statements; the implicit sign follows it
        let mut s = String::new();
        for _ in 0..3 {
            s.push_str("the insect is lovely.\nthe flower is awful.\n");
            for w in ["ant", "bee", "wasp", "moth"] {
                s.push_str(&format!("the {w} is awful.\nthe {w} is lovely.\n"));
            }
            for w in ["lily", "iris", "tulip"] {
                s.push_str(&format!("the {w} is lovely.\n"));
            }
        }
        for _ in 0..40 {
            s.push_str("the rose is awful.\n");
        }
        let p = part(&s);
        let opts = TrialOptions {
            trials: 200,
            fraction: 0.5,
            seed: 4,
        };
        let r = exemplar_choice_trial(&p, &lexicon(), &ScorerSpec::builtin(), &opts, None).unwrap();
        assert!(r.consistency_percent > 0.0 && r.consistency_percent < 100.0);
        assert_eq!(r.consistency_percent, consistency_from_log(&r.trials));
        for t in &r.trials {
            let has_rose = t.draws[0].exemplars_j.iter().any(|w| w == "rose");
            assert_eq!(t.consistent, has_rose, "trial {}", t.trial);
        }

        let size = SizeOptions {
            trials: 200,
            seed: 5,
            ..SizeOptions::default()
        };
        let r = set_size_trial(&p, &lexicon(), &ScorerSpec::builtin(), &size, None).unwrap();
        assert!(r.consistency_percent < 100.0);
    }

    #[test]
    fn classifier_identity_and_polarity_swap() {
        let p = part(&uniform_corpus());
        let opts = TrialOptions {
            trials: 10,
            fraction: 0.5,
            seed: 6,
        };
        let a = ScorerSpec::builtin();
        let r = classifier_choice_trial(&p, &lexicon(), &a, &a, &opts, None).unwrap();
        assert_eq!(r.consistency_percent, 100.0);
        let b = ScorerSpec::with_lexicon(SentimentLexicon::builtin().swapped_polarity());
        let r = classifier_choice_trial(&p, &lexicon(), &a, &b, &opts, None).unwrap();
        assert_eq!(r.consistency_percent, 0.0);
    }

    #[test]
    fn failing_scorer_aborts_trials() {
        let p = part(&uniform_corpus());
        let opts = TrialOptions {
            trials: 5,
            fraction: 0.5,
            seed: 6,
        };
        let bad = ScorerSpec::external("bad", "exit 3");
        let r = classifier_choice_trial(&p, &lexicon(), &ScorerSpec::builtin(), &bad, &opts, None)
            .unwrap();
        assert_eq!(r.aborted_trials, 5);
        assert_eq!(r.consistency_percent, 0.0);
    }

    #[test]
    fn subset_too_small() {
        let p = part(&uniform_corpus());
        let opts = TrialOptions {
            trials: 5,
            fraction: 0.25,
            seed: 0,
        };
        let err =
            exemplar_choice_trial(&p, &lexicon(), &ScorerSpec::builtin(), &opts, None).unwrap_err();
        assert!(matches!(
            err,
            RobustnessError::SubsetTooSmall { kept: 1, .. }
        ));
    }

    #[test]
    fn restriction_equals_repartition() {
        let text = "the ant and the rose are lovely.\nthe bee is awful.\nthe lily and the moth are awful.\nthe iris is lovely.\nthe insect and the rose are awful.\n";
        let lex = lexicon();
        let p = part(text);
        let scored = score_all(&p, &lex, &ScorerSpec::builtin(), None).unwrap();
        let keep_i: BTreeSet<&str> = ["ant", "bee"].into_iter().collect();
        let keep_j: BTreeSet<&str> = ["iris", "tulip"].into_iter().collect();
        let sorted = |mut sc: ScoredCollections| {
            for v in [
                &mut sc.scores_cwi,
                &mut sc.scores_cwj,
                &mut sc.scores_ewi,
                &mut sc.scores_ewj,
            ] {
                v.sort();
            }
            sc
        };
        // collection order may differ; conclusions depend only on the multisets
        let got = sorted(scored.restricted(&keep_i, &keep_j));

        let sub = lex.with_exemplars(
            lex.concept_pair
                .exemplar_words_i
                .restricted_to(&keep_i)
                .unwrap(),
            lex.concept_pair
                .exemplar_words_j
                .restricted_to(&keep_j)
                .unwrap(),
        );
        let c = parse_plaintext(text.as_bytes(), "t", IngestOptions::default())
            .unwrap()
            .corpus;
        let p2 = partition(&c, &sub, &PartitionOptions::default());
        let direct = crate::biasmeter::score_partition(&p2, &ScorerSpec::builtin(), None).unwrap();
        assert_eq!(got, sorted(direct));
    }
}
