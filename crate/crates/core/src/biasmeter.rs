//! Explicit and implicit bias from scored statement collections.
//!
//! Both values are a difference of mean sentiment, concept j minus concept
//! i: positive means the corpus prefers concept j. Whether the two differ is
//! decided by a permutation test that reshuffles explicit/implicit labels
//! within each concept side.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extract::{CorpusPartition, PartitionCounts, Statement};
use crate::lexicon::BiasLexicon;
use crate::rng;
use crate::sentiment::{score_collection, ScoreCache, ScorerSpec, SentimentError, SentimentScore};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_SIGNIFICANCE: f64 = 1e-4;
/// Resampled statistics within this distance of the observed one count as
/// ties, and ties count as exceedances.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub const SIGN_CONVENTION: &str =
    "bias = mean sentiment on concept j minus mean on concept i; positive prefers concept j (name_j), negative prefers concept i (name_i)";
pub const TEST_DESCRIPTION: &str =
    "two-sided permutation test of |explicit - implicit|; explicit/implicit labels reshuffled within each concept side; p = (1 + #{T* >= T}) / (1 + resamples)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collection {
    ExplicitI,
    ExplicitJ,
    ImplicitI,
    ImplicitJ,
}

impl std::fmt::Display for Collection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Collection::ExplicitI => "S_Cwi (explicit, concept i)",
            Collection::ExplicitJ => "S_Cwj (explicit, concept j)",
            Collection::ImplicitI => "S_Ewi (implicit, concept i)",
            Collection::ImplicitJ => "S_Ewj (implicit, concept j)",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BiasError {
    #[error("collection {0} is empty; the bias is undefined")]
    EmptyCollection(Collection),
    #[error("n_resamples must be at least 1")]
    NoResamples,
    #[error(transparent)]
    Sentiment(#[from] SentimentError),
}

impl BiasError {
    pub fn code(&self) -> &'static str {
        match self {
            BiasError::EmptyCollection(_) => "biasmeter.empty_collection",
            BiasError::NoResamples => "biasmeter.no_resamples",
            BiasError::Sentiment(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoredCollections {
    pub scores_cwi: Vec<SentimentScore>,
    pub scores_cwj: Vec<SentimentScore>,
    pub scores_ewi: Vec<SentimentScore>,
    pub scores_ewj: Vec<SentimentScore>,
}

fn total(scores: &[SentimentScore]) -> i64 {
    scores.iter().map(|s| s.value() as i64).sum()
}

fn mean_of(scores: &[SentimentScore], which: Collection) -> Result<f64, BiasError> {
    if scores.is_empty() {
        return Err(BiasError::EmptyCollection(which));
    }
    Ok(total(scores) as f64 / scores.len() as f64)
}

impl ScoredCollections {
    pub fn from_values(cwi: &[i8], cwj: &[i8], ewi: &[i8], ewj: &[i8]) -> Self {
        let conv = |v: &[i8]| -> Vec<SentimentScore> {
            v.iter()
                .map(|&x| SentimentScore::try_from(x as i64).expect("score in {-1,0,1}"))
                .collect()
        };
        ScoredCollections {
            scores_cwi: conv(cwi),
            scores_cwj: conv(cwj),
            scores_ewi: conv(ewi),
            scores_ewj: conv(ewj),
        }
    }

    /// i and j roles exchanged.
    pub fn swap_sides(&self) -> Self {
        ScoredCollections {
            scores_cwi: self.scores_cwj.clone(),
            scores_cwj: self.scores_cwi.clone(),
            scores_ewi: self.scores_ewj.clone(),
            scores_ewj: self.scores_ewi.clone(),
        }
    }

    fn check_nonempty(&self) -> Result<(), BiasError> {
        for (v, c) in [
            (&self.scores_cwi, Collection::ExplicitI),
            (&self.scores_cwj, Collection::ExplicitJ),
            (&self.scores_ewi, Collection::ImplicitI),
            (&self.scores_ewj, Collection::ImplicitJ),
        ] {
            if v.is_empty() {
                return Err(BiasError::EmptyCollection(c));
            }
        }
        Ok(())
    }
}

/// mean(S_Cwj) - mean(S_Cwi).
pub fn explicit_bias(sc: &ScoredCollections) -> Result<f64, BiasError> {
    let i = mean_of(&sc.scores_cwi, Collection::ExplicitI)?;
    let j = mean_of(&sc.scores_cwj, Collection::ExplicitJ)?;
    Ok(j - i)
}

/// mean(S_Ewj) - mean(S_Ewi).
pub fn implicit_bias(sc: &ScoredCollections) -> Result<f64, BiasError> {
    let i = mean_of(&sc.scores_ewi, Collection::ImplicitI)?;
    let j = mean_of(&sc.scores_ewj, Collection::ImplicitJ)?;
    Ok(j - i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub statistic: f64,
    pub p_value: f64,
    pub exceedances: usize,
    pub n_resamples: usize,
    pub seed: u64,
}

/// Sizes and integer score sums of the four collections; everything the
/// permutation test needs.
#[derive(Debug, Clone, Copy)]
struct Sums {
    n: [usize; 4],
    sum: [i64; 4],
}

impl Sums {
    fn statistic(&self) -> f64 {
        let m = |k: usize| self.sum[k] as f64 / self.n[k] as f64;
        let explicit = m(1) - m(0);
        let implicit = m(3) - m(2);
        (explicit - implicit).abs()
    }
}

/// Reassigns one side's pooled scores to groups of the original sizes and
/// returns the new sum of the concept-word group.
fn resample_side(pool: &[i8], concept_size: usize, rng: &mut impl rand::Rng) -> i64 {
    let n = pool.len();
    let pool_sum: i64 = pool.iter().map(|&x| x as i64).sum();
    if concept_size * 2 <= n {
        sample(rng, n, concept_size)
            .iter()
            .map(|k| pool[k] as i64)
            .sum()
    } else {
        let other: i64 = sample(rng, n, n - concept_size)
            .iter()
            .map(|k| pool[k] as i64)
            .sum();
        pool_sum - other
    }
}

pub fn difference_significance(
    sc: &ScoredCollections,
    n_resamples: usize,
    seed: u64,
) -> Result<Significance, BiasError> {
    sc.check_nonempty()?;
    if n_resamples == 0 {
        return Err(BiasError::NoResamples);
    }
    let observed = Sums {
        n: [
            sc.scores_cwi.len(),
            sc.scores_cwj.len(),
            sc.scores_ewi.len(),
            sc.scores_ewj.len(),
        ],
        sum: [
            total(&sc.scores_cwi),
            total(&sc.scores_cwj),
            total(&sc.scores_ewi),
            total(&sc.scores_ewj),
        ],
    };
    let statistic = observed.statistic();
    let values = |v: &[SentimentScore]| v.iter().map(|s| s.value()).collect::<Vec<i8>>();
    let pool_i: Vec<i8> = [values(&sc.scores_cwi), values(&sc.scores_ewi)].concat();
    let pool_j: Vec<i8> = [values(&sc.scores_cwj), values(&sc.scores_ewj)].concat();
    let (sum_i, sum_j) = (
        observed.sum[0] + observed.sum[2],
        observed.sum[1] + observed.sum[3],
    );

    let exceedances: usize = rng::chunks(n_resamples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, start, end)| {
            let mut r = rng::stream(seed, chunk);
            let mut hits = 0;
            for _ in start..end {
                let cwi = resample_side(&pool_i, observed.n[0], &mut r);
                let cwj = resample_side(&pool_j, observed.n[1], &mut r);
                let star = Sums {
                    n: observed.n,
                    sum: [cwi, cwj, sum_i - cwi, sum_j - cwj],
                };
                if star.statistic() >= statistic - TIE_TOLERANCE {
                    hits += 1;
                }
            }
            hits
        })
        .sum();

    Ok(Significance {
        statistic,
        p_value: (1 + exceedances) as f64 / (1 + n_resamples) as f64,
        exceedances,
        n_resamples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub n_resamples: usize,
    pub seed: u64,
    pub significance_threshold: f64,
}

impl Default for BiasConfig {
    fn default() -> Self {
        BiasConfig {
            n_resamples: DEFAULT_RESAMPLES,
            seed: 0,
            significance_threshold: DEFAULT_SIGNIFICANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionStats {
    pub count: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionSummary {
    pub explicit_i: CollectionStats,
    pub explicit_j: CollectionStats,
    pub implicit_i: CollectionStats,
    pub implicit_j: CollectionStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub corpus: String,
    pub lexicon_id: String,
    pub concept_i: String,
    pub concept_j: String,
    pub scorer_id: String,
    pub explicit_bias: f64,
    pub implicit_bias: f64,
    pub difference: f64,
    pub p_value: f64,
    pub significant: bool,
    pub significance_threshold: f64,
    pub n_resamples: usize,
    pub seed: u64,
    pub collections: CollectionSummary,
    pub counts: PartitionCounts,
    pub sign_convention: String,
    pub test: String,
}

/// Context that goes into a report but not into the arithmetic.
#[derive(Debug, Clone)]
pub struct ReportContext<'a> {
    pub corpus: &'a str,
    pub lexicon: &'a BiasLexicon,
    pub scorer_id: &'a str,
    pub counts: PartitionCounts,
}

pub fn report_from_scores(
    sc: &ScoredCollections,
    ctx: &ReportContext<'_>,
    config: &BiasConfig,
) -> Result<BiasReport, BiasError> {
    let explicit = explicit_bias(sc)?;
    let implicit = implicit_bias(sc)?;
    let sig = difference_significance(sc, config.n_resamples, config.seed)?;
    let stats = |v: &[SentimentScore]| CollectionStats {
        count: v.len(),
        mean: total(v) as f64 / v.len() as f64,
    };
    Ok(BiasReport {
        corpus: ctx.corpus.to_string(),
        lexicon_id: ctx.lexicon.id.clone(),
        concept_i: ctx.lexicon.concept_pair.name_i.clone(),
        concept_j: ctx.lexicon.concept_pair.name_j.clone(),
        scorer_id: ctx.scorer_id.to_string(),
        explicit_bias: explicit,
        implicit_bias: implicit,
        difference: explicit - implicit,
        p_value: sig.p_value,
        significant: sig.p_value <= config.significance_threshold,
        significance_threshold: config.significance_threshold,
        n_resamples: sig.n_resamples,
        seed: sig.seed,
        collections: CollectionSummary {
            explicit_i: stats(&sc.scores_cwi),
            explicit_j: stats(&sc.scores_cwj),
            implicit_i: stats(&sc.scores_ewi),
            implicit_j: stats(&sc.scores_ewj),
        },
        counts: ctx.counts,
        sign_convention: SIGN_CONVENTION.to_string(),
        test: TEST_DESCRIPTION.to_string(),
    })
}

/// Scores the four collections of a partition, in statement order.
pub fn score_partition(
    partition: &CorpusPartition,
    scorer: &ScorerSpec,
    mut cache: Option<&mut ScoreCache>,
) -> Result<ScoredCollections, BiasError> {
    let mut run = |v: &[Statement]| -> Result<Vec<SentimentScore>, BiasError> {
        let sentences: Vec<_> = v.iter().map(|s| &s.sentence).collect();
        Ok(score_collection(&sentences, scorer, cache.as_deref_mut())?
            .into_iter()
            .map(|(_, s)| s)
            .collect())
    };
    Ok(ScoredCollections {
        scores_cwi: run(&partition.s_cwi)?,
        scores_cwj: run(&partition.s_cwj)?,
        scores_ewi: run(&partition.s_ewi)?,
        scores_ewj: run(&partition.s_ewj)?,
    })
}

/// Scores a partition and computes the full report.
pub fn measure(
    partition: &CorpusPartition,
    lexicon: &BiasLexicon,
    corpus: &str,
    scorer: &ScorerSpec,
    config: &BiasConfig,
    cache: Option<&mut ScoreCache>,
) -> Result<BiasReport, BiasError> {
    let sc = score_partition(partition, scorer, cache)?;
    report_from_scores(
        &sc,
        &ReportContext {
            corpus,
            lexicon,
            scorer_id: &scorer.id,
            counts: partition.counts,
        },
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(cwi: &[i8], cwj: &[i8], ewi: &[i8], ewj: &[i8]) -> ScoredCollections {
        ScoredCollections::from_values(cwi, cwj, ewi, ewj)
    }

    // plain f64 mean, independent of the integer-sum route
    fn naive_mean(v: &[i8]) -> f64 {
        v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn explicit_examples() {
        assert_eq!(
            explicit_bias(&sc(&[1, 1], &[-1, -1], &[0], &[0])).unwrap(),
            -2.0
        );
        assert_eq!(
            explicit_bias(&sc(&[0, 0, 0], &[0], &[0], &[0])).unwrap(),
            0.0
        );
        let got = explicit_bias(&sc(&[1, 0, -1, 1], &[1, 1, 0], &[0], &[0])).unwrap();
        let oracle = naive_mean(&[1, 1, 0]) - naive_mean(&[1, 0, -1, 1]);
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 5.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn implicit_examples() {
        assert_eq!(implicit_bias(&sc(&[0], &[0], &[-1], &[1])).unwrap(), 2.0);
        assert_eq!(
            implicit_bias(&sc(&[0], &[0], &[1, 0, -1], &[-1, 1, 0])).unwrap(),
            0.0
        );
        let got = implicit_bias(&sc(&[0], &[0], &[1, 1, 0], &[0, -1])).unwrap();
        assert!((got - (-7.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_collections_are_errors() {
        let err = explicit_bias(&sc(&[], &[1], &[1], &[1])).unwrap_err();
        assert!(matches!(
            err,
            BiasError::EmptyCollection(Collection::ExplicitI)
        ));
        let err = implicit_bias(&sc(&[1], &[1], &[1], &[])).unwrap_err();
        assert!(matches!(
            err,
            BiasError::EmptyCollection(Collection::ImplicitJ)
        ));
        assert!(difference_significance(&sc(&[1], &[1], &[], &[1]), 10, 0).is_err());
        assert!(matches!(
            difference_significance(&sc(&[1], &[1], &[1], &[1]), 0, 0),
            Err(BiasError::NoResamples)
        ));
    }

    #[test]
    fn all_zero_gives_p_one() {
        let s = sc(&[0, 0], &[0], &[0, 0, 0], &[0]);
        let sig = difference_significance(&s, 500, 3).unwrap();
        assert_eq!(sig.statistic, 0.0);
        assert_eq!(sig.p_value, 1.0);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let s = sc(&[1, 0, 1, -1], &[-1, 0], &[1, 1, 0], &[-1, -1, 0, 1]);
        let a = difference_significance(&s, 3000, 42).unwrap();
        let b = difference_significance(&s, 3000, 42).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| difference_significance(&s, 3000, 42).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn single_statement_sides_match_enumeration() {
        // each side pools two scores; 2 x 2 equally likely assignments
        let s = sc(&[1], &[-1], &[-1], &[1]);
        let observed = (explicit_bias(&s).unwrap() - implicit_bias(&s).unwrap()).abs();
        let mut ge = 0;
        for swap_i in [false, true] {
            for swap_j in [false, true] {
                let (cwi, ewi) = if swap_i {
                    (-1.0f64, 1.0f64)
                } else {
                    (1.0, -1.0)
                };
                let (cwj, ewj) = if swap_j {
                    (1.0f64, -1.0f64)
                } else {
                    (-1.0, 1.0)
                };
                let t: f64 = ((cwj - cwi) - (ewj - ewi)).abs();
                if t >= observed - 1e-12 {
                    ge += 1;
                }
            }
        }
        let exact = ge as f64 / 4.0;
        assert_eq!(exact, 0.5);
        let n = 100_000;
        let mc = difference_significance(&s, n, 11).unwrap().p_value;
        let bound = 3.0 * (exact * (1.0 - exact) / n as f64).sqrt() + 1.0 / n as f64;
        assert!((mc - exact).abs() <= bound, "mc {mc} exact {exact}");
    }
}
