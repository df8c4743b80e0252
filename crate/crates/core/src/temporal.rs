//! Month-by-month bias and its stability over time.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biasmeter::{
    report_from_scores, score_partition, BiasConfig, BiasError, BiasReport, ReportContext,
};
use crate::corpus::{CorpusStream, Sentence};
use crate::extract::{partition, PartitionCounts, PartitionOptions};
use crate::lexicon::BiasLexicon;
use crate::sentiment::{ScoreCache, ScorerSpec};

pub const DEFAULT_MIN_STATEMENTS: usize = 20;
pub const STABILITY_ESTIMATOR: &str =
    "population standard deviation (n denominator) over included months";

#[derive(Debug, thiserror::Error)]
pub enum TemporalError {
    #[error("no sentence carries a timestamp")]
    NoTimestamps,
    #[error("need at least 2 months meeting the minimum of {min_statements} statements per collection, got {included}; shortfalls: {}", format_shortfalls(.shortfalls))]
    TooFewBuckets {
        min_statements: usize,
        included: usize,
        shortfalls: Vec<Shortfall>,
    },
    #[error(transparent)]
    Bias(#[from] BiasError),
}

impl TemporalError {
    pub fn code(&self) -> &'static str {
        match self {
            TemporalError::NoTimestamps => "temporal.no_timestamps",
            TemporalError::TooFewBuckets { .. } => "temporal.too_few_buckets",
            TemporalError::Bias(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub bucket: String,
    pub explicit_i: usize,
    pub explicit_j: usize,
    pub implicit_i: usize,
    pub implicit_j: usize,
}

fn format_shortfalls(v: &[Shortfall]) -> String {
    v.iter()
        .map(|s| {
            format!(
                "{} (cwi {}, cwj {}, ewi {}, ewj {})",
                s.bucket, s.explicit_i, s.explicit_j, s.implicit_i, s.implicit_j
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonthBucket {
    /// `YYYY-MM`, UTC.
    pub key: String,
    pub corpus: CorpusStream,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucketing {
    pub buckets: Vec<MonthBucket>,
    pub untimestamped: usize,
}

pub fn month_key(sentence: &Sentence) -> Option<String> {
    sentence.timestamp.map(|t| t.format("%Y-%m").to_string())
}

pub fn bucket_by_month(corpus: &CorpusStream) -> Result<Bucketing, TemporalError> {
    let mut map: BTreeMap<String, Vec<Sentence>> = BTreeMap::new();
    let mut untimestamped = 0;
    for s in corpus {
        match month_key(s) {
            Some(k) => map.entry(k).or_default().push(s.clone()),
            None => untimestamped += 1,
        }
    }
    if map.is_empty() {
        return Err(TemporalError::NoTimestamps);
    }
    Ok(Bucketing {
        buckets: map
            .into_iter()
            .map(|(key, v)| MonthBucket {
                key,
                corpus: CorpusStream::new(v),
            })
            .collect(),
        untimestamped,
    })
}

/// Population standard deviation; 0 for fewer than two values.
pub fn population_std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 || values.iter().all(|v| *v == values[0]) {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let mut sq: Vec<f64> = sorted.iter().map(|v| (v - mean).powi(2)).collect();
    sq.sort_by(|a, b| a.total_cmp(b));
    (sq.iter().sum::<f64>() / n).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionOptions {
    pub min_statements: usize,
    pub bias: BiasConfig,
    pub partition: PartitionOptions,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        EvolutionOptions {
            min_statements: DEFAULT_MIN_STATEMENTS,
            bias: BiasConfig::default(),
            partition: PartitionOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketResult {
    pub bucket: String,
    pub included: bool,
    pub counts: PartitionCounts,
    pub report: Option<BiasReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSeries {
    pub lexicon_id: String,
    pub scorer_id: String,
    pub min_statements: usize,
    pub buckets: Vec<BucketResult>,
    pub untimestamped: usize,
    pub included_buckets: usize,
    pub explicit_stability: f64,
    pub implicit_stability: f64,
    pub stability_estimator: String,
}

impl EvolutionSeries {
    /// bucket, included, explicit, implicit, difference, p, and the four counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "bucket,included,explicit_bias,implicit_bias,difference,p_value,n_cwi,n_cwj,n_ewi,n_ewj\n",
        );
        for b in &self.buckets {
            let c = &b.counts;
            let (e, i, d, p) = match &b.report {
                Some(r) => (
                    r.explicit_bias.to_string(),
                    r.implicit_bias.to_string(),
                    r.difference.to_string(),
                    r.p_value.to_string(),
                ),
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                b.bucket,
                b.included,
                e,
                i,
                d,
                p,
                c.explicit_i,
                c.explicit_j,
                c.implicit_i,
                c.implicit_j
            );
        }
        out
    }
}

pub fn evolution(
    corpus: &CorpusStream,
    lexicon: &BiasLexicon,
    corpus_label: &str,
    scorer: &ScorerSpec,
    opts: &EvolutionOptions,
    mut cache: Option<&mut ScoreCache>,
) -> Result<EvolutionSeries, TemporalError> {
    let bucketing = bucket_by_month(corpus)?;
    let parts: Vec<_> = bucketing
        .buckets
        .par_iter()
        .map(|b| partition(&b.corpus, lexicon, &opts.partition))
        .collect();

    let mut results = Vec::with_capacity(parts.len());
    let mut shortfalls = Vec::new();
    for (bucket, part) in bucketing.buckets.iter().zip(&parts) {
        let c = part.counts;
        let included = [c.explicit_i, c.explicit_j, c.implicit_i, c.implicit_j]
            .iter()
            .all(|&n| n >= opts.min_statements.max(1));
        let report = if included {
            let sc = score_partition(part, scorer, cache.as_deref_mut())?;
            let ctx = ReportContext {
                corpus: corpus_label,
                lexicon,
                scorer_id: &scorer.id,
                counts: c,
            };
            Some(report_from_scores(&sc, &ctx, &opts.bias)?)
        } else {
            shortfalls.push(Shortfall {
                bucket: bucket.key.clone(),
                explicit_i: c.explicit_i,
                explicit_j: c.explicit_j,
                implicit_i: c.implicit_i,
                implicit_j: c.implicit_j,
            });
            None
        };
        results.push(BucketResult {
            bucket: bucket.key.clone(),
            included,
            counts: c,
            report,
        });
    }

    let included: Vec<&BiasReport> = results.iter().filter_map(|b| b.report.as_ref()).collect();
    if included.len() < 2 {
        return Err(TemporalError::TooFewBuckets {
            min_statements: opts.min_statements,
            included: included.len(),
            shortfalls,
        });
    }
    let explicit: Vec<f64> = included.iter().map(|r| r.explicit_bias).collect();
    let implicit: Vec<f64> = included.iter().map(|r| r.implicit_bias).collect();
    Ok(EvolutionSeries {
        lexicon_id: lexicon.id.clone(),
        scorer_id: scorer.id.clone(),
        min_statements: opts.min_statements,
        included_buckets: included.len(),
        explicit_stability: population_std_dev(&explicit),
        implicit_stability: population_std_dev(&implicit),
        buckets: results,
        untimestamped: bucketing.untimestamped,
        stability_estimator: STABILITY_ESTIMATOR.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_jsonl, IngestOptions};

    fn jsonl(lines: &[(&str, &str)]) -> CorpusStream {
        let text: String = lines
            .iter()
            .map(|(t, ts)| format!("{{\"text\":\"{t}\",\"timestamp\":\"{ts}\"}}\n"))
            .collect();
        parse_jsonl(text.as_bytes(), "j", IngestOptions::default())
            .unwrap()
            .corpus
    }

    #[test]
    fn same_month_one_bucket() {
        let c = jsonl(&[("a", "2015-03-14"), ("b", "2015-03-30T23:59:59Z")]);
        let b = bucket_by_month(&c).unwrap();
        assert_eq!(b.buckets.len(), 1);
        assert_eq!(b.buckets[0].key, "2015-03");
        assert_eq!(b.buckets[0].corpus.total_count(), 2);
    }

    #[test]
    fn chronological_order_across_years() {
        let c = jsonl(&[("a", "2016-01-02"), ("b", "2015-12-31")]);
        let keys: Vec<_> = bucket_by_month(&c)
            .unwrap()
            .buckets
            .into_iter()
            .map(|b| b.key)
            .collect();
        assert_eq!(keys, ["2015-12", "2016-01"]);
    }

    #[test]
    fn no_timestamps() {
        let c = parse_jsonl(b"{\"text\":\"a\"}\n", "j", IngestOptions::default())
            .unwrap()
            .corpus;
        assert!(matches!(
            bucket_by_month(&c),
            Err(TemporalError::NoTimestamps)
        ));
    }

    #[test]
    fn population_std_dev_examples() {
        assert_eq!(population_std_dev(&[0.0, 1.0]), 0.5);
        assert_eq!(population_std_dev(&[0.3, 0.3, 0.3]), 0.0);
        assert_eq!(
            population_std_dev(&[1.0, 0.0]),
            population_std_dev(&[0.0, 1.0])
        );
    }
}
