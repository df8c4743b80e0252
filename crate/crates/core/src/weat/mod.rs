//! Word Embedding Association Test.
//!
//! For exemplar sets `Ew_i`, `Ew_j` and attribute sets `Aw_p`, `Aw_q`:
//!
//! - `s(e) = mean_{a in Aw_p} cos(e, a) - mean_{a in Aw_q} cos(e, a)`
//! - statistic `= sum_{e in Ew_i} s(e) - sum_{e in Ew_j} s(e)`
//! - effect size `= (mean_{Ew_j} s - mean_{Ew_i} s) / sd_{Ew_i ∪ Ew_j} s`
//!   with the sample (n - 1) standard deviation; the `caliskan` sign
//!   convention flips the numerator to `Ew_i - Ew_j`
//! - p-value: share of equal-size re-partitions of `Ew_i ∪ Ew_j` whose
//!   statistic is strictly greater than the observed one
//!
//! [`joint_vs_implicit`] runs the test twice: on embeddings trained from the
//! full corpus, and from the corpus with every explicit statement removed.

mod embeddings;
mod train;

pub use embeddings::{load_embeddings, parse_embeddings, EmbeddingTable, LoadStats};
pub use train::{train_embeddings, TrainParams, TrainStats};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusStream;
use crate::extract::{filter_explicit, PartitionOptions};
use crate::lexicon::{BiasLexicon, WordSet};
use crate::rng;

pub const EXACT_LIMIT: u128 = 200_000;
pub const MC_SAMPLES: usize = 100_000;
pub const STD_DEV_ESTIMATOR: &str = "sample (n-1)";

#[derive(Debug, thiserror::Error)]
pub enum WeatError {
    #[error("cannot read embeddings {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("embedding format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("vector dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector{}", .0.as_ref().map(|w| format!(" for \"{w}\"")).unwrap_or_default())]
    ZeroNorm(Option<String>),
    #[error("words missing from the embedding table: {}", .0.join(", "))]
    Oov(Vec<String>),
    #[error("{0} is empty after dropping out-of-vocabulary words")]
    EmptyAfterOov(&'static str),
    #[error("all exemplars have the same association score; effect size undefined")]
    ZeroVariance,
    #[error("effect size needs at least 2 exemplars, got {0}")]
    TooFewExemplars(usize),
    #[error("exact p-value needs |Ew_i| = |Ew_j|, got {0} and {1}")]
    UnequalSizes(usize, usize),
    #[error("vocabulary too small: {vocab} word(s) meet min count {min_count}, need {needed}")]
    VocabularyTooSmall {
        vocab: usize,
        min_count: usize,
        needed: usize,
    },
    #[error("co-occurrence PPMI matrix is all zero")]
    DegeneratePpmi,
    #[error("corpus too small at stage '{stage}': {source}")]
    TooSmall {
        stage: &'static str,
        #[source]
        source: Box<WeatError>,
    },
}

impl WeatError {
    pub fn code(&self) -> &'static str {
        match self {
            WeatError::Io { .. } => "weat.io",
            WeatError::Format { .. } => "weat.format",
            WeatError::DimensionMismatch(..) => "weat.dimension_mismatch",
            WeatError::ZeroNorm(_) => "weat.zero_norm",
            WeatError::Oov(_) => "weat.oov",
            WeatError::EmptyAfterOov(_) => "weat.empty_after_oov",
            WeatError::ZeroVariance => "weat.zero_variance",
            WeatError::TooFewExemplars(_) => "weat.too_few_exemplars",
            WeatError::UnequalSizes(..) => "weat.unequal_sizes",
            WeatError::VocabularyTooSmall { .. } => "weat.vocabulary_too_small",
            WeatError::DegeneratePpmi => "weat.degenerate_ppmi",
            WeatError::TooSmall { .. } => "weat.too_small",
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64, WeatError> {
    if x.len() != y.len() {
        return Err(WeatError::DimensionMismatch(x.len(), y.len()));
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(WeatError::ZeroNorm(None));
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Ok(dot / (nx * ny))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVector {
    pub word: String,
    pub vector: Vec<f64>,
}

impl WordVector {
    pub fn new(word: impl Into<String>, vector: Vec<f64>) -> Self {
        WordVector {
            word: word.into(),
            vector,
        }
    }
}

fn mean_cosine(e: &[f64], set: &[WordVector]) -> Result<f64, WeatError> {
    let mut total = 0.0;
    for a in set {
        total += cosine(e, &a.vector)?;
    }
    Ok(total / set.len() as f64)
}

/// `s` for one exemplar vector against resolved attribute vectors.
pub fn association(e: &[f64], aw_p: &[WordVector], aw_q: &[WordVector]) -> Result<f64, WeatError> {
    Ok(mean_cosine(e, aw_p)? - mean_cosine(e, aw_q)?)
}

/// Table key for a lexicon entry; multiword entries are joined with `_`.
pub fn embedding_key(entry: &str) -> String {
    entry.replace(' ', "_")
}

fn lookup(word: &str, emb: &EmbeddingTable) -> Result<Option<WordVector>, WeatError> {
    match emb.get(&embedding_key(word)) {
        None => Ok(None),
        Some(v) if norm(v) == 0.0 => Err(WeatError::ZeroNorm(Some(word.to_string()))),
        Some(v) => Ok(Some(WordVector::new(word, v.to_vec()))),
    }
}

/// `s(word)` looked up by name.
pub fn weat_s(
    word: &str,
    aw_p: &[&str],
    aw_q: &[&str],
    emb: &EmbeddingTable,
) -> Result<f64, WeatError> {
    let mut missing = Vec::new();
    let mut resolve = |words: &[&str]| -> Result<Vec<WordVector>, WeatError> {
        let mut out = Vec::new();
        for w in words {
            match lookup(w, emb)? {
                Some(v) => out.push(v),
                None => missing.push(w.to_string()),
            }
        }
        Ok(out)
    };
    let e = resolve(&[word])?;
    let p = resolve(aw_p)?;
    let q = resolve(aw_q)?;
    if !missing.is_empty() {
        return Err(WeatError::Oov(missing));
    }
    if p.is_empty() {
        return Err(WeatError::EmptyAfterOov("aw_p"));
    }
    if q.is_empty() {
        return Err(WeatError::EmptyAfterOov("aw_q"));
    }
    association(&e[0].vector, &p, &q)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OovReport {
    pub ew_i: Vec<String>,
    pub ew_j: Vec<String>,
    pub aw_p: Vec<String>,
    pub aw_q: Vec<String>,
}

impl OovReport {
    pub fn total(&self) -> usize {
        self.ew_i.len() + self.ew_j.len() + self.aw_p.len() + self.aw_q.len()
    }

    /// One line per set with dropped words.
    pub fn lines(&self) -> Vec<String> {
        [
            ("exemplar_words_i", &self.ew_i),
            ("exemplar_words_j", &self.ew_j),
            ("attribute_words_p", &self.aw_p),
            ("attribute_words_q", &self.aw_q),
        ]
        .iter()
        .filter(|(_, w)| !w.is_empty())
        .map(|(name, w)| format!("{name}: dropped {} OOV word(s): {}", w.len(), w.join(", ")))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatInput {
    pub ew_i: Vec<WordVector>,
    pub ew_j: Vec<WordVector>,
    pub aw_p: Vec<WordVector>,
    pub aw_q: Vec<WordVector>,
    pub oov_report: OovReport,
}

impl WeatInput {
    pub fn from_vectors(
        ew_i: Vec<WordVector>,
        ew_j: Vec<WordVector>,
        aw_p: Vec<WordVector>,
        aw_q: Vec<WordVector>,
    ) -> Result<Self, WeatError> {
        for (set, name) in [
            (&ew_i, "ew_i"),
            (&ew_j, "ew_j"),
            (&aw_p, "aw_p"),
            (&aw_q, "aw_q"),
        ] {
            if set.is_empty() {
                return Err(WeatError::EmptyAfterOov(name));
            }
            if let Some(v) = set.iter().find(|v| norm(&v.vector) == 0.0) {
                return Err(WeatError::ZeroNorm(Some(v.word.clone())));
            }
        }
        Ok(WeatInput {
            ew_i,
            ew_j,
            aw_p,
            aw_q,
            oov_report: OovReport::default(),
        })
    }

    /// Resolves the lexicon's exemplar and attribute sets, dropping (and
    /// reporting) words the table lacks.
    pub fn resolve(lexicon: &BiasLexicon, emb: &EmbeddingTable) -> Result<Self, WeatError> {
        let cp = &lexicon.concept_pair;
        let ap = &lexicon.attribute_pair;
        let resolve = |set: &WordSet,
                       name: &'static str|
         -> Result<(Vec<WordVector>, Vec<String>), WeatError> {
            let mut found = Vec::new();
            let mut dropped = Vec::new();
            for w in set.entries() {
                match lookup(w, emb)? {
                    Some(v) => found.push(v),
                    None => dropped.push(w.clone()),
                }
            }
            if found.is_empty() {
                return Err(WeatError::EmptyAfterOov(name));
            }
            Ok((found, dropped))
        };
        let (ew_i, oi) = resolve(&cp.exemplar_words_i, "exemplar_words_i")?;
        let (ew_j, oj) = resolve(&cp.exemplar_words_j, "exemplar_words_j")?;
        let (aw_p, op) = resolve(&ap.attribute_words_p, "attribute_words_p")?;
        let (aw_q, oq) = resolve(&ap.attribute_words_q, "attribute_words_q")?;
        Ok(WeatInput {
            ew_i,
            ew_j,
            aw_p,
            aw_q,
            oov_report: OovReport {
                ew_i: oi,
                ew_j: oj,
                aw_p: op,
                aw_q: oq,
            },
        })
    }

    pub fn swap_exemplars(&self) -> Self {
        let mut out = self.clone();
        std::mem::swap(&mut out.ew_i, &mut out.ew_j);
        std::mem::swap(&mut out.oov_report.ew_i, &mut out.oov_report.ew_j);
        out
    }

    pub fn swap_attributes(&self) -> Self {
        let mut out = self.clone();
        std::mem::swap(&mut out.aw_p, &mut out.aw_q);
        std::mem::swap(&mut out.oov_report.aw_p, &mut out.oov_report.aw_q);
        out
    }

    /// `s` for every exemplar: (Ew_i values, Ew_j values).
    pub fn s_values(&self) -> Result<(Vec<f64>, Vec<f64>), WeatError> {
        let run = |set: &[WordVector]| -> Result<Vec<f64>, WeatError> {
            set.iter()
                .map(|e| association(&e.vector, &self.aw_p, &self.aw_q))
                .collect()
        };
        Ok((run(&self.ew_i)?, run(&self.ew_j)?))
    }
}

fn statistic_from(s_i: &[f64], s_j: &[f64]) -> f64 {
    s_i.iter().sum::<f64>() - s_j.iter().sum::<f64>()
}

pub fn weat_statistic(input: &WeatInput) -> Result<f64, WeatError> {
    let (s_i, s_j) = input.s_values()?;
    Ok(statistic_from(&s_i, &s_j))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    /// mean over Ew_j minus mean over Ew_i
    #[default]
    Paper,
    /// mean over Ew_i minus mean over Ew_j
    Caliskan,
}

impl std::str::FromStr for SignConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(SignConvention::Paper),
            "caliskan" => Ok(SignConvention::Caliskan),
            _ => Err(format!(
                "unknown sign convention '{s}' (expected paper|caliskan)"
            )),
        }
    }
}

/// Sum whose result is independent of input order and exactly negated when
/// every input is negated.
fn symmetric_sum(values: &[f64]) -> f64 {
    let mut pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    let mut neg: Vec<f64> = values.iter().copied().filter(|v| *v < 0.0).collect();
    pos.sort_by(|a, b| a.total_cmp(b));
    neg.sort_by(|a, b| b.total_cmp(a));
    pos.iter().sum::<f64>() + neg.iter().sum::<f64>()
}

/// Sample standard deviation, invariant under permutation and negation of
/// the inputs.
pub fn sample_std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = symmetric_sum(values) / n;
    let mut sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    sq.sort_by(|a, b| a.total_cmp(b));
    (sq.iter().sum::<f64>() / (n - 1.0)).sqrt()
}

fn effect_size_from(
    s_i: &[f64],
    s_j: &[f64],
    convention: SignConvention,
) -> Result<f64, WeatError> {
    let n = s_i.len() + s_j.len();
    if n < 2 || s_i.is_empty() || s_j.is_empty() {
        return Err(WeatError::TooFewExemplars(n));
    }
    let all: Vec<f64> = s_i.iter().chain(s_j).copied().collect();
    if all.iter().all(|v| *v == all[0]) {
        return Err(WeatError::ZeroVariance);
    }
    let sd = sample_std_dev(&all);
    if sd == 0.0 || !sd.is_finite() {
        return Err(WeatError::ZeroVariance);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let numerator = match convention {
        SignConvention::Paper => mean(s_j) - mean(s_i),
        SignConvention::Caliskan => mean(s_i) - mean(s_j),
    };
    Ok(numerator / sd)
}

pub fn effect_size(input: &WeatInput, convention: SignConvention) -> Result<f64, WeatError> {
    let (s_i, s_j) = input.s_values()?;
    effect_size_from(&s_i, &s_j, convention)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMode {
    #[default]
    Exact,
    #[serde(alias = "mc")]
    MonteCarlo,
}

impl std::str::FromStr for PMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(PMode::Exact),
            "mc" | "monte_carlo" => Ok(PMode::MonteCarlo),
            _ => Err(format!("unknown mode '{s}' (expected exact|mc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValue {
    /// Share of partitions (or samples) strictly above the observed statistic.
    pub p_value: f64,
    /// `(1 + exceedances) / (1 + samples)`; Monte-Carlo only.
    pub p_value_smoothed: Option<f64>,
    pub method: PMethod,
    /// Partitions enumerated or samples drawn.
    pub n: u64,
    pub exceedances: u64,
    pub ties: u64,
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn tie_band(observed: f64) -> f64 {
    1e-12 * observed.abs().max(1.0)
}

#[derive(Default)]
struct Tally {
    exceed: u64,
    ties: u64,
}

impl Tally {
    fn add(&mut self, stat: f64, observed: f64) {
        let d = stat - observed;
        if d.abs() <= tie_band(observed) {
            self.ties += 1;
        } else if d > 0.0 {
            self.exceed += 1;
        }
    }
}

/// Next k-combination of 0..m in lexicographic order.
fn next_combination(c: &mut [usize], m: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < m - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn exact_from(s_i: &[f64], s_j: &[f64]) -> PValue {
    let all: Vec<f64> = s_i.iter().chain(s_j).copied().collect();
    let total: f64 = all.iter().sum();
    let k = s_i.len();
    let stat_of = |idx: &[usize]| 2.0 * idx.iter().map(|&x| all[x]).sum::<f64>() - total;
    let mut combo: Vec<usize> = (0..k).collect();
    let observed = stat_of(&combo);
    let mut tally = Tally::default();
    let mut n = 0u64;
    loop {
        tally.add(stat_of(&combo), observed);
        n += 1;
        if !next_combination(&mut combo, all.len()) {
            break;
        }
    }
    PValue {
        p_value: tally.exceed as f64 / n as f64,
        p_value_smoothed: None,
        method: PMethod::Exact,
        n,
        exceedances: tally.exceed,
        ties: tally.ties,
    }
}

fn monte_carlo_from(s_i: &[f64], s_j: &[f64], samples: usize, seed: u64) -> PValue {
    let all: Vec<f64> = s_i.iter().chain(s_j).copied().collect();
    let total: f64 = all.iter().sum();
    let k = s_i.len();
    let observed = 2.0 * s_i.iter().sum::<f64>() - total;
    let tallies: Vec<Tally> = rng::chunks(samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(chunk, start, end)| {
            let mut r = rng::stream(seed, chunk);
            let mut t = Tally::default();
            for _ in start..end {
                let mut idx = sample(&mut r, all.len(), k).into_vec();
                idx.sort_unstable();
                let stat = 2.0 * idx.iter().map(|&x| all[x]).sum::<f64>() - total;
                t.add(stat, observed);
            }
            t
        })
        .collect();
    let exceed: u64 = tallies.iter().map(|t| t.exceed).sum();
    let ties: u64 = tallies.iter().map(|t| t.ties).sum();
    PValue {
        p_value: exceed as f64 / samples as f64,
        p_value_smoothed: Some((1 + exceed) as f64 / (1 + samples) as f64),
        method: PMethod::MonteCarlo,
        n: samples as u64,
        exceedances: exceed,
        ties,
    }
}

/// One-sided partition p-value. Exact mode falls back to Monte-Carlo when
/// there are more than [`EXACT_LIMIT`] partitions.
pub fn weat_pvalue(input: &WeatInput, mode: PMode, seed: u64) -> Result<PValue, WeatError> {
    let (s_i, s_j) = input.s_values()?;
    pvalue_from(&s_i, &s_j, mode, seed, MC_SAMPLES)
}

fn pvalue_from(
    s_i: &[f64],
    s_j: &[f64],
    mode: PMode,
    seed: u64,
    samples: usize,
) -> Result<PValue, WeatError> {
    match mode {
        PMode::Exact => {
            if s_i.len() != s_j.len() {
                return Err(WeatError::UnequalSizes(s_i.len(), s_j.len()));
            }
            let m = (s_i.len() + s_j.len()) as u64;
            if binomial(m, s_i.len() as u64) <= EXACT_LIMIT {
                Ok(exact_from(s_i, s_j))
            } else {
                Ok(monte_carlo_from(s_i, s_j, MC_SAMPLES, seed))
            }
        }
        PMode::MonteCarlo => Ok(monte_carlo_from(s_i, s_j, samples.max(1), seed)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatOptions {
    pub mode: PMode,
    pub seed: u64,
    pub sign_convention: SignConvention,
    pub mc_samples: usize,
}

impl Default for WeatOptions {
    fn default() -> Self {
        WeatOptions {
            mode: PMode::Exact,
            seed: 0,
            sign_convention: SignConvention::Paper,
            mc_samples: MC_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarScore {
    pub word: String,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSizes {
    pub ew_i: usize,
    pub ew_j: usize,
    pub aw_p: usize,
    pub aw_q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatReport {
    pub statistic: f64,
    pub effect_size: f64,
    pub p_value: f64,
    pub p_value_smoothed: Option<f64>,
    pub method: PMethod,
    pub n: u64,
    pub exceedances: u64,
    pub ties: u64,
    pub seed: u64,
    pub sign_convention: SignConvention,
    pub std_dev_estimator: String,
    pub sizes: SetSizes,
    pub oov: OovReport,
    pub oov_lines: Vec<String>,
    pub s_values_i: Vec<ExemplarScore>,
    pub s_values_j: Vec<ExemplarScore>,
}

pub fn run_weat(input: &WeatInput, opts: &WeatOptions) -> Result<WeatReport, WeatError> {
    let (s_i, s_j) = input.s_values()?;
    let effect_size = effect_size_from(&s_i, &s_j, opts.sign_convention)?;
    let p = pvalue_from(&s_i, &s_j, opts.mode, opts.seed, opts.mc_samples)?;
    let scored = |set: &[WordVector], s: &[f64]| -> Vec<ExemplarScore> {
        set.iter()
            .zip(s)
            .map(|(w, &s)| ExemplarScore {
                word: w.word.clone(),
                s,
            })
            .collect()
    };
    Ok(WeatReport {
        statistic: statistic_from(&s_i, &s_j),
        effect_size,
        p_value: p.p_value,
        p_value_smoothed: p.p_value_smoothed,
        method: p.method,
        n: p.n,
        exceedances: p.exceedances,
        ties: p.ties,
        seed: opts.seed,
        sign_convention: opts.sign_convention,
        std_dev_estimator: STD_DEV_ESTIMATOR.to_string(),
        sizes: SetSizes {
            ew_i: input.ew_i.len(),
            ew_j: input.ew_j.len(),
            aw_p: input.aw_p.len(),
            aw_q: input.aw_q.len(),
        },
        oov: input.oov_report.clone(),
        oov_lines: input.oov_report.lines(),
        s_values_i: scored(&input.ew_i, &s_i),
        s_values_j: scored(&input.ew_j, &s_j),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointVsImplicit {
    pub joint: WeatReport,
    pub implicit: WeatReport,
    /// joint effect size minus implicit effect size
    pub effect_size_difference: f64,
    pub removed_explicit: usize,
    pub joint_vocabulary: usize,
    pub implicit_vocabulary: usize,
}

/// WEAT on embeddings from the full corpus (joint) and from the corpus with
/// explicit statements removed (implicit).
pub fn joint_vs_implicit(
    corpus: &CorpusStream,
    lexicon: &BiasLexicon,
    train: &TrainParams,
    weat: &WeatOptions,
    partition: &PartitionOptions,
) -> Result<JointVsImplicit, WeatError> {
    let stage =
        |name: &'static str, corpus: &CorpusStream| -> Result<(WeatReport, usize), WeatError> {
            let wrap = |e: WeatError| WeatError::TooSmall {
                stage: name,
                source: Box::new(e),
            };
            let (table, _) = train_embeddings(corpus, train).map_err(wrap)?;
            let input = WeatInput::resolve(lexicon, &table).map_err(wrap)?;
            Ok((run_weat(&input, weat)?, table.len()))
        };
    let (joint, joint_vocabulary) = stage("joint", corpus)?;
    let filtered = filter_explicit(corpus, std::slice::from_ref(lexicon), partition);
    let (implicit, implicit_vocabulary) = stage("implicit", &filtered.corpus)?;
    Ok(JointVsImplicit {
        effect_size_difference: joint.effect_size - implicit.effect_size,
        joint,
        implicit,
        removed_explicit: filtered.removed,
        joint_vocabulary,
        implicit_vocabulary,
    })
}
