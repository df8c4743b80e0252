//! Count-based embeddings: PPMI over symmetric-window co-occurrences,
//! factorized with a seeded randomized truncated SVD.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmbeddingTable, WeatError};
use crate::corpus::CorpusStream;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub window: usize,
    pub min_count: usize,
    /// Defaults to `min(100, vocabulary - 1)`.
    pub dimension: Option<usize>,
    /// Context-distribution smoothing exponent.
    pub alpha: f64,
    pub seed: u64,
    pub power_iterations: usize,
    pub oversample: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            window: 5,
            min_count: 2,
            dimension: None,
            alpha: 0.75,
            seed: 0,
            power_iterations: 4,
            oversample: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub tokens: u64,
    pub vocabulary: usize,
    pub nonzero_ppmi: usize,
    pub dimension: usize,
    pub singular_values: Vec<f64>,
}

/// Compressed sparse rows.
struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .zip(&self.values[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    /// A * M
    fn mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = (0..m.ncols())
            .into_par_iter()
            .map(|k| {
                let col = m.column(k);
                (0..self.n)
                    .map(|r| self.row(r).map(|(c, v)| v * col[c]).sum())
                    .collect()
            })
            .collect();
        DMatrix::from_fn(self.n, m.ncols(), |r, k| cols[k][r])
    }

    /// Aᵀ * M
    fn tmul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = (0..m.ncols())
            .into_par_iter()
            .map(|k| {
                let col = m.column(k);
                let mut out = vec![0.0; self.n];
                for r in 0..self.n {
                    let x = col[r];
                    if x != 0.0 {
                        for (c, v) in self.row(r) {
                            out[c] += v * x;
                        }
                    }
                }
                out
            })
            .collect();
        DMatrix::from_fn(self.n, m.ncols(), |r, k| cols[k][r])
    }
}

fn count_tokens(corpus: &CorpusStream) -> HashMap<&str, u64> {
    corpus
        .sentences()
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&str, u64>, s| {
            for t in &s.tokens {
                *acc.entry(t.as_str()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

fn cooccurrences(
    corpus: &CorpusStream,
    ids: &HashMap<&str, u32>,
    window: usize,
) -> Vec<((u32, u32), u64)> {
    let merged = corpus
        .sentences()
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<(u32, u32), u64>, s| {
            let row: Vec<Option<u32>> = s
                .tokens
                .iter()
                .map(|t| ids.get(t.as_str()).copied())
                .collect();
            for i in 0..row.len() {
                let Some(a) = row[i] else { continue };
                for b in row
                    .iter()
                    .take((i + window + 1).min(row.len()))
                    .skip(i + 1)
                    .flatten()
                {
                    *acc.entry((a, *b)).or_default() += 1;
                    *acc.entry((*b, a)).or_default() += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut pairs: Vec<_> = merged.into_iter().collect();
    pairs.sort_unstable_by_key(|(k, _)| *k);
    pairs
}

fn ppmi(pairs: &[((u32, u32), u64)], n: usize, alpha: f64) -> Csr {
    let mut row_sum = vec![0u64; n];
    let mut col_sum = vec![0u64; n];
    for &((r, c), v) in pairs {
        row_sum[r as usize] += v;
        col_sum[c as usize] += v;
    }
    let col_smooth: Vec<f64> = col_sum.iter().map(|&c| (c as f64).powf(alpha)).collect();
    let z: f64 = col_smooth.iter().sum();

    let mut indptr = vec![0usize; n + 1];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for &((r, c), v) in pairs {
        let pmi = (v as f64 * z / (row_sum[r as usize] as f64 * col_smooth[c as usize])).ln();
        if pmi > 0.0 {
            indptr[r as usize + 1] += 1;
            indices.push(c);
            values.push(pmi);
        }
    }
    for r in 0..n {
        indptr[r + 1] += indptr[r];
    }
    Csr {
        n,
        indptr,
        indices,
        values,
    }
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

pub fn train_embeddings(
    corpus: &CorpusStream,
    params: &TrainParams,
) -> Result<(EmbeddingTable, TrainStats), WeatError> {
    let counts = count_tokens(corpus);
    let tokens: u64 = counts.values().sum();
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c as usize >= params.min_count)
        .collect();
    vocab.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let n = vocab.len();
    let too_small = |needed| WeatError::VocabularyTooSmall {
        vocab: n,
        min_count: params.min_count,
        needed,
    };
    if n < 2 {
        return Err(too_small(2));
    }
    let dim = params.dimension.unwrap_or(100.min(n - 1)).max(1);
    if dim > n {
        return Err(too_small(dim));
    }
    let ids: HashMap<&str, u32> = vocab
        .iter()
        .enumerate()
        .map(|(i, (w, _))| (*w, i as u32))
        .collect();

    let pairs = cooccurrences(corpus, &ids, params.window);
    let a = ppmi(&pairs, n, params.alpha);
    if a.values.is_empty() {
        return Err(WeatError::DegeneratePpmi);
    }

    let l = (dim + params.oversample).min(n);
    let mut r = rng::stream(params.seed, 0);
    let omega = DMatrix::from_fn(n, l, |_, _| r.gen_range(-1.0..1.0));
    let mut q = orthonormal_basis(a.mul(&omega));
    for _ in 0..params.power_iterations {
        let z = orthonormal_basis(a.tmul(&q));
        q = orthonormal_basis(a.mul(&z));
    }
    // B = Qᵀ A, small (l x n)
    let b = a.tmul(&q).transpose();
    let svd = b.svd(true, false);
    let ub = svd.u.expect("u requested");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));
    order.truncate(dim);
    let u = &q * ub;

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for &k in &order {
        let scale = sigma[k].max(0.0).sqrt();
        let mut col: Vec<f64> = u.column(k).iter().map(|x| x * scale).collect();
        // fix the sign: largest-magnitude entry positive
        let pivot = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        columns.push(col);
    }
    // pad when the basis came out narrower than requested
    while columns.len() < dim {
        columns.push(vec![0.0; n]);
    }

    let rows = vocab
        .iter()
        .enumerate()
        .map(|(w, (word, _))| (word.to_string(), columns.iter().map(|c| c[w]).collect()));
    let (table, _) = EmbeddingTable::from_rows(dim, rows)?;
    let stats = TrainStats {
        tokens,
        vocabulary: n,
        nonzero_ppmi: a.values.len(),
        dimension: dim,
        singular_values: order.iter().map(|&k| sigma[k]).collect(),
    };
    Ok((table, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_plaintext, IngestOptions};
    use crate::weat::cosine;

    fn corpus(text: &str) -> CorpusStream {
        parse_plaintext(text.as_bytes(), "t", IngestOptions::default())
            .unwrap()
            .corpus
    }

    #[test]
    fn interchangeable_words_align() {
        let mut text = String::new();
        for ctx in [
            "red garden bloom",
            "sweet smell spring",
            "the vase holds",
            "petals fall softly",
        ] {
            text.push_str(&format!("{ctx} rose today.\n{ctx} tulip today.\n"));
        }
        for ctx in ["the ant bites", "a spider waits", "bugs crawl around"] {
            text.push_str(&format!("{ctx} here.\n{ctx} there.\n"));
        }
        let (t, stats) = train_embeddings(&corpus(&text), &TrainParams::default()).unwrap();
        assert_eq!(stats.vocabulary, t.len());
        let c = cosine(t.get("rose").unwrap(), t.get("tulip").unwrap()).unwrap();
        assert!(c >= 0.99, "cosine {c}");
        for w in t.words() {
            assert!(t.get(w).unwrap().iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn empty_corpus_fails() {
        let err = train_embeddings(&CorpusStream::default(), &TrainParams::default()).unwrap_err();
        assert!(matches!(
            err,
            WeatError::VocabularyTooSmall { vocab: 0, .. }
        ));
    }

    #[test]
    fn deterministic_for_seed_and_thread_count() {
        let text = "a b c d. b c d e. c d e a. a c e b. d a b e.\n".repeat(4);
        let c = corpus(&text);
        let params = TrainParams {
            dimension: Some(3),
            seed: 9,
            ..TrainParams::default()
        };
        let (x, _) = train_embeddings(&c, &params).unwrap();
        let (y, _) = train_embeddings(&c, &params).unwrap();
        assert_eq!(x, y);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let (z, _) = pool.install(|| train_embeddings(&c, &params).unwrap());
        assert_eq!(x, z);
    }

    #[test]
    fn vocabulary_respects_min_count() {
        let (t, _) =
            train_embeddings(&corpus("a b c. a b c. a b d."), &TrainParams::default()).unwrap();
        let mut words = t.words().to_vec();
        words.sort();
        assert_eq!(words, ["a", "b", "c"]);
    }

    #[test]
    fn oversized_dimension_rejected() {
        let params = TrainParams {
            dimension: Some(10),
            ..TrainParams::default()
        };
        let err = train_embeddings(&corpus("a b. a b."), &params).unwrap_err();
        assert!(matches!(
            err,
            WeatError::VocabularyTooSmall { needed: 10, .. }
        ));
    }
}
