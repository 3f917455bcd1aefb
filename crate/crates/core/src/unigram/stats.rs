//! Token-length statistics: mean/median non-special tokens per comment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::vocab::UnigramVocab;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetTokenStats {
    pub name: String,
    pub comments: usize,
    /// Mean non-special tokens per comment, rounded to 2 decimals.
    pub mean_tokens: f64,
    pub median_tokens: f64,
    /// token count → number of comments
    pub histogram: BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenLengthReport {
    pub per_dataset: Vec<DatasetTokenStats>,
}

pub fn token_length_stats<F: Scalar>(
    vocab: &UnigramVocab<F>,
    split_corpora: &[(String, &Corpus)],
) -> Result<TokenLengthReport> {
    if split_corpora.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut per_dataset = Vec::with_capacity(split_corpora.len());
    for (name, corpus) in split_corpora {
        let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
        let mut total_tokens = 0usize;
        for comment in corpus.iter() {
            let enc = vocab.encode(&comment.text);
            let non_special = enc.ids.iter().filter(|&&id| !vocab.is_special(id)).count();
            total_tokens += non_special;
            *histogram.entry(non_special).or_insert(0) += 1;
        }
        let n = corpus.len();
        let mean = if n == 0 {
            0.0
        } else {
            (total_tokens as f64 / n as f64 * 100.0).round() / 100.0
        };
        per_dataset.push(DatasetTokenStats {
            name: name.clone(),
            comments: n,
            mean_tokens: mean,
            median_tokens: median(&histogram, n),
            histogram,
        });
    }
    Ok(TokenLengthReport { per_dataset })
}

fn median(histogram: &BTreeMap<usize, u64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut seen = 0u64;
    let mut lower = None;
    for (&len, &count) in histogram {
        seen += count;
        if lower.is_none() && seen * 2 >= n as u64 {
            lower = Some(len);
        }
        if seen * 2 > n as u64 {
            let lo = lower.unwrap_or(len);
            return (lo + len) as f64 / 2.0;
        }
    }
    lower.map(|l| l as f64).unwrap_or(0.0)
}
