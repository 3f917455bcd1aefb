//! Dynamic masked-LM example generation at a configurable masking rate.
//!
//! Each maskable position is selected independently with probability `rate`
//! by a generator derived from (seed, comment id, epoch nonce), so different
//! epochs re-sample the masks while every plan stays reproducible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding::rng_for;
use crate::unigram::{Encoding, UnigramVocab, EOS};

/// Sentinel in `target_ids` for positions that are not masked.
pub const TARGET_SENTINEL: i64 = -100;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaskConfig {
    pub rate: f64,
    pub replace_mask_frac: f64,
    pub replace_random_frac: f64,
    pub keep_frac: f64,
    pub seed: u64,
    pub max_seq_len: usize,
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig {
            rate: 0.30,
            replace_mask_frac: 0.8,
            replace_random_frac: 0.1,
            keep_frac: 0.1,
            seed: 0,
            max_seq_len: 128,
        }
    }
}

impl MaskConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidConfig("rate must be in [0,1]".into()));
        }
        let sum = self.replace_mask_frac + self.replace_random_frac + self.keep_frac;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "corruption fractions sum to {sum}, expected 1"
            )));
        }
        if self.max_seq_len < 2 {
            return Err(Error::InvalidConfig("max_seq_len must be >= 2".into()));
        }
        Ok(())
    }
}

/// Per-token masking decisions for one encoded sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPlan {
    pub input_ids: Vec<u32>,
    /// Original ids at masked positions, [`TARGET_SENTINEL`] elsewhere.
    pub target_ids: Vec<i64>,
    pub masked_positions: Vec<usize>,
}

/// Truncate to `max_seq_len` (hard cut before `</s>` re-append), then corrupt
/// each selected position per the mask/random/keep split.
pub fn plan_masks<F: Scalar>(
    enc: &Encoding,
    vocab: &UnigramVocab<F>,
    cfg: &MaskConfig,
    comment_id: &str,
    epoch_nonce: u64,
) -> Result<MaskPlan> {
    cfg.validate()?;
    let mut ids: Vec<u32> = enc.ids.clone();
    if ids.len() > cfg.max_seq_len {
        ids.truncate(cfg.max_seq_len - 1);
        ids.push(EOS);
    }
    let mut rng = rng_for(cfg.seed, comment_id, epoch_nonce);
    let mut input_ids = ids.clone();
    let mut target_ids = vec![TARGET_SENTINEL; ids.len()];
    let mut masked_positions = Vec::new();
    let range = vocab.piece_id_range();
    for (pos, &id) in ids.iter().enumerate() {
        if vocab.is_special(id) {
            continue;
        }
        if rng.gen::<f64>() >= cfg.rate {
            continue;
        }
        target_ids[pos] = i64::from(id);
        masked_positions.push(pos);
        let v: f64 = rng.gen();
        if v < cfg.replace_mask_frac {
            input_ids[pos] = vocab.mask_id();
        } else if v < cfg.replace_mask_frac + cfg.replace_random_frac {
            input_ids[pos] = rng.gen_range(range.clone());
        }
        // else: keep the original id
    }
    Ok(MaskPlan {
        input_ids,
        target_ids,
        masked_positions,
    })
}

/// Per-rate masking statistics over a corpus, across epochs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSweepRow {
    pub rate: f64,
    pub maskable_positions: usize,
    pub masked_total: usize,
    /// masked_total / (maskable_positions * epochs)
    pub realized_fraction: f64,
    /// times-masked-across-epochs → number of positions
    pub coverage_histogram: std::collections::BTreeMap<usize, u64>,
    pub plans: Vec<(String, u64, MaskPlan)>,
}

/// Generate plans for every (comment, epoch, rate) triple and summarize the
/// realized masking behavior per rate.
pub fn sweep_rates<F: Scalar>(
    corpus: &Corpus,
    vocab: &UnigramVocab<F>,
    rates: &[f64],
    cfg: &MaskConfig,
    epochs: u64,
) -> Result<Vec<RateSweepRow>> {
    if rates.is_empty() {
        return Err(Error::InvalidConfig("no rates given".into()));
    }
    let encodings: Vec<(&str, Encoding)> = corpus
        .iter()
        .map(|c| (c.id.as_str(), vocab.encode(&c.text)))
        .collect();
    let mut rows = Vec::with_capacity(rates.len());
    for &rate in rates {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidConfig(format!("invalid rate {rate}")));
        }
        let row_cfg = MaskConfig { rate, ..cfg.clone() };
        let mut maskable = 0usize;
        let mut masked_total = 0usize;
        let mut coverage: Vec<usize> = Vec::new();
        let mut plans = Vec::new();
        for (id, enc) in &encodings {
            let len = enc.ids.len().min(cfg.max_seq_len);
            let base = coverage.len();
            let maskable_here = enc.ids[..len]
                .iter()
                .filter(|&&i| !vocab.is_special(i))
                .count();
            maskable += maskable_here;
            coverage.resize(base + len, 0);
            for epoch in 0..epochs {
                let plan = plan_masks(enc, vocab, &row_cfg, id, epoch)?;
                masked_total += plan.masked_positions.len();
                for &pos in &plan.masked_positions {
                    coverage[base + pos] += 1;
                }
                plans.push((id.to_string(), epoch, plan));
            }
        }
        let mut coverage_histogram = std::collections::BTreeMap::new();
        for &times in &coverage {
            *coverage_histogram.entry(times).or_insert(0u64) += 1;
        }
        let denom = maskable * epochs as usize;
        rows.push(RateSweepRow {
            rate,
            maskable_positions: maskable,
            masked_total,
            realized_fraction: if denom == 0 {
                0.0
            } else {
                masked_total as f64 / denom as f64
            },
            coverage_histogram,
            plans,
        });
    }
    Ok(rows)
}
