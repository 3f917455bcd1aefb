//! EM trainer with iterative likelihood-loss pruning.
//!
//! Seed a candidate pool from substring counts, then alternate a few EM
//! iterations (E-step: expected piece counts via lattice forward-backward,
//! M-step: re-normalize) with pruning of the lowest-utility pieces until the
//! target vocabulary size is reached. All iteration orders are fixed, so the
//! same corpus, config and seed produce a bit-identical vocab file.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::lattice::{forward_backward, viterbi};
use super::vocab::UnigramVocab;
use super::pretokenize;
use crate::corpus::Corpus;
use crate::emoji;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SPECIAL_COUNT: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainerConfig {
    pub target_vocab_size: usize,
    /// Initial candidate pool = multiplier x target.
    pub seed_vocab_multiplier: usize,
    pub em_iterations_per_round: usize,
    /// Fraction of lowest-utility pieces dropped per round.
    pub prune_fraction: f64,
    /// Max piece length in codepoints.
    pub max_piece_length: usize,
    /// Fraction of corpus character occurrences guaranteed a single-char piece.
    /// Emoji characters are force-included regardless.
    pub character_coverage: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            target_vocab_size: 15002,
            seed_vocab_multiplier: 10,
            em_iterations_per_round: 2,
            prune_fraction: 0.25,
            max_piece_length: 16,
            character_coverage: 0.9995,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_vocab_size <= SPECIAL_COUNT {
            return Err(Error::InvalidConfig(format!(
                "target_vocab_size must exceed {SPECIAL_COUNT}"
            )));
        }
        if self.seed_vocab_multiplier == 0
            || self.em_iterations_per_round == 0
            || self.max_piece_length == 0
        {
            return Err(Error::InvalidConfig("trainer knobs must be positive".into()));
        }
        if !(self.prune_fraction > 0.0 && self.prune_fraction < 1.0) {
            return Err(Error::InvalidConfig("prune_fraction must be in (0,1)".into()));
        }
        if !(self.character_coverage > 0.0 && self.character_coverage <= 1.0) {
            return Err(Error::InvalidConfig(
                "character_coverage must be in (0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// Corpus negative log-likelihood per EM iteration, one entry per round.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundStats {
    pub nll_per_iteration: Vec<f64>,
    pub pieces_before: usize,
    pub pieces_after: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainStats {
    pub rounds: Vec<RoundStats>,
}

pub fn train<F: Scalar>(corpus: &Corpus, cfg: &TrainerConfig) -> Result<UnigramVocab<F>> {
    train_with_stats(corpus, cfg).map(|(v, _)| v)
}

pub fn train_with_stats<F: Scalar>(
    corpus: &Corpus,
    cfg: &TrainerConfig,
) -> Result<(UnigramVocab<F>, TrainStats)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut token_counts: BTreeMap<String, u64> = BTreeMap::new();
    for comment in corpus.iter() {
        for token in pretokenize(&comment.text) {
            *token_counts.entry(token).or_insert(0) += 1;
        }
    }
    train_from_token_counts(&token_counts, cfg)
}

/// Train directly from pre-tokenized model-token counts. This is the whole
/// algorithm; [`train_with_stats`] only adds the corpus pre-tokenization.
pub fn train_from_token_counts<F: Scalar>(
    token_counts: &BTreeMap<String, u64>,
    cfg: &TrainerConfig,
) -> Result<(UnigramVocab<F>, TrainStats)> {
    cfg.validate()?;
    if token_counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let target_pieces = cfg.target_vocab_size - SPECIAL_COUNT;
    let required = required_chars(token_counts, cfg.character_coverage);
    if target_pieces < required.len() {
        return Err(Error::VocabTooSmall {
            target: cfg.target_vocab_size,
            charset: required.len() + SPECIAL_COUNT,
        });
    }

    // token list with chars precomputed, deterministic order
    let tokens: Vec<(Vec<char>, u64)> = token_counts
        .iter()
        .map(|(t, &c)| (t.chars().collect(), c))
        .collect();

    let mut pieces = seed_candidates(&tokens, &required, cfg, target_pieces)?;
    let mut stats = TrainStats::default();

    loop {
        let pieces_before = pieces.len();
        let index: HashMap<String, usize> = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.piece.clone(), i))
            .collect();
        let mut counts = vec![F::zero(); pieces.len()];
        let mut nll_per_iteration = Vec::with_capacity(cfg.em_iterations_per_round);
        for _ in 0..cfg.em_iterations_per_round {
            counts.iter_mut().for_each(|c| *c = F::zero());
            let unk_score = min_log_prob(&pieces) - F::cast(10.0);
            let mut nll = F::zero();
            for (chars, freq) in &tokens {
                let w = F::cast_usize(*freq as usize);
                let z = forward_backward(
                    chars,
                    cfg.max_piece_length,
                    unk_score,
                    w,
                    |s| index.get(s).map(|&i| (i as u32, pieces[i].log_prob)),
                    &mut counts,
                );
                nll -= w * z;
            }
            nll_per_iteration.push(nll.to_f64().unwrap());
            // M-step
            let total: F = counts.iter().copied().sum();
            for (piece, &count) in pieces.iter_mut().zip(&counts) {
                let c = if count > F::zero() {
                    count
                } else {
                    F::cast(1e-12)
                };
                piece.log_prob = c.ln() - total.ln();
            }
        }
        for (piece, &count) in pieces.iter_mut().zip(&counts) {
            piece.em_count = count;
        }

        let done = pieces.len() <= target_pieces;
        if !done {
            prune(&mut pieces, cfg, target_pieces);
        }
        stats.rounds.push(RoundStats {
            nll_per_iteration,
            pieces_before,
            pieces_after: pieces.len(),
        });
        if done {
            break;
        }
    }

    // final normalization and deterministic id assignment
    let log_total = log_sum_exp(pieces.iter().map(|p| p.log_prob));
    for p in &mut pieces {
        p.log_prob = p.log_prob - log_total;
    }
    pieces.sort_by(|a, b| {
        b.log_prob
            .partial_cmp(&a.log_prob)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.piece.cmp(&b.piece))
    });
    let vocab = UnigramVocab::new(
        pieces.into_iter().map(|p| (p.piece, p.log_prob)).collect(),
        cfg.character_coverage,
    )?;
    Ok((vocab, stats))
}

#[derive(Debug, Clone)]
struct Candidate<F> {
    piece: String,
    log_prob: F,
    em_count: F,
    protected: bool,
}

fn min_log_prob<F: Scalar>(pieces: &[Candidate<F>]) -> F {
    pieces
        .iter()
        .map(|p| p.log_prob)
        .fold(F::infinity(), |a, b| if b < a { b } else { a })
}

fn log_sum_exp<F: Scalar>(values: impl Iterator<Item = F> + Clone) -> F {
    let max = values
        .clone()
        .fold(F::neg_infinity(), |a, b| if b > a { b } else { a });
    let sum: F = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Single characters kept by coverage: most frequent first until the coverage
/// fraction of character occurrences is reached; emoji and the word-boundary
/// marker are always kept.
fn required_chars(token_counts: &BTreeMap<String, u64>, coverage: f64) -> BTreeSet<char> {
    let mut char_counts: BTreeMap<char, u64> = BTreeMap::new();
    for (token, &freq) in token_counts {
        for c in token.chars() {
            *char_counts.entry(c).or_insert(0) += freq;
        }
    }
    let total: u64 = char_counts.values().sum();
    let mut by_freq: Vec<(char, u64)> = char_counts.into_iter().collect();
    by_freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut required = BTreeSet::new();
    let mut covered = 0u64;
    let budget = (coverage * total as f64).ceil() as u64;
    for (c, freq) in by_freq {
        let forced = c == super::MARKER || emoji::is_emoji_char(c) || emoji::is_emoji_component(c);
        if covered < budget || forced {
            required.insert(c);
            covered += freq;
        }
    }
    required
}

/// Substring candidate pool: required single characters plus the highest
/// `freq * len` multi-character substrings, capped at multiplier x target.
/// Substrings containing an uncovered character or an emoji (emoji stay
/// single-piece) are skipped; the marker may appear only piece-initially.
fn seed_candidates<F: Scalar>(
    tokens: &[(Vec<char>, u64)],
    required: &BTreeSet<char>,
    cfg: &TrainerConfig,
    target_pieces: usize,
) -> Result<Vec<Candidate<F>>> {
    let mut sub_counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut char_counts: BTreeMap<char, u64> = BTreeMap::new();
    for (chars, freq) in tokens {
        for (i, &c) in chars.iter().enumerate() {
            if required.contains(&c) {
                *char_counts.entry(c).or_insert(0) += freq;
            }
            if !required.contains(&c) || emoji::is_emoji_char(c) || emoji::is_emoji_component(c) {
                continue;
            }
            let mut piece = String::new();
            piece.push(c);
            for j in i + 1..chars.len().min(i + cfg.max_piece_length) {
                let cj = chars[j];
                if !required.contains(&cj)
                    || cj == super::MARKER
                    || emoji::is_emoji_char(cj)
                    || emoji::is_emoji_component(cj)
                {
                    break;
                }
                piece.push(cj);
                *sub_counts.entry(piece.clone()).or_insert(0) += freq;
            }
        }
    }
    let pool_cap = cfg.seed_vocab_multiplier * target_pieces;
    let mut multi: Vec<(String, u64)> = sub_counts.into_iter().collect();
    multi.sort_by(|a, b| {
        let score_a = a.1 * a.0.chars().count() as u64;
        let score_b = b.1 * b.0.chars().count() as u64;
        score_b.cmp(&score_a).then(a.0.cmp(&b.0))
    });
    let keep_multi = pool_cap.saturating_sub(required.len()).min(multi.len());
    multi.truncate(keep_multi);

    let available = required.len() + multi.len();
    if available < target_pieces {
        return Err(Error::VocabTooLarge {
            target: cfg.target_vocab_size,
            available: available + SPECIAL_COUNT,
        });
    }

    let mut candidates: Vec<Candidate<F>> = Vec::with_capacity(available);
    let mut total = 0u64;
    for (&c, &freq) in &char_counts {
        candidates.push(Candidate {
            piece: c.to_string(),
            log_prob: F::cast_usize(freq as usize),
            em_count: F::zero(),
            protected: true,
        });
        total += freq;
    }
    for (piece, freq) in multi {
        candidates.push(Candidate {
            piece,
            log_prob: F::cast_usize(freq as usize),
            em_count: F::zero(),
            protected: false,
        });
        total += freq;
    }
    let log_total = F::cast_usize(total as usize).ln();
    for cand in &mut candidates {
        cand.log_prob = cand.log_prob.ln() - log_total;
    }
    Ok(candidates)
}

/// Drop the `prune_fraction` of prunable pieces with the smallest likelihood
/// loss if removed, where the loss is the piece's expected count times the
/// gap between its own log probability and the best alternative segmentation
/// of its surface string. Never drops below the target size; always drops at
/// least one piece so rounds make progress.
fn prune<F: Scalar>(pieces: &mut Vec<Candidate<F>>, cfg: &TrainerConfig, target_pieces: usize) {
    let index: HashMap<String, (usize, F)> = pieces
        .iter()
        .enumerate()
        .map(|(i, p)| (p.piece.clone(), (i, p.log_prob)))
        .collect();
    let unk_score = min_log_prob(pieces) - F::cast(10.0);
    let mut losses: Vec<(F, usize)> = Vec::new();
    for (i, cand) in pieces.iter().enumerate() {
        if cand.protected {
            continue;
        }
        let chars: Vec<char> = cand.piece.chars().collect();
        let alt = viterbi(
            &chars,
            cfg.max_piece_length,
            unk_score,
            |s| match index.get(s) {
                Some(&(j, logp)) if j != i => Some((j as u32, logp)),
                _ => None,
            },
        )
        .score;
        let loss = cand.em_count * (cand.log_prob - alt);
        losses.push((loss, i));
    }
    let prunable = losses.len();
    let by_fraction = (cfg.prune_fraction * prunable as f64).ceil() as usize;
    let drop = by_fraction
        .max(1)
        .min(pieces.len().saturating_sub(target_pieces))
        .min(prunable);
    losses.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| pieces[a.1].piece.cmp(&pieces[b.1].piece))
    });
    let doomed: BTreeSet<usize> = losses.iter().take(drop).map(|&(_, i)| i).collect();
    let mut keep = Vec::with_capacity(pieces.len() - doomed.len());
    for (i, cand) in pieces.drain(..).enumerate() {
        if !doomed.contains(&i) {
            keep.push(cand);
        }
    }
    *pieces = keep;
}
