//! Segmentation lattice over one model token: Viterbi decoding and the
//! forward-backward pass the EM trainer uses for expected piece counts.

use crate::scalar::Scalar;

/// One lattice edge chosen by Viterbi. `id: None` is a single-character
/// <unk> fallback. Offsets are codepoint positions within the token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticePiece {
    pub start: usize,
    pub end: usize,
    pub id: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct ViterbiResult<F> {
    pub score: F,
    pub segments: Vec<LatticePiece>,
}

/// Max-score segmentation of `chars`. `lookup` maps a piece string to its
/// (id, log probability). Characters with no single-char piece fall back to a
/// per-character <unk> edge at `unk_score`. Candidate lengths are tried in
/// increasing order and a candidate replaces the incumbent on `>=`, so among
/// equal-score segmentations the one ending in the longest piece wins at each
/// position.
pub fn viterbi<F: Scalar>(
    chars: &[char],
    max_piece_len: usize,
    unk_score: F,
    lookup: impl Fn(&str) -> Option<(u32, F)>,
) -> ViterbiResult<F> {
    let n = chars.len();
    let mut best: Vec<F> = vec![F::neg_infinity(); n + 1];
    let mut back: Vec<Option<LatticePiece>> = vec![None; n + 1];
    best[0] = F::zero();
    let mut buf = String::new();
    for end in 1..=n {
        for len in 1..=max_piece_len.min(end) {
            let start = end - len;
            if best[start] == F::neg_infinity() {
                continue;
            }
            buf.clear();
            buf.extend(&chars[start..end]);
            let edge = match lookup(&buf) {
                Some((id, logp)) => Some((Some(id), logp)),
                None if len == 1 => Some((None, unk_score)),
                None => None,
            };
            if let Some((id, logp)) = edge {
                let cand = best[start] + logp;
                if cand >= best[end] {
                    best[end] = cand;
                    back[end] = Some(LatticePiece { start, end, id });
                }
            }
        }
    }
    let mut segments = Vec::new();
    let mut pos = n;
    while pos > 0 {
        let piece = back[pos].expect("lattice always has a path");
        segments.push(piece);
        pos = piece.start;
    }
    segments.reverse();
    ViterbiResult {
        score: best[n],
        segments,
    }
}

/// Forward-backward over the same lattice. Adds `weight * E[count of piece]`
/// into `counts` (indexed by piece id) and returns the token log-likelihood
/// `log Z`. Unk edges contribute to the likelihood but are not counted.
pub fn forward_backward<F: Scalar>(
    chars: &[char],
    max_piece_len: usize,
    unk_score: F,
    weight: F,
    lookup: impl Fn(&str) -> Option<(u32, F)>,
    counts: &mut [F],
) -> F {
    let n = chars.len();
    if n == 0 {
        return F::zero();
    }
    // collect edges once: (start, end, id, logp)
    let mut edges: Vec<(usize, usize, Option<u32>, F)> = Vec::new();
    let mut buf = String::new();
    for end in 1..=n {
        for len in 1..=max_piece_len.min(end) {
            let start = end - len;
            buf.clear();
            buf.extend(&chars[start..end]);
            match lookup(&buf) {
                Some((id, logp)) => edges.push((start, end, Some(id), logp)),
                None if len == 1 => edges.push((start, end, None, unk_score)),
                None => {}
            }
        }
    }
    let mut alpha = vec![F::neg_infinity(); n + 1];
    let mut beta = vec![F::neg_infinity(); n + 1];
    alpha[0] = F::zero();
    for end in 1..=n {
        for &(s, e, _, logp) in edges.iter().filter(|&&(_, e, _, _)| e == end) {
            alpha[end] = log_add(alpha[end], alpha[s] + logp);
            let _ = e;
        }
    }
    beta[n] = F::zero();
    for start in (0..n).rev() {
        for &(s, e, _, logp) in edges.iter().filter(|&&(s, _, _, _)| s == start) {
            beta[start] = log_add(beta[start], beta[e] + logp);
            let _ = s;
        }
    }
    let z = alpha[n];
    debug_assert!(z.is_finite());
    for &(s, e, id, logp) in &edges {
        if let Some(id) = id {
            let posterior = (alpha[s] + logp + beta[e] - z).exp();
            counts[id as usize] += weight * posterior;
        }
    }
    z
}

fn log_add<F: Scalar>(a: F, b: F) -> F {
    if a == F::neg_infinity() {
        return b;
    }
    if b == F::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
