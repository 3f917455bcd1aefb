//! Unigram language-model subword tokenizer: vocabulary, Viterbi encoding,
//! EM training with likelihood-loss pruning, and token-length statistics.

mod lattice;
mod stats;
mod trainer;
mod vocab;

pub use lattice::{forward_backward, viterbi, LatticePiece};
pub use stats::{token_length_stats, DatasetTokenStats, TokenLengthReport};
pub use trainer::{train, train_from_token_counts, train_with_stats, RoundStats, TrainStats, TrainerConfig};
pub use vocab::{Encoding, UnigramVocab, BOS, EOS, MASK, PAD, UNK};

/// Word-boundary marker prepended to word-initial pieces.
pub const MARKER: char = '\u{2581}';

/// Rewrite raw text into the form the tokenizer sees: every whitespace run
/// becomes a single marker and a marker is prepended to the first word, so
/// the normalized string is the concatenation of marker-prefixed words.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    for word in text.split_whitespace() {
        out.push(MARKER);
        out.push_str(word);
    }
    out
}

/// Split normalized text into model tokens: one per marker-prefixed word,
/// further split at emoji boundaries so no piece can span an emoji and its
/// neighbors and every emoji sequence stands alone.
pub fn model_tokens(normalized: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for chunk in split_at_marker(normalized) {
        let mut cursor = 0;
        for seg in crate::emoji::segments(chunk) {
            let s = match seg {
                crate::emoji::Segment::Text(t) => t,
                crate::emoji::Segment::Emoji(e) => e,
            };
            debug_assert_eq!(&chunk[cursor..cursor + s.len()], s);
            cursor += s.len();
            out.push(s);
        }
    }
    out
}

fn split_at_marker(normalized: &str) -> Vec<&str> {
    let mut chunks = Vec::new();
    let mut start = 0;
    for (i, c) in normalized.char_indices() {
        if c == MARKER && i > start {
            chunks.push(&normalized[start..i]);
            start = i;
        }
    }
    if start < normalized.len() {
        chunks.push(&normalized[start..]);
    }
    chunks
}

/// Model tokens of raw text, allocated. Trainer and encoder both go through
/// this so their views of the corpus agree.
pub fn pretokenize(text: &str) -> Vec<String> {
    model_tokens(&normalize_text(text))
        .into_iter()
        .map(str::to_string)
        .collect()
}
