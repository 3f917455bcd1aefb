//! Vietnamese diacritic modeling and percentage-controlled stripping.
//!
//! Two mark families: letter-shape marks (circumflex, breve, horn, the stroke
//! on đ) and the five tone marks (grave, acute, hook above, tilde, dot below).
//! Stripping decomposes to NFD, drops the marks, maps đ/Đ to d/D and
//! recomposes, so every Vietnamese letter falls back to its unmarked base
//! while everything else (punctuation, emoji, foreign letters) is untouched.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::seeding::rng_for;

/// The five tone marks, as NFD combining characters.
const TONE_MARKS: [char; 5] = ['\u{0300}', '\u{0301}', '\u{0309}', '\u{0303}', '\u{0323}'];
/// Circumflex, breve, horn.
const LETTER_MARKS: [char; 3] = ['\u{0302}', '\u{0306}', '\u{031B}'];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiacriticClass {
    /// Shape marks: ă â ê ô ơ ư đ (and uppercase).
    LetterMark,
    /// Tone marks: grave, acute, hook above, tilde, dot below.
    ToneMark,
}

/// Classify an NFD combining mark (or đ/Đ, which carries its stroke in the
/// precomposed letter). Returns `None` for anything that is not a Vietnamese
/// diacritic.
pub fn classify_mark(c: char) -> Option<DiacriticClass> {
    if TONE_MARKS.contains(&c) {
        Some(DiacriticClass::ToneMark)
    } else if LETTER_MARKS.contains(&c) || c == 'đ' || c == 'Đ' {
        Some(DiacriticClass::LetterMark)
    } else {
        None
    }
}

/// Map every Vietnamese letter to its unmarked base; đ→d, Đ→D. Idempotent.
pub fn strip_all_diacritics(text: &str) -> String {
    text.nfd()
        .filter(|c| !TONE_MARKS.contains(c) && !LETTER_MARKS.contains(c))
        .map(|c| match c {
            'đ' => 'd',
            'Đ' => 'D',
            other => other,
        })
        .nfc()
        .collect()
}

/// True iff any letter of the word carries a tone or letter mark (đ counts).
pub fn has_diacritics(word: &str) -> bool {
    word.nfd().any(|c| classify_mark(c).is_some())
}

/// Record of one partial-stripping realization: which whitespace words
/// (by word index over the whole text) were stripped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripPlan {
    pub percentage: u8,
    pub seed: u64,
    pub selected_word_indices: Vec<usize>,
}

fn valid_percentage(p: u8) -> Result<()> {
    match p {
        25 | 50 | 75 | 100 => Ok(()),
        other => Err(Error::InvalidPercentage(other)),
    }
}

/// Strip diacritics from exactly `ceil(p/100 * k)` of the `k` diacritic-bearing
/// whitespace words, chosen uniformly without replacement by a generator
/// derived from `(seed, comment_id)`. All other words and the whitespace
/// structure are byte-identical.
pub fn strip_partial(
    text: &str,
    percentage: u8,
    seed: u64,
    comment_id: &str,
) -> Result<(String, StripPlan)> {
    valid_percentage(percentage)?;
    // split into alternating whitespace/word chunks, keeping separators
    let chunks = split_keep_whitespace(text);
    let word_indices: Vec<usize> = chunks
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_ws)
        .map(|(i, _)| i)
        .collect();
    let bearing: Vec<usize> = word_indices
        .iter()
        .enumerate()
        .filter(|(_, &chunk_idx)| has_diacritics(chunks[chunk_idx].s))
        .map(|(word_idx, _)| word_idx)
        .collect();
    let k = bearing.len();
    let n_strip = (usize::from(percentage) * k).div_ceil(100);
    let mut rng = rng_for(seed, comment_id, u64::from(percentage));
    let mut chosen: Vec<usize> = sample(&mut rng, k, n_strip)
        .into_iter()
        .map(|i| bearing[i])
        .collect();
    chosen.sort_unstable();

    let mut out = String::with_capacity(text.len());
    let chosen_chunks: std::collections::HashSet<usize> =
        chosen.iter().map(|&w| word_indices[w]).collect();
    for (i, chunk) in chunks.iter().enumerate() {
        if chosen_chunks.contains(&i) {
            out.push_str(&strip_all_diacritics(chunk.s));
        } else {
            out.push_str(chunk.s);
        }
    }
    let plan = StripPlan {
        percentage,
        seed,
        selected_word_indices: chosen,
    };
    Ok((out, plan))
}

struct Chunk<'a> {
    s: &'a str,
    is_ws: bool,
}

fn split_keep_whitespace(text: &str) -> Vec<Chunk<'_>> {
    let mut chunks = Vec::new();
    let mut start = 0;
    let mut cur_ws: Option<bool> = None;
    for (i, c) in text.char_indices() {
        let ws = c.is_whitespace();
        match cur_ws {
            Some(prev) if prev == ws => {}
            Some(prev) => {
                chunks.push(Chunk {
                    s: &text[start..i],
                    is_ws: prev,
                });
                start = i;
                cur_ws = Some(ws);
            }
            None => cur_ws = Some(ws),
        }
    }
    if let Some(prev) = cur_ws {
        chunks.push(Chunk {
            s: &text[start..],
            is_ws: prev,
        });
    }
    chunks
}
