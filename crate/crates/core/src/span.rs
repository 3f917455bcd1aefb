//! B-T/I-T/O span-label remapping under emoji expansion or deletion, plus a
//! literal pseudocode transliteration kept naive for differential testing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::EmojiLexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanTag {
    #[serde(rename = "B-T")]
    Begin,
    #[serde(rename = "I-T")]
    Inside,
    #[serde(rename = "O")]
    Outside,
}

impl SpanTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SpanTag::Begin => "B-T",
            SpanTag::Inside => "I-T",
            SpanTag::Outside => "O",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "B-T" => Ok(SpanTag::Begin),
            "I-T" => Ok(SpanTag::Inside),
            "O" => Ok(SpanTag::Outside),
            other => Err(Error::BadTag(other.to_string())),
        }
    }
}

/// Parallel word/label sequences in B-T/I-T/O tagging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanLabeledSeq {
    pub words: Vec<String>,
    pub labels: Vec<SpanTag>,
}

impl SpanLabeledSeq {
    pub fn new(words: Vec<String>, labels: Vec<SpanTag>) -> Result<Self> {
        if words.len() != labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} words vs {} labels",
                words.len(),
                labels.len()
            )));
        }
        Ok(SpanLabeledSeq { words, labels })
    }

    /// Every I-T must be preceded by B-T or I-T.
    pub fn bio_valid(&self) -> bool {
        let mut prev_in_span = false;
        for &l in &self.labels {
            match l {
                SpanTag::Inside if !prev_in_span => return false,
                SpanTag::Inside | SpanTag::Begin => prev_in_span = true,
                SpanTag::Outside => prev_in_span = false,
            }
        }
        true
    }

    /// Build from whitespace-split text plus word-index spans (end exclusive):
    /// span start gets B-T, the rest of the span I-T, everything else O.
    pub fn from_text_and_spans(text: &str, spans: &[(usize, usize)]) -> Result<Self> {
        let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        let mut labels = vec![SpanTag::Outside; words.len()];
        for &(start, end) in spans {
            if start >= end || end > words.len() {
                return Err(Error::LengthMismatch(format!(
                    "span ({start},{end}) out of range for {} words",
                    words.len()
                )));
            }
            labels[start] = SpanTag::Begin;
            for label in labels.iter_mut().take(end).skip(start + 1) {
                *label = SpanTag::Inside;
            }
        }
        SpanLabeledSeq::new(words, labels)
    }

    /// Inverse of [`Self::from_text_and_spans`]: word-index spans, end exclusive.
    pub fn to_spans(&self) -> Vec<(usize, usize)> {
        let mut spans = Vec::new();
        let mut open: Option<usize> = None;
        for (i, &l) in self.labels.iter().enumerate() {
            match l {
                SpanTag::Begin => {
                    if let Some(s) = open.take() {
                        spans.push((s, i));
                    }
                    open = Some(i);
                }
                SpanTag::Inside => {}
                SpanTag::Outside => {
                    if let Some(s) = open.take() {
                        spans.push((s, i));
                    }
                }
            }
        }
        if let Some(s) = open {
            spans.push((s, self.words.len()));
        }
        spans
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct RemapOptions {
    /// true = drop emoji words, false = expand them via the lexicon.
    pub delete: bool,
}

/// Update span labels when emoji words are expanded to multi-word text or
/// deleted. A B-T emoji's first expansion word keeps B-T and the following
/// words take I-T; an I-T or O emoji propagates its own label to every
/// expansion word. Emoji absent from the lexicon are ordinary words, even
/// under delete.
pub fn remap_spans(
    seq: &SpanLabeledSeq,
    lex: &EmojiLexicon,
    opts: RemapOptions,
) -> Result<SpanLabeledSeq> {
    if seq.words.len() != seq.labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} words vs {} labels",
            seq.words.len(),
            seq.labels.len()
        )));
    }
    let mut words = Vec::with_capacity(seq.words.len());
    let mut labels = Vec::with_capacity(seq.labels.len());
    for (word, &label) in seq.words.iter().zip(&seq.labels) {
        match lex.get(word) {
            Some(expansion) => {
                if opts.delete {
                    continue;
                }
                let parts: Vec<&str> = expansion.split(' ').filter(|p| !p.is_empty()).collect();
                if parts.is_empty() {
                    return Err(Error::EmptyExpansion { emoji: word.clone() });
                }
                for (j, part) in parts.iter().enumerate() {
                    words.push(part.to_string());
                    labels.push(match label {
                        SpanTag::Begin if j > 0 => SpanTag::Inside,
                        other => other,
                    });
                }
            }
            None => {
                words.push(word.clone());
                labels.push(label);
            }
        }
    }
    Ok(SpanLabeledSeq { words, labels })
}

/// Naive reference remapper kept line-for-line simple, including its
/// per-position `check` counter. Kept naive on purpose; the differential
/// tests hold `remap_spans` to this reference.
pub fn remap_spans_oracle(
    seq: &SpanLabeledSeq,
    lex: &EmojiLexicon,
    opts: RemapOptions,
) -> Result<SpanLabeledSeq> {
    assert_eq!(seq.words.len(), seq.labels.len());
    let comment = &seq.words;
    let label = &seq.labels;
    let mut new_comment: Vec<String> = Vec::new();
    let mut new_label: Vec<SpanTag> = Vec::new();
    for i in 0..comment.len() {
        let mut check = 0;
        if lex.contains(&comment[i]) {
            if opts.delete {
                continue;
            }
            let expansion = lex.get(&comment[i]).unwrap();
            let split: Vec<&str> = expansion.split(' ').filter(|p| !p.is_empty()).collect();
            if split.is_empty() {
                return Err(Error::EmptyExpansion {
                    emoji: comment[i].clone(),
                });
            }
            for j in 0..split.len() {
                if label[i] == SpanTag::Begin {
                    if check == 0 {
                        check += 1;
                        new_label.push(label[i]);
                    } else {
                        new_label.push(SpanTag::Inside);
                    }
                } else {
                    new_label.push(label[i]);
                }
                new_comment.push(split[j].to_string());
            }
        } else {
            new_comment.push(comment[i].clone());
            new_label.push(label[i]);
        }
        assert_eq!(new_comment.len(), new_label.len());
    }
    Ok(SpanLabeledSeq {
        words: new_comment,
        labels: new_label,
    })
}
