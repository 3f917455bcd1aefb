//! Vocabulary storage, Viterbi encoding and the TSV vocab file format.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lattice::viterbi;
use super::{model_tokens, normalize_text, MARKER};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BOS: u32 = 0;
pub const PAD: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;
/// `<mask>` takes the last id; see [`UnigramVocab::mask_id`].
pub const MASK: &str = "<mask>";

const SPECIAL_NAMES: [&str; 4] = ["<s>", "<pad>", "</s>", "<unk>"];
const FIRST_PIECE_ID: u32 = 4;

/// Subword pieces with natural-log probabilities plus the special-token table.
/// Non-special piece probabilities sum to 1 (checked to 1e-6 on construction
/// and load).
#[derive(Debug, Clone)]
pub struct UnigramVocab<F: Scalar> {
    pieces: Vec<(String, F)>,
    piece_ids: HashMap<String, u32>,
    max_piece_len: usize,
    min_log_prob: F,
    character_coverage: f64,
}

impl<F: Scalar> UnigramVocab<F> {
    /// `pieces` in id order (ids 4..4+len); probabilities must sum to 1.
    pub fn new(pieces: Vec<(String, F)>, character_coverage: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::VocabFormat("no pieces".into()));
        }
        let mut piece_ids = HashMap::with_capacity(pieces.len());
        let mut sum = 0.0f64;
        let mut max_piece_len = 0;
        let mut min_log_prob = F::infinity();
        for (i, (piece, logp)) in pieces.iter().enumerate() {
            if piece.is_empty() {
                return Err(Error::VocabFormat("empty piece".into()));
            }
            if SPECIAL_NAMES.contains(&piece.as_str()) || piece == MASK {
                return Err(Error::VocabFormat(format!(
                    "piece {piece:?} collides with a special token"
                )));
            }
            if *logp > F::zero() {
                return Err(Error::VocabFormat(format!(
                    "piece {piece:?} has positive log probability"
                )));
            }
            if piece_ids
                .insert(piece.clone(), FIRST_PIECE_ID + i as u32)
                .is_some()
            {
                return Err(Error::VocabFormat(format!("duplicate piece {piece:?}")));
            }
            sum += logp.to_f64().unwrap().exp();
            max_piece_len = max_piece_len.max(piece.chars().count());
            if *logp < min_log_prob {
                min_log_prob = *logp;
            }
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::VocabFormat(format!(
                "piece probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(UnigramVocab {
            pieces,
            piece_ids,
            max_piece_len,
            min_log_prob,
            character_coverage,
        })
    }

    /// Total size including the five special tokens.
    pub fn vocab_size(&self) -> usize {
        self.pieces.len() + 5
    }

    pub fn mask_id(&self) -> u32 {
        FIRST_PIECE_ID + self.pieces.len() as u32
    }

    pub fn is_special(&self, id: u32) -> bool {
        id < FIRST_PIECE_ID || id == self.mask_id()
    }

    /// Id range holding ordinary pieces, for random-replacement sampling.
    pub fn piece_id_range(&self) -> std::ops::Range<u32> {
        FIRST_PIECE_ID..FIRST_PIECE_ID + self.pieces.len() as u32
    }

    pub fn id_of(&self, piece: &str) -> Option<u32> {
        match piece {
            "<s>" => Some(BOS),
            "<pad>" => Some(PAD),
            "</s>" => Some(EOS),
            "<unk>" => Some(UNK),
            MASK => Some(self.mask_id()),
            _ => self.piece_ids.get(piece).copied(),
        }
    }

    pub fn piece_of(&self, id: u32) -> Result<&str> {
        if let Some(idx) = (id as usize).checked_sub(FIRST_PIECE_ID as usize) {
            if idx < self.pieces.len() {
                return Ok(&self.pieces[idx].0);
            }
            if id == self.mask_id() {
                return Ok(MASK);
            }
            return Err(Error::IdOutOfRange(id));
        }
        Ok(SPECIAL_NAMES[id as usize])
    }

    pub fn log_prob(&self, id: u32) -> Option<F> {
        (id as usize)
            .checked_sub(FIRST_PIECE_ID as usize)
            .and_then(|idx| self.pieces.get(idx))
            .map(|(_, lp)| *lp)
    }

    pub fn pieces(&self) -> &[(String, F)] {
        &self.pieces
    }

    pub fn character_coverage(&self) -> f64 {
        self.character_coverage
    }

    /// Score given to a single-character <unk> fallback, below every piece.
    pub fn unk_score(&self) -> F {
        self.min_log_prob - F::cast(10.0)
    }

    /// Maximum-likelihood Viterbi segmentation with <s>/</s> wrapping.
    /// Offsets are codepoint offsets into the normalized input; specials get
    /// zero-width offsets at the ends. On score ties the candidate examined
    /// last wins, and piece lengths are examined in increasing order, so the
    /// segmentation whose final piece is longest is preferred.
    pub fn encode(&self, text: &str) -> Encoding {
        let normalized = normalize_text(text);
        let mut ids = vec![BOS];
        let mut pieces = vec!["<s>".to_string()];
        let mut offsets = vec![(0usize, 0usize)];
        let mut pos = 0usize; // codepoint cursor in normalized text
        for token in model_tokens(&normalized) {
            let chars: Vec<char> = token.chars().collect();
            let segs = viterbi(
                &chars,
                self.max_piece_len,
                self.unk_score(),
                |piece| self.piece_ids.get(piece).map(|&id| (id, self.pieces[(id - FIRST_PIECE_ID) as usize].1)),
            )
            .segments;
            for seg in segs {
                let (id, piece) = match seg.id {
                    Some(id) => (id, self.piece_of(id).unwrap().to_string()),
                    None => (UNK, "<unk>".to_string()),
                };
                ids.push(id);
                pieces.push(piece);
                offsets.push((pos + seg.start, pos + seg.end));
            }
            pos += chars.len();
        }
        ids.push(EOS);
        pieces.push("</s>".to_string());
        offsets.push((pos, pos));
        Encoding {
            ids,
            pieces,
            offsets,
        }
    }

    /// Inverse of [`Self::encode`] for fully covered text: specials dropped,
    /// pieces concatenated, markers turned back into spaces.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut out = String::new();
        for &id in ids {
            if self.is_special(id) && id != UNK {
                continue;
            }
            out.push_str(self.piece_of(id)?);
        }
        let mut text = String::with_capacity(out.len());
        for c in out.chars() {
            if c == MARKER {
                text.push(' ');
            } else {
                text.push(c);
            }
        }
        Ok(text.trim_start().to_string())
    }

    /// TSV dump: header lines, then `piece<TAB>logprob` sorted by id.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(&mut file).map_err(|e| Error::io(path, e))
    }

    pub fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "#vocab_size\t{}", self.vocab_size())?;
        writeln!(w, "#character_coverage\t{}", self.character_coverage)?;
        writeln!(
            w,
            "#specials\t<s>:0\t<pad>:1\t</s>:2\t<unk>:3\t{}:{}",
            MASK,
            self.mask_id()
        )?;
        for (piece, logp) in &self.pieces {
            writeln!(w, "{piece}\t{logp}")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut declared_size: Option<usize> = None;
        let mut coverage = 1.0f64;
        let mut pieces = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<vocab>", e))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut parts = rest.splitn(2, '\t');
                match (parts.next(), parts.next()) {
                    (Some("vocab_size"), Some(v)) => {
                        declared_size = Some(v.parse().map_err(|_| {
                            Error::VocabFormat(format!("bad vocab_size {v:?}"))
                        })?);
                    }
                    (Some("character_coverage"), Some(v)) => {
                        coverage = v.parse().map_err(|_| {
                            Error::VocabFormat(format!("bad character_coverage {v:?}"))
                        })?;
                    }
                    (Some("specials"), _) => {}
                    _ => {
                        return Err(Error::VocabFormat(format!(
                            "unknown header on line {}",
                            idx + 1
                        )))
                    }
                }
                continue;
            }
            let (piece, logp) = line.split_once('\t').ok_or_else(|| {
                Error::VocabFormat(format!("expected piece<TAB>logprob on line {}", idx + 1))
            })?;
            let logp: F = logp.parse().map_err(|_| {
                Error::VocabFormat(format!("bad log probability on line {}", idx + 1))
            })?;
            pieces.push((piece.to_string(), logp));
        }
        let vocab = Self::new(pieces, coverage)?;
        if let Some(size) = declared_size {
            if size != vocab.vocab_size() {
                return Err(Error::VocabFormat(format!(
                    "header says {size} entries, file has {}",
                    vocab.vocab_size()
                )));
            }
        }
        Ok(vocab)
    }
}

/// One encoded sequence. `|ids| == |pieces| == |offsets|`; the offsets
/// partition the normalized input in codepoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub ids: Vec<u32>,
    pub pieces: Vec<String>,
    pub offsets: Vec<(usize, usize)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_vocab() -> UnigramVocab<f64> {
        UnigramVocab::new(
            vec![
                (MARKER.to_string(), 0.2f64.ln()),
                ("a".into(), 0.2f64.ln()),
                ("b".into(), 0.2f64.ln()),
                ("ab".into(), 0.4f64.ln()),
            ],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn encode_prefers_higher_scoring_piece() {
        let v = toy_vocab();
        let enc = v.encode("ab");
        assert_eq!(enc.pieces, vec!["<s>", "▁", "ab", "</s>"]);
        let enc = v.encode("abab");
        assert_eq!(enc.pieces, vec!["<s>", "▁", "ab", "ab", "</s>"]);
    }

    #[test]
    fn uncovered_char_becomes_unk() {
        let v = toy_vocab();
        let enc = v.encode("ax");
        assert_eq!(enc.pieces, vec!["<s>", "▁", "a", "<unk>", "</s>"]);
        assert_eq!(enc.ids[3], UNK);
    }

    #[test]
    fn offsets_partition_normalized_input() {
        let v = toy_vocab();
        let text = "ab ba ax";
        let normalized: Vec<char> = normalize_text(text).chars().collect();
        let enc = v.encode(text);
        let mut cursor = 0;
        for &(s, e) in &enc.offsets {
            assert_eq!(s, cursor.min(s)); // zero-width specials allowed
            if s != e {
                assert_eq!(s, cursor);
                cursor = e;
            }
        }
        assert_eq!(cursor, normalized.len());
    }

    #[test]
    fn decode_roundtrip() {
        let v = toy_vocab();
        let enc = v.encode("ab ba");
        assert_eq!(v.decode(&enc.ids).unwrap(), "ab ba");
        assert_eq!(v.decode(&[BOS, EOS]).unwrap(), "");
    }

    #[test]
    fn decode_rejects_out_of_range() {
        let v = toy_vocab();
        assert!(matches!(v.decode(&[99]), Err(Error::IdOutOfRange(99))));
    }

    #[test]
    fn tsv_roundtrip_is_bit_identical() {
        let v = toy_vocab();
        let mut buf = Vec::new();
        v.write(&mut buf).unwrap();
        let v2 = UnigramVocab::<f64>::read(std::io::Cursor::new(buf.clone())).unwrap();
        let mut buf2 = Vec::new();
        v2.write(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
        assert_eq!(v2.vocab_size(), v.vocab_size());
    }

    #[test]
    fn rejects_unnormalized_probabilities() {
        let err = UnigramVocab::<f64>::new(vec![("a".into(), -2.0)], 1.0).unwrap_err();
        assert!(matches!(err, Error::VocabFormat(_)));
    }

    #[test]
    fn special_ids_are_stable() {
        let v = toy_vocab();
        assert_eq!(v.id_of("<s>"), Some(0));
        assert_eq!(v.id_of("<pad>"), Some(1));
        assert_eq!(v.id_of("</s>"), Some(2));
        assert_eq!(v.id_of("<unk>"), Some(3));
        assert_eq!(v.id_of(MASK), Some(v.mask_id()));
        assert_eq!(v.vocab_size(), 9);
        assert_eq!(v.mask_id(), 8);
    }
}
