//! Corpus cleaning rules and emoji/teencode transforms, each an independent
//! composable function of (text, config).

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::emoji::{self, Segment};
use crate::error::{Error, Result};

/// Cleaning rule set. The paper-level rules (links, handle-only comments,
/// repeated spam, noncanonical text) are toggles; the spam threshold and the
/// content-ratio cutoff are knobs because the source never pins them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CleaningConfig {
    pub drop_link_comments: bool,
    pub drop_handle_only_comments: bool,
    pub strip_handles: bool,
    /// Min identical occurrences across the corpus to classify as repeated spam.
    pub spam_repeat_threshold: usize,
    pub keep_emojis: bool,
    pub drop_noncanonical: bool,
    /// Min fraction of letter-or-emoji characters for a comment to count as text.
    pub min_content_ratio: f64,
}

impl Default for CleaningConfig {
    fn default() -> Self {
        CleaningConfig {
            drop_link_comments: true,
            drop_handle_only_comments: true,
            strip_handles: true,
            spam_repeat_threshold: 5,
            keep_emojis: true,
            drop_noncanonical: true,
            min_content_ratio: 0.3,
        }
    }
}

impl CleaningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spam_repeat_threshold < 2 {
            return Err(Error::InvalidConfig(
                "spam_repeat_threshold must be >= 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.min_content_ratio) {
            return Err(Error::InvalidConfig(
                "min_content_ratio must be in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// Per-rule drop counts for one cleaning pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningStats {
    pub total: usize,
    pub kept: usize,
    pub link_dropped: usize,
    pub handle_only_dropped: usize,
    pub spam_dropped: usize,
    pub noncanonical_dropped: usize,
    pub handles_stripped: usize,
    pub emojis_removed_from: usize,
}

/// Teencode standardization table: non-standard token → standard token sequence.
#[derive(Debug, Clone, Default)]
pub struct TeencodeLexicon {
    entries: HashMap<String, String>,
}

impl TeencodeLexicon {
    /// Keys are stored lowercase; a key mapping to itself is rejected.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, (k, v)) in entries.into_iter().enumerate() {
            let k = k.to_lowercase();
            if k == v.to_lowercase() {
                return Err(Error::Lexicon {
                    line: i + 1,
                    reason: format!("key {k:?} maps to itself"),
                });
            }
            map.insert(k, v);
        }
        Ok(TeencodeLexicon { entries: map })
    }

    /// TSV: `nonstandard<TAB>standard`, UTF-8, `#` comment lines.
    pub fn from_tsv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(std::io::BufReader::new(file))
    }

    pub fn from_tsv(reader: impl BufRead) -> Result<Self> {
        let mut map = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io("<lexicon>", e))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('\t').ok_or_else(|| Error::Lexicon {
                line: lineno,
                reason: "expected nonstandard<TAB>standard".into(),
            })?;
            let k = k.to_lowercase();
            if k == v.to_lowercase() {
                return Err(Error::Lexicon {
                    line: lineno,
                    reason: format!("key {k:?} maps to itself"),
                });
            }
            map.insert(k, v.to_string());
        }
        Ok(TeencodeLexicon { entries: map })
    }

    pub fn get(&self, token_lower: &str) -> Option<&str> {
        self.entries.get(token_lower).map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Emoji → word-sequence table used both for text conversion and for span
/// remapping.
#[derive(Debug, Clone, Default)]
pub struct EmojiLexicon {
    entries: HashMap<String, String>,
}

impl EmojiLexicon {
    /// Every key must be an emoji sequence; values must be non-empty.
    pub fn from_entries(entries: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, (k, v)) in entries.into_iter().enumerate() {
            Self::check(&k, &v, i + 1)?;
            map.insert(k, v);
        }
        Ok(EmojiLexicon { entries: map })
    }

    /// TSV: `emoji<TAB>word sequence`, `#` comment lines.
    pub fn from_tsv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_tsv(std::io::BufReader::new(file))
    }

    pub fn from_tsv(reader: impl BufRead) -> Result<Self> {
        let mut map = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io("<lexicon>", e))?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('\t').ok_or_else(|| Error::Lexicon {
                line: lineno,
                reason: "expected emoji<TAB>words".into(),
            })?;
            Self::check(k, v, lineno)?;
            map.insert(k.to_string(), v.to_string());
        }
        Ok(EmojiLexicon { entries: map })
    }

    fn check(k: &str, v: &str, line: usize) -> Result<()> {
        if !emoji::is_emoji_sequence(k) {
            return Err(Error::Lexicon {
                line,
                reason: format!("key {k:?} is not an emoji sequence"),
            });
        }
        if v.trim().is_empty() {
            return Err(Error::Lexicon {
                line,
                reason: format!("empty value for {k:?}"),
            });
        }
        Ok(())
    }

    pub fn get(&self, emoji: &str) -> Option<&str> {
        self.entries.get(emoji).map(|s| s.as_str())
    }

    pub fn contains(&self, emoji: &str) -> bool {
        self.entries.contains_key(emoji)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Remove every maximal whitespace token starting with '@'; remaining tokens
/// are re-joined with single spaces.
pub fn strip_user_handles(text: &str) -> String {
    text.split_whitespace()
        .filter(|tok| !tok.starts_with('@'))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Replace each emoji that has a lexicon entry by its word sequence,
/// space-delimited from its neighbors. Uncovered emoji and plain text pass
/// through unchanged.
pub fn emojis_to_text(text: &str, lex: &EmojiLexicon) -> String {
    let segs = emoji::segments(text);
    let mut out = String::with_capacity(text.len());
    for (i, seg) in segs.iter().enumerate() {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Emoji(e) => match lex.get(e) {
                Some(words) => {
                    if !out.is_empty() && !out.ends_with(char::is_whitespace) {
                        out.push(' ');
                    }
                    out.push_str(words);
                    let next_needs_space = match segs.get(i + 1) {
                        Some(Segment::Text(t)) => !t.starts_with(char::is_whitespace),
                        Some(Segment::Emoji(e2)) => !lex.contains(e2),
                        None => false,
                    };
                    if next_needs_space {
                        out.push(' ');
                    }
                }
                None => out.push_str(e),
            },
        }
    }
    out
}

/// Remove all emoji sequences (including modifiers, variation selectors and
/// ZWJ sequences as whole units) and collapse the remaining whitespace.
pub fn remove_emojis(text: &str) -> String {
    let kept: String = emoji::segments(text)
        .into_iter()
        .filter_map(|seg| match seg {
            Segment::Text(t) => Some(t),
            Segment::Emoji(_) => None,
        })
        .collect();
    kept.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Collapse runs of >= 3 identical letters to one, then replace each
/// whitespace token found in the lexicon (case-insensitive lookup, case of the
/// first letter preserved). Whitespace separators are kept as-is.
pub fn normalize_teencode(text: &str, lex: &TeencodeLexicon) -> String {
    let collapsed = collapse_letter_runs(text);
    let mut out = String::with_capacity(collapsed.len());
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if token.is_empty() {
            return;
        }
        let lower = token.to_lowercase();
        match lex.get(&lower) {
            Some(replacement) => {
                let upper_first = token.chars().next().is_some_and(|c| c.is_uppercase());
                if upper_first {
                    let mut chars = replacement.chars();
                    if let Some(first) = chars.next() {
                        out.extend(first.to_uppercase());
                        out.push_str(chars.as_str());
                    }
                } else {
                    out.push_str(replacement);
                }
            }
            None => out.push_str(token),
        }
        token.clear();
    };
    for c in collapsed.chars() {
        if c.is_whitespace() {
            flush(&mut token, &mut out);
            out.push(c);
        } else {
            token.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

fn collapse_letter_runs(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut run_char: Option<char> = None;
    let mut run_len = 0usize;
    let flush = |out: &mut String, c: char, len: usize| {
        let keep = if c.is_alphabetic() && len >= 3 { 1 } else { len };
        for _ in 0..keep {
            out.push(c);
        }
    };
    for c in text.chars() {
        match run_char {
            Some(prev) if prev == c => run_len += 1,
            Some(prev) => {
                flush(&mut out, prev, run_len);
                run_char = Some(c);
                run_len = 1;
            }
            None => {
                run_char = Some(c);
                run_len = 1;
            }
        }
    }
    if let Some(prev) = run_char {
        flush(&mut out, prev, run_len);
    }
    out
}

fn contains_link(text: &str) -> bool {
    text.split_whitespace().any(|tok| {
        let t = tok.to_lowercase();
        t.contains("http://") || t.contains("https://") || t.starts_with("www.")
    })
}

fn handles_only(text: &str) -> bool {
    let mut any = false;
    for tok in text.split_whitespace() {
        if !tok.starts_with('@') {
            return false;
        }
        any = true;
    }
    any
}

fn content_ratio(text: &str) -> f64 {
    let mut total = 0usize;
    let mut content = 0usize;
    for c in text.chars() {
        if c.is_whitespace() {
            continue;
        }
        total += 1;
        if c.is_alphabetic() || emoji::is_emoji_char(c) || emoji::is_emoji_component(c) {
            content += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        content as f64 / total as f64
    }
}

/// Apply the enabled drop rules and transforms corpus-wide. Spam detection is
/// exact string equality after whitespace trimming, counted over the whole
/// corpus before filtering. Output preserves input order.
pub fn clean_corpus(corpus: &Corpus, cfg: &CleaningConfig) -> Result<(Corpus, CleaningStats)> {
    cfg.validate()?;
    let mut stats = CleaningStats {
        total: corpus.len(),
        ..CleaningStats::default()
    };
    let mut text_counts: HashMap<&str, usize> = HashMap::new();
    for c in corpus.iter() {
        *text_counts.entry(c.text.trim()).or_insert(0) += 1;
    }
    let mut kept = Vec::new();
    for c in corpus.iter() {
        if cfg.drop_link_comments && contains_link(&c.text) {
            stats.link_dropped += 1;
            continue;
        }
        if cfg.drop_handle_only_comments && handles_only(&c.text) {
            stats.handle_only_dropped += 1;
            continue;
        }
        if text_counts[c.text.trim()] >= cfg.spam_repeat_threshold {
            stats.spam_dropped += 1;
            continue;
        }
        if cfg.drop_noncanonical && content_ratio(&c.text) < cfg.min_content_ratio {
            stats.noncanonical_dropped += 1;
            continue;
        }
        let mut text = c.text.clone();
        if cfg.strip_handles && text.split_whitespace().any(|t| t.starts_with('@')) {
            text = strip_user_handles(&text);
            stats.handles_stripped += 1;
        }
        if !cfg.keep_emojis {
            let removed = remove_emojis(&text);
            if removed != text {
                stats.emojis_removed_from += 1;
                text = removed;
            }
        }
        let mut comment = c.clone();
        comment.text = text;
        kept.push(comment);
    }
    stats.kept = kept.len();
    let out = Corpus::from_comments(corpus.name.clone(), kept)?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Comment;

    fn lex(pairs: &[(&str, &str)]) -> TeencodeLexicon {
        TeencodeLexicon::from_entries(
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())),
        )
        .unwrap()
    }

    fn elex(pairs: &[(&str, &str)]) -> EmojiLexicon {
        EmojiLexicon::from_entries(pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())))
            .unwrap()
    }

    #[test]
    fn strips_handles() {
        assert_eq!(strip_user_handles("@john xin chào"), "xin chào");
        assert_eq!(strip_user_handles("xin chào"), "xin chào");
        assert_eq!(strip_user_handles("a@b.com giữ nguyên"), "a@b.com giữ nguyên");
    }

    #[test]
    fn converts_emojis() {
        let lex = elex(&[("😎", "mặt ngầu")]);
        assert_eq!(emojis_to_text("cảm ơn 😎", &lex), "cảm ơn mặt ngầu");
        assert_eq!(emojis_to_text("không có emoji", &lex), "không có emoji");
        let lex = elex(&[("😂", "cười ra nước mắt")]);
        assert_eq!(
            emojis_to_text("vãi 😂😂", &lex),
            "vãi cười ra nước mắt cười ra nước mắt"
        );
    }

    #[test]
    fn uncovered_emoji_left_in_place() {
        let lex = elex(&[("😎", "mặt ngầu")]);
        assert_eq!(emojis_to_text("hay 😂 lắm", &lex), "hay 😂 lắm");
    }

    #[test]
    fn removes_emojis() {
        assert_eq!(remove_emojis("cảm ơn 😎😎"), "cảm ơn");
        assert_eq!(remove_emojis("abc"), "abc");
        assert_eq!(remove_emojis("👍🏽 ok"), "ok");
    }

    #[test]
    fn teencode_paper_pairs() {
        let lex = lex(&[("ko", "không"), ("ăng", "ăn"), ("kơm", "cơm")]);
        assert_eq!(normalize_teencode("ko", &lex), "không");
        assert_eq!(normalize_teencode("ăng kơmmmmm", &lex), "ăn cơm");
        assert_eq!(normalize_teencode("bình thường", &lex), "bình thường");
    }

    #[test]
    fn teencode_preserves_leading_case() {
        let lex = lex(&[("ko", "không")]);
        assert_eq!(normalize_teencode("Ko biết", &lex), "Không biết");
    }

    #[test]
    fn run_collapse_only_touches_letters() {
        let lex = TeencodeLexicon::default();
        assert_eq!(normalize_teencode("hayyyy !!!", &lex), "hay !!!");
    }

    #[test]
    fn clean_drops_by_rule() {
        let cfg = CleaningConfig {
            spam_repeat_threshold: 3,
            ..CleaningConfig::default()
        };
        let comments = vec![
            Comment::new("1", "xem tại http://a.b"),
            Comment::new("2", "@user1 @user2"),
            Comment::new("3", "bình thường thôi"),
        ];
        let corpus = Corpus::from_comments("t", comments).unwrap();
        let (out, stats) = clean_corpus(&corpus, &cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(stats.link_dropped, 1);
        assert_eq!(stats.handle_only_dropped, 1);
        assert_eq!(stats.kept, 1);
    }

    #[test]
    fn clean_drops_repeated_spam() {
        let cfg = CleaningConfig {
            spam_repeat_threshold: 3,
            ..CleaningConfig::default()
        };
        let comments: Vec<Comment> = (0..5)
            .map(|i| Comment::new(format!("s{i}"), "mua ngay kẻo lỡ"))
            .collect();
        let corpus = Corpus::from_comments("t", comments).unwrap();
        let (out, stats) = clean_corpus(&corpus, &cfg).unwrap();
        assert!(out.is_empty());
        assert_eq!(stats.spam_dropped, 5);
    }

    #[test]
    fn drop_counts_sum_to_size_difference() {
        let cfg = CleaningConfig::default();
        let comments = vec![
            Comment::new("1", "https://spam.vn"),
            Comment::new("2", "@a"),
            Comment::new("3", "!!! ??? 123"),
            Comment::new("4", "bình thường nhé"),
        ];
        let corpus = Corpus::from_comments("t", comments).unwrap();
        let (out, stats) = clean_corpus(&corpus, &cfg).unwrap();
        let dropped = stats.link_dropped
            + stats.handle_only_dropped
            + stats.spam_dropped
            + stats.noncanonical_dropped;
        assert_eq!(stats.total - dropped, out.len());
        assert_eq!(stats.kept, out.len());
    }

    #[test]
    fn lexicon_rejects_self_mapping() {
        let err =
            TeencodeLexicon::from_entries([("ko".to_string(), "Ko".to_string())]).unwrap_err();
        assert!(matches!(err, Error::Lexicon { .. }));
    }

    #[test]
    fn emoji_lexicon_rejects_non_emoji_key() {
        let err =
            EmojiLexicon::from_entries([("abc".to_string(), "x".to_string())]).unwrap_err();
        assert!(matches!(err, Error::Lexicon { .. }));
    }
}
