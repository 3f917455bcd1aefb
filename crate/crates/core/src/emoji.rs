//! Emoji classification and sequence segmentation over a pinned static table
//! of codepoint ranges, so behavior does not drift with Unicode library
//! versions.

/// Pictographic codepoint ranges (inclusive). BMP symbols commonly rendered
/// as emoji plus the supplementary pictographic planes.
const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x00A9, 0x00A9), // ©
    (0x00AE, 0x00AE), // ®
    (0x203C, 0x203C),
    (0x2049, 0x2049),
    (0x2122, 0x2122),
    (0x2139, 0x2139),
    (0x2194, 0x2199),
    (0x21A9, 0x21AA),
    (0x231A, 0x231B),
    (0x2328, 0x2328),
    (0x23CF, 0x23CF),
    (0x23E9, 0x23F3),
    (0x23F8, 0x23FA),
    (0x24C2, 0x24C2),
    (0x25AA, 0x25AB),
    (0x25B6, 0x25B6),
    (0x25C0, 0x25C0),
    (0x25FB, 0x25FE),
    (0x2600, 0x27BF), // misc symbols, dingbats
    (0x2934, 0x2935),
    (0x2B05, 0x2B07),
    (0x2B1B, 0x2B1C),
    (0x2B50, 0x2B50),
    (0x2B55, 0x2B55),
    (0x3030, 0x3030),
    (0x303D, 0x303D),
    (0x3297, 0x3297),
    (0x3299, 0x3299),
    (0x1F000, 0x1FAFF), // pictographs, emoticons, transport, regional indicators, ...
];

/// Zero-width / modifier codepoints that extend an emoji sequence but are not
/// emoji on their own.
const COMPONENT_RANGES: &[(u32, u32)] = &[
    (0x200D, 0x200D),   // ZWJ
    (0x20E3, 0x20E3),   // combining enclosing keycap
    (0xFE0E, 0xFE0F),   // variation selectors
    (0x1F3FB, 0x1F3FF), // skin tone modifiers
    (0xE0020, 0xE007F), // tag characters (flag sequences)
];

fn in_ranges(c: char, ranges: &[(u32, u32)]) -> bool {
    let cp = c as u32;
    ranges.iter().any(|&(lo, hi)| cp >= lo && cp <= hi)
}

/// True for a base pictographic codepoint.
pub fn is_emoji_char(c: char) -> bool {
    in_ranges(c, EMOJI_RANGES) && !in_ranges(c, COMPONENT_RANGES)
}

/// True for variation selectors, ZWJ, keycap, skin tones and tag characters.
pub fn is_emoji_component(c: char) -> bool {
    in_ranges(c, COMPONENT_RANGES)
}

/// True if the string consists of exactly one emoji sequence (or at least one;
/// lexicon keys are expected to be single sequences).
pub fn is_emoji_sequence(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| is_emoji_char(c) || is_emoji_component(c))
}

/// One segment of a text: either plain text or a single emoji sequence
/// (base codepoint plus its modifiers and ZWJ-joined continuations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment<'a> {
    Text(&'a str),
    Emoji(&'a str),
}

/// Split `text` into alternating plain-text spans and individual emoji
/// sequences. Adjacent emoji yield one `Emoji` segment each; orphan component
/// characters (a stray ZWJ or variation selector) attach to no sequence and
/// come back as `Emoji` segments too, so removal drops them.
pub fn segments(text: &str) -> Vec<Segment<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut text_start: Option<usize> = None;
    fn flush<'a>(out: &mut Vec<Segment<'a>>, start: &mut Option<usize>, end: usize, text: &'a str) {
        if let Some(s) = start.take() {
            out.push(Segment::Text(&text[s..end]));
        }
    }
    while i < chars.len() {
        let (byte, c) = chars[i];
        if is_emoji_char(c) {
            flush(&mut out, &mut text_start, byte, text);
            // consume base + components, then any ZWJ-joined bases
            let mut j = i + 1;
            while j < chars.len() && is_emoji_component(chars[j].1) {
                let zwj = chars[j].1 == '\u{200D}';
                j += 1;
                if zwj {
                    if j < chars.len() && is_emoji_char(chars[j].1) {
                        j += 1;
                    } else {
                        break;
                    }
                }
            }
            let end = if j < chars.len() { chars[j].0 } else { text.len() };
            out.push(Segment::Emoji(&text[byte..end]));
            i = j;
        } else if is_emoji_component(c) {
            // orphan component
            flush(&mut out, &mut text_start, byte, text);
            let end = if i + 1 < chars.len() { chars[i + 1].0 } else { text.len() };
            out.push(Segment::Emoji(&text[byte..end]));
            i += 1;
        } else {
            if text_start.is_none() {
                text_start = Some(byte);
            }
            i += 1;
        }
    }
    flush(&mut out, &mut text_start, text.len(), text);
    out
}
