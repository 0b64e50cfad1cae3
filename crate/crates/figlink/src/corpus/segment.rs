//! Deterministic sentence segmentation.
//!
//! Splits on `.` / `!` / `?` followed by whitespace and an uppercase letter,
//! guarded by a fixed abbreviation list. Whitespace is normalized; the
//! concatenation of the output equals the normalized input.

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Tokens that end with a period but do not terminate a sentence.
const ABBREVIATIONS: &[&str] = &["dr.", "mr.", "e.g.", "etc.", "fig.", "no.", "u.s."];

fn is_terminator(c: char) -> bool {
    c == '.' || c == '!' || c == '?'
}

/// Last whitespace-delimited token of `text`, including the terminator.
fn trailing_token(text: &str) -> &str {
    text.split_whitespace().last().unwrap_or(text)
}

pub fn segment_sentences(text: &str) -> Result<Vec<Sentence>> {
    let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if normalized.is_empty() {
        return Err(Error::EmptyText);
    }

    let chars: Vec<(usize, char)> = normalized.char_indices().collect();
    let mut sentences: Vec<Sentence> = Vec::new();
    let mut start = 0usize;

    let mut push = |sentences: &mut Vec<Sentence>, slice: &str| {
        let trimmed = slice.trim();
        if !trimmed.is_empty() {
            sentences.push(Sentence::new(sentences.len(), trimmed));
        }
    };

    for idx in 0..chars.len() {
        let (byte_pos, c) = chars[idx];
        if !is_terminator(c) {
            continue;
        }
        // Require whitespace right after the terminator, then an uppercase
        // letter as the start of the next sentence.
        let Some(&(_, next)) = chars.get(idx + 1) else {
            continue;
        };
        if !next.is_whitespace() {
            continue;
        }
        let mut look = idx + 2;
        while look < chars.len() && chars[look].1.is_whitespace() {
            look += 1;
        }
        let Some(&(_, head)) = chars.get(look) else {
            continue;
        };
        if !head.is_uppercase() {
            continue;
        }
        if c == '.' {
            let candidate = &normalized[start..byte_pos + c.len_utf8()];
            let token = trailing_token(candidate).to_lowercase();
            if ABBREVIATIONS.contains(&token.as_str()) {
                continue;
            }
        }
        push(&mut sentences, &normalized[start..byte_pos + c.len_utf8()]);
        start = chars[look].0;
    }
    push(&mut sentences, &normalized[start..]);

    Ok(sentences)
}
