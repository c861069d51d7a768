use unicode_normalization::UnicodeNormalization;

use crate::config::Normalization;

/// Canonical text form used by every metric: NFC, lowercase, full-width
/// digits folded to ASCII, whitespace runs collapsed to one space, trimmed.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.nfc().flat_map(char::to_lowercase) {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(fold_digit(c));
    }
    out
}

/// Collapses whitespace runs and trims, leaving characters untouched.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn normalize_with(text: &str, mode: Normalization) -> String {
    match mode {
        Normalization::None => text.to_string(),
        Normalization::Whitespace => collapse_whitespace(text),
        Normalization::Full => normalize(text),
    }
}

fn fold_digit(c: char) -> char {
    match c {
        '\u{FF10}'..='\u{FF19}' => char::from(b'0' + (c as u32 - 0xFF10) as u8),
        _ => c,
    }
}
