//! Answer extraction from model completions.
//!
//! Completions are free text. The extractor first looks after the last
//! "final answer" marker (case-insensitive); failing that it scans the whole
//! completion. Boolean questions take yes/no tokens; multiple-choice takes a
//! standalone letter A-D or a verbatim option text. Lowercase single letters
//! are only trusted directly after a marker, and last of all, because "a" is
//! usually an article. A None result is an extraction failure: the answer is
//! scored incorrect and the failure is tallied separately.

use crate::taskgen::{QType, LETTERS};

/// Extracts "yes"/"no" (boolean) or "A".."D" (multiple choice) from a
/// completion, or None when nothing answer-shaped is found.
pub fn extract_answer(completion: &str, qtype: QType, options: &[String]) -> Option<String> {
    if let Some(tail) = after_last_marker(completion) {
        if let Some(ans) = parse_marked(tail, qtype, options) {
            return Some(ans);
        }
    }
    scan_whole(completion, qtype, options)
}

/// The text after the last case-insensitive "final answer" occurrence.
fn after_last_marker(text: &str) -> Option<&str> {
    const MARKER: &[u8] = b"final answer";
    let bytes = text.as_bytes();
    let pos = bytes
        .windows(MARKER.len())
        .rposition(|w| w.eq_ignore_ascii_case(MARKER))?;
    // Byte-aligned: the marker is pure ASCII, so pos + len is a char boundary.
    Some(&text[pos + MARKER.len()..])
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
}

fn bool_token(t: &str) -> Option<String> {
    if t.eq_ignore_ascii_case("yes") {
        Some("yes".to_string())
    } else if t.eq_ignore_ascii_case("no") {
        Some("no".to_string())
    } else {
        None
    }
}

fn upper_letter(t: &str) -> Option<String> {
    matches!(t, "A" | "B" | "C" | "D").then(|| t.to_string())
}

fn any_letter(t: &str) -> Option<String> {
    if t.len() != 1 {
        return None;
    }
    let c = t.as_bytes()[0].to_ascii_uppercase();
    matches!(c, b'A'..=b'D').then(|| (c as char).to_string())
}

/// Earliest (then longest) option whose text appears verbatim,
/// case-insensitively; trailing periods on options are not required.
fn option_match(text: &str, options: &[String]) -> Option<String> {
    let hay = text.to_ascii_lowercase();
    let mut best: Option<(usize, usize, usize)> = None;
    for (k, opt) in options.iter().enumerate() {
        let needle = opt.trim_end_matches('.').to_ascii_lowercase();
        if needle.is_empty() {
            continue;
        }
        if let Some(pos) = hay.find(&needle) {
            // Sort key prefers the earliest match, then the longest.
            let cand = (pos, usize::MAX - needle.len(), k);
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
    }
    best.map(|(_, _, k)| LETTERS[k].to_string())
}

fn parse_marked(tail: &str, qtype: QType, options: &[String]) -> Option<String> {
    match qtype {
        QType::Bool => tokens(tail).find_map(bool_token),
        QType::Mcq => tokens(tail)
            .find_map(|t| upper_letter(t))
            .or_else(|| option_match(tail, options))
            .or_else(|| tokens(tail).find_map(any_letter)),
    }
}

fn scan_whole(text: &str, qtype: QType, options: &[String]) -> Option<String> {
    match qtype {
        QType::Bool => tokens(text).filter_map(bool_token).last(),
        QType::Mcq => tokens(text)
            .filter_map(|t| upper_letter(t))
            .last()
            .or_else(|| option_match(text, options)),
    }
}
