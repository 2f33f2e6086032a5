//! Straightforward re-implementations of the scoring rules, written without
//! reference to the library code. Word lists are spelled out here on purpose.

use std::collections::HashSet;

pub const FILLERS: [&str; 11] = [
    "um", "uh", "oh", "so", "ah", "yup", "nope", "uh-huh", "um-hum", "then", "and",
];
pub const CONJUNCTIONS: [&str; 5] = ["and", "but", "so", "then", "or"];
pub const IRRELEVANT: [&str; 4] = ["mother", "boy", "dog", "ledder"];

pub fn excluded(word: &str) -> bool {
    FILLERS.contains(&word) || CONJUNCTIONS.contains(&word) || IRRELEVANT.contains(&word)
}

/// ASCII tokenizer: drop `[...]`, split on anything but letters, digits,
/// `'` and `-`, trim those two from the ends, keep pieces with a letter.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut cleaned = String::new();
    let mut in_bracket = false;
    for c in text.chars() {
        match c {
            '[' => in_bracket = true,
            ']' if in_bracket => {
                in_bracket = false;
                cleaned.push(' ');
            }
            _ if in_bracket => {}
            '\u{2019}' => cleaned.push('\''),
            _ => cleaned.push(c),
        }
    }
    cleaned
        .split(|c: char| !(c.is_ascii_alphanumeric() || c == '\'' || c == '-'))
        .map(|w| {
            w.trim_matches(|c| c == '\'' || c == '-')
                .to_ascii_lowercase()
        })
        .filter(|w| w.chars().any(|c| c.is_ascii_alphabetic()))
        .collect()
}

/// Counts CIUs as runs: drop excluded words, then collapse adjacent equal
/// words. The most recent CIU always has the same value as the previous
/// kept word, so each run contributes exactly one CIU.
pub fn ciu_count(words: &[String]) -> usize {
    let mut kept: Vec<&String> = words.iter().filter(|w| !excluded(w)).collect();
    kept.dedup();
    kept.len()
}

pub fn ciu_percentage(words: &[String]) -> f64 {
    if words.is_empty() {
        0.0
    } else {
        100.0 * ciu_count(words) as f64 / words.len() as f64
    }
}

pub fn distinct(words: &[String]) -> usize {
    words.iter().collect::<HashSet<_>>().len()
}

pub fn ttr(words: &[String]) -> f64 {
    distinct(words) as f64 / words.len() as f64
}

pub fn lexical_density(words: &[String], stoplist: &[&str]) -> f64 {
    let content = words
        .iter()
        .filter(|w| !stoplist.contains(&w.as_str()))
        .count();
    content as f64 / words.len() as f64
}

pub fn avg_word_length(words: &[String]) -> f64 {
    let letters: usize = words
        .iter()
        .map(|w| w.chars().filter(|c| c.is_ascii_alphabetic()).count())
        .sum();
    letters as f64 / words.len() as f64
}
