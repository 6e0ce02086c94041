//! Word-level text handling shared by the scripted language oracle and the
//! vocabulary metric: tokenization, stopwords and base-form reduction.

use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS: &str = include_str!("../data/stopwords.txt");
const STEM_RULES: &str = include_str!("../data/stem_rules.txt");

#[derive(Debug, Clone)]
struct StemRule {
    suffix: String,
    replacement: String,
    min_len: usize,
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn stopword_set() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| data_lines(STOPWORDS).map(str::to_lowercase).collect())
}

fn stem_rules() -> &'static [StemRule] {
    static RULES: OnceLock<Vec<StemRule>> = OnceLock::new();
    RULES.get_or_init(|| {
        data_lines(STEM_RULES)
            .map(|line| {
                let cols: Vec<&str> = line.split_whitespace().collect();
                assert_eq!(cols.len(), 3, "bad stem rule: {line}");
                StemRule {
                    suffix: cols[0].to_string(),
                    replacement: if cols[1] == "-" {
                        String::new()
                    } else {
                        cols[1].to_string()
                    },
                    min_len: cols[2].parse().expect("stem rule length"),
                }
            })
            .collect()
    })
}

/// The shipped stopword list.
pub fn default_stopwords() -> Vec<String> {
    let mut words: Vec<String> = stopword_set().iter().cloned().collect();
    words.sort();
    words
}

pub fn is_stopword(word: &str) -> bool {
    stopword_set().contains(&word.to_lowercase())
}

/// Splits on every non-letter character and lowercases.
pub fn letter_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Reduces a lowercase word to its base form with the shipped rule table.
pub fn base_form(word: &str) -> String {
    for rule in stem_rules() {
        if word.len() >= rule.min_len && word.ends_with(&rule.suffix) {
            let stem = &word[..word.len() - rule.suffix.len()];
            return format!("{stem}{}", rule.replacement);
        }
    }
    word.to_string()
}

/// Whitespace words of a descriptor that are not stopwords, in order.
pub fn content_words(descriptor: &str) -> Vec<String> {
    descriptor
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '-'))
        .filter(|w| !w.is_empty() && !is_stopword(w))
        .map(str::to_string)
        .collect()
}
