use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::parse_prompt;
use crate::error::{Error, Result};
use crate::lexicon::{base_form, letter_tokens};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// Intersection over union.
    #[default]
    Jaccard,
    /// Intersection over the smaller set.
    OverlapCoefficient,
}

/// Descriptor part of a templated prompt, or the whole text otherwise.
pub fn descriptor_of(prompt: &str) -> String {
    parse_prompt(prompt).map_or_else(|| prompt.to_string(), |p| p.descriptor)
}

/// Base forms of the non-stopword letter tokens of `prompts`.
pub fn vocabulary_set(prompts: &[String], stopwords: &HashSet<String>) -> BTreeSet<String> {
    prompts
        .iter()
        .flat_map(|p| letter_tokens(p))
        .filter(|w| !stopwords.contains(w))
        .map(|w| base_form(&w))
        .collect()
}

fn pair_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>, mode: OverlapMode) -> f64 {
    let shared = a.intersection(b).count() as f64;
    let denominator = match mode {
        OverlapMode::Jaccard => a.union(b).count(),
        OverlapMode::OverlapCoefficient => a.len().min(b.len()),
    };
    if denominator == 0 {
        0.0
    } else {
        shared / denominator as f64
    }
}

/// Overlap between the vocabularies of two tasks, or the mean over all task
/// pairs when there are more.
pub fn vocabulary_overlap(
    prompts_by_task: &BTreeMap<usize, Vec<String>>,
    stopwords: &[String],
    mode: OverlapMode,
) -> Result<f64> {
    if prompts_by_task.len() < 2 || prompts_by_task.values().any(Vec::is_empty) {
        return Err(Error::InsufficientTasks);
    }
    let stop: HashSet<String> = stopwords.iter().map(|w| w.to_lowercase()).collect();
    let sets: Vec<BTreeSet<String>> = prompts_by_task.values().map(|p| vocabulary_set(p, &stop)).collect();
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            total += pair_overlap(&sets[i], &sets[j], mode);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::default_stopwords;
    use proptest::prelude::*;

    fn by_task(a: &[&str], b: &[&str]) -> BTreeMap<usize, Vec<String>> {
        let mut m = BTreeMap::new();
        m.insert(1, a.iter().map(|s| s.to_string()).collect());
        m.insert(2, b.iter().map(|s| s.to_string()).collect());
        m
    }

    #[test]
    fn overlap_examples() {
        let sw = default_stopwords();
        let m = by_task(&["a sleek fast car"], &["a sleek fast jet"]);
        assert_eq!(vocabulary_overlap(&m, &sw, OverlapMode::Jaccard).unwrap(), 0.5);
        assert!((vocabulary_overlap(&m, &sw, OverlapMode::OverlapCoefficient).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let same = by_task(&["a sleek fast car"], &["a sleek fast car"]);
        assert_eq!(vocabulary_overlap(&same, &sw, OverlapMode::Jaccard).unwrap(), 1.0);
        let disjoint = by_task(&["a sleek car"], &["a boxy jet"]);
        assert_eq!(vocabulary_overlap(&disjoint, &sw, OverlapMode::Jaccard).unwrap(), 0.0);
    }

    #[test]
    fn base_forms_merge_variants() {
        let sw = default_stopwords();
        let m = by_task(&["the wings"], &["a wing"]);
        assert_eq!(vocabulary_overlap(&m, &sw, OverlapMode::Jaccard).unwrap(), 1.0);
    }

    #[test]
    fn needs_two_tasks() {
        let mut m = BTreeMap::new();
        m.insert(1, vec!["a car".to_string()]);
        assert!(matches!(vocabulary_overlap(&m, &[], OverlapMode::Jaccard), Err(Error::InsufficientTasks)));
        m.insert(2, vec![]);
        assert!(matches!(vocabulary_overlap(&m, &[], OverlapMode::Jaccard), Err(Error::InsufficientTasks)));
    }

    #[test]
    fn three_tasks_average_pairs() {
        let mut m = by_task(&["sleek fast car"], &["sleek fast jet"]);
        m.insert(3, vec!["sleek fast car".to_string()]);
        let v = vocabulary_overlap(&m, &[], OverlapMode::Jaccard).unwrap();
        assert!((v - (0.5 + 0.5 + 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn descriptor_extraction() {
        assert_eq!(descriptor_of("A car in the shape of a sleek wedge."), "a sleek wedge");
        assert_eq!(descriptor_of("free text"), "free text");
    }

    const WORDS: [&str; 8] = ["sleek", "fast", "car", "jet", "wing", "wings", "the", "boxy"];

    fn phrase() -> impl Strategy<Value = String> {
        proptest::collection::vec(0..WORDS.len(), 1..5)
            .prop_map(|ix| ix.into_iter().map(|i| WORDS[i]).collect::<Vec<_>>().join(" "))
    }

    proptest! {
        #[test]
        fn symmetric_and_duplicate_invariant(
            a in proptest::collection::vec(phrase(), 1..4),
            b in proptest::collection::vec(phrase(), 1..4),
        ) {
            let sw = default_stopwords();
            let mut ab = BTreeMap::new();
            ab.insert(1, a.clone());
            ab.insert(2, b.clone());
            let mut ba = BTreeMap::new();
            ba.insert(1, b.clone());
            ba.insert(2, a.clone());
            let x = vocabulary_overlap(&ab, &sw, OverlapMode::Jaccard).unwrap();
            prop_assert_eq!(x, vocabulary_overlap(&ba, &sw, OverlapMode::Jaccard).unwrap());
            let mut doubled = ab.clone();
            doubled.get_mut(&1).unwrap().extend(a.clone());
            prop_assert_eq!(x, vocabulary_overlap(&doubled, &sw, OverlapMode::Jaccard).unwrap());
        }
    }
}
