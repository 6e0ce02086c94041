use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{InstructionBundle, InstructionKind, LanguageCapabilities, LanguageOracle, LanguageRequest};
use crate::domain::{genotype_key, parse_prompt};
use crate::error::{Error, Result};
use crate::lexicon::{content_words, letter_tokens};
use crate::seed::{combine, rng_for};

const SYNONYMS: &str = include_str!("../../data/synonyms.txt");
const VOCABULARY: &str = include_str!("../../data/mock_vocabulary.txt");

/// Upper bound on content words in a recombined descriptor.
pub const MAX_CONTENT_WORDS: usize = 8;

struct Vocabulary {
    modifiers: Vec<String>,
    nouns: HashMap<String, Vec<String>>,
    all_nouns: Vec<String>,
}

fn data_lines(text: &str) -> impl Iterator<Item = (&str, &str)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut cols = l.split_whitespace();
            Some((cols.next()?, cols.next()?))
        })
}

fn synonyms() -> &'static HashMap<String, Vec<String>> {
    static TABLE: OnceLock<HashMap<String, Vec<String>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        SYNONYMS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| {
                let mut cols = l.split_whitespace().map(str::to_string);
                Some((cols.next()?, cols.collect::<Vec<_>>()))
            })
            .filter(|(_, alts)| !alts.is_empty())
            .collect()
    })
}

fn vocabulary() -> &'static Vocabulary {
    static TABLE: OnceLock<Vocabulary> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut v = Vocabulary {
            modifiers: Vec::new(),
            nouns: HashMap::new(),
            all_nouns: Vec::new(),
        };
        for (pool, word) in data_lines(VOCABULARY) {
            if pool == "modifier" {
                v.modifiers.push(word.to_string());
            } else {
                v.nouns.entry(pool.to_string()).or_default().push(word.to_string());
                if !v.all_nouns.iter().any(|w| w == word) {
                    v.all_nouns.push(word.to_string());
                }
            }
        }
        v
    })
}

/// Deterministic stand-in for a large language model.
///
/// It reads the structured bundle rather than the instruction text:
/// - initialize: `a <1..=3 modifiers> <domain noun>` per line;
/// - reflect: names the best and worst prompt keys with their costs;
/// - self-mate: replaces one dictionary word of the descriptor with one of
///   its synonyms, or inserts a modifier when no word has one;
/// - same-domain: interleaves the parents' content words;
/// - cross-domain: concatenates them in parent order.
///
/// Recombined descriptors are deduplicated, capped at [`MAX_CONTENT_WORDS`]
/// content words (the last one always kept, the rest a seeded subset in
/// order) and mutated with probability `mutation_probability`.
#[derive(Debug, Clone)]
pub struct ScriptedLanguage {
    pub mutation_probability: f64,
}

impl Default for ScriptedLanguage {
    fn default() -> Self {
        ScriptedLanguage {
            mutation_probability: 0.5,
        }
    }
}

impl ScriptedLanguage {
    pub const NAME: &'static str = "scripted";

    pub fn with_mutation_probability(p: f64) -> Self {
        ScriptedLanguage {
            mutation_probability: p,
        }
    }

    fn nouns_for(domain_phrase: &str) -> &'static [String] {
        let v = vocabulary();
        letter_tokens(domain_phrase)
            .iter()
            .rev()
            .find_map(|w| v.nouns.get(w))
            .map(Vec::as_slice)
            .unwrap_or(&v.all_nouns)
    }

    /// A fresh descriptor for `domain_phrase`.
    pub fn random_descriptor<R: Rng>(domain_phrase: &str, rng: &mut R) -> String {
        let v = vocabulary();
        let count = rng.random_range(1..=3);
        let mods: Vec<&String> = v.modifiers.choose_multiple(rng, count).collect();
        let noun = Self::nouns_for(domain_phrase).choose(rng).expect("noun pool is non-empty");
        let mut words = vec!["a"];
        words.extend(mods.iter().map(|s| s.as_str()));
        words.push(noun);
        words.join(" ")
    }

    /// Replaces one dictionary word chosen by `rng` with one of its synonyms.
    /// Without any dictionary word, inserts a modifier before the last word.
    pub fn mutate<R: Rng>(descriptor: &str, rng: &mut R) -> String {
        let mut words: Vec<String> = descriptor.split_whitespace().map(str::to_string).collect();
        let candidates: Vec<usize> = (0..words.len())
            .filter(|&i| synonyms().contains_key(&words[i].to_lowercase()))
            .collect();
        if let Some(&i) = candidates.choose(rng) {
            let alternatives = &synonyms()[&words[i].to_lowercase()];
            words[i] = alternatives.choose(rng).expect("non-empty").clone();
        } else {
            let m = vocabulary().modifiers.choose(rng).expect("modifier pool is non-empty");
            let at = words.len().saturating_sub(1);
            words.insert(at, m.clone());
        }
        words.join(" ")
    }

    fn parent_words(bundle: &InstructionBundle) -> Result<Vec<Vec<String>>> {
        bundle
            .parents
            .iter()
            .map(|p| {
                let parsed = parse_prompt(p).ok_or_else(|| Error::oracle(Self::NAME, format!("unparsable parent `{p}`")))?;
                Ok(content_words(&parsed.descriptor).iter().map(|w| w.to_lowercase()).collect())
            })
            .collect()
    }

    fn recombine<R: Rng>(&self, words: Vec<String>, rng: &mut R) -> String {
        let mut seen = BTreeSet::new();
        let mut kept: Vec<String> = words.into_iter().filter(|w| seen.insert(w.clone())).collect();
        if kept.len() > MAX_CONTENT_WORDS {
            // keep the final word, usually the head noun, and a seeded
            // order-preserving subset of the rest
            let last = kept.pop().expect("non-empty");
            let mut slots: Vec<usize> = rand::seq::index::sample(rng, kept.len(), MAX_CONTENT_WORDS - 1).into_vec();
            slots.sort_unstable();
            kept = slots.into_iter().map(|i| kept[i].clone()).collect();
            kept.push(last);
        }
        let mut descriptor = format!("a {}", kept.join(" "));
        if rng.random::<f64>() < self.mutation_probability {
            descriptor = Self::mutate(&descriptor, rng);
        }
        descriptor
    }

    fn child_prompt(bundle: &InstructionBundle, descriptor: &str) -> String {
        let domain = bundle.child_task.as_deref().unwrap_or_default();
        format!("A {domain} in the shape of {descriptor}.")
    }
}

impl LanguageOracle for ScriptedLanguage {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn capabilities(&self) -> LanguageCapabilities {
        let v = vocabulary();
        LanguageCapabilities {
            max_context_tokens: 4096,
            context_vocabulary_size: v.modifiers.len() + v.all_nouns.len() + synonyms().len(),
            deterministic: true,
            concurrent: true,
        }
    }

    fn complete(&self, request: &LanguageRequest<'_>) -> Result<String> {
        let bundle = request.bundle;
        let mut rng = rng_for(combine(&[request.seed, bundle.kind as u64]));
        match bundle.kind {
            InstructionKind::Initialize => {
                let domain = bundle
                    .task_targets
                    .first()
                    .ok_or_else(|| Error::oracle(Self::NAME, "no task target"))?;
                let lines: Vec<String> = (0..bundle.requested_count)
                    .map(|_| format!("A {domain} in the shape of {}.", Self::random_descriptor(domain, &mut rng)))
                    .collect();
                Ok(lines.join("\n"))
            }
            InstructionKind::Reflect => {
                let ctx = &bundle.population_context;
                let best = ctx.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("validated non-empty");
                let worst = ctx.iter().max_by(|a, b| a.1.total_cmp(&b.1)).expect("validated non-empty");
                Ok(format!(
                    "Best prompt: {} (cost {:.6}). Worst prompt: {} (cost {:.6}). \
                     Keep words from the best prompt and avoid words from the worst.",
                    genotype_key(&best.0),
                    best.1,
                    genotype_key(&worst.0),
                    worst.1
                ))
            }
            InstructionKind::SelfMate => {
                let parent = parse_prompt(&bundle.parents[0])
                    .ok_or_else(|| Error::oracle(Self::NAME, "unparsable parent"))?;
                let descriptor = Self::mutate(&parent.descriptor, &mut rng);
                Ok(Self::child_prompt(bundle, &descriptor))
            }
            InstructionKind::SameDomainMate => {
                let lists = Self::parent_words(bundle)?;
                let longest = lists.iter().map(Vec::len).max().unwrap_or(0);
                let interleaved = (0..longest)
                    .flat_map(|i| lists.iter().filter_map(move |l| l.get(i).cloned()))
                    .collect();
                let descriptor = self.recombine(interleaved, &mut rng);
                Ok(Self::child_prompt(bundle, &descriptor))
            }
            InstructionKind::CrossDomainMate => {
                let union = Self::parent_words(bundle)?.into_iter().flatten().collect();
                let descriptor = self.recombine(union, &mut rng);
                Ok(Self::child_prompt(bundle, &descriptor))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;

    #[test]
    fn mutation_follows_dictionary() {
        // Over many seeds both candidate words get picked, and nothing else.
        let mut outcomes = BTreeSet::new();
        for s in 0..64 {
            outcomes.insert(ScriptedLanguage::mutate("a fast wedge", &mut rng_for(s)));
        }
        let expected: BTreeSet<String> = ["a swift wedge", "a fast doorstop"].iter().map(|s| s.to_string()).collect();
        assert_eq!(outcomes, expected);
    }

    #[test]
    fn mutation_without_dictionary_word_inserts() {
        let out = ScriptedLanguage::mutate("a gleaming shadow", &mut rng_for(1));
        let words: Vec<&str> = out.split_whitespace().collect();
        assert_eq!(words.len(), 4);
        assert_eq!(words[0], "a");
        assert_eq!(words[3], "shadow");
    }

    #[test]
    fn random_descriptors_use_domain_nouns() {
        let mut rng = rng_for(3);
        for _ in 0..50 {
            let d = ScriptedLanguage::random_descriptor("airplane", &mut rng);
            let noun = d.split_whitespace().last().unwrap().to_string();
            assert!(vocabulary().nouns["airplane"].contains(&noun), "{d}");
            let n = d.split_whitespace().count();
            assert!((3..=5).contains(&n), "{d}");
        }
    }

    #[test]
    fn recombination_is_capped_and_deduplicated() {
        let oracle = ScriptedLanguage::with_mutation_probability(0.0);
        let words = "sleek low long slim wide tall flat compact smooth sleek wedge"
            .split(' ')
            .map(String::from)
            .collect();
        let input: Vec<String> = words;
        for s in 0..20 {
            let d = oracle.recombine(input.clone(), &mut rng_for(s));
            let out: Vec<&str> = d.split_whitespace().collect();
            assert_eq!(out.len(), 1 + MAX_CONTENT_WORDS, "{d}");
            assert_eq!(out[0], "a");
            assert_eq!(*out.last().unwrap(), "wedge");
            let unique: BTreeSet<&&str> = out.iter().collect();
            assert_eq!(unique.len(), out.len());
            // order-preserving subset of the deduplicated input
            let mut pos = input.iter();
            assert!(out[1..].iter().all(|w| pos.any(|x| x == w)), "{d}");
        }
    }
}
