//! Shared domain types: tasks, prompt genotypes, fitness records and
//! individuals.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::PhenotypeMesh;

/// Maximum prompt length (in tokens) of the reference text-to-3D generator.
pub const REFERENCE_MAX_TOKENS: usize = 77;

const TEMPLATE_HEAD: &str = "A ";
const TEMPLATE_JOIN: &str = " in the shape of ";

/// One design target optimized concurrently with the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// 1-based, unique within a run.
    pub index: usize,
    pub domain_phrase: String,
    /// Bare label used by the novelty metric, "A <domain>".
    #[serde(default)]
    pub task_label: String,
    /// Per-task override of the run's physical objectives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<ObjectiveSpec>>,
}

impl Task {
    pub fn new(index: usize, domain_phrase: impl Into<String>) -> Self {
        let domain_phrase = collapse_whitespace(&domain_phrase.into());
        Task {
            index,
            task_label: format!("{TEMPLATE_HEAD}{domain_phrase}"),
            domain_phrase,
            objectives: None,
        }
    }

    pub fn with_objectives(mut self, objectives: Vec<ObjectiveSpec>) -> Self {
        self.objectives = Some(objectives);
        self
    }

    pub(crate) fn fill_label(&mut self) {
        if self.task_label.trim().is_empty() {
            self.task_label = format!("{TEMPLATE_HEAD}{}", self.domain_phrase.trim());
        }
    }
}

/// Counts prompt tokens the way the generator's tokenizer does.
pub trait Tokenizer: Send + Sync {
    fn count_tokens(&self, text: &str) -> usize;
    fn max_tokens(&self) -> usize;
}

/// Whitespace word count, used by the mock generator.
#[derive(Debug, Clone, Copy)]
pub struct WhitespaceTokenizer {
    pub max_tokens: usize,
}

impl Default for WhitespaceTokenizer {
    fn default() -> Self {
        WhitespaceTokenizer {
            max_tokens: REFERENCE_MAX_TOKENS,
        }
    }
}

impl Tokenizer for WhitespaceTokenizer {
    fn count_tokens(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }

    fn max_tokens(&self) -> usize {
        self.max_tokens
    }
}

/// A task-tagged prompt. Only constructed through [`render_prompt`], so the
/// prompt always matches the template.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Genotype {
    pub task_index: usize,
    pub descriptor: String,
    pub prompt: String,
    pub token_count: usize,
}

impl Genotype {
    pub fn key(&self) -> String {
        genotype_key(&self.prompt)
    }
}

impl PartialEq for Genotype {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Genotype {}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.prompt)
    }
}

pub(crate) fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn clean_descriptor(descriptor: &str) -> String {
    let collapsed = collapse_whitespace(descriptor);
    collapsed
        .trim_end_matches(|c: char| c == '.' || c.is_whitespace())
        .trim()
        .to_string()
}

/// Renders `A <domain> in the shape of <descriptor>.` for `task`.
pub fn render_prompt(task: &Task, descriptor: &str, tokenizer: &dyn Tokenizer) -> Result<Genotype> {
    let descriptor = clean_descriptor(descriptor);
    if descriptor.is_empty() {
        return Err(Error::EmptyDescriptor);
    }
    let prompt = format!(
        "{TEMPLATE_HEAD}{}{TEMPLATE_JOIN}{descriptor}.",
        task.domain_phrase
    );
    let token_count = tokenizer.count_tokens(&prompt);
    if token_count > tokenizer.max_tokens() {
        return Err(Error::TokenBudgetExceeded {
            count: token_count,
            limit: tokenizer.max_tokens(),
        });
    }
    Ok(Genotype {
        task_index: task.index,
        descriptor,
        prompt,
        token_count,
    })
}

/// Lowercase, single-space-collapsed prompt. Two genotypes are duplicates iff
/// their keys are equal.
pub fn genotype_key(prompt: &str) -> String {
    collapse_whitespace(&prompt.to_lowercase())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPrompt {
    pub domain_phrase: String,
    pub descriptor: String,
}

/// Splits a rendered prompt back into domain phrase and descriptor. Accepts
/// "A" or "An", any case, and an optional trailing period.
pub fn parse_prompt(prompt: &str) -> Option<ParsedPrompt> {
    let text = collapse_whitespace(prompt.trim().trim_matches('"'));
    let lower = text.to_lowercase();
    let head = if lower.starts_with("a ") {
        2
    } else if lower.starts_with("an ") {
        3
    } else {
        return None;
    };
    let join = lower.find(TEMPLATE_JOIN)?;
    if join < head {
        return None;
    }
    let domain = text[head..join].trim();
    let descriptor = clean_descriptor(&text[join + TEMPLATE_JOIN.len()..]);
    if domain.is_empty() || descriptor.is_empty() {
        return None;
    }
    Some(ParsedPrompt {
        domain_phrase: domain.to_string(),
        descriptor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhysicalObjective {
    FrontalArea,
    DragProxy,
    LiftProxy,
}

impl PhysicalObjective {
    pub fn as_str(self) -> &'static str {
        match self {
            PhysicalObjective::FrontalArea => "frontal_area",
            PhysicalObjective::DragProxy => "drag_proxy",
            PhysicalObjective::LiftProxy => "lift_proxy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub name: PhysicalObjective,
    pub sense: Sense,
}

impl ObjectiveSpec {
    pub fn minimize(name: PhysicalObjective) -> Self {
        ObjectiveSpec {
            name,
            sense: Sense::Minimize,
        }
    }

    pub fn maximize(name: PhysicalObjective) -> Self {
        ObjectiveSpec {
            name,
            sense: Sense::Maximize,
        }
    }
}

/// Scores of one individual judged against one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task_index: usize,
    /// Normalized and oriented so that lower is better, each in [0, 1].
    pub physical_norm: Vec<f64>,
    pub visual_score: f64,
    pub combined_cost: f64,
    pub feasible: bool,
    pub constraint_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    /// One entry per measured physical quantity, simulator units.
    pub physical_raw: Vec<f64>,
    /// Indexed by task position (0-based), every task of the run.
    pub task_scores: Vec<TaskScore>,
    /// Position of the individual's own task in `task_scores`.
    pub own_task: usize,
    factorial_ranks: Vec<u32>,
    scalar_fitness: Option<u32>,
}

impl FitnessRecord {
    pub fn new(physical_raw: Vec<f64>, task_scores: Vec<TaskScore>, own_task: usize) -> Self {
        assert!(own_task < task_scores.len(), "own task out of range");
        FitnessRecord {
            physical_raw,
            task_scores,
            own_task,
            factorial_ranks: Vec::new(),
            scalar_fitness: None,
        }
    }

    pub fn own(&self) -> &TaskScore {
        &self.task_scores[self.own_task]
    }

    pub fn physical_norm(&self) -> &[f64] {
        &self.own().physical_norm
    }

    pub fn visual_score(&self) -> f64 {
        self.own().visual_score
    }

    pub fn combined_cost(&self) -> f64 {
        self.own().combined_cost
    }

    pub fn feasible(&self) -> bool {
        self.own().feasible
    }

    pub fn constraint_violation(&self) -> f64 {
        self.own().constraint_violation
    }

    pub fn factorial_ranks(&self) -> &[u32] {
        &self.factorial_ranks
    }

    pub fn scalar_fitness(&self) -> Option<u32> {
        self.scalar_fitness
    }

    /// Stores ranks and derives φ as their minimum.
    pub fn set_ranks(&mut self, ranks: Vec<u32>) {
        assert!(ranks.iter().all(|&r| r >= 1), "ranks are 1-based");
        self.scalar_fitness = ranks.iter().copied().min();
        self.factorial_ranks = ranks;
    }

    pub fn clear_ranks(&mut self) {
        self.factorial_ranks.clear();
        self.scalar_fitness = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Initial,
    SelfMate,
    SameDomain,
    CrossDomain,
    Survivor,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Initial => "initial",
            Origin::SelfMate => "self_mate",
            Origin::SameDomain => "same_domain",
            Origin::CrossDomain => "cross_domain",
            Origin::Survivor => "survivor",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub genotype: Genotype,
    pub phenotype: Option<Arc<PhenotypeMesh>>,
    pub fitness: Option<FitnessRecord>,
    pub origin: Origin,
    pub generation_created: u64,
}

impl Individual {
    pub fn new(id: u64, genotype: Genotype, origin: Origin, generation_created: u64) -> Self {
        Individual {
            id,
            genotype,
            phenotype: None,
            fitness: None,
            origin,
            generation_created,
        }
    }

    pub fn key(&self) -> String {
        self.genotype.key()
    }

    pub fn task_index(&self) -> usize {
        self.genotype.task_index
    }

    /// Attaches phenotype and fitness together, keeping
    /// `fitness present => phenotype present`.
    pub fn set_evaluation(&mut self, phenotype: Arc<PhenotypeMesh>, fitness: FitnessRecord) {
        self.phenotype = Some(phenotype);
        self.fitness = Some(fitness);
    }

    pub fn fitness(&self) -> Result<&FitnessRecord> {
        self.fitness.as_ref().ok_or(Error::MissingFitness(self.id as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn car() -> Task {
        Task::new(1, "car")
    }

    #[test]
    fn renders_template() {
        let tok = WhitespaceTokenizer::default();
        let g = render_prompt(&car(), "a sleek wedge", &tok).unwrap();
        assert_eq!(g.prompt, "A car in the shape of a sleek wedge.");
        assert_eq!(g.token_count, 9);
        assert_eq!(g.task_index, 1);

        let plane = Task::new(2, "airplane");
        let g = render_prompt(&plane, "a mysterious shadow", &tok).unwrap();
        assert_eq!(g.prompt, "A airplane in the shape of a mysterious shadow.");
    }

    #[test]
    fn empty_descriptor_rejected() {
        let tok = WhitespaceTokenizer::default();
        assert!(matches!(
            render_prompt(&car(), "", &tok),
            Err(Error::EmptyDescriptor)
        ));
        assert!(matches!(
            render_prompt(&car(), "  . ", &tok),
            Err(Error::EmptyDescriptor)
        ));
    }

    #[test]
    fn token_budget_enforced() {
        let tok = WhitespaceTokenizer { max_tokens: 8 };
        let err = render_prompt(&car(), "a sleek wedge", &tok).unwrap_err();
        assert!(matches!(
            err,
            Error::TokenBudgetExceeded { count: 9, limit: 8 }
        ));
    }

    #[test]
    fn key_normalization() {
        assert_eq!(
            genotype_key("A car  in the shape of a Wedge."),
            "a car in the shape of a wedge."
        );
        assert_eq!(genotype_key("A car."), genotype_key("A car."));
        assert_eq!(genotype_key("A CAR."), genotype_key("a car."));
    }

    #[test]
    fn task_label_format() {
        assert_eq!(Task::new(1, "car").task_label, "A car");
        assert_eq!(Task::new(2, "airplane").task_label, "A airplane");
    }

    #[test]
    fn parse_accepts_variants() {
        let p = parse_prompt("an Airplane in the shape of a swept wing").unwrap();
        assert_eq!(p.domain_phrase, "Airplane");
        assert_eq!(p.descriptor, "a swept wing");
        assert!(parse_prompt("a swept wing").is_none());
        assert!(parse_prompt("A car in the shape of .").is_none());
    }

    #[test]
    fn phi_is_min_rank() {
        let score = TaskScore {
            task_index: 1,
            physical_norm: vec![0.5],
            visual_score: 0.5,
            combined_cost: 0.5,
            feasible: true,
            constraint_violation: 0.0,
        };
        let mut rec = FitnessRecord::new(vec![1.0], vec![score.clone(), score], 0);
        rec.set_ranks(vec![4, 2]);
        assert_eq!(rec.scalar_fitness(), Some(2));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(domain in "[a-z]{1,8}( [a-z]{1,8})?",
                                   words in proptest::collection::vec("[a-zA-Z]{1,9}", 1..6)) {
            let tok = WhitespaceTokenizer::default();
            let task = Task::new(1, domain);
            let g = render_prompt(&task, &words.join(" "), &tok).unwrap();
            let parsed = parse_prompt(&g.prompt).unwrap();
            let again = render_prompt(&Task::new(1, parsed.domain_phrase), &parsed.descriptor, &tok).unwrap();
            prop_assert_eq!(g.key(), again.key());
        }

        #[test]
        fn key_idempotent(s in "[ a-zA-Z.]{0,40}") {
            let k = genotype_key(&s);
            prop_assert_eq!(genotype_key(&k), k);
        }
    }
}
