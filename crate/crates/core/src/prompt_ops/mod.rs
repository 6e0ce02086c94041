//! Language-model instructions, the scripted language oracle and the prompt
//! variation operators.

mod operators;
mod remote;
mod scripted;

pub use operators::{
    cross_domain_mate, extract_genotype, generate_offspring, initialize_population, initialize_with_counts, reflect,
    same_domain_mate, self_mate, Branch, MatingContext, OperatorEnv, MAX_INIT_ROUNDS,
};
pub use remote::RemoteLanguage;
pub use scripted::{ScriptedLanguage, MAX_CONTENT_WORDS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionKind {
    Initialize,
    Reflect,
    SelfMate,
    SameDomainMate,
    CrossDomainMate,
}

impl InstructionKind {
    fn template(self) -> &'static str {
        match self {
            InstructionKind::Initialize => include_str!("../../data/instructions/initialize.txt"),
            InstructionKind::Reflect => include_str!("../../data/instructions/reflect.txt"),
            InstructionKind::SelfMate => include_str!("../../data/instructions/self_mate.txt"),
            InstructionKind::SameDomainMate => include_str!("../../data/instructions/same_domain_mate.txt"),
            InstructionKind::CrossDomainMate => include_str!("../../data/instructions/cross_domain_mate.txt"),
        }
    }
}

/// Everything an instruction is rendered from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionBundle {
    pub kind: InstructionKind,
    pub problem_description: String,
    /// `(prompt, combined cost)` pairs of the current population.
    pub population_context: Vec<(String, f64)>,
    pub task_targets: Vec<String>,
    pub requested_count: usize,
    /// Parent prompts, for the mating kinds.
    pub parents: Vec<String>,
    pub reflection: Option<String>,
    /// Domain phrase the child must carry, for the mating kinds.
    pub child_task: Option<String>,
}

impl InstructionBundle {
    pub fn new(kind: InstructionKind, problem_description: impl Into<String>) -> Self {
        InstructionBundle {
            kind,
            problem_description: problem_description.into(),
            population_context: Vec::new(),
            task_targets: Vec::new(),
            requested_count: 1,
            parents: Vec::new(),
            reflection: None,
            child_task: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != InstructionKind::Initialize && self.population_context.is_empty() {
            return Err(Error::Precondition(format!(
                "{:?} instruction needs a population context",
                self.kind
            )));
        }
        if self.requested_count == 0 {
            return Err(Error::Precondition("requested count must be at least 1".into()));
        }
        let mating = matches!(
            self.kind,
            InstructionKind::SelfMate | InstructionKind::SameDomainMate | InstructionKind::CrossDomainMate
        );
        if mating && (self.parents.is_empty() || self.child_task.is_none()) {
            return Err(Error::Precondition("mating instruction needs parents and a child task".into()));
        }
        Ok(())
    }

    /// Fills the kind's template. Placeholders are `{name}` for each field.
    pub fn render(&self) -> String {
        let context: String = self
            .population_context
            .iter()
            .map(|(p, c)| format!("- {p} (cost {c:.4})\n"))
            .collect();
        let parents: String = self.parents.iter().map(|p| format!("- {p}\n")).collect();
        self.kind
            .template()
            .replace("{problem_description}", &self.problem_description)
            .replace("{population_context}", context.trim_end())
            .replace("{task_targets}", &self.task_targets.join(", "))
            .replace("{requested_count}", &self.requested_count.to_string())
            .replace("{parents}", parents.trim_end())
            .replace("{reflection}", self.reflection.as_deref().unwrap_or("(none)"))
            .replace("{child_task}", self.child_task.as_deref().unwrap_or(""))
    }
}

/// Adapter metadata. The context limits are informational; the engine does
/// not enforce them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageCapabilities {
    pub max_context_tokens: usize,
    pub context_vocabulary_size: usize,
    pub deterministic: bool,
    pub concurrent: bool,
}

#[derive(Debug, Clone)]
pub struct LanguageRequest<'a> {
    pub bundle: &'a InstructionBundle,
    pub instruction_text: String,
    pub seed: u64,
}

impl<'a> LanguageRequest<'a> {
    pub fn new(bundle: &'a InstructionBundle, seed: u64) -> Self {
        LanguageRequest {
            bundle,
            instruction_text: bundle.render(),
            seed,
        }
    }
}

/// A large language model answering rendered instructions.
pub trait LanguageOracle: Send + Sync {
    fn name(&self) -> &str;

    fn capabilities(&self) -> LanguageCapabilities;

    fn complete(&self, request: &LanguageRequest<'_>) -> Result<String>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_have_no_leftover_placeholders() {
        for kind in [
            InstructionKind::Initialize,
            InstructionKind::Reflect,
            InstructionKind::SelfMate,
            InstructionKind::SameDomainMate,
            InstructionKind::CrossDomainMate,
        ] {
            let mut b = InstructionBundle::new(kind, "Design things.");
            b.population_context = vec![("A car in the shape of a box.".into(), 0.25)];
            b.task_targets = vec!["car".into()];
            b.parents = vec!["A car in the shape of a box.".into()];
            b.child_task = Some("car".into());
            let text = b.render();
            assert!(!text.contains('{') && !text.contains('}'), "{kind:?}: {text}");
            assert!(text.starts_with("Design things."));
        }
    }

    #[test]
    fn context_required_after_initialize() {
        let b = InstructionBundle::new(InstructionKind::Reflect, "x");
        assert!(matches!(b.validate(), Err(Error::Precondition(_))));
        let b = InstructionBundle::new(InstructionKind::Initialize, "x");
        assert!(b.validate().is_ok());
    }
}
