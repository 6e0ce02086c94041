//! Run configuration, loadable from TOML. Field names in the file are the
//! field names below.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{ObjectiveSpec, PhysicalObjective, Task};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    SingleObjective,
    MultiObjective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSelection {
    pub language: String,
    pub generator: String,
    pub visual: String,
    pub physical: String,
}

impl Default for OracleSelection {
    fn default() -> Self {
        OracleSelection {
            language: "scripted".into(),
            generator: "procedural".into(),
            visual: "tag-table".into(),
            physical: "geometric".into(),
        }
    }
}

pub const DEFAULT_PROBLEM_DESCRIPTION: &str = "Design vehicles whose 3D shapes perform well \
physically while still being recognizable as their target domain. Each design is generated \
from a text prompt; lower cost is better.";

fn default_problem_description() -> String {
    DEFAULT_PROBLEM_DESCRIPTION.to_string()
}
fn default_tournament_size() -> usize {
    2
}
fn default_baseline_samples() -> usize {
    1000
}
fn default_phenotype_samples() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_raster() -> usize {
    512
}
fn default_attempts() -> usize {
    3
}
fn default_objectives() -> Vec<ObjectiveSpec> {
    vec![ObjectiveSpec::minimize(PhysicalObjective::FrontalArea)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub alpha: f64,
    pub visual_lower: f64,
    pub visual_upper: f64,
    pub objective_mode: ObjectiveMode,
    pub self_mating_probability: f64,
    pub cross_domain_probability: f64,
    #[serde(default = "default_tournament_size")]
    pub tournament_size: usize,
    pub seed: u64,
    #[serde(default = "default_baseline_samples")]
    pub novelty_baseline_samples: usize,
    /// Phenotype samples per genotype; scores are averaged.
    #[serde(default = "default_phenotype_samples")]
    pub phenotype_samples: usize,
    #[serde(default)]
    pub reevaluate_survivors: bool,
    #[serde(default = "default_true")]
    pub parallel: bool,
    #[serde(default = "default_raster")]
    pub raster_resolution: usize,
    /// Operator attempts per offspring slot before falling back.
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    #[serde(default = "default_problem_description")]
    pub problem_description: String,
    /// Default physical objectives; a task may override them.
    #[serde(default = "default_objectives")]
    pub physical_objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub oracle_selection: OracleSelection,
    pub tasks: Vec<Task>,
}

impl Default for RunConfig {
    /// Two-task car/airplane setup minimizing projected frontal area.
    fn default() -> Self {
        RunConfig {
            population_size: 20,
            max_generations: 20,
            alpha: 0.55,
            visual_lower: 0.5,
            visual_upper: 1.0,
            objective_mode: ObjectiveMode::SingleObjective,
            self_mating_probability: 0.2,
            cross_domain_probability: 0.3,
            tournament_size: default_tournament_size(),
            seed: 42,
            novelty_baseline_samples: default_baseline_samples(),
            phenotype_samples: 1,
            reevaluate_survivors: false,
            parallel: true,
            raster_resolution: default_raster(),
            max_attempts: default_attempts(),
            problem_description: default_problem_description(),
            physical_objectives: default_objectives(),
            oracle_selection: OracleSelection::default(),
            tasks: vec![Task::new(1, "car"), Task::new(2, "airplane")],
        }
    }
}

impl RunConfig {
    /// Drag and lift for both tasks: lift minimized for cars and maximized for
    /// airplanes, visual conformity constrained to [0.5, 1.0].
    pub fn multi_objective_vehicles() -> Self {
        use PhysicalObjective::*;
        RunConfig {
            objective_mode: ObjectiveMode::MultiObjective,
            physical_objectives: vec![ObjectiveSpec::minimize(DragProxy), ObjectiveSpec::minimize(LiftProxy)],
            tasks: vec![
                Task::new(1, "car"),
                Task::new(2, "airplane").with_objectives(vec![
                    ObjectiveSpec::minimize(DragProxy),
                    ObjectiveSpec::maximize(LiftProxy),
                ]),
            ],
            ..RunConfig::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut config: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for task in &mut config.tasks {
            task.fill_label();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn objectives_for<'a>(&'a self, task: &'a Task) -> &'a [ObjectiveSpec] {
        task.objectives.as_deref().unwrap_or(&self.physical_objectives)
    }

    /// Distinct physical quantities measured per phenotype, in first-use order.
    pub fn measured_quantities(&self) -> Vec<PhysicalObjective> {
        let mut out = Vec::new();
        for task in &self.tasks {
            for spec in self.objectives_for(task) {
                if !out.contains(&spec.name) {
                    out.push(spec.name);
                }
            }
        }
        out
    }

    pub fn task_position(&self, index: usize) -> Option<usize> {
        self.tasks.iter().position(|t| t.index == index)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.tasks.is_empty() {
            return bad("at least one task is required".into());
        }
        let mut seen = HashSet::new();
        for t in &self.tasks {
            if t.domain_phrase.trim().is_empty() {
                return bad(format!("task {} has an empty domain phrase", t.index));
            }
            if t.index == 0 || !seen.insert(t.index) {
                return bad(format!("task index {} is zero or repeated", t.index));
            }
            if self.objectives_for(t).is_empty() {
                return bad(format!("task {} has no physical objectives", t.index));
            }
        }
        if self.population_size < 2 {
            return bad("population_size must be at least 2".into());
        }
        if self.max_generations < 1 {
            return bad("max_generations must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if !(0.0 <= self.visual_lower && self.visual_lower <= self.visual_upper && self.visual_upper <= 1.0) {
            return Err(Error::BoundsInvalid {
                lower: self.visual_lower,
                upper: self.visual_upper,
            });
        }
        let (ps, pc) = (self.self_mating_probability, self.cross_domain_probability);
        if !(0.0..=1.0).contains(&ps) || !(0.0..=1.0).contains(&pc) || ps + pc > 1.0 + 1e-12 {
            return bad(format!("mating probabilities invalid: self {ps}, cross {pc}"));
        }
        if self.tournament_size < 2 {
            return bad("tournament_size must be at least 2".into());
        }
        if self.novelty_baseline_samples < 1 {
            return bad("novelty_baseline_samples must be at least 1".into());
        }
        if self.phenotype_samples < 1 {
            return bad("phenotype_samples must be at least 1".into());
        }
        if self.raster_resolution < 8 {
            return bad("raster_resolution must be at least 8".into());
        }
        if self.max_attempts < 1 {
            return bad("max_attempts must be at least 1".into());
        }
        if self.objective_mode == ObjectiveMode::MultiObjective
            && self.tasks.iter().any(|t| self.objectives_for(t).len() < 2)
        {
            return bad("multi_objective mode needs at least two objectives per task".into());
        }
        Ok(())
    }
}
