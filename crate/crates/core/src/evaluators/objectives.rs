//! Objective aggregation and running normalization.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::domain::{ObjectiveSpec, PhysicalObjective, Sense, TaskScore};
use crate::error::{Error, Result};

/// Weighted single-objective cost `(1 − α)·phys + α·(1 − vis)`, with `phys`
/// the mean of the normalized physical scores.
pub fn combined_cost(phys_norm: &[f64], vis: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if phys_norm.is_empty() {
        return Err(Error::Precondition("no physical scores".into()));
    }
    let phys = phys_norm.iter().sum::<f64>() / phys_norm.len() as f64;
    Ok((1.0 - alpha) * phys + alpha * (1.0 - vis))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedObjectives {
    pub objectives: Vec<f64>,
    pub feasible: bool,
    pub violation: f64,
}

/// Physical objectives subject to `lower ≤ vis ≤ upper`.
pub fn constrained_objectives(phys_norm: &[f64], vis: f64, lower: f64, upper: f64) -> Result<ConstrainedObjectives> {
    if !(0.0 <= lower && lower <= upper && upper <= 1.0) {
        return Err(Error::BoundsInvalid { lower, upper });
    }
    let violation = (lower - vis).max(0.0) + (vis - upper).max(0.0);
    Ok(ConstrainedObjectives {
        objectives: phys_norm.to_vec(),
        feasible: violation == 0.0,
        violation,
    })
}

/// Running min-max over every raw value seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunningMinMax {
    pub min: f64,
    pub max: f64,
    pub count: u64,
}

impl Default for RunningMinMax {
    fn default() -> Self {
        RunningMinMax {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            count: 0,
        }
    }
}

impl RunningMinMax {
    pub fn observe(&mut self, raw: f64) {
        self.min = self.min.min(raw);
        self.max = self.max.max(raw);
        self.count += 1;
    }

    /// `(raw − min)/(max − min)` clamped to [0, 1]; 0.5 for a degenerate range.
    pub fn normalize(&self, raw: f64) -> f64 {
        debug_assert!(self.count > 0, "normalizer has seen no values");
        if self.count == 0 || !(self.max > self.min) {
            return 0.5;
        }
        ((raw - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalObjectiveSpec {
    pub spec: ObjectiveSpec,
    pub normalizer: RunningMinMax,
}

impl PhysicalObjectiveSpec {
    pub fn new(spec: ObjectiveSpec) -> Self {
        PhysicalObjectiveSpec {
            spec,
            normalizer: RunningMinMax::default(),
        }
    }

    /// Normalized score oriented for minimization: maximize-sense objectives
    /// come out as `1 − normalized`.
    pub fn normalize(&self, raw: f64) -> f64 {
        let n = self.normalizer.normalize(raw);
        match self.spec.sense {
            Sense::Minimize => n,
            Sense::Maximize => 1.0 - n,
        }
    }
}

/// Per-task normalizer state for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerBank {
    /// Physical quantities measured per phenotype, the layout of `physical_raw`.
    pub quantities: Vec<PhysicalObjective>,
    /// `[task position][objective position]`.
    pub tasks: Vec<Vec<PhysicalObjectiveSpec>>,
}

impl NormalizerBank {
    pub fn new(config: &RunConfig) -> Self {
        NormalizerBank {
            quantities: config.measured_quantities(),
            tasks: config
                .tasks
                .iter()
                .map(|t| config.objectives_for(t).iter().map(|&s| PhysicalObjectiveSpec::new(s)).collect())
                .collect(),
        }
    }

    fn raw_for(&self, raw: &[f64], name: PhysicalObjective) -> f64 {
        let i = self
            .quantities
            .iter()
            .position(|&q| q == name)
            .expect("objective is measured");
        raw[i]
    }

    pub fn observe(&mut self, raw: &[f64]) {
        for t in 0..self.tasks.len() {
            for o in 0..self.tasks[t].len() {
                let v = self.raw_for(raw, self.tasks[t][o].spec.name);
                self.tasks[t][o].normalizer.observe(v);
            }
        }
    }

    pub fn normalized(&self, task_pos: usize, raw: &[f64]) -> Vec<f64> {
        self.tasks[task_pos]
            .iter()
            .map(|s| s.normalize(self.raw_for(raw, s.spec.name)))
            .collect()
    }
}

/// Builds the score of one phenotype against every task from raw physical
/// measurements and per-task visual scores under the current normalization.
pub fn score_tasks(config: &RunConfig, bank: &NormalizerBank, raw: &[f64], visual: &[f64]) -> Result<Vec<TaskScore>> {
    config
        .tasks
        .iter()
        .enumerate()
        .map(|(pos, task)| {
            let phys = bank.normalized(pos, raw);
            let vis = visual[pos];
            let cost = combined_cost(&phys, vis, config.alpha)?;
            let c = constrained_objectives(&phys, vis, config.visual_lower, config.visual_upper)?;
            Ok(TaskScore {
                task_index: task.index,
                physical_norm: phys,
                visual_score: vis,
                combined_cost: cost,
                feasible: c.feasible,
                constraint_violation: c.violation,
            })
        })
        .collect()
}
