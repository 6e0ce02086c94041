use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::multi_objective::per_task_mo_cost;
use super::ranking::{assign_ranks, dedup, single_objective_costs, tournament_survival, JointPopulation};
use crate::config::{ObjectiveMode, RunConfig};
use crate::domain::{FitnessRecord, Individual, ObjectiveSpec, Origin, PhysicalObjective};
use crate::error::Result;
use crate::evaluators::{score_tasks, visual_score, NormalizerBank};
use crate::mesh::PhenotypeMesh;
use crate::oracles::{AdapterNames, Oracles};
use crate::phenogen::generate;
use crate::prompt_ops::{generate_offspring, initialize_with_counts, reflect, MatingContext, OperatorEnv};
use crate::seed::{combine, fnv1a, seed_stream, Component};

/// One line of the run log: an evaluated individual as seen at the barrier
/// of the generation that evaluated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub run_id: String,
    pub generation: u64,
    pub individual_id: u64,
    pub task_index: usize,
    pub origin: Origin,
    pub prompt: String,
    /// Own-task objectives; `phys_raw` and `phys_norm` follow this order.
    pub objectives: Vec<ObjectiveSpec>,
    pub phys_raw: Vec<f64>,
    pub phys_norm: Vec<f64>,
    pub visual_score: f64,
    pub combined_cost: f64,
    /// Empty when the individual was dropped as a duplicate before ranking.
    pub factorial_ranks: Vec<u32>,
    pub scalar_fitness: Option<u32>,
    pub feasible: bool,
    pub constraint_violation: f64,
    pub novelty_score: Option<f64>,
    /// Factor that scaled the phenotype into the unit cube for physical
    /// evaluation.
    pub unit_scale: f64,
    pub adapters: AdapterNames,
    pub deterministic: bool,
    /// Generator seeds, one per phenotype sample.
    pub seeds: Vec<u64>,
}

/// Best-ever individual of one task, with its cost frozen at admission.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub task_index: usize,
    pub combined_cost: f64,
    pub generation: u64,
    pub individual: Individual,
}

/// Elite archive, one slot per task position.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Archive {
    pub entries: Vec<Option<ArchiveEntry>>,
}

impl Archive {
    fn new(tasks: usize) -> Self {
        Archive {
            entries: vec![None; tasks],
        }
    }

    /// Admits strictly better individuals of each own task.
    fn update(&mut self, candidates: &[Individual], generation: u64) {
        for ind in candidates {
            let Some(f) = ind.fitness.as_ref() else { continue };
            let slot = &mut self.entries[f.own_task];
            let cost = f.combined_cost();
            if slot.as_ref().is_none_or(|e| cost < e.combined_cost) {
                *slot = Some(ArchiveEntry {
                    task_index: ind.task_index(),
                    combined_cost: cost,
                    generation,
                    individual: ind.clone(),
                });
            }
        }
    }

    pub fn best_costs(&self) -> Vec<Option<f64>> {
        self.entries.iter().map(|e| e.as_ref().map(|e| e.combined_cost)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: u64,
    pub evaluated: usize,
    pub joint_size: usize,
    pub joint_feasible: usize,
    pub survivors: usize,
    pub survivors_infeasible: usize,
    pub survivor_origins: Vec<Origin>,
    pub archive_best: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct GenerationReport {
    pub summary: GenerationSummary,
    pub records: Vec<LogRecord>,
}

/// Everything needed to continue a run from a generation barrier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineState {
    /// Last completed generation; 0 once the initial population is ranked.
    pub generation: u64,
    pub population: Vec<Individual>,
    pub normalizers: NormalizerBank,
    pub archive: Archive,
    pub next_id: u64,
    pub history: Vec<GenerationSummary>,
}

/// Final state plus every log record emitted.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: EngineState,
    pub records: Vec<LogRecord>,
}

struct Evaluated {
    individual: Individual,
    mesh: Arc<PhenotypeMesh>,
    raw: Vec<f64>,
    visual: Vec<f64>,
    seeds: Vec<u64>,
    unit_scale: f64,
}

/// The generation loop over a fixed configuration and oracle set.
pub struct Engine<'a> {
    config: &'a RunConfig,
    oracles: &'a Oracles,
    quantities: Vec<PhysicalObjective>,
    novelty_means: Vec<Option<f64>>,
    run_id: String,
}

impl<'a> Engine<'a> {
    pub fn new(config: &'a RunConfig, oracles: &'a Oracles) -> Result<Self> {
        config.validate()?;
        Ok(Engine {
            config,
            oracles,
            quantities: config.measured_quantities(),
            novelty_means: vec![None; config.tasks.len()],
            run_id: format!("{:016x}", fnv1a(config.to_toml_string().as_bytes())),
        })
    }

    /// Baseline mean visual score per task position; records then carry a
    /// novelty score.
    pub fn with_novelty_means(mut self, means: Vec<Option<f64>>) -> Self {
        assert_eq!(means.len(), self.config.tasks.len(), "one baseline slot per task");
        self.novelty_means = means;
        self
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    fn env(&self) -> OperatorEnv<'_> {
        OperatorEnv {
            oracle: self.oracles.language.as_ref(),
            tokenizer: self.oracles.generator.tokenizer(),
            problem_description: &self.config.problem_description,
        }
    }

    fn evaluate_one(&self, individual: Individual, generation: u64, component: Component) -> Result<Evaluated> {
        let samples = self.config.phenotype_samples.max(1);
        let tasks = &self.config.tasks;
        let mut raw = vec![0.0; self.quantities.len()];
        let mut visual = vec![0.0; tasks.len()];
        let mut seeds = Vec::with_capacity(samples);
        let mut first: Option<(Arc<PhenotypeMesh>, f64)> = None;
        let base = seed_stream(self.config.seed, component, generation, individual.id);
        for s in 0..samples {
            let seed = combine(&[base, s as u64]);
            let mesh = generate(self.oracles.generator.as_ref(), &individual.genotype, seed, Some(individual.id), generation)?;
            let (unit, scale) = mesh.normalized_to_unit_cube()?;
            for (acc, v) in raw.iter_mut().zip(self.oracles.physical.measure_all(&unit, &self.quantities)?) {
                *acc += v / samples as f64;
            }
            for (acc, task) in visual.iter_mut().zip(tasks) {
                *acc += visual_score(self.oracles.visual.as_ref(), &mesh, task)? / samples as f64;
            }
            seeds.push(seed);
            first.get_or_insert((Arc::new(mesh), scale));
        }
        let (mesh, unit_scale) = first.expect("at least one sample");
        Ok(Evaluated {
            individual,
            mesh,
            raw,
            visual,
            seeds,
            unit_scale,
        })
    }

    fn evaluate(&self, individuals: Vec<Individual>, generation: u64) -> Result<Vec<Evaluated>> {
        self.evaluate_as(individuals, generation, Component::Generate)
    }

    fn evaluate_as(&self, individuals: Vec<Individual>, generation: u64, component: Component) -> Result<Vec<Evaluated>> {
        if self.config.parallel && self.oracles.concurrent_evaluation() {
            individuals
                .into_par_iter()
                .map(|i| self.evaluate_one(i, generation, component))
                .collect()
        } else {
            individuals
                .into_iter()
                .map(|i| self.evaluate_one(i, generation, component))
                .collect()
        }
    }

    fn fitness(&self, bank: &NormalizerBank, raw: Vec<f64>, visual: &[f64], task_index: usize) -> Result<FitnessRecord> {
        let own = self.config.task_position(task_index).expect("configured task");
        let scores = score_tasks(self.config, bank, &raw, visual)?;
        Ok(FitnessRecord::new(raw, scores, own))
    }

    fn rescore(&self, bank: &NormalizerBank, ind: &mut Individual) -> Result<()> {
        let f = ind.fitness()?;
        let visual: Vec<f64> = f.task_scores.iter().map(|s| s.visual_score).collect();
        let raw = f.physical_raw.clone();
        ind.fitness = Some(self.fitness(bank, raw, &visual, ind.task_index())?);
        Ok(())
    }

    fn rank(&self, joint: &mut [Individual]) -> Result<()> {
        let costs = match self.config.objective_mode {
            ObjectiveMode::SingleObjective => single_objective_costs(joint)?,
            ObjectiveMode::MultiObjective => {
                let mut costs = vec![Vec::with_capacity(self.config.tasks.len()); joint.len()];
                for k in 0..self.config.tasks.len() {
                    let mut objs = Vec::with_capacity(joint.len());
                    let mut feasible = Vec::with_capacity(joint.len());
                    let mut violation = Vec::with_capacity(joint.len());
                    for ind in joint.iter() {
                        let s = &ind.fitness()?.task_scores[k];
                        objs.push(s.physical_norm.clone());
                        feasible.push(s.feasible);
                        violation.push(s.constraint_violation);
                    }
                    for (row, c) in costs.iter_mut().zip(per_task_mo_cost(&objs, &feasible, &violation)?) {
                        row.push(c);
                    }
                }
                costs
            }
        };
        assign_ranks(joint, &costs)
    }

    fn record(&self, generation: u64, ind: &Individual, origin: Origin, ev: &(Vec<u64>, f64), bank: &NormalizerBank) -> Result<LogRecord> {
        let f = ind.fitness()?;
        let own = f.own();
        let objectives = self.config.objectives_for(&self.config.tasks[f.own_task]).to_vec();
        let phys_raw = objectives
            .iter()
            .map(|o| f.physical_raw[bank.quantities.iter().position(|&q| q == o.name).expect("measured")])
            .collect();
        Ok(LogRecord {
            run_id: self.run_id.clone(),
            generation,
            individual_id: ind.id,
            task_index: ind.task_index(),
            origin,
            prompt: ind.genotype.prompt.clone(),
            objectives,
            phys_raw,
            phys_norm: own.physical_norm.clone(),
            visual_score: own.visual_score,
            combined_cost: own.combined_cost,
            factorial_ranks: f.factorial_ranks().to_vec(),
            scalar_fitness: f.scalar_fitness(),
            feasible: own.feasible,
            constraint_violation: own.constraint_violation,
            novelty_score: self.novelty_means[f.own_task].map(|m| own.visual_score - m),
            unit_scale: ev.1,
            adapters: self.oracles.names(),
            deterministic: self.oracles.deterministic(),
            seeds: ev.0.clone(),
        })
    }

    fn split_counts(&self, n: usize) -> Vec<usize> {
        let k = self.config.tasks.len();
        (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
    }

    /// Initializes, evaluates and ranks generation 0.
    pub fn initialize(&self) -> Result<(EngineState, GenerationReport)> {
        let seed = seed_stream(self.config.seed, Component::Initialize, 0, 0);
        let counts = self.split_counts(self.config.population_size);
        let genotypes = initialize_with_counts(&self.env(), &self.config.tasks, &counts, seed)?;
        let individuals = genotypes
            .into_iter()
            .enumerate()
            .map(|(i, g)| Individual::new(i as u64, g, Origin::Initial, 0))
            .collect();
        let evaluated = self.evaluate(individuals, 0)?;
        let (population, records, bank) = self.score_batch(evaluated)?;
        let mut archive = Archive::new(self.config.tasks.len());
        archive.update(&population, 0);
        let mut summary = self.summarize(0, records.len(), &population, &population);
        summary.archive_best = archive.best_costs();
        let state = EngineState {
            generation: 0,
            next_id: population.len() as u64,
            normalizers: bank,
            archive,
            history: vec![summary.clone()],
            population,
        };
        Ok((state, GenerationReport { summary, records }))
    }

    /// Equal-budget reference without evolution: `N + N·G` genotypes drawn by
    /// the initialization operator, evaluated and ranked as one batch.
    pub fn random_sampling(&self) -> Result<Vec<LogRecord>> {
        let budget = self.config.population_size * (self.config.max_generations + 1);
        let seed = seed_stream(self.config.seed, Component::RandomSampling, 0, 0);
        let genotypes = initialize_with_counts(&self.env(), &self.config.tasks, &self.split_counts(budget), seed)?;
        let individuals = genotypes
            .into_iter()
            .enumerate()
            .map(|(i, g)| Individual::new(i as u64, g, Origin::Initial, 0))
            .collect();
        let evaluated = self.evaluate_as(individuals, 1, Component::RandomSampling)?;
        Ok(self.score_batch(evaluated)?.1)
    }

    /// Normalizes, scores and ranks a freshly evaluated batch on its own.
    fn score_batch(&self, evaluated: Vec<Evaluated>) -> Result<(Vec<Individual>, Vec<LogRecord>, NormalizerBank)> {
        let mut bank = NormalizerBank::new(self.config);
        evaluated.iter().for_each(|e| bank.observe(&e.raw));
        let mut population = Vec::with_capacity(evaluated.len());
        let mut meta = HashMap::new();
        for e in evaluated {
            let mut ind = e.individual;
            let f = self.fitness(&bank, e.raw, &e.visual, ind.task_index())?;
            ind.set_evaluation(e.mesh, f);
            meta.insert(ind.id, (e.seeds, e.unit_scale));
            population.push(ind);
        }
        self.rank(&mut population)?;
        let records = population
            .iter()
            .map(|i| self.record(0, i, i.origin, &meta[&i.id], &bank))
            .collect::<Result<Vec<_>>>()?;
        Ok((population, records, bank))
    }

    fn summarize(&self, generation: u64, evaluated: usize, joint: &[Individual], survivors: &[Individual]) -> GenerationSummary {
        let feasible = |i: &Individual| i.fitness.as_ref().is_some_and(FitnessRecord::feasible);
        GenerationSummary {
            generation,
            evaluated,
            joint_size: joint.len(),
            joint_feasible: joint.iter().filter(|i| feasible(i)).count(),
            survivors: survivors.len(),
            survivors_infeasible: survivors.iter().filter(|i| !feasible(i)).count(),
            survivor_origins: survivors.iter().map(|i| i.origin).collect(),
            archive_best: Vec::new(),
        }
    }

    /// Runs one generation: reflect, breed, evaluate, normalize, join,
    /// dedup, rank, survive, archive.
    pub fn step(&self, state: &mut EngineState) -> Result<GenerationReport> {
        let generation = state.generation + 1;
        let seed = self.config.seed;
        let context: Vec<(String, f64)> = state
            .population
            .iter()
            .map(|i| Ok((i.genotype.prompt.clone(), i.fitness()?.combined_cost())))
            .collect::<Result<_>>()?;
        let reflection = reflect(&self.env(), &context, seed_stream(seed, Component::Reflect, generation, 0))?;
        let ctx = MatingContext {
            population_context: context,
            reflection,
        };
        let offspring = generate_offspring(&self.env(), &state.population, self.config, &ctx, generation, seed, state.next_id)?;
        state.next_id += offspring.len() as u64;

        let mut parents = std::mem::take(&mut state.population);
        let mut to_evaluate = offspring;
        let reevaluated: Vec<u64> = if self.config.reevaluate_survivors {
            let ids = parents.iter().map(|p| p.id).collect();
            to_evaluate.append(&mut parents);
            ids
        } else {
            Vec::new()
        };
        let evaluated = self.evaluate(to_evaluate, generation)?;

        // barrier: widen the normalizers, then rescore everyone under them
        for e in &evaluated {
            state.normalizers.observe(&e.raw);
        }
        let bank = &state.normalizers;
        for p in parents.iter_mut() {
            self.rescore(bank, p)?;
        }
        let mut meta = HashMap::new();
        let mut fresh = Vec::new();
        for e in evaluated {
            let mut ind = e.individual;
            let f = self.fitness(bank, e.raw, &e.visual, ind.task_index())?;
            ind.set_evaluation(e.mesh, f);
            meta.insert(ind.id, (e.seeds, e.unit_scale));
            if reevaluated.contains(&ind.id) {
                parents.push(ind);
            } else {
                fresh.push(ind);
            }
        }
        let logged_offspring = fresh.clone();
        let logged_parents: Vec<Individual> = parents.iter().filter(|p| reevaluated.contains(&p.id)).cloned().collect();

        let mut joint = dedup(JointPopulation::new(parents, fresh)).into_merged();
        self.rank(&mut joint)?;
        let ranked: HashMap<u64, &Individual> = joint.iter().map(|i| (i.id, i)).collect();
        let mut records = Vec::with_capacity(logged_offspring.len() + logged_parents.len());
        for (list, survivor) in [(&logged_offspring, false), (&logged_parents, true)] {
            for ind in list {
                let origin = if survivor { Origin::Survivor } else { ind.origin };
                let view = ranked.get(&ind.id).copied().unwrap_or(ind);
                records.push(self.record(generation, view, origin, &meta[&ind.id], bank)?);
            }
        }

        let survival_seed = seed_stream(seed, Component::Survival, generation, 0);
        let chosen = tournament_survival(
            &joint,
            self.config.population_size,
            self.config.tournament_size,
            self.config.objective_mode,
            survival_seed,
        )?;
        let survivors: Vec<Individual> = chosen.iter().map(|&i| joint[i].clone()).collect();
        state.archive.update(&joint, generation);
        let mut summary = self.summarize(generation, records.len(), &joint, &survivors);
        summary.archive_best = state.archive.best_costs();
        state.population = survivors;
        state.generation = generation;
        state.history.push(summary.clone());
        Ok(GenerationReport { summary, records })
    }

    /// Runs from `state` (or from scratch) until the configured generation
    /// count, or until `stop_after` generations are complete. `observer` sees
    /// every barrier.
    pub fn run_with(
        &self,
        state: Option<EngineState>,
        stop_after: Option<u64>,
        observer: &mut dyn FnMut(&EngineState, &GenerationReport) -> Result<()>,
    ) -> Result<EngineState> {
        let mut state = match state {
            Some(s) => s,
            None => {
                let (s, report) = self.initialize()?;
                observer(&s, &report)?;
                s
            }
        };
        let last = self.config.max_generations as u64;
        let stop = stop_after.map_or(last, |s| s.min(last));
        while state.generation < stop {
            let report = self.step(&mut state)?;
            observer(&state, &report)?;
        }
        Ok(state)
    }
}

/// Runs a whole evolution in memory.
pub fn run_evolution(config: &RunConfig, oracles: &Oracles) -> Result<RunResult> {
    let engine = Engine::new(config, oracles)?;
    let mut records = Vec::new();
    let state = engine.run_with(None, None, &mut |_, report| {
        records.extend(report.records.iter().cloned());
        Ok(())
    })?;
    Ok(RunResult { state, records })
}
