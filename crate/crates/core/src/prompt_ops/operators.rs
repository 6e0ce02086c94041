use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;

use super::{InstructionBundle, InstructionKind, LanguageOracle, LanguageRequest};
use crate::config::{ObjectiveMode, RunConfig};
use crate::domain::{genotype_key, parse_prompt, render_prompt, Genotype, Individual, Origin, Task, Tokenizer};
use crate::emt::tournament_pick;
use crate::error::{Error, Result};
use crate::seed::{combine, rng_for, seed_stream, Component};

/// Oracle calls per task while filling the initial population before falling
/// back to numeric suffixes.
pub const MAX_INIT_ROUNDS: u64 = 5;

/// What the operators need besides their arguments.
#[derive(Clone, Copy)]
pub struct OperatorEnv<'a> {
    pub oracle: &'a dyn LanguageOracle,
    pub tokenizer: &'a dyn Tokenizer,
    pub problem_description: &'a str,
}

/// Population view and reflection attached to every mating instruction of a
/// generation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatingContext {
    pub population_context: Vec<(String, f64)>,
    pub reflection: String,
}

impl MatingContext {
    /// Context made of the given genotypes alone, with unknown costs.
    pub fn of_parents(parents: &[&Genotype]) -> Self {
        MatingContext {
            population_context: parents.iter().map(|g| (g.prompt.clone(), f64::NAN)).collect(),
            reflection: String::new(),
        }
    }
}

fn ask(env: &OperatorEnv<'_>, bundle: &InstructionBundle, seed: u64) -> Result<String> {
    bundle.validate()?;
    env.oracle.complete(&LanguageRequest::new(bundle, seed))
}

/// Turns raw oracle output into a genotype of `task`.
///
/// The first line that parses as a prompt of `task` is accepted. Otherwise
/// one repair is attempted: the descriptor of the first parsable line, or the
/// first non-empty line itself, is re-wrapped in the template.
pub fn extract_genotype(text: &str, task: &Task, tokenizer: &dyn Tokenizer) -> Result<Genotype> {
    let malformed = |why: String| Error::MalformedOracleOutput(format!("{why}: `{}`", text.trim()));
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let parsed: Vec<_> = lines.iter().filter_map(|l| parse_prompt(l)).collect();
    let wanted = genotype_key(&task.domain_phrase);
    if let Some(p) = parsed.iter().find(|p| genotype_key(&p.domain_phrase) == wanted) {
        return render_prompt(task, &p.descriptor, tokenizer).map_err(|e| malformed(e.to_string()));
    }
    let descriptor = match (parsed.first(), lines.first()) {
        (Some(p), _) => p.descriptor.clone(),
        (None, Some(line)) => line.trim_matches('"').to_string(),
        (None, None) => return Err(malformed("empty output".into())),
    };
    render_prompt(task, &descriptor, tokenizer).map_err(|e| malformed(e.to_string()))
}

fn initialize_task(env: &OperatorEnv<'_>, task: &Task, count: usize, seed: u64) -> Result<Vec<Genotype>> {
    let mut out: Vec<Genotype> = Vec::with_capacity(count);
    let mut keys = HashSet::new();
    for round in 0..MAX_INIT_ROUNDS {
        if out.len() >= count {
            break;
        }
        let mut bundle = InstructionBundle::new(InstructionKind::Initialize, env.problem_description);
        bundle.task_targets = vec![task.domain_phrase.clone()];
        bundle.requested_count = count - out.len();
        let text = ask(env, &bundle, combine(&[seed, task.index as u64, round]))?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if out.len() >= count {
                break;
            }
            match extract_genotype(line, task, env.tokenizer) {
                Ok(g) if keys.insert(g.key()) => out.push(g),
                Ok(_) => {}
                Err(e) => log::debug!("initialization line rejected: {e}"),
            }
        }
    }
    let base = out.first().map(|g| g.descriptor.clone()).unwrap_or_else(|| "design".into());
    let mut n = 2;
    while out.len() < count {
        let g = render_prompt(task, &format!("{base} {n}"), env.tokenizer)?;
        if keys.insert(g.key()) {
            out.push(g);
        }
        n += 1;
    }
    Ok(out)
}

/// `n_per_task` unique genotypes for every task, tasks in order.
pub fn initialize_population(env: &OperatorEnv<'_>, tasks: &[Task], n_per_task: usize, seed: u64) -> Result<Vec<Genotype>> {
    initialize_with_counts(env, tasks, &vec![n_per_task; tasks.len()], seed)
}

/// Like [`initialize_population`] with a separate count per task.
pub fn initialize_with_counts(env: &OperatorEnv<'_>, tasks: &[Task], counts: &[usize], seed: u64) -> Result<Vec<Genotype>> {
    if counts.len() != tasks.len() || counts.contains(&0) {
        return Err(Error::Precondition("every task needs at least one initial genotype".into()));
    }
    let mut out = Vec::new();
    for (task, &count) in tasks.iter().zip(counts) {
        out.extend(initialize_task(env, task, count, seed)?);
    }
    Ok(out)
}

/// Free-text reflection on the population.
pub fn reflect(env: &OperatorEnv<'_>, population_context: &[(String, f64)], seed: u64) -> Result<String> {
    let mut bundle = InstructionBundle::new(InstructionKind::Reflect, env.problem_description);
    bundle.population_context = population_context.to_vec();
    Ok(ask(env, &bundle, seed)?.trim().to_string())
}

fn mate(
    env: &OperatorEnv<'_>,
    ctx: &MatingContext,
    kind: InstructionKind,
    parents: &[&Genotype],
    targets: Vec<String>,
    child_task: &Task,
    seed: u64,
) -> Result<Genotype> {
    let mut bundle = InstructionBundle::new(kind, env.problem_description);
    bundle.population_context = ctx.population_context.clone();
    bundle.reflection = (!ctx.reflection.is_empty()).then(|| ctx.reflection.clone());
    bundle.parents = parents.iter().map(|g| g.prompt.clone()).collect();
    bundle.task_targets = targets;
    bundle.child_task = Some(child_task.domain_phrase.clone());
    let text = ask(env, &bundle, seed)?;
    extract_genotype(&text, child_task, env.tokenizer)
}

/// New genotype of the parent's task derived from the parent alone.
pub fn self_mate(env: &OperatorEnv<'_>, ctx: &MatingContext, parent: &Genotype, task: &Task, seed: u64) -> Result<Genotype> {
    if parent.task_index != task.index {
        return Err(Error::Precondition(format!(
            "parent belongs to task {}, not {}",
            parent.task_index, task.index
        )));
    }
    let targets = vec![task.domain_phrase.clone()];
    mate(env, ctx, InstructionKind::SelfMate, &[parent], targets, task, seed)
}

/// Combines two or more parents of the same task.
pub fn same_domain_mate(env: &OperatorEnv<'_>, ctx: &MatingContext, parents: &[&Genotype], task: &Task, seed: u64) -> Result<Genotype> {
    if parents.len() < 2 {
        return Err(Error::Precondition("mating needs at least two parents".into()));
    }
    if parents.iter().any(|p| p.task_index != task.index) {
        return Err(Error::MixedDomainParents);
    }
    let targets = vec![task.domain_phrase.clone()];
    mate(env, ctx, InstructionKind::SameDomainMate, parents, targets, task, seed)
}

/// Combines parents spanning at least two tasks into a child of `child_task`.
pub fn cross_domain_mate(
    env: &OperatorEnv<'_>,
    ctx: &MatingContext,
    parents: &[&Genotype],
    parent_tasks: &[&Task],
    child_task: &Task,
    seed: u64,
) -> Result<Genotype> {
    let distinct: HashSet<usize> = parents.iter().map(|p| p.task_index).collect();
    if distinct.len() < 2 {
        return Err(Error::SingleDomainParents);
    }
    if !distinct.contains(&child_task.index) {
        return Err(Error::Precondition(format!(
            "child task {} is not a parent task",
            child_task.index
        )));
    }
    let mut targets: Vec<String> = Vec::new();
    for t in parent_tasks {
        if !targets.contains(&t.domain_phrase) {
            targets.push(t.domain_phrase.clone());
        }
    }
    mate(env, ctx, InstructionKind::CrossDomainMate, parents, targets, child_task, seed)
}

/// Variation branch drawn for each offspring slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// One parent, same task.
    SelfMate,
    /// Second parent drawn from the other tasks.
    CrossDomain,
    /// Two parents drawn from the whole population; the operator follows
    /// from whether their tasks match.
    Pairing,
}

impl Branch {
    pub fn draw(u: f64, p_self: f64, p_cross: f64) -> Branch {
        if u < p_self {
            Branch::SelfMate
        } else if u < p_self + p_cross {
            Branch::CrossDomain
        } else {
            Branch::Pairing
        }
    }
}

struct Slots<'a> {
    env: OperatorEnv<'a>,
    population: &'a [Individual],
    config: &'a RunConfig,
    ctx: &'a MatingContext,
    all: Vec<usize>,
}

impl Slots<'_> {
    fn task(&self, i: usize) -> &Task {
        let index = self.population[i].task_index();
        self.config.tasks.iter().find(|t| t.index == index).expect("population task is configured")
    }

    fn compare(&self, a: usize, b: usize) -> Ordering {
        let fa = self.population[a].fitness.as_ref().expect("checked");
        let fb = self.population[b].fitness.as_ref().expect("checked");
        let cost = fa.combined_cost().total_cmp(&fb.combined_cost());
        let phi = || {
            let pa = fa.scalar_fitness().unwrap_or(u32::MAX);
            let pb = fb.scalar_fitness().unwrap_or(u32::MAX);
            pa.cmp(&pb)
        };
        match self.config.objective_mode {
            ObjectiveMode::SingleObjective => cost.then(a.cmp(&b)),
            ObjectiveMode::MultiObjective => phi().then(cost).then(a.cmp(&b)),
        }
    }

    fn pick<R: Rng>(&self, pool: &[usize], rng: &mut R) -> Option<usize> {
        tournament_pick(pool, self.config.tournament_size, rng, |a, b| self.compare(a, b))
    }

    fn pair<R: Rng>(&self, p1: usize, pool: &[usize], rng: &mut R, seed: u64) -> Result<(Genotype, Origin)> {
        let Some(p2) = self.pick(pool, rng) else {
            let g = self_mate(&self.env, self.ctx, &self.population[p1].genotype, self.task(p1), seed)?;
            return Ok((g, Origin::SelfMate));
        };
        let (g1, g2) = (&self.population[p1].genotype, &self.population[p2].genotype);
        if g1.task_index == g2.task_index {
            let g = same_domain_mate(&self.env, self.ctx, &[g1, g2], self.task(p1), seed)?;
            Ok((g, Origin::SameDomain))
        } else {
            let child = if rng.random_bool(0.5) { p1 } else { p2 };
            let tasks = [self.task(p1), self.task(p2)];
            let g = cross_domain_mate(&self.env, self.ctx, &[g1, g2], &tasks, self.task(child), seed)?;
            Ok((g, Origin::CrossDomain))
        }
    }

    fn attempt(&self, seed: u64) -> Result<(Genotype, Origin)> {
        let mut rng = rng_for(seed);
        let op_seed = combine(&[seed, 1]);
        let branch = Branch::draw(rng.random(), self.config.self_mating_probability, self.config.cross_domain_probability);
        let p1 = self.pick(&self.all, &mut rng).expect("population is non-empty");
        let rest: Vec<usize> = self.all.iter().copied().filter(|&i| i != p1).collect();
        match branch {
            Branch::SelfMate => {
                let g = self_mate(&self.env, self.ctx, &self.population[p1].genotype, self.task(p1), op_seed)?;
                Ok((g, Origin::SelfMate))
            }
            Branch::CrossDomain => {
                let own = self.population[p1].task_index();
                let others: Vec<usize> = rest
                    .iter()
                    .copied()
                    .filter(|&i| self.population[i].task_index() != own)
                    .collect();
                if others.is_empty() {
                    self.pair(p1, &rest, &mut rng, op_seed)
                } else {
                    self.pair(p1, &others, &mut rng, op_seed)
                }
            }
            Branch::Pairing => self.pair(p1, &rest, &mut rng, op_seed),
        }
    }

    /// Self-mating on the best individual of a seeded-random task.
    fn fallback(&self, seed: u64) -> Result<(Genotype, Origin)> {
        let mut rng = rng_for(seed);
        let mut present: Vec<usize> = self.population.iter().map(Individual::task_index).collect();
        present.sort_unstable();
        present.dedup();
        let task = present[rng.random_range(0..present.len())];
        let best = self
            .all
            .iter()
            .copied()
            .filter(|&i| self.population[i].task_index() == task)
            .min_by(|&a, &b| self.compare(a, b))
            .expect("task is present");
        let g = self_mate(&self.env, self.ctx, &self.population[best].genotype, self.task(best), combine(&[seed, 1]))?;
        Ok((g, Origin::SelfMate))
    }

    fn slot(&self, slot_seed: u64) -> Result<(Genotype, Origin)> {
        let attempts = self.config.max_attempts.max(1) as u64;
        for a in 0..attempts {
            match self.attempt(combine(&[slot_seed, a])) {
                Ok(child) => return Ok(child),
                Err(e) => log::debug!("offspring attempt {a} failed: {e}"),
            }
        }
        self.fallback(combine(&[slot_seed, attempts]))
    }
}

/// Produces exactly `config.population_size` offspring of `generation`, with
/// ids `first_id..`. Slot `i` draws only from
/// `seed_stream(seed, Offspring, generation, i)`, so the result does not
/// depend on evaluation order or thread count.
pub fn generate_offspring(
    env: &OperatorEnv<'_>,
    population: &[Individual],
    config: &RunConfig,
    ctx: &MatingContext,
    generation: u64,
    seed: u64,
    first_id: u64,
) -> Result<Vec<Individual>> {
    if population.is_empty() {
        return Err(Error::Precondition("cannot breed an empty population".into()));
    }
    if let Some(i) = population.iter().find(|i| i.fitness.is_none()) {
        return Err(Error::MissingFitness(i.id as usize));
    }
    let slots = Slots {
        env: *env,
        population,
        config,
        ctx,
        all: (0..population.len()).collect(),
    };
    let n = config.population_size;
    let run = |i: usize| slots.slot(seed_stream(seed, Component::Offspring, generation, i as u64));
    let children: Vec<Result<(Genotype, Origin)>> = if config.parallel && env.oracle.capabilities().concurrent {
        (0..n).into_par_iter().map(run).collect()
    } else {
        (0..n).map(run).collect()
    };
    children
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.map(|(g, origin)| Individual::new(first_id + i as u64, g, origin, generation)))
        .collect()
}
