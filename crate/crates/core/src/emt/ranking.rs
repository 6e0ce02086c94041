use std::cmp::Ordering;
use std::collections::HashSet;

use crate::config::ObjectiveMode;
use crate::domain::Individual;
use crate::emt::tournament_pick;
use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Ranks `costs[i][k]` per task: rank 1 is the smallest cost, ties go to the
/// earlier index. Returns `ranks[i][k]`.
pub fn factorial_ranks(costs: &[Vec<f64>]) -> Vec<Vec<u32>> {
    let n = costs.len();
    let k = costs.first().map_or(0, Vec::len);
    let mut ranks = vec![vec![0u32; k]; n];
    for task in 0..k {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| costs[a][task].total_cmp(&costs[b][task]));
        for (pos, &i) in order.iter().enumerate() {
            ranks[i][task] = pos as u32 + 1;
        }
    }
    ranks
}

/// φ per individual: the best (smallest) of its factorial ranks.
pub fn scalar_fitness(ranks: &[Vec<u32>]) -> Vec<u32> {
    ranks
        .iter()
        .map(|r| r.iter().copied().min().expect("at least one task"))
        .collect()
}

/// Factorial costs of every individual against every task, `[i][k]`.
pub fn single_objective_costs(joint: &[Individual]) -> Result<Vec<Vec<f64>>> {
    joint
        .iter()
        .map(|ind| Ok(ind.fitness()?.task_scores.iter().map(|s| s.combined_cost).collect()))
        .collect()
}

/// Ranks the joint population in place from `costs[i][k]`.
pub fn assign_ranks(joint: &mut [Individual], costs: &[Vec<f64>]) -> Result<()> {
    let ranks = factorial_ranks(costs);
    for (ind, r) in joint.iter_mut().zip(ranks) {
        let id = ind.id as usize;
        ind.fitness.as_mut().ok_or(Error::MissingFitness(id))?.set_ranks(r);
    }
    Ok(())
}

/// Parents of the current generation and the offspring bred from them.
#[derive(Debug, Clone, Default)]
pub struct JointPopulation {
    pub parents: Vec<Individual>,
    pub offspring: Vec<Individual>,
}

impl JointPopulation {
    pub fn new(parents: Vec<Individual>, offspring: Vec<Individual>) -> Self {
        JointPopulation { parents, offspring }
    }

    pub fn len(&self) -> usize {
        self.parents.len() + self.offspring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parents first, then offspring.
    pub fn into_merged(self) -> Vec<Individual> {
        let mut all = self.parents;
        all.extend(self.offspring);
        all
    }
}

/// Removes duplicate genotypes. An offspring copy beats a parent copy; among
/// offspring copies the lowest index wins; among parent copies likewise.
pub fn dedup(joint: JointPopulation) -> JointPopulation {
    let mut offspring_keys = HashSet::new();
    let offspring: Vec<Individual> = joint
        .offspring
        .into_iter()
        .filter(|i| offspring_keys.insert(i.key()))
        .collect();
    let mut parent_keys = HashSet::new();
    let parents = joint
        .parents
        .into_iter()
        .filter(|i| !offspring_keys.contains(&i.key()) && parent_keys.insert(i.key()))
        .collect();
    JointPopulation { parents, offspring }
}

fn survival_order(a: &Individual, b: &Individual, mode: ObjectiveMode) -> Ordering {
    let fa = a.fitness.as_ref().expect("ranked");
    let fb = b.fitness.as_ref().expect("ranked");
    let feasibility = match mode {
        ObjectiveMode::MultiObjective => fb.feasible().cmp(&fa.feasible()),
        ObjectiveMode::SingleObjective => Ordering::Equal,
    };
    feasibility
        .then(fa.scalar_fitness().cmp(&fb.scalar_fitness()))
        .then(fa.combined_cost().total_cmp(&fb.combined_cost()))
}

fn tournaments(joint: &[Individual], pool: &mut Vec<usize>, count: usize, size: usize, mode: ObjectiveMode, seed: u64) -> Vec<usize> {
    let mut rng = rng_for(seed);
    let mut winners = Vec::with_capacity(count);
    while winners.len() < count && !pool.is_empty() {
        let w = tournament_pick(pool, size, &mut rng, |a, b| {
            survival_order(&joint[a], &joint[b], mode).then(a.cmp(&b))
        })
        .expect("pool is non-empty");
        pool.retain(|&i| i != w);
        winners.push(w);
    }
    winners
}

/// Chooses `n` survivors by repeated tournaments; winners leave the pool.
/// Returns joint indices in ascending order.
///
/// Comparison is (feasible first, φ, combined cost, index), the feasibility
/// term only in multi-objective mode. There, when at least `n` individuals
/// are feasible the tournaments run among them alone, otherwise every
/// feasible individual survives and the rest are drawn from the infeasible.
pub fn tournament_survival(joint: &[Individual], n: usize, tournament_size: usize, mode: ObjectiveMode, seed: u64) -> Result<Vec<usize>> {
    if let Some(i) = joint.iter().find(|i| i.fitness.as_ref().and_then(|f| f.scalar_fitness()).is_none()) {
        return Err(Error::MissingFitness(i.id as usize));
    }
    if joint.len() <= n {
        return Ok((0..joint.len()).collect());
    }
    let mut chosen = match mode {
        ObjectiveMode::SingleObjective => {
            let mut pool: Vec<usize> = (0..joint.len()).collect();
            tournaments(joint, &mut pool, n, tournament_size, mode, seed)
        }
        ObjectiveMode::MultiObjective => {
            let (mut feasible, mut infeasible): (Vec<usize>, Vec<usize>) =
                (0..joint.len()).partition(|&i| joint[i].fitness.as_ref().expect("checked").feasible());
            if feasible.len() >= n {
                tournaments(joint, &mut feasible, n, tournament_size, mode, seed)
            } else {
                let rest = n - feasible.len();
                let mut all = feasible;
                all.extend(tournaments(joint, &mut infeasible, rest, tournament_size, mode, seed));
                all
            }
        }
    };
    chosen.sort_unstable();
    Ok(chosen)
}
