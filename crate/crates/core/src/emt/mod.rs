//! The multitask evolutionary loop: factorial ranks, scalar fitness,
//! deduplication, survival and the generation driver.

mod engine;
mod multi_objective;
mod ranking;
mod selection;

pub use engine::{
    run_evolution, Archive, ArchiveEntry, Engine, EngineState, GenerationReport, GenerationSummary, LogRecord,
    RunResult,
};
pub use multi_objective::{crowding_distances, dominates, non_dominated_fronts, per_task_mo_cost};
pub use ranking::{
    assign_ranks, dedup, factorial_ranks, scalar_fitness, single_objective_costs, tournament_survival,
    JointPopulation,
};
pub use selection::tournament_pick;
