//! Physical and visual evaluation of phenotypes and aggregation into costs.

mod objectives;
mod physical;
mod visual;

pub use objectives::{
    combined_cost, constrained_objectives, score_tasks, ConstrainedObjectives, NormalizerBank,
    PhysicalObjectiveSpec, RunningMinMax,
};
pub use physical::{
    drag_proxy, lift_proxy, projected_frontal_area, GeometricEvaluator, PhysicalEvaluator,
    DEFAULT_RESOLUTION, FLOW_AXIS, UP_AXIS,
};
pub use visual::{visual_score, RemoteVisual, TagTableVisual, VisualOracle};
