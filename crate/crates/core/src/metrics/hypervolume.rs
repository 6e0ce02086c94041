use serde::{Deserialize, Serialize};

use crate::domain::Sense;
use crate::emt::LogRecord;
use crate::error::{Error, Result};

/// Reference point in jointly normalized objective space.
pub const DEFAULT_REFERENCE: [f64; 2] = [1.0, 1.0];

/// Area dominated by `points` (both coordinates minimized) and bounded by
/// `reference`. Points outside the reference box are dropped with a warning.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> Result<f64> {
    let mut inside: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] <= reference[0] && p[1] <= reference[1])
        .collect();
    let dropped = points.len() - inside.len();
    if dropped > 0 {
        log::warn!("hypervolume: discarded {dropped} point(s) outside reference {reference:?}");
    }
    if inside.is_empty() {
        return Err(Error::EmptyInput);
    }
    inside.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut floor = reference[1];
    for p in inside {
        if p[1] < floor {
            area += (reference[0] - p[0]) * (floor - p[1]);
            floor = p[1];
        }
    }
    Ok(area)
}

/// Hypervolume of a run and a reference sample set over one task's two
/// physical objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypervolumeComparison {
    pub task_index: usize,
    pub run: f64,
    pub baseline: f64,
    pub run_points: usize,
    pub baseline_points: usize,
}

fn minimized_points(records: &[LogRecord], task_index: usize) -> Result<Vec<[f64; 2]>> {
    records
        .iter()
        .filter(|r| r.task_index == task_index && r.feasible)
        .map(|r| {
            if r.objectives.len() != 2 || r.phys_raw.len() != 2 {
                return Err(Error::Precondition(format!(
                    "task {task_index} has {} objectives, hypervolume needs 2",
                    r.objectives.len()
                )));
            }
            let mut p = [r.phys_raw[0], r.phys_raw[1]];
            for (v, spec) in p.iter_mut().zip(&r.objectives) {
                if spec.sense == Sense::Maximize {
                    *v = -*v;
                }
            }
            Ok(p)
        })
        .collect()
}

/// Compares feasible own-task records of `run` and `baseline` for one task.
/// Raw objectives of both sets are min-max normalized together, so the two
/// values share a scale. A set with no feasible record scores 0.
pub fn compare_hypervolume(
    run: &[LogRecord],
    baseline: &[LogRecord],
    task_index: usize,
    reference: [f64; 2],
) -> Result<HypervolumeComparison> {
    let a = minimized_points(run, task_index)?;
    let b = minimized_points(baseline, task_index)?;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in a.iter().chain(&b) {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let scale = |p: &[f64; 2]| {
        let mut q = [0.0; 2];
        for d in 0..2 {
            q[d] = if hi[d] > lo[d] { (p[d] - lo[d]) / (hi[d] - lo[d]) } else { 0.5 };
        }
        q
    };
    let volume = |pts: &[[f64; 2]]| -> Result<f64> {
        if pts.is_empty() {
            return Ok(0.0);
        }
        let scaled: Vec<[f64; 2]> = pts.iter().map(scale).collect();
        hypervolume_2d(&scaled, reference)
    };
    Ok(HypervolumeComparison {
        task_index,
        run: volume(&a)?,
        baseline: volume(&b)?,
        run_points: a.len(),
        baseline_points: b.len(),
    })
}
