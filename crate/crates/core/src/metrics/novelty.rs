use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Task;
use crate::emt::LogRecord;
use crate::error::{Error, Result};
use crate::evaluators::{visual_score, VisualOracle};
use crate::phenogen::GeneratorOracle;
use crate::seed::{fnv1a, seed_stream, Component};

/// Everything a cached baseline depends on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineKey {
    pub task_label: String,
    pub generator: String,
    pub visual: String,
    pub samples: usize,
    pub seed: u64,
}

impl BaselineKey {
    pub fn new(generator: &dyn GeneratorOracle, visual: &dyn VisualOracle, task: &Task, samples: usize, seed: u64) -> Self {
        BaselineKey {
            task_label: task.task_label.clone(),
            generator: generator.name().to_string(),
            visual: visual.name().to_string(),
            samples,
            seed,
        }
    }

    /// Cache file name, stable across platforms.
    pub fn file_name(&self) -> String {
        let text = serde_json::to_string(self).expect("key serializes");
        format!("baseline_{:016x}.json", fnv1a(text.as_bytes()))
    }
}

/// Expected visual score of designs generated from the bare task label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyBaseline {
    pub key: BaselineKey,
    pub task_index: usize,
    pub baseline_mean: f64,
    pub sample_count: usize,
    pub scores: Vec<f64>,
}

/// Samples `samples` phenotypes from the task label and averages their
/// visual scores against the task.
pub fn build_novelty_baseline(
    generator: &dyn GeneratorOracle,
    visual: &dyn VisualOracle,
    task: &Task,
    samples: usize,
    seed: u64,
) -> Result<NoveltyBaseline> {
    if samples == 0 {
        return Err(Error::Precondition("baseline needs at least one sample".into()));
    }
    let score_one = |j: usize| -> Result<f64> {
        let s = seed_stream(seed, Component::Baseline, task.index as u64, j as u64);
        let mesh = generator.generate_text(&task.task_label, s)?;
        visual_score(visual, &mesh, task)
    };
    let scores: Vec<f64> = if generator.concurrent() && visual.concurrent() {
        (0..samples).into_par_iter().map(score_one).collect::<Result<_>>()?
    } else {
        (0..samples).map(score_one).collect::<Result<_>>()?
    };
    Ok(NoveltyBaseline {
        key: BaselineKey::new(generator, visual, task, samples, seed),
        task_index: task.index,
        baseline_mean: scores.iter().sum::<f64>() / samples as f64,
        sample_count: samples,
        scores,
    })
}

/// Visual score minus the baseline mean; positive means novel.
pub fn novelty_score(score: f64, task: &Task, baseline: &NoveltyBaseline) -> Result<f64> {
    if baseline.task_index != task.index {
        return Err(Error::TaskMismatch {
            baseline: baseline.task_index,
            expected: task.index,
        });
    }
    Ok(score - baseline.baseline_mean)
}

pub fn is_novel(novelty: f64) -> bool {
    novelty > 0.0
}

/// Reuses the baseline cached in `dir` when its key matches, otherwise builds
/// and stores a new one. Returns the baseline and whether it was reused.
pub fn load_or_build_baseline(
    dir: &Path,
    generator: &dyn GeneratorOracle,
    visual: &dyn VisualOracle,
    task: &Task,
    samples: usize,
    seed: u64,
) -> Result<(NoveltyBaseline, PathBuf, bool)> {
    let key = BaselineKey::new(generator, visual, task, samples, seed);
    let path = dir.join(key.file_name());
    if let Ok(text) = std::fs::read_to_string(&path) {
        match serde_json::from_str::<NoveltyBaseline>(&text) {
            Ok(b) if b.key == key && b.task_index == task.index => return Ok((b, path, true)),
            _ => log::warn!("rebuilding stale baseline {}", path.display()),
        }
    }
    let baseline = build_novelty_baseline(generator, visual, task, samples, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let text = serde_json::to_string_pretty(&baseline)?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok((baseline, path, false))
}

/// Share of a task's scored records that are novel; `None` when no record
/// carries a novelty score.
pub fn novelty_fraction(records: &[LogRecord], task_index: usize) -> Option<f64> {
    let scored: Vec<f64> = records
        .iter()
        .filter(|r| r.task_index == task_index)
        .filter_map(|r| r.novelty_score)
        .collect();
    if scored.is_empty() {
        return None;
    }
    Some(scored.iter().filter(|&&n| is_novel(n)).count() as f64 / scored.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluators::TagTableVisual;
    use crate::phenogen::ProceduralGenerator;
    use proptest::prelude::*;

    fn baseline(mean: f64) -> NoveltyBaseline {
        NoveltyBaseline {
            key: BaselineKey {
                task_label: "A car".into(),
                generator: "g".into(),
                visual: "v".into(),
                samples: 1,
                seed: 0,
            },
            task_index: 1,
            baseline_mean: mean,
            sample_count: 1,
            scores: vec![mean],
        }
    }

    #[test]
    fn sign_classification() {
        let car = Task::new(1, "car");
        let b = baseline(0.7);
        assert_eq!(novelty_score(0.7, &car, &b).unwrap(), 0.0);
        assert!(!is_novel(novelty_score(0.7, &car, &b).unwrap()));
        let ns = novelty_score(0.9, &car, &b).unwrap();
        assert!((ns - 0.2).abs() < 1e-12 && is_novel(ns));
        let ns = novelty_score(0.6, &car, &b).unwrap();
        assert!((ns + 0.1).abs() < 1e-12 && !is_novel(ns));
        let plane = Task::new(2, "airplane");
        assert!(matches!(novelty_score(0.5, &plane, &b), Err(Error::TaskMismatch { baseline: 1, expected: 2 })));
    }

    proptest! {
        #[test]
        fn antisymmetric_about_mean(s in 0.0f64..1.0, m in 0.0f64..1.0) {
            let car = Task::new(1, "car");
            let b = baseline(m);
            let a = novelty_score(s, &car, &b).unwrap();
            let r = novelty_score(2.0 * m - s, &car, &b).unwrap();
            prop_assert!((a + r).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_build() {
        let g = ProceduralGenerator::new();
        let car = Task::new(1, "car");
        let one = build_novelty_baseline(&g, &TagTableVisual, &car, 1, 9).unwrap();
        assert_eq!(one.baseline_mean, one.scores[0]);
        let a = build_novelty_baseline(&g, &TagTableVisual, &car, 50, 9).unwrap();
        let b = build_novelty_baseline(&g, &TagTableVisual, &car, 50, 9).unwrap();
        assert_eq!(a, b);
        let mean = a.scores.iter().sum::<f64>() / 50.0;
        assert_eq!(a.baseline_mean, mean);
        assert!(matches!(
            build_novelty_baseline(&g, &TagTableVisual, &car, 0, 9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn cache_hit_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let g = ProceduralGenerator::new();
        let car = Task::new(1, "car");
        let (a, path, reused) = load_or_build_baseline(dir.path(), &g, &TagTableVisual, &car, 10, 1).unwrap();
        assert!(!reused && path.exists());
        let (b, _, reused) = load_or_build_baseline(dir.path(), &g, &TagTableVisual, &car, 10, 1).unwrap();
        assert!(reused);
        assert_eq!(a, b);
        // a stored file whose key differs is rebuilt
        let mut stale = a.clone();
        stale.key.visual = "other-vlm".into();
        std::fs::write(&path, serde_json::to_string(&stale).unwrap()).unwrap();
        let (c, _, reused) = load_or_build_baseline(dir.path(), &g, &TagTableVisual, &car, 10, 1).unwrap();
        assert!(!reused);
        assert_eq!(c, a);
        let (_, other, _) = load_or_build_baseline(dir.path(), &g, &TagTableVisual, &car, 10, 2).unwrap();
        assert_ne!(other, path);
    }
}
