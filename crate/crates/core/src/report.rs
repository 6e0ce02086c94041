//! CSV reports derived from a completed run directory.
//!
//! Every value comes from `log.jsonl` (plus `random_baseline.jsonl` for the
//! hypervolume comparison), so reports can be rebuilt at any time and are
//! identical across rebuilds.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::emt::LogRecord;
use crate::error::{Error, Result};
use crate::lexicon::default_stopwords;
use crate::metrics::{
    compare_hypervolume, descriptor_of, is_novel, vocabulary_overlap, OverlapMode, DEFAULT_REFERENCE,
};
use crate::store::{load_run_config, read_log, report_dir, LOG_FILE, RANDOM_BASELINE_FILE};

pub const FITNESS_TREND_FILE: &str = "fitness_trend.csv";
pub const HYPERVOLUME_FILE: &str = "hypervolume.csv";
pub const NOVELTY_FILE: &str = "novelty.csv";
pub const VOCABULARY_FILE: &str = "vocabulary.csv";

/// Mean and population variance.
fn mean_variance(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Mean and variance of combined cost of the records evaluated in each
/// generation `1..=G`, one column pair per task.
pub fn fitness_trend(config: &RunConfig, records: &[LogRecord]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for g in 1..=config.max_generations as u64 {
        let mut row = vec![g.to_string()];
        for task in &config.tasks {
            let costs: Vec<f64> = records
                .iter()
                .filter(|r| r.generation == g && r.task_index == task.index)
                .map(|r| r.combined_cost)
                .collect();
            let mv = mean_variance(&costs);
            row.push(opt(mv.map(|m| m.0)));
            row.push(opt(mv.map(|m| m.1)));
        }
        rows.push(row);
    }
    rows
}

/// `(task_index, scored, novel)` per task.
pub fn novelty_counts(config: &RunConfig, records: &[LogRecord]) -> Vec<(usize, usize, usize)> {
    config
        .tasks
        .iter()
        .map(|t| {
            let scored: Vec<f64> = records
                .iter()
                .filter(|r| r.task_index == t.index)
                .filter_map(|r| r.novelty_score)
                .collect();
            (t.index, scored.len(), scored.iter().filter(|&&n| is_novel(n)).count())
        })
        .collect()
}

/// Descriptors of every logged prompt, grouped by task.
pub fn descriptors_by_task(records: &[LogRecord]) -> BTreeMap<usize, Vec<String>> {
    let mut m: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for r in records {
        m.entry(r.task_index).or_default().push(descriptor_of(&r.prompt));
    }
    m
}

fn write_fitness(path: &Path, config: &RunConfig, records: &[LogRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["generation".to_string()];
    for t in &config.tasks {
        header.push(format!("task_{}_mean", t.index));
        header.push(format!("task_{}_variance", t.index));
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in fitness_trend(config, records) {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_hypervolume(path: &Path, config: &RunConfig, records: &[LogRecord], baseline: Option<&[LogRecord]>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header = ["task_index", "domain", "run", "baseline", "run_points", "baseline_points", "status"];
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    let Some(baseline) = baseline else {
        let warn = ["", "", "", "", "", "", "warning: random baseline sample set absent, hypervolume omitted"];
        w.write_record(warn).map_err(|e| csv_error(path, e))?;
        return w.flush().map_err(|e| Error::io(path, e));
    };
    for t in &config.tasks {
        let objectives = config.objectives_for(t).len();
        let row = if objectives != 2 {
            vec![
                t.index.to_string(),
                t.domain_phrase.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("warning: task has {objectives} objectives, hypervolume needs 2"),
            ]
        } else {
            let c = compare_hypervolume(records, baseline, t.index, DEFAULT_REFERENCE)?;
            vec![
                t.index.to_string(),
                t.domain_phrase.clone(),
                c.run.to_string(),
                c.baseline.to_string(),
                c.run_points.to_string(),
                c.baseline_points.to_string(),
                "ok".to_string(),
            ]
        };
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_novelty(path: &Path, config: &RunConfig, records: &[LogRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["task_index", "domain", "scored", "novel", "fraction"])
        .map_err(|e| csv_error(path, e))?;
    for ((index, scored, novel), t) in novelty_counts(config, records).into_iter().zip(&config.tasks) {
        let fraction = (scored > 0).then(|| novel as f64 / scored as f64);
        let row = [index.to_string(), t.domain_phrase.clone(), scored.to_string(), novel.to_string(), opt(fraction)];
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_vocabulary(path: &Path, records: &[LogRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["mode", "tasks", "overlap"]).map_err(|e| csv_error(path, e))?;
    let by_task = descriptors_by_task(records);
    let stopwords = default_stopwords();
    for (name, mode) in [("jaccard", OverlapMode::Jaccard), ("overlap_coefficient", OverlapMode::OverlapCoefficient)] {
        let value = match vocabulary_overlap(&by_task, &stopwords, mode) {
            Ok(v) => v.to_string(),
            Err(Error::InsufficientTasks) => String::new(),
            Err(e) => return Err(e),
        };
        w.write_record([name.to_string(), by_task.len().to_string(), value])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the four report CSVs into `<dir>/report` and returns their paths.
pub fn write_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let config = load_run_config(dir)?;
    let records = read_log(&dir.join(LOG_FILE))?;
    let last = records.iter().map(|r| r.generation).max();
    if last.is_none_or(|g| g < config.max_generations as u64) {
        return Err(Error::IncompleteRun(dir.to_path_buf()));
    }
    let baseline_path = dir.join(RANDOM_BASELINE_FILE);
    let baseline = if baseline_path.exists() {
        Some(read_log(&baseline_path)?)
    } else {
        log::warn!("no random baseline in {}, hypervolume omitted", dir.display());
        None
    };
    let out = report_dir(dir);
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let paths: Vec<PathBuf> = [FITNESS_TREND_FILE, HYPERVOLUME_FILE, NOVELTY_FILE, VOCABULARY_FILE]
        .iter()
        .map(|f| out.join(f))
        .collect();
    write_fitness(&paths[0], &config, &records)?;
    write_hypervolume(&paths[1], &config, &records, baseline.as_deref())?;
    write_novelty(&paths[2], &config, &records)?;
    write_vocabulary(&paths[3], &records)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{run_to_dir, RunOptions};
    use crate::Oracles;

    fn small() -> RunConfig {
        RunConfig {
            population_size: 6,
            max_generations: 3,
            novelty_baseline_samples: 20,
            raster_resolution: 64,
            ..RunConfig::default()
        }
    }

    #[test]
    fn variance_is_population_variance() {
        assert_eq!(mean_variance(&[1.0, 3.0]), Some((2.0, 1.0)));
        assert_eq!(mean_variance(&[]), None);
    }

    #[test]
    fn report_shape_and_purity() {
        let dir = tempfile::tempdir().unwrap();
        let c = small();
        run_to_dir(&c, &Oracles::mock(&c), dir.path(), RunOptions::default()).unwrap();
        let paths = write_report(dir.path()).unwrap();
        let first: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        write_report(dir.path()).unwrap();
        let second: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
        assert_eq!(first, second);

        let trend = String::from_utf8(first[0].clone()).unwrap();
        let lines: Vec<&str> = trend.lines().collect();
        assert_eq!(lines[0], "generation,task_1_mean,task_1_variance,task_2_mean,task_2_variance");
        assert_eq!(lines.len(), 1 + 3);
        let hv = String::from_utf8(first[1].clone()).unwrap();
        assert!(hv.lines().nth(1).unwrap().contains("warning"));
    }

    #[test]
    fn incomplete_run_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let c = small();
        let opts = RunOptions {
            stop_after_generation: Some(1),
            ..RunOptions::default()
        };
        run_to_dir(&c, &Oracles::mock(&c), dir.path(), opts).unwrap();
        assert!(matches!(write_report(dir.path()), Err(Error::IncompleteRun(_))));
    }
}
