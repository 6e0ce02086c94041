//! Run directories: config snapshot, append-only log, per-generation
//! population files, archive meshes, novelty baselines and checkpoints.
//!
//! ```text
//! <dir>/config.toml
//! <dir>/log.jsonl                  one LogRecord per line
//! <dir>/checkpoint.json            state at the last generation barrier
//! <dir>/populations/gen_0000.json
//! <dir>/archive/archive.json, task_<k>.obj
//! <dir>/baselines/baseline_<hash>.json
//! <dir>/random_baseline.jsonl      optional equal-budget reference samples
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::domain::Origin;
use crate::emt::{Engine, EngineState, GenerationReport, LogRecord};
use crate::error::{Error, Result};
use crate::metrics::load_or_build_baseline;
use crate::oracles::Oracles;
use crate::phenogen::{write_mesh, MeshFormat};

pub const CONFIG_FILE: &str = "config.toml";
pub const LOG_FILE: &str = "log.jsonl";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const RANDOM_BASELINE_FILE: &str = "random_baseline.jsonl";
pub const BASELINE_DIR: &str = "baselines";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Stop once this many generations are complete; `resume` continues.
    #[serde(default)]
    pub stop_after_generation: Option<u64>,
    /// Also evaluate an equal-budget random-sampling reference set.
    #[serde(default)]
    pub random_baseline: bool,
    /// Skip the novelty baselines, leaving `novelty_score` empty.
    #[serde(default)]
    pub skip_novelty: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub run_id: String,
    /// Log lines written up to this barrier.
    pub log_lines: usize,
    pub options: RunOptions,
    pub novelty_means: Vec<Option<f64>>,
    pub state: EngineState,
}

/// Outcome of `run_to_dir` or `resume_dir`.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_id: String,
    pub generation: u64,
    pub complete: bool,
    pub log_lines: usize,
    pub archive_best: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct MemberView<'a> {
    id: u64,
    task_index: usize,
    origin: Origin,
    prompt: &'a str,
    combined_cost: f64,
    scalar_fitness: Option<u32>,
    feasible: bool,
}

#[derive(Serialize)]
struct ArchiveView<'a> {
    task_index: usize,
    combined_cost: f64,
    generation: u64,
    individual_id: u64,
    prompt: &'a str,
    mesh: Option<String>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Reads the config snapshot of a run directory.
pub fn load_run_config(dir: &Path) -> Result<RunConfig> {
    RunConfig::load(&dir.join(CONFIG_FILE))
}

/// Reads every record of a line-delimited log.
pub fn read_log(path: &Path) -> Result<Vec<LogRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn write_records(path: &Path, records: &[LogRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let path = dir.join(CHECKPOINT_FILE);
    let corrupt = |message: String| Error::CorruptCheckpoint {
        path: path.clone(),
        message,
    };
    let text = fs::read_to_string(&path).map_err(|e| corrupt(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))
}

/// Cuts the log back to its first `lines` lines, dropping records of a
/// generation that never reached its barrier.
fn truncate_log(path: &Path, lines: usize) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let present = text.lines().count();
    if present < lines {
        return Err(Error::CorruptCheckpoint {
            path: path.to_path_buf(),
            message: format!("log has {present} lines, checkpoint expects {lines}"),
        });
    }
    let kept: String = text.lines().take(lines).map(|l| format!("{l}\n")).collect();
    write_atomic(path, kept.as_bytes())
}

struct RunWriter<'a> {
    dir: &'a Path,
    log: BufWriter<File>,
    log_lines: usize,
    run_id: String,
    options: RunOptions,
    novelty_means: Vec<Option<f64>>,
}

impl RunWriter<'_> {
    fn barrier(&mut self, state: &EngineState, report: &GenerationReport) -> Result<()> {
        let log_path = self.dir.join(LOG_FILE);
        for r in &report.records {
            serde_json::to_writer(&mut self.log, r)?;
            self.log.write_all(b"\n").map_err(|e| Error::io(&log_path, e))?;
        }
        self.log.flush().map_err(|e| Error::io(&log_path, e))?;
        self.log_lines += report.records.len();

        let members: Vec<MemberView> = state
            .population
            .iter()
            .map(|i| {
                let f = i.fitness()?;
                Ok(MemberView {
                    id: i.id,
                    task_index: i.task_index(),
                    origin: i.origin,
                    prompt: &i.genotype.prompt,
                    combined_cost: f.combined_cost(),
                    scalar_fitness: f.scalar_fitness(),
                    feasible: f.feasible(),
                })
            })
            .collect::<Result<_>>()?;
        let pop_path = self.dir.join("populations").join(format!("gen_{:04}.json", state.generation));
        write_atomic(&pop_path, serde_json::to_string_pretty(&members)?.as_bytes())?;
        self.write_archive(state)?;

        let checkpoint = Checkpoint {
            run_id: self.run_id.clone(),
            log_lines: self.log_lines,
            options: self.options.clone(),
            novelty_means: self.novelty_means.clone(),
            state: state.clone(),
        };
        write_atomic(&self.dir.join(CHECKPOINT_FILE), serde_json::to_vec(&checkpoint)?.as_slice())
    }

    fn write_archive(&self, state: &EngineState) -> Result<()> {
        let dir = self.dir.join("archive");
        let mut views = Vec::new();
        for entry in state.archive.entries.iter().flatten() {
            let mesh = match &entry.individual.phenotype {
                Some(m) => {
                    let name = format!("task_{}.obj", entry.task_index);
                    write_atomic(&dir.join(&name), &write_mesh(m, MeshFormat::Obj))?;
                    Some(name)
                }
                None => None,
            };
            views.push(ArchiveView {
                task_index: entry.task_index,
                combined_cost: entry.combined_cost,
                generation: entry.generation,
                individual_id: entry.individual.id,
                prompt: &entry.individual.genotype.prompt,
                mesh,
            });
        }
        write_atomic(&dir.join("archive.json"), serde_json::to_string_pretty(&views)?.as_bytes())
    }
}

fn novelty_means(dir: &Path, config: &RunConfig, oracles: &Oracles, options: &RunOptions) -> Result<Vec<Option<f64>>> {
    if options.skip_novelty {
        return Ok(vec![None; config.tasks.len()]);
    }
    config
        .tasks
        .iter()
        .map(|task| {
            let (b, _, _) = load_or_build_baseline(
                &dir.join(BASELINE_DIR),
                oracles.generator.as_ref(),
                oracles.visual.as_ref(),
                task,
                config.novelty_baseline_samples,
                config.seed,
            )?;
            Ok(Some(b.baseline_mean))
        })
        .collect()
}

fn drive(
    dir: &Path,
    config: &RunConfig,
    oracles: &Oracles,
    checkpoint: Option<Checkpoint>,
    options: RunOptions,
    novelty_means: Vec<Option<f64>>,
) -> Result<RunSummary> {
    let engine = Engine::new(config, oracles)?.with_novelty_means(novelty_means.clone());
    let log_path = dir.join(LOG_FILE);
    let log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .map_err(|e| Error::io(&log_path, e))?;
    let (log_lines, state) = match checkpoint {
        Some(c) => (c.log_lines, Some(c.state)),
        None => (0, None),
    };
    let mut writer = RunWriter {
        dir,
        log: BufWriter::new(log),
        log_lines,
        run_id: engine.run_id().to_string(),
        options: options.clone(),
        novelty_means,
    };
    let state = engine.run_with(state, options.stop_after_generation, &mut |s, r| writer.barrier(s, r))?;
    let complete = state.generation >= config.max_generations as u64;
    if complete && options.random_baseline && !dir.join(RANDOM_BASELINE_FILE).exists() {
        let records = engine.random_sampling()?;
        let tmp = dir.join("random_baseline.partial");
        write_records(&tmp, &records)?;
        fs::rename(&tmp, dir.join(RANDOM_BASELINE_FILE)).map_err(|e| Error::io(dir, e))?;
    }
    Ok(RunSummary {
        run_id: writer.run_id,
        generation: state.generation,
        complete,
        log_lines: writer.log_lines,
        archive_best: state.archive.best_costs(),
    })
}

/// Starts a fresh run in `dir`, replacing any previous run there.
pub fn run_to_dir(config: &RunConfig, oracles: &Oracles, dir: &Path, options: RunOptions) -> Result<RunSummary> {
    config.validate()?;
    for sub in ["populations", "archive"] {
        let p = dir.join(sub);
        if p.exists() {
            fs::remove_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        create_dir(&p)?;
    }
    for file in [LOG_FILE, CHECKPOINT_FILE, RANDOM_BASELINE_FILE] {
        let p = dir.join(file);
        if p.exists() {
            fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    write_atomic(&dir.join(CONFIG_FILE), config.to_toml_string().as_bytes())?;
    let means = novelty_means(dir, config, oracles, &options)?;
    drive(dir, config, oracles, None, options, means)
}

/// Continues the run in `dir` from its last checkpoint. A completed run is
/// left as it is. `stop_after` overrides the stored stop point.
pub fn resume_dir(dir: &Path, oracles: &Oracles, stop_after: Option<u64>) -> Result<RunSummary> {
    let checkpoint = read_checkpoint(dir)?;
    let config = load_run_config(dir).map_err(|e| Error::CorruptCheckpoint {
        path: dir.join(CONFIG_FILE),
        message: e.to_string(),
    })?;
    if checkpoint.novelty_means.len() != config.tasks.len() {
        return Err(Error::CorruptCheckpoint {
            path: dir.join(CHECKPOINT_FILE),
            message: "task count differs from config".into(),
        });
    }
    truncate_log(&dir.join(LOG_FILE), checkpoint.log_lines)?;
    create_dir(&dir.join("populations"))?;
    create_dir(&dir.join("archive"))?;
    let mut options = checkpoint.options.clone();
    options.stop_after_generation = stop_after;
    let means = checkpoint.novelty_means.clone();
    drive(dir, &config, oracles, Some(checkpoint), options, means)
}

/// Location of the run's report directory.
pub fn report_dir(dir: &Path) -> PathBuf {
    dir.join("report")
}
