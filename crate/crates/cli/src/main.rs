use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gem_core::config::OracleSelection;
use gem_core::metrics::{hypervolume_2d, load_or_build_baseline, DEFAULT_REFERENCE};
use gem_core::report::write_report;
use gem_core::store::{load_run_config, resume_dir, run_to_dir, RunOptions, RunSummary};
use gem_core::{Oracles, RunConfig};

#[derive(Parser)]
#[command(name = "gem", version, about = "Evolve text prompts for 3D designs across several tasks at once")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleSet {
    /// Hermetic scripted and procedural adapters.
    Mock,
    /// HTTP language and vision adapters configured by environment.
    Remote,
}

#[derive(Subcommand)]
enum Command {
    /// Start a run, replacing any run already in the output directory.
    Run {
        /// TOML config; the built-in two-task setup when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's adapter selection.
        #[arg(long, value_enum)]
        oracles: Option<OracleSet>,
        /// Overrides the novelty baseline sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Also evaluate an equal-budget random-sampling reference set.
        #[arg(long)]
        random_baseline: bool,
        /// Stop after this many generations; continue with `resume`.
        #[arg(long)]
        stop_after: Option<u64>,
        /// Skip novelty baselines.
        #[arg(long)]
        no_novelty: bool,
    },
    /// Continue a run from its last completed generation.
    Resume {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        oracles: Option<OracleSet>,
        #[arg(long)]
        stop_after: Option<u64>,
    },
    /// Write CSV reports for a completed run.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
    /// Build or reuse the novelty baseline of one task.
    Baseline {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Task index from the config.
        #[arg(long)]
        task: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        oracles: Option<OracleSet>,
        /// Directory holding baseline files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Hypervolume of a CSV of two-column minimization points.
    Hv {
        #[arg(long)]
        points: PathBuf,
        /// Reference point as `x,y`.
        #[arg(long, default_value = "1,1")]
        reference: String,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("cannot load config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn oracles_for(config: &RunConfig, choice: Option<OracleSet>) -> Result<Oracles> {
    let selection = match choice {
        None => config.oracle_selection.clone(),
        Some(OracleSet::Mock) => OracleSelection::default(),
        Some(OracleSet::Remote) => OracleSelection {
            language: "remote-llm".into(),
            visual: "remote-vlm".into(),
            ..OracleSelection::default()
        },
    };
    Ok(Oracles::from_selection(&selection, config)?)
}

fn print_summary(s: &RunSummary) {
    let state = if s.complete { "complete" } else { "stopped" };
    println!("run {} {state} at generation {}, {} log records", s.run_id, s.generation, s.log_lines);
    for (k, best) in s.archive_best.iter().enumerate() {
        match best {
            Some(c) => println!("  task position {k}: best combined cost {c:.6}"),
            None => println!("  task position {k}: no individual"),
        }
    }
}

fn read_points(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("cannot read points {}", path.display()))?;
    let mut points = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let row = row?;
        let parsed: Vec<Option<f64>> = row.iter().map(|c| c.parse().ok()).collect();
        match parsed.as_slice() {
            [Some(x), Some(y)] => points.push([*x, *y]),
            // a leading header row is allowed
            [_, _] if n == 0 => continue,
            _ => bail!("{}: line {} is not two numbers", path.display(), n + 1),
        }
    }
    Ok(points)
}

fn parse_reference(text: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] => Ok([x.parse()?, y.parse()?]),
        _ => bail!("reference must be `x,y`, got `{text}`"),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            oracles,
            samples,
            random_baseline,
            stop_after,
            no_novelty,
        } => {
            let mut config = load_config(config.as_deref())?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(b) = samples {
                config.novelty_baseline_samples = b;
            }
            config.validate()?;
            let oracles = oracles_for(&config, oracles)?;
            std::fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;
            let options = RunOptions {
                stop_after_generation: stop_after,
                random_baseline,
                skip_novelty: no_novelty,
            };
            print_summary(&run_to_dir(&config, &oracles, &out, options)?);
        }
        Command::Resume { out, oracles, stop_after } => {
            let config = load_run_config(&out).with_context(|| format!("no resumable run in {}", out.display()))?;
            let oracles = oracles_for(&config, oracles)?;
            print_summary(&resume_dir(&out, &oracles, stop_after)?);
        }
        Command::Report { out } => {
            for path in write_report(&out)? {
                println!("{}", path.display());
            }
        }
        Command::Baseline {
            config,
            task,
            samples,
            seed,
            oracles,
            out,
        } => {
            let config = load_config(config.as_deref())?;
            let oracles = oracles_for(&config, oracles)?;
            let task = config
                .tasks
                .iter()
                .find(|t| t.index == task)
                .with_context(|| format!("config has no task {task}"))?;
            let samples = samples.unwrap_or(config.novelty_baseline_samples);
            let seed = seed.unwrap_or(config.seed);
            let (b, path, reused) = load_or_build_baseline(
                &out,
                oracles.generator.as_ref(),
                oracles.visual.as_ref(),
                task,
                samples,
                seed,
            )?;
            let how = if reused { "reused" } else { "built" };
            println!("{how} {} mean {} over {} samples", path.display(), b.baseline_mean, b.sample_count);
        }
        Command::Hv { points, reference } => {
            let reference = if reference.is_empty() {
                DEFAULT_REFERENCE
            } else {
                parse_reference(&reference)?
            };
            println!("{}", hypervolume_2d(&read_points(&points)?, reference)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
