//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, failed seed runs, unknown
//! runs), 2 invalid configuration or usage.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::config::{parse_config_with_overrides, ExperimentConfig};
use crate::curve::write_csv_file;
use crate::error::{Error, Result};
use crate::simulator::{load_aggregate, load_dataset, run_experiment, RunOptions};
use crate::synth::{disjoint_vocabulary_clusters, write_splits, PlantedKeywords, SynthDoc};
use crate::teachers::StrategyRegistry;
use crate::tracking::{render_overlay_svg, RunStore};

/// Environment variable overriding the run store root.
pub const STORE_ENV: &str = "ALSIM_STORE";

#[derive(Debug, Parser)]
#[command(name = "alsim", version, about = "Simulated pool-based active learning experiments")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override a config value, e.g. `--set experiment.step_size=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    /// Run store root; takes precedence over the environment and the config.
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and convert the raw corpus into the store.
    Convert,
    /// Convert (cached), run every seed and aggregate.
    Run {
        /// Continue failed seed runs from their last completed step.
        #[arg(long)]
        resume: bool,
        /// Stop each seed run after this step index and leave it resumable.
        #[arg(long, value_name = "STEP")]
        pause_after_step: Option<usize>,
    },
    /// Export aggregate CSVs and an overlay plot for finished experiments.
    Report {
        /// Aggregate run ids, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        runs: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Point metric to plot.
        #[arg(long, default_value = "test_macro_f1")]
        metric: String,
    },
    /// Write a synthetic corpus as train/dev/test JSONL.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SynthKind::Planted)]
        kind: SynthKind,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SynthKind {
    /// Two classes, planted keywords, 2000/500/500 documents.
    Planted,
    /// Two clusters over disjoint vocabularies.
    Clusters,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Validation {
            field: "--config".into(),
            message: "this command needs a configuration file".into(),
        })?;
    parse_config_with_overrides(path, &cli.overrides)
}

/// Store root: `--store`, then the environment, then `tracking.store`.
pub fn resolve_store(flag: Option<&Path>, env: Option<OsString>, cfg: Option<&ExperimentConfig>) -> Result<PathBuf> {
    if let Some(p) = flag {
        return Ok(p.to_path_buf());
    }
    if let Some(v) = env.filter(|v| !v.is_empty()) {
        return Ok(PathBuf::from(v));
    }
    cfg.map(ExperimentConfig::store_dir).ok_or_else(|| Error::Validation {
        field: "--store".into(),
        message: format!("no store given (use --store, {STORE_ENV} or --config)"),
    })
}

fn open_store(cli: &Cli, cfg: Option<&ExperimentConfig>) -> Result<RunStore> {
    RunStore::open(resolve_store(cli.store.as_deref(), std::env::var_os(STORE_ENV), cfg)?)
}

fn synth(out: &Path, kind: SynthKind, seed: u64) -> Result<()> {
    let splits = match kind {
        SynthKind::Planted => PlantedKeywords {
            seed,
            ..Default::default()
        }
        .generate(),
        SynthKind::Clusters => {
            let docs: Vec<SynthDoc> = disjoint_vocabulary_clusters(2, 50, 20, 10, seed)
                .into_iter()
                .map(|(text, c)| SynthDoc {
                    text,
                    label: format!("cluster{c}"),
                })
                .collect();
            [docs.clone(), docs.clone(), docs]
        }
    };
    write_splits(out, &splits)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn report(store: &RunStore, runs: &[String], out: &Path, metric: &str) -> Result<()> {
    let mut loaded = Vec::with_capacity(runs.len());
    for id in runs {
        loaded.push((id.clone(), load_aggregate(store, id)?));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut labeled = Vec::with_capacity(loaded.len());
    for (id, agg) in &loaded {
        let path = out.join(format!("{id}.csv"));
        write_csv_file(&path, &agg.to_csv())?;
        println!("wrote {}", path.display());
        let shared = loaded.iter().filter(|(_, a)| a.teacher == agg.teacher).count() > 1;
        let label = if shared { format!("{} ({id})", agg.teacher) } else { agg.teacher.clone() };
        labeled.push((label, agg.clone()));
    }
    let svg = out.join("overlay.svg");
    fs::write(&svg, render_overlay_svg(&labeled, metric)).map_err(|e| Error::io(&svg, e))?;
    println!("wrote {}", svg.display());
    Ok(())
}

fn execute(cli: &Cli, cancel: Arc<AtomicBool>) -> Result<()> {
    match &cli.command {
        Command::Convert => {
            let cfg = load_config(cli)?;
            let store = open_store(cli, Some(&cfg))?;
            let data = load_dataset(&store, &cfg)?;
            if data.cache_hits == 3 {
                println!("convert: skipped (cached run {})", data.convert_run);
            } else {
                println!("convert: done (run {})", data.convert_run);
            }
            println!(
                "{} train / {} dev / {} test documents, {} labels",
                data.split.train.len(),
                data.split.dev.len(),
                data.split.test.len(),
                data.split.labels.len()
            );
            Ok(())
        }
        Command::Run {
            resume,
            pause_after_step,
        } => {
            let cfg = load_config(cli)?;
            let store = open_store(cli, Some(&cfg))?;
            let opts = RunOptions {
                resume: *resume,
                pause_after_step: *pause_after_step,
                cancel,
            };
            let outcome = run_experiment(&store, &cfg, &StrategyRegistry::with_builtin(), &opts)?;
            for s in &outcome.seed_runs {
                let last = s.curve.points.last().expect("finished runs have points");
                println!(
                    "seed {}: run {} ({} steps, final test macro_f1 {:.4})",
                    s.seed,
                    s.run_id,
                    s.curve.points.len(),
                    last.test.macro_f1
                );
            }
            println!("trainings performed: {}", outcome.trainings);
            println!("aggregate run: {}", outcome.aggregate_run_id);
            Ok(())
        }
        Command::Report { runs, out, metric } => {
            let cfg = match &cli.config {
                Some(_) => Some(load_config(cli)?),
                None => None,
            };
            let store = open_store(cli, cfg.as_ref())?;
            report(&store, runs, out, metric)
        }
        Command::Synth { out, kind, seed } => synth(out, *kind, *seed),
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = cancel.clone();
    if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)) {
        log::debug!("interrupt handler not installed: {e}");
    }
    match execute(&cli, cancel) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Paused { .. } | Error::Interrupted { .. } | Error::SeedRunsFailed(_)) {
                eprintln!("rerun with --resume to continue");
            }
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_precedence() {
        let flag = PathBuf::from("/flag");
        assert_eq!(resolve_store(Some(&flag), Some("/env".into()), None).unwrap(), flag);
        assert_eq!(resolve_store(None, Some("/env".into()), None).unwrap(), PathBuf::from("/env"));
        assert!(matches!(resolve_store(None, None, None), Err(Error::Validation { .. })));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_cli(["alsim", "frobnicate"]), 2);
        assert_eq!(run_cli(["alsim", "run"]), 2, "missing --config");
    }

    #[test]
    fn report_args_split_on_commas() {
        let cli = Cli::try_parse_from(["alsim", "report", "--runs", "a,b", "--out", "x"]).unwrap();
        match cli.command {
            Command::Report { runs, .. } => assert_eq!(runs, vec!["a", "b"]),
            _ => unreachable!(),
        }
    }
}
