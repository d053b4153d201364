//! Store-backed pipeline: `load_raw -> convert -> load_converted -> seed runs
//! -> aggregate`, each step cached by (step name, fingerprint, revision).

use std::fs;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use super::seed_run::{SeedRunState, SeedSimulation};
use super::FeaturizedCorpus;
use crate::config::{canonical_json, digest_hex, sections_value, DataConfig, ExperimentConfig, Section};
use crate::corpus::{
    convert_raw, raw_digest, read_converted, read_label_sidecar, write_converted, write_label_sidecar, DatasetSplit,
};
use crate::curve::LearningCurve;
use crate::error::{Error, Result};
use crate::teachers::StrategyRegistry;
use crate::tracking::{aggregate_seed_runs, AggregatedCurve, RunRecord, RunStatus, RunStore};
use crate::trainer::Checkpoint;

pub const LOAD_RAW_STEP: &str = "load_raw";
pub const CONVERT_STEP: &str = "convert";
pub const LOAD_CONVERTED_STEP: &str = "load_converted";
pub const AGGREGATE_STEP: &str = "aggregate";
const SEED_RUN_PREFIX: &str = "seed_run:";

const RAW_NAMES: [&str; 3] = ["train.jsonl", "dev.jsonl", "test.jsonl"];
const CONVERTED: &str = "converted.bin";
const LABELS: &str = "labels.txt";
const VOCABULARY: &str = "vocabulary.tsv";
const STATE: &str = "state.json";
const CURVE_CSV: &str = "curve.csv";
const AGGREGATE_JSON: &str = "aggregate.json";
const AGGREGATE_CSV: &str = "aggregate.csv";

fn seed_step_name(seed: u64) -> String {
    format!("{SEED_RUN_PREFIX}{seed}")
}

fn checkpoint_name(step_index: usize) -> String {
    format!("checkpoint-{step_index:06}.bin")
}

/// Execution controls for a `run` invocation.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Continue failed seed runs from their last completed step instead of
    /// starting new records.
    pub resume: bool,
    /// Stop every seed run after this step index (0 = cold start) and leave
    /// it resumable.
    pub pause_after_step: Option<usize>,
    /// Set from a signal handler; checked between steps.
    pub cancel: Arc<AtomicBool>,
}

/// The converted dataset together with the runs that produced it.
#[derive(Debug, Clone)]
pub struct DataStage {
    pub split: DatasetSplit,
    pub data_fingerprint: String,
    pub load_raw_run: String,
    pub convert_run: String,
    pub load_converted_run: String,
    /// Steps served from the store.
    pub cache_hits: usize,
}

#[derive(Debug, Clone)]
pub struct SeedRunOutcome {
    pub seed: u64,
    pub run_id: String,
    pub curve: LearningCurve,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub data: DataStage,
    pub seed_runs: Vec<SeedRunOutcome>,
    pub aggregate: AggregatedCurve,
    pub aggregate_run_id: String,
    /// Training steps performed by this invocation.
    pub trainings: usize,
}

/// Generic cached step. On a successful match `load` reads the stored result;
/// otherwise a new record is created and `compute` fills it.
fn cached_step<T>(
    store: &RunStore,
    step: &str,
    fingerprint: &str,
    revision: &str,
    params: &serde_json::Value,
    load: impl FnOnce(&RunRecord) -> Result<T>,
    compute: impl FnOnce(&RunRecord) -> Result<T>,
) -> Result<(T, String, bool)> {
    if let Some(rec) = store.find_matching_run(step, fingerprint, revision)? {
        if rec.status == RunStatus::Success {
            store.log_event(step, &rec.run_id, "cache-hit")?;
            log::info!("{step}: skipped, cached in run {}", rec.run_id);
            return Ok((load(&rec)?, rec.run_id, true));
        }
    }
    let rec = store.create_run(step, fingerprint, revision, params)?;
    store.log_event(step, &rec.run_id, "start")?;
    match compute(&rec) {
        Ok(v) => {
            store.set_status(&rec.run_id, RunStatus::Success)?;
            store.log_event(step, &rec.run_id, "success")?;
            Ok((v, rec.run_id, false))
        }
        Err(e) => {
            let _ = store.set_status(&rec.run_id, RunStatus::Failed);
            let _ = store.log_event(step, &rec.run_id, "failed");
            Err(e)
        }
    }
}

fn read_split_artifacts(store: &RunStore, run_id: &str) -> Result<DatasetSplit> {
    let labels = String::from_utf8(store.get_artifact(run_id, LABELS)?).map_err(|e| Error::CorruptArtifact {
        name: LABELS.into(),
        message: e.to_string(),
    })?;
    read_converted(&store.get_artifact(run_id, CONVERTED)?, read_label_sidecar(&labels)?)
}

fn write_split_artifacts(store: &RunStore, run_id: &str, split: &DatasetSplit) -> Result<()> {
    store.put_artifact(run_id, CONVERTED, &write_converted(split))?;
    store.put_artifact(run_id, LABELS, write_label_sidecar(&split.labels).as_bytes())?;
    Ok(())
}

/// Digest of the data section plus the raw file contents.
pub fn data_fingerprint(cfg: &ExperimentConfig) -> Result<String> {
    let raw = raw_digest(&cfg.source_dir(), &cfg.data)?;
    Ok(digest_hex(&format!(
        "{}\n{raw}",
        canonical_json(&sections_value(cfg, &[Section::Data]))
    )))
}

/// Runs (or serves from cache) the three data steps.
pub fn load_dataset(store: &RunStore, cfg: &ExperimentConfig) -> Result<DataStage> {
    let fp = data_fingerprint(cfg)?;
    let rev = cfg.tracking.revision.as_str();
    let params = sections_value(cfg, &[Section::Data]);
    let mut hits = 0;

    let (_, load_raw_run, hit) = cached_step(
        store,
        LOAD_RAW_STEP,
        &fp,
        rev,
        &params,
        |rec| {
            for name in RAW_NAMES {
                store.get_artifact(&rec.run_id, name)?;
            }
            Ok(())
        },
        |rec| {
            let src = cfg.source_dir();
            for (file, name) in [&cfg.data.train_file, &cfg.data.dev_file, &cfg.data.test_file].into_iter().zip(RAW_NAMES) {
                let path = src.join(file);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                store.put_artifact(&rec.run_id, name, &bytes)?;
            }
            Ok(())
        },
    )?;
    hits += hit as usize;

    let copied = DataConfig {
        train_file: RAW_NAMES[0].into(),
        dev_file: RAW_NAMES[1].into(),
        test_file: RAW_NAMES[2].into(),
        ..cfg.data.clone()
    };
    let raw_dir = store.artifact_path(&load_raw_run, RAW_NAMES[0]);
    let raw_dir = raw_dir.parent().expect("artifact directory").to_path_buf();
    let (split, convert_run, hit) = cached_step(
        store,
        CONVERT_STEP,
        &fp,
        rev,
        &params,
        |rec| read_split_artifacts(store, &rec.run_id),
        |rec| {
            let split = convert_raw(&raw_dir, &copied)?;
            write_split_artifacts(store, &rec.run_id, &split)?;
            store.log_metrics(
                &rec.run_id,
                &[
                    (0, "train_docs", split.train.len() as f64),
                    (0, "dev_docs", split.dev.len() as f64),
                    (0, "test_docs", split.test.len() as f64),
                    (0, "labels", split.labels.len() as f64),
                ],
            )?;
            Ok(split)
        },
    )?;
    hits += hit as usize;

    let (split, load_converted_run, hit) = cached_step(
        store,
        LOAD_CONVERTED_STEP,
        &fp,
        rev,
        &params,
        |rec| read_split_artifacts(store, &rec.run_id),
        |rec| {
            write_split_artifacts(store, &rec.run_id, &split)?;
            Ok(split)
        },
    )?;
    hits += hit as usize;

    Ok(DataStage {
        split,
        data_fingerprint: fp,
        load_raw_run,
        convert_run,
        load_converted_run,
        cache_hits: hits,
    })
}

/// Fingerprint of a seed run: everything the loop reads except the seed list,
/// plus the data fingerprint. It also keys every random stream of the run.
pub fn seed_run_fingerprint(cfg: &ExperimentConfig, data_fingerprint: &str) -> String {
    let mut v = sections_value(cfg, &[Section::Data, Section::Experiment, Section::Teacher, Section::Trainer]);
    if let Some(exp) = v.get_mut("experiment").and_then(|e| e.as_object_mut()) {
        exp.remove("seeds");
    }
    digest_hex(&format!("{}\n{data_fingerprint}", canonical_json(&v)))
}

fn aggregate_fingerprint(cfg: &ExperimentConfig, data_fingerprint: &str) -> String {
    let v = sections_value(cfg, &[Section::Data, Section::Experiment, Section::Teacher, Section::Trainer]);
    digest_hex(&format!("{}\n{data_fingerprint}", canonical_json(&v)))
}

struct SeedJob<'a> {
    store: &'a RunStore,
    cfg: &'a ExperimentConfig,
    corpus: &'a FeaturizedCorpus,
    registry: &'a StrategyRegistry,
    fingerprint: &'a str,
    opts: &'a RunOptions,
    trainings: &'a AtomicUsize,
}

fn load_state(store: &RunStore, run_id: &str) -> Result<SeedRunState> {
    serde_json::from_slice(&store.get_artifact(run_id, STATE)?).map_err(|e| Error::CorruptArtifact {
        name: format!("{run_id}/{STATE}"),
        message: e.to_string(),
    })
}

fn load_progress(store: &RunStore, run_id: &str) -> Result<(SeedRunState, Checkpoint)> {
    let state = load_state(store, run_id)?;
    let last = state.points.len().checked_sub(1).ok_or_else(|| Error::CorruptArtifact {
        name: format!("{run_id}/{STATE}"),
        message: "no completed step".into(),
    })?;
    let ckpt = Checkpoint::decode(&store.get_artifact(run_id, &checkpoint_name(last))?)?;
    Ok((state, ckpt))
}

impl SeedJob<'_> {
    /// Runs or continues the seed run recorded as `rec`.
    fn drive(&self, rec: &RunRecord, resume: bool) -> Result<LearningCurve> {
        let step = rec.step_name.as_str();
        let seed = rec.params.get("seed").and_then(|s| s.as_u64()).ok_or_else(|| {
            Error::Store(format!("run {} has no seed parameter", rec.run_id))
        })?;
        let mut sim = None;
        if resume {
            match load_progress(self.store, &rec.run_id) {
                Ok((state, ckpt)) if state.fingerprint == self.fingerprint && state.seed == seed => {
                    match SeedSimulation::restore(self.cfg, self.corpus, self.registry, state, ckpt) {
                        Ok(s) => {
                            self.store.log_event(step, &rec.run_id, &format!("resume step={}", s.completed_steps()))?;
                            sim = Some(s);
                        }
                        Err(e) => log::warn!("{step}: cannot restore run {} ({e}); restarting from scratch", rec.run_id),
                    }
                }
                Ok(_) => log::warn!("{step}: stored state of run {} does not match; restarting from scratch", rec.run_id),
                Err(e) => log::warn!("{step}: no usable checkpoint in run {} ({e}); restarting from scratch", rec.run_id),
            }
        }
        let mut sim = match sim {
            Some(s) => s,
            None => {
                self.store.log_event(step, &rec.run_id, "start")?;
                self.store.put_artifact(&rec.run_id, VOCABULARY, self.corpus.vocabulary.to_artifact().as_bytes())?;
                SeedSimulation::new(self.cfg, self.corpus, self.registry, self.fingerprint, seed)?
            }
        };

        while !sim.is_finished() {
            if self.opts.cancel.load(Ordering::SeqCst) {
                return Err(Error::Interrupted { seed });
            }
            if let Some(j) = self.opts.pause_after_step {
                if sim.completed_steps() > j {
                    return Err(Error::Paused { seed, step: j });
                }
            }
            let point = sim.advance()?.expect("unfinished run advances").clone();
            self.trainings.fetch_add(1, Ordering::SeqCst);
            let idx = point.step_index;
            self.store.put_artifact(&rec.run_id, &checkpoint_name(idx), &sim.checkpoint().encode())?;
            let state = serde_json::to_vec(sim.state()).expect("state serializes");
            self.store.put_artifact(&rec.run_id, STATE, &state)?;
            if idx > 0 {
                self.store.discard_artifact(&rec.run_id, &checkpoint_name(idx - 1))?;
            }
            let mut rows: Vec<(usize, &str, f64)> = point.metrics().iter().map(|&(m, v)| (idx, m, v)).collect();
            rows.push((idx, "labeled_count", point.labeled_count as f64));
            self.store.log_metrics(&rec.run_id, &rows)?;
            self.store.log_event(step, &rec.run_id, &format!("train step={idx}"))?;
        }
        let curve = sim.into_curve();
        self.store.put_artifact(&rec.run_id, CURVE_CSV, &curve.to_csv())?;
        Ok(curve)
    }

    fn run(&self, seed: u64) -> Result<SeedRunOutcome> {
        let step = seed_step_name(seed);
        let rev = &self.cfg.tracking.revision;
        let existing = self.store.find_matching_run(&step, self.fingerprint, rev)?;
        let (rec, resume) = match existing {
            Some(rec) if rec.status == RunStatus::Success => {
                self.store.log_event(&step, &rec.run_id, "cache-hit")?;
                let curve = load_state(self.store, &rec.run_id)?.curve();
                return Ok(SeedRunOutcome {
                    seed,
                    run_id: rec.run_id,
                    curve,
                });
            }
            Some(rec) if self.opts.resume => (rec, true),
            _ => {
                let params = serde_json::json!({
                    "seed": seed,
                    "config": sections_value(self.cfg, &[Section::Data, Section::Experiment, Section::Teacher, Section::Trainer]),
                });
                (self.store.create_run(&step, self.fingerprint, rev, &params)?, false)
            }
        };
        let run_id = rec.run_id.clone();
        let curve = self.finish(rec, resume)?;
        Ok(SeedRunOutcome { seed, run_id, curve })
    }

    fn finish(&self, rec: RunRecord, resume: bool) -> Result<LearningCurve> {
        if rec.status != RunStatus::Running {
            self.store.set_status(&rec.run_id, RunStatus::Running)?;
        }
        match self.drive(&rec, resume) {
            Ok(curve) => {
                self.store.set_status(&rec.run_id, RunStatus::Success)?;
                self.store.log_event(&rec.step_name, &rec.run_id, "success")?;
                Ok(curve)
            }
            Err(e) => {
                let _ = self.store.set_status(&rec.run_id, RunStatus::Failed);
                let _ = self.store.log_event(&rec.step_name, &rec.run_id, "failed");
                Err(e)
            }
        }
    }
}

fn check_strategies(cfg: &ExperimentConfig, registry: &StrategyRegistry) -> Result<()> {
    for name in [&cfg.teacher.strategy, &cfg.teacher.initial_strategy] {
        if !registry.contains(name) {
            return Err(Error::UnknownStrategy(name.clone()));
        }
    }
    Ok(())
}

/// Runs every configured seed on a pool of `tracking.worker_count` threads,
/// then aggregates. Per-seed results do not depend on scheduling.
pub fn run_experiment(
    store: &RunStore,
    cfg: &ExperimentConfig,
    registry: &StrategyRegistry,
    opts: &RunOptions,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    check_strategies(cfg, registry)?;
    let data = load_dataset(store, cfg)?;
    let corpus = FeaturizedCorpus::build(&data.split, &cfg.trainer)?;
    let fingerprint = seed_run_fingerprint(cfg, &data.data_fingerprint);
    let trainings = AtomicUsize::new(0);
    let job = SeedJob {
        store,
        cfg,
        corpus: &corpus,
        registry,
        fingerprint: &fingerprint,
        opts,
        trainings: &trainings,
    };

    let seeds = &cfg.experiment.seeds;
    let results: Mutex<Vec<Option<Result<SeedRunOutcome>>>> = Mutex::new((0..seeds.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = cfg.tracking.worker_count.min(seeds.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= seeds.len() {
                    break;
                }
                let r = job.run(seeds[i]);
                results.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(r);
            });
        }
    });

    let mut seed_runs = Vec::with_capacity(seeds.len());
    let mut failed = Vec::new();
    let mut first_error = None;
    for (seed, r) in seeds.iter().zip(results.into_inner().unwrap_or_else(|p| p.into_inner())) {
        match r.expect("every seed is scheduled") {
            Ok(o) => seed_runs.push(o),
            Err(e) => {
                log::error!("seed run {seed} failed: {e}");
                failed.push(*seed);
                first_error.get_or_insert(e);
            }
        }
    }
    if !failed.is_empty() {
        return Err(match first_error {
            Some(e) if failed.len() == 1 && matches!(e, Error::Paused { .. } | Error::Interrupted { .. }) => e,
            _ => Error::SeedRunsFailed(failed),
        });
    }

    let curves: Vec<LearningCurve> = seed_runs.iter().map(|o| o.curve.clone()).collect();
    let agg_fp = aggregate_fingerprint(cfg, &data.data_fingerprint);
    let params = serde_json::json!({
        "teacher": cfg.teacher.strategy,
        "seeds": seeds,
        "seed_runs": seed_runs.iter().map(|o| o.run_id.clone()).collect::<Vec<_>>(),
    });
    let teacher = cfg.teacher.strategy.as_str();
    let (aggregate, aggregate_run_id, _) = cached_step(
        store,
        AGGREGATE_STEP,
        &agg_fp,
        &cfg.tracking.revision,
        &params,
        |rec| load_aggregate(store, &rec.run_id),
        |rec| {
            let agg = aggregate_seed_runs(teacher, &curves)?;
            store.put_artifact(&rec.run_id, AGGREGATE_JSON, &serde_json::to_vec(&agg).expect("aggregate serializes"))?;
            store.put_artifact(&rec.run_id, AGGREGATE_CSV, &agg.to_csv())?;
            Ok(agg)
        },
    )?;
    Ok(ExperimentOutcome {
        data,
        seed_runs,
        aggregate,
        aggregate_run_id,
        trainings: trainings.into_inner(),
    })
}

/// Reads the stored aggregate of a successful `aggregate` run.
pub fn load_aggregate(store: &RunStore, run_id: &str) -> Result<AggregatedCurve> {
    let rec = store.load_run(run_id)?;
    if rec.step_name != AGGREGATE_STEP {
        return Err(Error::Store(format!("run {run_id} is a `{}` run, not an aggregate", rec.step_name)));
    }
    if rec.status != RunStatus::Success {
        return Err(Error::RunNotSuccessful {
            run_id: run_id.to_string(),
            status: rec.status.as_str().to_string(),
        });
    }
    serde_json::from_slice(&store.get_artifact(run_id, AGGREGATE_JSON)?).map_err(|e| Error::CorruptArtifact {
        name: format!("{run_id}/{AGGREGATE_JSON}"),
        message: e.to_string(),
    })
}

/// Per-seed CSV of a successful seed run.
pub fn seed_curve_csv(store: &RunStore, run_id: &str) -> Result<Vec<u8>> {
    store.get_artifact(run_id, CURVE_CSV)
}

/// Continues one persisted seed run under `cfg`. A finished run returns its
/// stored curve; a run recorded under a different configuration is refused.
pub fn resume_seed_run(
    store: &RunStore,
    run_id: &str,
    cfg: &ExperimentConfig,
    registry: &StrategyRegistry,
    opts: &RunOptions,
) -> Result<LearningCurve> {
    let rec = store.load_run(run_id)?;
    if !rec.step_name.starts_with(SEED_RUN_PREFIX) {
        return Err(Error::Store(format!("run {run_id} is not a seed run")));
    }
    cfg.validate()?;
    check_strategies(cfg, registry)?;
    let data = load_dataset(store, cfg)?;
    let fingerprint = seed_run_fingerprint(cfg, &data.data_fingerprint);
    if rec.fingerprint != fingerprint {
        return Err(Error::FingerprintMismatch {
            run_id: run_id.to_string(),
            stored: rec.fingerprint,
            actual: fingerprint,
        });
    }
    if rec.status == RunStatus::Success {
        store.log_event(&rec.step_name, run_id, "cache-hit")?;
        return Ok(load_state(store, run_id)?.curve());
    }
    let corpus = FeaturizedCorpus::build(&data.split, &cfg.trainer)?;
    let trainings = AtomicUsize::new(0);
    let job = SeedJob {
        store,
        cfg,
        corpus: &corpus,
        registry,
        fingerprint: &fingerprint,
        opts,
        trainings: &trainings,
    };
    job.finish(rec, true)
}
