//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Every tolerance is pinned below.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use alsim::config::{parse_config_with_overrides, ExperimentConfig};
use alsim::corpus::DocId;
use alsim::featurize::{SparseVector, Vocabulary};
use alsim::rng::{derive_rng, tag};
use alsim::simulator::{run_experiment, seed_curve_csv, ExperimentOutcome, RunOptions};
use alsim::synth::{disjoint_vocabulary_clusters, write_splits, PlantedKeywords};
use alsim::teachers::{fit_kmeans, PoolView, ProposeContext, StrategyRegistry, TeacherArgs};
use alsim::trainer::{scores_from_confusion, LinearModel, PoolPredictor, Predictor, Sample};
use alsim::tracking::RunStore;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [42, 4711, 768, 4656, 32213];
const DETERMINISM_RUNTIME: Duration = Duration::from_secs(60);
const AGGREGATE_TOLERANCE: f64 = 1e-12;
const MARGIN_TRIALS: usize = 20;
const MARGIN_MAX_POOL: usize = 200;
const KMEANS_TRIALS: usize = 20;
const KMEANS_POINTS: usize = 50;
const KMEANS_MONOTONE_SLACK: f64 = 1e-12;
const KMEANS_AGREEMENT: f64 = 0.95;
const KMEANS_MIN_SEEDS: usize = 4;
const F1_TOLERANCE: f64 = 1e-12;
const GRADIENT_TOLERANCE: f64 = 1e-5;
const GRADIENT_STEP: f64 = 1e-5;
const RESUME_AFTER: [usize; 2] = [1, 3];
const TREND_THRESHOLD: f64 = 0.85;
const TREND_MIN_SEEDS: usize = 4;
const TREND_MIN_STEP_SHARE: f64 = 0.6;
const TREND_RUNTIME: Duration = Duration::from_secs(300);
const CONTRACT_INSTANCES: usize = 200;

type Verdict = Result<String, String>;

const EXPERIMENT: &str = r#"
[data]
source = "raw"

[experiment]
step_size = 100
initial_ratio = 0.05
budget = 1000
seeds = [42, 4711, 768, 4656, 32213]

[teacher]
strategy = "margin"

[tracking]
store = "runs"
revision = "acceptance"
"#;

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().expect("temp dir");
        let root = dir.path().to_path_buf();
        write_splits(&root.join("raw"), &PlantedKeywords::default().generate()).expect("corpus");
        fs::write(root.join("experiment.toml"), EXPERIMENT).expect("config");
        Self { _dir: dir, root }
    }

    fn config(&self, overrides: &[&str]) -> ExperimentConfig {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        parse_config_with_overrides(&self.root.join("experiment.toml"), &o).expect("config parses")
    }

    fn run(&self, store: &str, strategy: &str) -> (RunStore, ExperimentOutcome, Duration) {
        let cfg = self.config(&[&format!("teacher.strategy=\"{strategy}\"")]);
        let store = RunStore::open(self.root.join(store)).expect("store");
        let t = Instant::now();
        let out = run_experiment(&store, &cfg, &StrategyRegistry::with_builtin(), &RunOptions::default())
            .expect("experiment runs");
        (store, out, t.elapsed())
    }
}

struct Trend {
    runs: BTreeMap<&'static str, (RunStore, ExperimentOutcome)>,
    elapsed: Duration,
}

fn trend_runs(ws: &Workspace) -> Trend {
    let t = Instant::now();
    let mut runs = BTreeMap::new();
    for strategy in ["random", "margin", "kmeans"] {
        let (store, out, _) = ws.run("runs", strategy);
        runs.insert(strategy, (store, out));
    }
    Trend {
        runs,
        elapsed: t.elapsed(),
    }
}

fn criterion_determinism(ws: &Workspace, trend: &Trend) -> Verdict {
    let (store_a, out_a) = &trend.runs["margin"];
    let (store_b, out_b, elapsed) = ws.run("runs-twin", "margin");
    for (a, b) in out_a.seed_runs.iter().zip(&out_b.seed_runs) {
        let (x, y) = (
            seed_curve_csv(store_a, &a.run_id).map_err(|e| e.to_string())?,
            seed_curve_csv(&store_b, &b.run_id).map_err(|e| e.to_string())?,
        );
        if x != y {
            return Err(format!("seed {} CSVs differ", a.seed));
        }
    }
    if elapsed >= DETERMINISM_RUNTIME {
        return Err(format!("run took {elapsed:?}"));
    }
    Ok(format!("{} per-seed CSVs byte-identical, run took {:.1}s", out_a.seed_runs.len(), elapsed.as_secs_f64()))
}

/// Rows of `step_index,labeled_count,metric,value`, parsed without the library.
fn plain_rows(bytes: &[u8]) -> Vec<(usize, usize, String, f64)> {
    let text = std::str::from_utf8(bytes).expect("utf-8 csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step_index,labeled_count,metric,value"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].to_string(), f[3].parse().unwrap())
        })
        .collect()
}

fn criterion_aggregation(ws: &Workspace, trend: &Trend) -> Verdict {
    let mut checked = 0;
    for (store, out) in trend.runs.values() {
        let mut per_step: BTreeMap<(usize, usize, String), Vec<f64>> = BTreeMap::new();
        for s in &out.seed_runs {
            for (step, count, metric, value) in plain_rows(&seed_curve_csv(store, &s.run_id).unwrap()) {
                per_step.entry((step, count, metric)).or_default().push(value);
            }
        }
        let agg = fs::read(store.artifact_path(&out.aggregate_run_id, "aggregate.csv")).map_err(|e| e.to_string())?;
        let agg: BTreeMap<(usize, usize, String), f64> =
            plain_rows(&agg).into_iter().map(|(s, c, m, v)| ((s, c, m), v)).collect();
        for ((step, count, metric), values) in &per_step {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let min = values.iter().cloned().fold(f64::MAX, f64::min);
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            for (suffix, expected) in [("mean", mean), ("min", min), ("max", max)] {
                let key = (*step, *count, format!("{metric}_{suffix}"));
                let got = *agg.get(&key).ok_or_else(|| format!("aggregate lacks {key:?}"))?;
                if (got - expected).abs() > AGGREGATE_TOLERANCE {
                    return Err(format!("{key:?}: {got} vs recomputed {expected}"));
                }
                checked += 1;
            }
        }
    }
    let _ = ws;
    Ok(format!("{checked} aggregate values match recomputation within {AGGREGATE_TOLERANCE:e}"))
}

/// Probabilities served from a table; ids index rows.
struct TablePredictor(Vec<Vec<f64>>);

impl Predictor for TablePredictor {
    fn label_count(&self) -> usize {
        self.0[0].len()
    }
    fn predict_proba(&self, ids: &[DocId]) -> alsim::Result<Vec<Vec<f64>>> {
        Ok(ids.iter().map(|&i| self.0[i as usize].clone()).collect())
    }
}

fn random_distribution(rng: &mut ChaCha8Rng, labels: usize) -> Vec<f64> {
    // coarse values so ties between documents actually occur
    let raw: Vec<f64> = (0..labels).map(|_| rng.gen_range(1..6) as f64).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

fn criterion_margin(registry: &StrategyRegistry) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dummy = ExperimentConfig::from_toml_str(
        "[data]\nsource='x'\n[experiment]\nstep_size=1\nbudget=1\nseeds=[1]\n[teacher]\nstrategy='margin'\n[tracking]\nrevision='r'\n",
        ".",
    )
    .unwrap();
    for trial in 0..MARGIN_TRIALS {
        let universe = rng.gen_range(2..=MARGIN_MAX_POOL);
        let labels = rng.gen_range(2..=4);
        let table: Vec<Vec<f64>> = (0..universe).map(|_| random_distribution(&mut rng, labels)).collect();
        let mut pool: Vec<DocId> = (0..universe as DocId).filter(|_| rng.gen_bool(0.8)).collect();
        if pool.is_empty() {
            pool.push(0);
        }
        let step = rng.gen_range(1..=pool.len());

        let mut brute: Vec<(f64, DocId)> = pool
            .iter()
            .map(|&id| {
                let mut p = table[id as usize].clone();
                p.sort_by(|a, b| b.partial_cmp(a).unwrap());
                (p[0] - p[1], id)
            })
            .collect();
        brute.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expected: Vec<DocId> = brute.iter().take(step).map(|x| x.1).collect();

        let predictor = TablePredictor(table);
        let features: Vec<SparseVector> = vec![SparseVector::default(); universe];
        let ids: Vec<DocId> = (0..universe as DocId).collect();
        let mut teacher = registry
            .build(
                "margin",
                TeacherArgs {
                    config: &dummy,
                    pool: PoolView { ids: &ids, features: &features, feature_count: 0 },
                    label_count: labels,
                    rng: ChaCha8Rng::seed_from_u64(0),
                },
            )
            .unwrap();
        let mut stream = ChaCha8Rng::seed_from_u64(trial as u64);
        let mut ctx = ProposeContext::clamped(&pool, step, pool.len(), &predictor, &mut stream);
        let got = teacher.propose(&mut ctx).map_err(|e| e.to_string())?;
        if got != expected {
            return Err(format!("trial {trial}: got {got:?}, brute force {expected:?}"));
        }
    }
    Ok(format!("{MARGIN_TRIALS} trials match the brute-force ordering exactly"))
}

fn criterion_kmeans() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..KMEANS_TRIALS {
        let dim = rng.gen_range(2..8);
        let points: Vec<SparseVector> = (0..KMEANS_POINTS)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-5.0..5.0) }).collect();
                SparseVector::from_dense(&v)
            })
            .collect();
        let k = rng.gen_range(2..8);
        let fit = fit_kmeans(&points, k, dim, &mut ChaCha8Rng::seed_from_u64(trial as u64)).map_err(|e| e.to_string())?;
        for w in fit.objective_history.windows(2) {
            if w[1] > w[0] + KMEANS_MONOTONE_SLACK * w[0].max(1.0) {
                return Err(format!("trial {trial}: objective rose {} -> {}", w[0], w[1]));
            }
        }
    }

    let docs = disjoint_vocabulary_clusters(2, 50, 20, 10, 99);
    let vocab = Vocabulary::fit(docs.iter().map(|d| d.0.as_str()), 1, None).unwrap();
    let vectors: Vec<SparseVector> = docs.iter().map(|d| vocab.tfidf(&d.0)).collect();
    let mut agreements = Vec::new();
    for seed in SEEDS {
        let mut stream = derive_rng("planted-clusters", seed, tag::TEACHER_INIT, 0);
        let fit = fit_kmeans(&vectors, 2, vocab.len(), &mut stream).map_err(|e| e.to_string())?;
        let same = docs.iter().zip(&fit.assignments).filter(|(d, &a)| d.1 == a).count() as f64 / docs.len() as f64;
        agreements.push(same.max(1.0 - same));
    }
    let recovered = agreements.iter().filter(|&&a| a >= KMEANS_AGREEMENT).count();
    let detail = format!(
        "objective non-increasing in {KMEANS_TRIALS} trials; planted agreement {:?}",
        agreements.iter().map(|a| format!("{a:.2}")).collect::<Vec<_>>()
    );
    if recovered >= KMEANS_MIN_SEEDS {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_macro_f1() -> Verdict {
    let fixtures: [(Vec<Vec<u64>>, f64); 5] = [
        (vec![vec![5, 0], vec![0, 5]], 1.0),
        (vec![vec![3, 1], vec![2, 4]], 23.0 / 33.0),
        // label 2 is never predicted: its precision is 0/0 := 0
        (vec![vec![2, 0, 0], vec![1, 1, 0], vec![0, 2, 0]], 0.4),
        (vec![vec![0, 3], vec![2, 0]], 0.0),
        // label 2 has no gold support: its recall is 0/0 := 0
        (vec![vec![4, 1, 0], vec![0, 3, 2], vec![0, 0, 0]], 14.0 / 27.0),
    ];
    for (i, (m, expected)) in fixtures.iter().enumerate() {
        let (_, got, _) = scores_from_confusion(m);
        if (got - expected).abs() > F1_TOLERANCE {
            return Err(format!("fixture {i}: {got} vs {expected}"));
        }
    }
    Ok(format!("5 fixtures within {F1_TOLERANCE:e}"))
}

fn random_sparse(rng: &mut ChaCha8Rng, dim: u32, density: f64, range: std::ops::Range<f64>) -> SparseVector {
    let mut pairs = Vec::new();
    for i in 0..dim {
        if rng.gen_bool(density) {
            pairs.push((i, rng.gen_range(range.clone())));
        }
    }
    SparseVector::from_pairs(pairs)
}

fn criterion_gradient() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (labels, features) = (3, 6);
    let docs: Vec<SparseVector> = (0..5)
        .map(|_| random_sparse(&mut rng, features as u32, 0.6, -1.0..1.0))
        .collect();
    let gold = [0u32, 1, 2, 1, 0];
    let samples: Vec<Sample<'_>> = docs.iter().zip(gold).map(|(x, y)| Sample { features: x, label: y }).collect();
    let mut model = LinearModel::zeros(labels, features);
    for w in model.weights_mut() {
        *w = rng.gen_range(-0.5..0.5);
    }
    for b in model.bias_mut() {
        *b = rng.gen_range(-0.5..0.5);
    }
    let l2 = 0.01;
    let mut grad = model.empty_gradient();
    model.batch_gradient(&samples, l2, &mut grad);
    let analytic: Vec<f64> = grad.weights.iter().chain(&grad.bias).copied().collect();
    let mut numeric = Vec::with_capacity(analytic.len());
    let n_weights = model.weights().len();
    for i in 0..analytic.len() {
        let eval = |delta: f64| {
            let mut m = model.clone();
            if i < n_weights {
                m.weights_mut()[i] += delta;
            } else {
                m.bias_mut()[i - n_weights] += delta;
            }
            m.objective(&samples, l2)
        };
        numeric.push((eval(GRADIENT_STEP) - eval(-GRADIENT_STEP)) / (2.0 * GRADIENT_STEP));
    }
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    let rel = diff / scale;
    if rel < GRADIENT_TOLERANCE {
        Ok(format!("relative error {rel:.2e} over {} parameters", analytic.len()))
    } else {
        Err(format!("relative error {rel:.2e}"))
    }
}

fn alsim(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_alsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("ALSIM_STORE")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn seed_csvs(store: &Path) -> BTreeMap<String, Vec<u8>> {
    let store = RunStore::open(store).unwrap();
    store
        .list_runs()
        .unwrap()
        .into_iter()
        .filter(|r| r.step_name.starts_with("seed_run:") && r.status == alsim::tracking::RunStatus::Success)
        .map(|r| (r.step_name.clone(), seed_curve_csv(&store, &r.run_id).unwrap()))
        .collect()
}

fn trainings(store: &Path) -> usize {
    RunStore::open(store).unwrap().events().unwrap().iter().filter(|e| e.2.starts_with("train ")).count()
}

fn criterion_resume(ws: &Workspace) -> Verdict {
    // a smaller experiment keeps the three extra runs cheap
    let base = tempfile::tempdir().unwrap();
    let spec = PlantedKeywords { train: 400, dev: 100, test: 100, ..Default::default() };
    let write = |dir: &Path| {
        write_splits(&dir.join("raw"), &spec.generate()).unwrap();
        fs::write(dir.join("experiment.toml"), EXPERIMENT.replace("step_size = 100", "step_size = 50").replace("budget = 1000", "budget = 200")).unwrap();
    };
    let twin = base.path().join("twin");
    write(&twin);
    let out = alsim(&twin, &["run", "--config", "experiment.toml"]);
    if !out.status.success() {
        return Err(format!("twin run failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let expected = seed_csvs(&twin.join("runs"));
    for j in RESUME_AFTER {
        let dir = base.path().join(format!("paused-{j}"));
        write(&dir);
        let paused = alsim(&dir, &["run", "--config", "experiment.toml", "--pause-after-step", &j.to_string()]);
        if paused.status.success() {
            return Err(format!("j={j}: paused run reported success"));
        }
        let done = trainings(&dir.join("runs"));
        if done != SEEDS.len() * (j + 1) {
            return Err(format!("j={j}: {done} trainings before resume"));
        }
        let resumed = alsim(&dir, &["run", "--config", "experiment.toml", "--resume"]);
        if !resumed.status.success() {
            return Err(format!("j={j}: resume failed: {}", String::from_utf8_lossy(&resumed.stderr)));
        }
        if seed_csvs(&dir.join("runs")) != expected {
            return Err(format!("j={j}: resumed curves differ from the uninterrupted twin"));
        }
        let before = trainings(&dir.join("runs"));
        alsim(&dir, &["run", "--config", "experiment.toml"]);
        let after = trainings(&dir.join("runs"));
        if after != before {
            return Err(format!("j={j}: re-run trained {} steps", after - before));
        }
    }
    let _ = ws;
    Ok(format!("resume after j in {RESUME_AFTER:?} bitwise-equal to the twin; re-run performed 0 trainings"))
}

fn criterion_trend(trend: &Trend) -> Verdict {
    let curves = |s: &str| &trend.runs[s].1;
    let (random, margin) = (curves("random"), curves("margin"));
    let mut seed_wins = 0;
    let mut reach = Vec::new();
    for (r, m) in random.seed_runs.iter().zip(&margin.seed_runs) {
        let (rc, mc) = (r.curve.labeled_count_reaching(TREND_THRESHOLD), m.curve.labeled_count_reaching(TREND_THRESHOLD));
        reach.push((r.seed, mc, rc));
        if match (mc, rc) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) => true,
            _ => false,
        } {
            seed_wins += 1;
        }
    }
    let mean = |o: &ExperimentOutcome| -> Vec<f64> {
        o.aggregate.points.iter().map(|p| p.metric("test_macro_f1").unwrap().mean).collect()
    };
    let (rm, mm) = (mean(random), mean(margin));
    let steps = rm.len().min(mm.len()) - 1;
    let ahead = (1..=steps).filter(|&i| mm[i] >= rm[i]).count();
    let share = ahead as f64 / steps as f64;
    let detail = format!(
        "margin<=random in {seed_wins}/5 seeds (seed, margin, random: {reach:?}); mean margin>=random on {ahead}/{steps} steps; 3x5 runs in {:.1}s",
        trend.elapsed.as_secs_f64()
    );
    if seed_wins >= TREND_MIN_SEEDS && share >= TREND_MIN_STEP_SHARE && trend.elapsed < TREND_RUNTIME {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_contract(registry: &StrategyRegistry) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let universe = 120;
    let dim = 12;
    let features: Vec<SparseVector> = (0..universe)
        .map(|_| random_sparse(&mut rng, dim, 0.4, 0.0..1.0))
        .collect();
    let ids: Vec<DocId> = (0..universe as DocId).collect();
    let mut model = LinearModel::zeros(3, dim as usize);
    for w in model.weights_mut() {
        *w = rng.gen_range(-2.0..2.0);
    }
    let cfg = ExperimentConfig::from_toml_str(
        "[data]\nsource='x'\n[experiment]\nstep_size=1\nbudget=1\nseeds=[1]\n[teacher]\nstrategy='random'\n[tracking]\nrevision='r'\n",
        ".",
    )
    .unwrap();
    let mut total = 0;
    for strategy in ["random", "kmeans", "margin"] {
        let mut teacher = registry
            .build(
                strategy,
                TeacherArgs {
                    config: &cfg,
                    pool: PoolView { ids: &ids, features: &features, feature_count: dim as usize },
                    label_count: 3,
                    rng: ChaCha8Rng::seed_from_u64(1),
                },
            )
            .map_err(|e| e.to_string())?;
        for instance in 0..CONTRACT_INSTANCES {
            let keep = rng.gen_range(0.05..1.0);
            let pool: Vec<DocId> = ids.iter().copied().filter(|_| rng.gen_bool(keep)).collect();
            if pool.is_empty() {
                continue;
            }
            let step = rng.gen_range(1..=pool.len() + 20);
            let budget = rng.gen_range(step..=step + 200);
            let (pool_before, model_before, features_before) = (pool.clone(), model.clone(), features.clone());
            let predictor = PoolPredictor::new(&model, &features);
            let mut stream = ChaCha8Rng::seed_from_u64(instance as u64);
            let mut ctx = ProposeContext::clamped(&pool, step, budget, &predictor, &mut stream);
            let want = ctx.actual_step_size;
            let got = teacher.propose(&mut ctx).map_err(|e| format!("{strategy} #{instance}: {e}"))?;
            let mut sorted = got.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let fail = |what: &str| Err(format!("{strategy} #{instance}: {what}"));
            if sorted.len() != got.len() {
                return fail("duplicate ids");
            }
            if !got.iter().all(|id| pool.contains(id)) {
                return fail("id outside the pool");
            }
            if got.len() != want || want != step.min(pool.len()) {
                return fail("length differs from the clamped step size");
            }
            if pool != pool_before || model != model_before || features != features_before {
                return fail("inputs mutated");
            }
            total += 1;
        }
    }
    Ok(format!("{total} proposals satisfy the contract across 3 strategies"))
}

fn main() {
    let registry = StrategyRegistry::with_builtin();
    let ws = Workspace::new();
    let trend = trend_runs(&ws);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("determinism", Box::new(|| criterion_determinism(&ws, &trend))),
        ("aggregation", Box::new(|| criterion_aggregation(&ws, &trend))),
        ("margin oracle", Box::new(|| criterion_margin(&registry))),
        ("k-means", Box::new(criterion_kmeans)),
        ("macro-F1", Box::new(criterion_macro_f1)),
        ("gradient check", Box::new(criterion_gradient)),
        ("resume and cache", Box::new(|| criterion_resume(&ws))),
        ("AL trend", Box::new(|| criterion_trend(&trend))),
        ("strategy contract", Box::new(|| criterion_contract(&registry))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
