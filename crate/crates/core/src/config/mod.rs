//! Experiment configuration: parsing, fragment includes, `--set` overrides,
//! validation and fingerprinting.
//!
//! Configs are TOML files with five sections (`data`, `experiment`,
//! `teacher`, `trainer`, `tracking`). A file may pull in fragments through a
//! top-level `include = ["base.toml", ...]` list; values in the including file
//! win over its fragments, and later fragments win over earlier ones.

mod canonical;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use canonical::{canonical_json, digest_hex, render_canonical};

/// Maximum nesting of `include` chains.
pub const MAX_INCLUDE_DEPTH: usize = 4;

/// The only tracking metric implemented so far.
pub const MACRO_F1: &str = "macro_f1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub experiment: ExperimentSettings,
    pub teacher: TeacherConfig,
    #[serde(default)]
    pub trainer: TrainerConfig,
    pub tracking: TrackingConfig,
    /// Directory relative paths in the config are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl PartialEq for ExperimentConfig {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
            && self.experiment == other.experiment
            && self.teacher == other.teacher
            && self.trainer == other.trainer
            && self.tracking == other.tracking
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Directory holding the raw JSONL split files.
    pub source: PathBuf,
    #[serde(default = "default_text_field")]
    pub text_field: String,
    #[serde(default = "default_label_field")]
    pub label_field: String,
    #[serde(default = "default_train_file")]
    pub train_file: String,
    #[serde(default = "default_dev_file")]
    pub dev_file: String,
    #[serde(default = "default_test_file")]
    pub test_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSettings {
    /// Documents proposed per step.
    pub step_size: usize,
    /// Fraction of the train pool used for the cold-start training set.
    #[serde(default = "default_initial_ratio")]
    pub initial_ratio: f64,
    /// Maximum documents a teacher may score per step.
    pub budget: usize,
    #[serde(default = "default_tracking_metric")]
    pub tracking_metric: String,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherConfig {
    pub strategy: String,
    /// Cluster count for the k-means teacher; defaults to the label count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Strategy used to pick the cold-start training set.
    #[serde(default = "default_initial_strategy")]
    pub initial_strategy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerConfig {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs_per_step: usize,
    #[serde(default = "default_l2")]
    pub l2_penalty: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_ngram_order")]
    pub ngram_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_cap: Option<usize>,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            learning_rate: default_learning_rate(),
            epochs_per_step: default_epochs(),
            l2_penalty: default_l2(),
            batch_size: default_batch_size(),
            ngram_order: default_ngram_order(),
            vocab_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingConfig {
    #[serde(default = "default_store")]
    pub store: PathBuf,
    #[serde(default = "default_worker_count")]
    pub worker_count: usize,
    /// Free-form code revision recorded with every run.
    pub revision: String,
}

fn default_text_field() -> String {
    "text".into()
}
fn default_label_field() -> String {
    "label".into()
}
fn default_train_file() -> String {
    "train.jsonl".into()
}
fn default_dev_file() -> String {
    "dev.jsonl".into()
}
fn default_test_file() -> String {
    "test.jsonl".into()
}
fn default_initial_ratio() -> f64 {
    0.05
}
fn default_tracking_metric() -> String {
    MACRO_F1.into()
}
fn default_initial_strategy() -> String {
    "random".into()
}
fn default_learning_rate() -> f64 {
    0.5
}
fn default_epochs() -> usize {
    5
}
fn default_l2() -> f64 {
    1e-4
}
fn default_batch_size() -> usize {
    16
}
fn default_ngram_order() -> usize {
    1
}
fn default_store() -> PathBuf {
    PathBuf::from("runs")
}
fn default_worker_count() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.step_size < 1 {
            return Err(Error::validation("experiment.step_size", "must be at least 1"));
        }
        if e.budget < e.step_size {
            return Err(Error::validation(
                "experiment.budget",
                format!("must be at least step_size ({})", e.step_size),
            ));
        }
        if !(e.initial_ratio.is_finite() && (0.0..1.0).contains(&e.initial_ratio)) {
            return Err(Error::validation("experiment.initial_ratio", "must lie in [0, 1)"));
        }
        if e.tracking_metric != MACRO_F1 {
            return Err(Error::validation(
                "experiment.tracking_metric",
                format!("unsupported metric `{}` (supported: {MACRO_F1})", e.tracking_metric),
            ));
        }
        if e.seeds.is_empty() {
            return Err(Error::validation("experiment.seeds", "at least one seed is required"));
        }
        let mut sorted = e.seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(
                "experiment.seeds",
                format!("seed {} listed twice", w[0]),
            ));
        }
        if e.max_steps == Some(0) {
            return Err(Error::validation("experiment.max_steps", "must be at least 1 when set"));
        }
        if let Some(t) = e.stop_threshold {
            if !t.is_finite() {
                return Err(Error::validation("experiment.stop_threshold", "must be finite"));
            }
        }

        if self.teacher.strategy.trim().is_empty() {
            return Err(Error::validation("teacher.strategy", "must not be empty"));
        }
        if self.teacher.initial_strategy.trim().is_empty() {
            return Err(Error::validation("teacher.initial_strategy", "must not be empty"));
        }
        if self.teacher.k == Some(0) {
            return Err(Error::validation("teacher.k", "must be at least 1"));
        }

        let t = &self.trainer;
        if !(t.learning_rate.is_finite() && t.learning_rate > 0.0) {
            return Err(Error::validation("trainer.learning_rate", "must be positive and finite"));
        }
        if t.epochs_per_step < 1 {
            return Err(Error::validation("trainer.epochs_per_step", "must be at least 1"));
        }
        if !(t.l2_penalty.is_finite() && t.l2_penalty >= 0.0) {
            return Err(Error::validation("trainer.l2_penalty", "must be non-negative and finite"));
        }
        if t.batch_size < 1 {
            return Err(Error::validation("trainer.batch_size", "must be at least 1"));
        }
        if !(1..=3).contains(&t.ngram_order) {
            return Err(Error::validation("trainer.ngram_order", "must be 1, 2 or 3"));
        }
        if t.vocab_cap == Some(0) {
            return Err(Error::validation("trainer.vocab_cap", "must be at least 1 when set"));
        }

        if self.tracking.worker_count < 1 {
            return Err(Error::validation("tracking.worker_count", "must be at least 1"));
        }
        if self.tracking.revision.trim().is_empty() {
            return Err(Error::validation("tracking.revision", "must not be empty"));
        }
        Ok(())
    }

    /// `data.source` resolved against the config file's directory.
    pub fn source_dir(&self) -> PathBuf {
        resolve(&self.base_dir, &self.data.source)
    }

    /// `tracking.store` resolved against the config file's directory.
    pub fn store_dir(&self) -> PathBuf {
        resolve(&self.base_dir, &self.tracking.store)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes to TOML")
    }

    /// A copy with one `key.path=value` override applied and revalidated.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let mut value = toml::Value::try_from(self).expect("config always serializes to TOML");
        apply_override(&mut value, assignment)?;
        build(value, self.base_dir.clone())
    }

    /// Parses config text that has no includes (e.g. a reserialized config).
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<string>"),
            message: e.to_string(),
        })?;
        build(toml::Value::Table(value), base_dir.into())
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config_with_overrides(path, &[])
}

/// Loads `path` (following includes), applies `key.path=value` overrides and
/// validates the result.
pub fn parse_config_with_overrides(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut merged = load_with_includes(path, 0)?;
    for o in overrides {
        apply_override(&mut merged, o)?;
    }
    let base_dir = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    build(merged, base_dir)
}

fn build(value: toml::Value, base_dir: PathBuf) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = value.try_into().map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        Error::validation(field_from_message(&message), message)
    })?;
    cfg.base_dir = base_dir;
    cfg.validate()?;
    Ok(cfg)
}

fn field_from_message(message: &str) -> String {
    // serde messages name the field in backticks: "unknown field `foo`, expected ..."
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "config".to_string())
}

fn load_with_includes(path: &Path, depth: usize) -> Result<toml::Value> {
    if depth > MAX_INCLUDE_DEPTH {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("include depth exceeds {MAX_INCLUDE_DEPTH}"),
        });
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;

    let includes = match table.remove("include") {
        None => Vec::new(),
        Some(toml::Value::String(s)) => vec![s],
        Some(toml::Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s),
                other => Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("include entries must be strings, found {}", other.type_str()),
                }),
            })
            .collect::<Result<_>>()?,
        Some(other) => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("`include` must be a string or list, found {}", other.type_str()),
            })
        }
    };

    let dir = path.parent().unwrap_or(Path::new("."));
    let mut merged = toml::Value::Table(toml::Table::new());
    for inc in includes {
        let fragment = load_with_includes(&dir.join(inc), depth + 1)?;
        merge(&mut merged, fragment);
    }
    merge(&mut merged, toml::Value::Table(table));
    Ok(merged)
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(existing) if existing.is_table() && v.is_table() => merge(existing, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Applies one `section.key=value` override. The value is read as a TOML
/// literal when possible (`1000`, `0.1`, `[1, 2]`, `true`) and as a bare
/// string otherwise.
pub fn apply_override(root: &mut toml::Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::validation(assignment, "override must have the form key.path=value")
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if key.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::validation(key, "empty key segment in override"));
    }
    let value = parse_literal(raw);

    let mut cursor = root;
    for part in &parts[..parts.len() - 1] {
        let table = cursor
            .as_table_mut()
            .ok_or_else(|| Error::validation(key, "override path crosses a non-table value"))?;
        cursor = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| Error::validation(key, "override path crosses a non-table value"))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Config sections, used to scope fingerprints to what a pipeline step reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Data,
    Experiment,
    Teacher,
    Trainer,
    Tracking,
}

impl Section {
    pub fn key(self) -> &'static str {
        match self {
            Section::Data => "data",
            Section::Experiment => "experiment",
            Section::Teacher => "teacher",
            Section::Trainer => "trainer",
            Section::Tracking => "tracking",
        }
    }
}

/// JSON view of the chosen sections, before canonical rendering.
pub fn sections_value(cfg: &ExperimentConfig, sections: &[Section]) -> serde_json::Value {
    let full = serde_json::to_value(cfg).expect("config serializes to JSON");
    let mut out = serde_json::Map::new();
    if let serde_json::Value::Object(map) = full {
        for s in sections {
            if let Some(v) = map.get(s.key()) {
                out.insert(s.key().to_string(), v.clone());
            }
        }
    }
    serde_json::Value::Object(out)
}

/// Digest over every section except `tracking`.
pub fn config_fingerprint(cfg: &ExperimentConfig) -> String {
    digest_hex(&canonical_json(&sections_value(
        cfg,
        &[Section::Data, Section::Experiment, Section::Teacher, Section::Trainer],
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    const BASE: &str = r#"
[data]
source = "raw"

[experiment]
step_size = 1000
budget = 5000
initial_ratio = 0.05
seeds = [42, 4711, 768, 4656, 32213]

[teacher]
strategy = "margin"

[tracking]
revision = "r1"
"#;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn with_override_revalidates() {
        let cfg = ExperimentConfig::from_toml_str(BASE, "/base").unwrap();
        let changed = cfg.with_override("experiment.step_size=500").unwrap();
        assert_eq!(changed.experiment.step_size, 500);
        assert_eq!(changed.base_dir, PathBuf::from("/base"));
        assert_ne!(config_fingerprint(&changed), config_fingerprint(&cfg));
        assert!(matches!(cfg.with_override("experiment.step_size=0"), Err(Error::Validation { .. })));
    }

    #[test]
    fn accepts_reference_seeds_and_ratio() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(&write(dir.path(), "c.toml", BASE)).unwrap();
        assert_eq!(cfg.experiment.seeds, vec![42, 4711, 768, 4656, 32213]);
        assert_eq!(cfg.experiment.initial_ratio, 0.05);
        assert_eq!(cfg.trainer, TrainerConfig::default());
        assert_eq!(cfg.teacher.initial_strategy, "random");
    }

    #[test]
    fn zero_step_size_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", BASE);
        let err = parse_config_with_overrides(&p, &["experiment.step_size=0".into()]).unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "experiment.step_size"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", &format!("{BASE}\n[trainer]\nmomentum = 0.9\n"));
        match parse_config(&p).unwrap_err() {
            Error::Validation { field, .. } => assert_eq!(field, "momentum"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", "[data\nsource=");
        assert!(matches!(parse_config(&p), Err(Error::Parse { .. })));
        assert_eq!(parse_config(&p).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn invariant_violations() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", BASE);
        for (o, field) in [
            ("experiment.budget=10", "experiment.budget"),
            ("experiment.initial_ratio=1.0", "experiment.initial_ratio"),
            ("experiment.seeds=[1, 1]", "experiment.seeds"),
            ("experiment.seeds=[]", "experiment.seeds"),
            ("trainer.vocab_cap=0", "trainer.vocab_cap"),
            ("trainer.ngram_order=4", "trainer.ngram_order"),
            ("experiment.tracking_metric=accuracy", "experiment.tracking_metric"),
        ] {
            match parse_config_with_overrides(&p, &[o.to_string()]) {
                Err(Error::Validation { field: f, .. }) => assert_eq!(f, field, "{o}"),
                other => panic!("{o}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn includes_merge_and_local_values_win() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "trainer.toml", "[trainer]\nlearning_rate = 0.1\nepochs_per_step = 3\n");
        let p = write(
            dir.path(),
            "c.toml",
            &format!("include = [\"trainer.toml\"]\n{BASE}\n[trainer]\nepochs_per_step = 7\n"),
        );
        let cfg = parse_config(&p).unwrap();
        assert_eq!(cfg.trainer.learning_rate, 0.1);
        assert_eq!(cfg.trainer.epochs_per_step, 7);
    }

    #[test]
    fn include_depth_is_capped() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..6 {
            write(dir.path(), &format!("f{i}.toml"), &format!("include = \"f{}.toml\"\n", i + 1));
        }
        write(dir.path(), "f6.toml", BASE);
        // f0 -> f1 -> ... -> f6 is six levels of nesting
        assert!(matches!(parse_config(&dir.path().join("f0.toml")), Err(Error::Parse { .. })));
        // f2 -> ... -> f6 is four
        assert!(parse_config(&dir.path().join("f2.toml")).is_ok());
    }

    #[test]
    fn set_override_changes_fingerprint() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", BASE);
        let a = parse_config(&p).unwrap();
        let b = parse_config_with_overrides(&p, &["experiment.step_size=500".into()]).unwrap();
        assert_eq!(b.experiment.step_size, 500);
        assert_ne!(config_fingerprint(&a), config_fingerprint(&b));
    }

    #[test]
    fn tracking_section_does_not_affect_fingerprint() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", BASE);
        let a = parse_config(&p).unwrap();
        let b = parse_config_with_overrides(
            &p,
            &["tracking.worker_count=8".into(), "tracking.revision=other".into()],
        )
        .unwrap();
        assert_eq!(config_fingerprint(&a), config_fingerprint(&b));
    }

    #[test]
    fn reserialized_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.toml", BASE);
        let cfg = parse_config_with_overrides(
            &p,
            &["experiment.stop_threshold=0.85".into(), "teacher.k=3".into()],
        )
        .unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), dir.path()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(config_fingerprint(&cfg), config_fingerprint(&again));
    }

    #[test]
    fn string_override_falls_back_to_bare_string() {
        let mut v = toml::Value::Table(toml::Table::new());
        apply_override(&mut v, "teacher.strategy=kmeans").unwrap();
        apply_override(&mut v, "experiment.step_size=1000").unwrap();
        assert_eq!(v["teacher"]["strategy"].as_str(), Some("kmeans"));
        assert_eq!(v["experiment"]["step_size"].as_integer(), Some(1000));
        assert!(apply_override(&mut v, "novalue").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn serialized_configs_parse_back_equal(
                step in 1usize..5000,
                extra in 0usize..20000,
                ratio in 0.0f64..=1.0,
                lr in 1e-4f64..1.0,
                seeds in prop::collection::vec(any::<u32>(), 1..6),
                threshold in prop::option::of(0.0f64..=1.0),
            ) {
                let seeds = seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ");
                let mut text = format!(
                    "[data]\nsource = \"raw\"\n[experiment]\nstep_size = {step}\nbudget = {}\ninitial_ratio = {ratio:?}\nseeds = [{seeds}]\n",
                    step + extra
                );
                if let Some(t) = threshold {
                    text.push_str(&format!("stop_threshold = {t:?}\n"));
                }
                text.push_str(&format!("[teacher]\nstrategy = \"margin\"\n[trainer]\nlearning_rate = {lr:?}\n[tracking]\nrevision = \"r1\"\n"));
                let cfg = ExperimentConfig::from_toml_str(&text, "/tmp").unwrap();
                let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), "/tmp").unwrap();
                prop_assert_eq!(config_fingerprint(&cfg), config_fingerprint(&again));
                prop_assert_eq!(cfg, again);
            }
        }
    }
}
