//! Query strategies ("teachers").
//!
//! A teacher sees the unlabeled ids, the clamped step size and budget, a
//! prediction-only handle on the current model and its own random stream, and
//! returns the ids to annotate next. Teachers are built by name through a
//! [`StrategyRegistry`]; the same registry serves cold-start selection.

mod kmeans;
mod margin;
mod random;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use kmeans::{fit_kmeans, KMeansFit, KMeansTeacher, MAX_LLOYD_ITERATIONS};
pub use margin::{margin_score, MarginTeacher};
pub use random::RandomTeacher;

use crate::config::ExperimentConfig;
use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::featurize::SparseVector;
use crate::trainer::{EvaluationReport, Predictor};

/// Inputs of one propose step.
pub struct ProposeContext<'a> {
    pub potential_ids: &'a [DocId],
    pub actual_step_size: usize,
    pub actual_budget: usize,
    pub predictor: &'a dyn Predictor,
    pub rng: &'a mut ChaCha8Rng,
}

impl<'a> ProposeContext<'a> {
    /// Clamps step size and budget to the remaining pool, keeping
    /// `step <= budget <= |potential_ids|`.
    pub fn clamped(
        potential_ids: &'a [DocId],
        step_size: usize,
        budget: usize,
        predictor: &'a dyn Predictor,
        rng: &'a mut ChaCha8Rng,
    ) -> Self {
        let remaining = potential_ids.len();
        let actual_budget = budget.max(step_size).min(remaining);
        let actual_step_size = step_size.min(actual_budget);
        Self {
            potential_ids,
            actual_step_size,
            actual_budget,
            predictor,
            rng,
        }
    }
}

pub trait Teacher {
    fn name(&self) -> &str;

    fn propose(&mut self, ctx: &mut ProposeContext<'_>) -> Result<Vec<DocId>>;

    /// Called once after the cold-start training with its dev report.
    fn after_initial_train(&mut self, _dev: &EvaluationReport) {}

    /// Called after every propose-step training with its dev report.
    fn after_train(&mut self, _dev: &EvaluationReport) {}
}

/// The featurized train pool; `features[i]` belongs to `ids[i]`.
#[derive(Clone, Copy)]
pub struct PoolView<'a> {
    pub ids: &'a [DocId],
    pub features: &'a [SparseVector],
    pub feature_count: usize,
}

impl PoolView<'_> {
    pub fn features_of(&self, id: DocId) -> Option<&SparseVector> {
        let i = usize::try_from(id).ok()?;
        (self.ids.get(i) == Some(&id)).then(|| &self.features[i])
    }
}

/// Everything a strategy constructor may use.
pub struct TeacherArgs<'a> {
    pub config: &'a ExperimentConfig,
    pub pool: PoolView<'a>,
    pub label_count: usize,
    /// Stream reserved for construction-time randomness (e.g. clustering).
    pub rng: ChaCha8Rng,
}

pub type TeacherConstructor =
    Arc<dyn Fn(TeacherArgs<'_>) -> Result<Box<dyn Teacher>> + Send + Sync>;

#[derive(Clone)]
pub struct StrategyRegistry {
    constructors: BTreeMap<String, TeacherConstructor>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            constructors: BTreeMap::new(),
        }
    }

    /// Registry with `random`, `kmeans` and `margin`.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register("random", |_args| Ok(Box::new(RandomTeacher) as Box<dyn Teacher>));
        r.register("kmeans", |args| {
            let k = args.config.teacher.k.unwrap_or(args.label_count);
            Ok(Box::new(KMeansTeacher::fit(args.pool, k, args.rng)?) as Box<dyn Teacher>)
        });
        r.register("margin", |_args| Ok(Box::new(MarginTeacher) as Box<dyn Teacher>));
        r
    }

    pub fn register<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(TeacherArgs<'_>) -> Result<Box<dyn Teacher>> + Send + Sync + 'static,
    {
        self.constructors.insert(name.to_string(), Arc::new(ctor));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.constructors.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.constructors.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, args: TeacherArgs<'_>) -> Result<Box<dyn Teacher>> {
        let ctor = self
            .constructors
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))?;
        ctor(args)
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

/// Uniform sample of `k` ids without replacement, returned in draw order
/// (partial Fisher-Yates).
pub fn sample_without_replacement(ids: &[DocId], k: usize, rng: &mut ChaCha8Rng) -> Vec<DocId> {
    let mut pool = ids.to_vec();
    let k = k.min(pool.len());
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
