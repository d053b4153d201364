//! One seed run: cold start, then propose / annotate / train / evaluate until
//! the pool is exhausted or a stop condition fires.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FeaturizedCorpus;
use crate::config::ExperimentConfig;
use crate::corpus::{AnnotationState, DocId};
use crate::curve::{CurvePoint, LearningCurve};
use crate::error::{Error, Result};
use crate::rng::{derive_rng, tag};
use crate::teachers::{PoolView, ProposeContext, StrategyRegistry, Teacher, TeacherArgs};
use crate::trainer::{
    evaluate, train_online, Checkpoint, EvalSplit, LinearModel, PoolPredictor, Sample, TrainParams,
};

/// Cold-start size: `ceil(ratio * pool)`, at least one document, at most the
/// pool. Products within 1e-9 of an integer are rounded, so that 0.05 * 2000
/// gives 100 rather than 101.
pub fn initial_size(ratio: f64, pool: usize) -> usize {
    let exact = ratio * pool as f64;
    let nearest = exact.round();
    let n = if (exact - nearest).abs() < 1e-9 { nearest } else { exact.ceil() };
    (n as usize).clamp(1, pool.max(1)).min(pool)
}

/// Perfect annotator: gold label lookup restricted to the train pool.
pub fn oracle_annotate(corpus: &FeaturizedCorpus, ids: &[DocId]) -> Result<Vec<u32>> {
    ids.iter().map(|&id| corpus.train_label(id).ok_or(Error::UnknownId(id))).collect()
}

/// Serializable progress of a seed run. Together with the model checkpoint of
/// the last completed step it determines every later step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRunState {
    pub seed: u64,
    pub fingerprint: String,
    /// Annotated batches in order; batch 0 is the cold-start selection.
    pub batches: Vec<Vec<DocId>>,
    pub points: Vec<CurvePoint>,
    pub finished: bool,
}

impl SeedRunState {
    pub fn curve(&self) -> LearningCurve {
        LearningCurve {
            seed: self.seed,
            points: self.points.clone(),
        }
    }

    /// Labeled ids in annotation order.
    pub fn labeled_order(&self) -> Vec<DocId> {
        self.batches.concat()
    }
}

pub struct SeedSimulation<'a> {
    cfg: &'a ExperimentConfig,
    corpus: &'a FeaturizedCorpus,
    registry: &'a StrategyRegistry,
    teacher: Box<dyn Teacher>,
    annotation: AnnotationState,
    /// Oracle answers by train id.
    answers: Vec<Option<u32>>,
    model: LinearModel,
    /// Stream of the last training, re-derived from the step counter before
    /// each training.
    trainer_rng: ChaCha8Rng,
    state: SeedRunState,
}

impl<'a> SeedSimulation<'a> {
    /// A fresh run; nothing is trained until the first [`Self::advance`].
    pub fn new(
        cfg: &'a ExperimentConfig,
        corpus: &'a FeaturizedCorpus,
        registry: &'a StrategyRegistry,
        fingerprint: &str,
        seed: u64,
    ) -> Result<Self> {
        let teacher = build_teacher(cfg, corpus, registry, &cfg.teacher.strategy, fingerprint, seed, 0)?;
        Ok(Self {
            cfg,
            corpus,
            registry,
            teacher,
            annotation: AnnotationState::new(corpus.train_ids()),
            answers: vec![None; corpus.train.len()],
            model: LinearModel::zeros(corpus.label_count(), corpus.feature_count()),
            trainer_rng: derive_rng(fingerprint, seed, tag::TRAINER, 0),
            state: SeedRunState {
                seed,
                fingerprint: fingerprint.to_string(),
                batches: Vec::new(),
                points: Vec::new(),
                finished: false,
            },
        })
    }

    /// Continues from persisted progress. The teacher is rebuilt from its
    /// construction stream and its hooks are replayed with the stored dev
    /// reports.
    pub fn restore(
        cfg: &'a ExperimentConfig,
        corpus: &'a FeaturizedCorpus,
        registry: &'a StrategyRegistry,
        state: SeedRunState,
        checkpoint: Checkpoint,
    ) -> Result<Self> {
        if state.points.len() != state.batches.len() || state.points.is_empty() {
            return Err(Error::CorruptArtifact {
                name: "state.json".into(),
                message: format!("{} batches but {} points", state.batches.len(), state.points.len()),
            });
        }
        let mut sim = Self::new(cfg, corpus, registry, &state.fingerprint, state.seed)?;
        for batch in &state.batches {
            sim.annotate(batch)?;
        }
        let expected = state.points.len() as u64;
        if checkpoint.model.step_counter() != expected
            || checkpoint.model.label_count() != corpus.label_count()
            || checkpoint.model.feature_count() != corpus.feature_count()
        {
            return Err(Error::CorruptArtifact {
                name: "checkpoint".into(),
                message: format!(
                    "checkpoint after training {} does not match {expected} recorded steps",
                    checkpoint.model.step_counter()
                ),
            });
        }
        for (i, p) in state.points.iter().enumerate() {
            if i == 0 {
                sim.teacher.after_initial_train(&p.dev);
            } else {
                sim.teacher.after_train(&p.dev);
            }
        }
        sim.model = checkpoint.model;
        sim.trainer_rng = checkpoint.rng;
        sim.state = state;
        Ok(sim)
    }

    pub fn seed(&self) -> u64 {
        self.state.seed
    }

    pub fn is_finished(&self) -> bool {
        self.state.finished
    }

    /// Completed steps, counting the cold start.
    pub fn completed_steps(&self) -> usize {
        self.state.points.len()
    }

    pub fn state(&self) -> &SeedRunState {
        &self.state
    }

    pub fn annotation(&self) -> &AnnotationState {
        &self.annotation
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            model: self.model.clone(),
            rng: self.trainer_rng.clone(),
        }
    }

    pub fn into_curve(self) -> LearningCurve {
        self.state.curve()
    }

    /// Runs the next step (the cold start first). Returns the new point, or
    /// `None` when the run had already finished.
    pub fn advance(&mut self) -> Result<Option<&CurvePoint>> {
        if self.state.finished {
            return Ok(None);
        }
        let step_index = self.state.points.len();
        let fp = self.state.fingerprint.clone();
        let seed = self.state.seed;
        let potential = self.annotation.potential_ids();
        let batch = {
            let predictor = PoolPredictor::new(&self.model, &self.corpus.train);
            if step_index == 0 {
                let n = initial_size(self.cfg.experiment.initial_ratio, potential.len());
                let mut initial = build_teacher(
                    self.cfg,
                    self.corpus,
                    self.registry,
                    &self.cfg.teacher.initial_strategy,
                    &fp,
                    seed,
                    1,
                )?;
                let mut rng = derive_rng(&fp, seed, tag::INITIAL, 0);
                let mut ctx =
                    ProposeContext::clamped(&potential, n, self.cfg.experiment.budget, &predictor, &mut rng);
                let want = ctx.actual_step_size;
                let ids = initial.propose(&mut ctx)?;
                check_batch_len(initial.name(), ids.len(), want)?;
                ids
            } else {
                let mut rng = derive_rng(&fp, seed, tag::TEACHER, step_index as u64);
                let mut ctx = ProposeContext::clamped(
                    &potential,
                    self.cfg.experiment.step_size,
                    self.cfg.experiment.budget,
                    &predictor,
                    &mut rng,
                );
                let want = ctx.actual_step_size;
                let ids = self.teacher.propose(&mut ctx)?;
                check_batch_len(self.teacher.name(), ids.len(), want)?;
                ids
            }
        };
        self.annotate(&batch)?;

        let labeled = self.annotation.labeled();
        let samples: Vec<Sample<'_>> = labeled
            .iter()
            .map(|&id| Sample {
                features: &self.corpus.train[id as usize],
                label: self.answers[id as usize].expect("labeled ids have oracle answers"),
            })
            .collect();
        let params = TrainParams::from(&self.cfg.trainer);
        self.trainer_rng = derive_rng(&fp, seed, tag::TRAINER, self.model.step_counter());
        self.model = train_online(&self.model, &samples, &params, &mut self.trainer_rng)?;

        let n = labeled.len();
        let dev = evaluate(&self.model, &self.corpus.dev_pairs(), EvalSplit::Dev, n);
        let test = evaluate(&self.model, &self.corpus.test_pairs(), EvalSplit::Test, n);
        if step_index == 0 {
            self.teacher.after_initial_train(&dev);
        } else {
            self.teacher.after_train(&dev);
        }
        let reached = self.cfg.experiment.stop_threshold.is_some_and(|t| test.macro_f1 >= t);
        let capped = self.cfg.experiment.max_steps.is_some_and(|m| step_index >= m);
        self.state.batches.push(batch);
        self.state.points.push(CurvePoint {
            step_index,
            labeled_count: n,
            dev,
            test,
        });
        self.state.finished = self.annotation.is_exhausted() || reached || capped;
        Ok(self.state.points.last())
    }

    fn annotate(&mut self, batch: &[DocId]) -> Result<()> {
        let labels = oracle_annotate(self.corpus, batch)?;
        self.annotation.mark_labeled(batch)?;
        for (&id, label) in batch.iter().zip(labels) {
            self.answers[id as usize] = Some(label);
        }
        Ok(())
    }

    /// Runs to completion.
    pub fn run_to_end(&mut self) -> Result<()> {
        while self.advance()?.is_some() {}
        Ok(())
    }
}

fn check_batch_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Strategy(format!("`{name}` proposed {got} ids, expected {want}")));
    }
    Ok(())
}

fn build_teacher(
    cfg: &ExperimentConfig,
    corpus: &FeaturizedCorpus,
    registry: &StrategyRegistry,
    name: &str,
    fingerprint: &str,
    seed: u64,
    slot: u64,
) -> Result<Box<dyn Teacher>> {
    let ids = corpus.train_ids();
    registry.build(
        name,
        TeacherArgs {
            config: cfg,
            pool: PoolView {
                ids: &ids,
                features: &corpus.train,
                feature_count: corpus.feature_count(),
            },
            label_count: corpus.label_count(),
            rng: derive_rng(fingerprint, seed, tag::TEACHER_INIT, slot),
        },
    )
}

/// In-memory seed run without persistence.
pub fn run_seed(
    cfg: &ExperimentConfig,
    corpus: &FeaturizedCorpus,
    registry: &StrategyRegistry,
    fingerprint: &str,
    seed: u64,
) -> Result<LearningCurve> {
    let mut sim = SeedSimulation::new(cfg, corpus, registry, fingerprint, seed)?;
    sim.run_to_end()?;
    Ok(sim.into_curve())
}
