//! The simulated annotation loop and the experiment pipeline around it.

mod pipeline;
mod seed_run;

pub use pipeline::{
    data_fingerprint, load_aggregate, load_dataset, resume_seed_run, run_experiment, seed_curve_csv,
    seed_run_fingerprint, DataStage, ExperimentOutcome, RunOptions, SeedRunOutcome, AGGREGATE_STEP, CONVERT_STEP,
    LOAD_CONVERTED_STEP, LOAD_RAW_STEP,
};
pub use seed_run::{initial_size, oracle_annotate, run_seed, SeedRunState, SeedSimulation};

use crate::config::TrainerConfig;
use crate::corpus::{DatasetSplit, DocId};
use crate::error::{Error, Result};
use crate::featurize::{SparseVector, Vocabulary};

/// A classification split in TF-IDF form. The vocabulary is fitted on the
/// train texts only.
#[derive(Debug, Clone)]
pub struct FeaturizedCorpus {
    pub vocabulary: Vocabulary,
    pub labels: Vec<String>,
    /// Indexed by train id.
    pub train: Vec<SparseVector>,
    pub train_labels: Vec<u32>,
    pub dev: Vec<(SparseVector, u32)>,
    pub test: Vec<(SparseVector, u32)>,
}

impl FeaturizedCorpus {
    pub fn build(split: &DatasetSplit, trainer: &TrainerConfig) -> Result<Self> {
        split.require_classification()?;
        let vocabulary = Vocabulary::fit(
            split.train.iter().map(|d| d.text.as_str()),
            trainer.ngram_order,
            trainer.vocab_cap,
        )?;
        let gold = |d: &crate::corpus::AnnotatedDocument| {
            d.gold_label()
                .ok_or_else(|| Error::Corpus(format!("document {} has no class label", d.id)))
        };
        let mut train = Vec::with_capacity(split.train.len());
        let mut train_labels = Vec::with_capacity(split.train.len());
        for (i, d) in split.train.iter().enumerate() {
            if d.id != i as DocId {
                return Err(Error::Corpus(format!("train id {} at position {i}", d.id)));
            }
            train.push(vocabulary.tfidf(&d.text));
            train_labels.push(gold(d)?);
        }
        let eval = |docs: &[crate::corpus::AnnotatedDocument]| -> Result<Vec<(SparseVector, u32)>> {
            docs.iter().map(|d| Ok((vocabulary.tfidf(&d.text), gold(d)?))).collect()
        };
        let dev = eval(&split.dev)?;
        let test = eval(&split.test)?;
        Ok(Self {
            labels: split.labels.clone(),
            train,
            train_labels,
            dev,
            test,
            vocabulary,
        })
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_count(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn train_ids(&self) -> Vec<DocId> {
        (0..self.train.len() as DocId).collect()
    }

    pub fn train_label(&self, id: DocId) -> Option<u32> {
        self.train_labels.get(usize::try_from(id).ok()?).copied()
    }

    pub fn dev_pairs(&self) -> Vec<(&SparseVector, u32)> {
        self.dev.iter().map(|(x, y)| (x, *y)).collect()
    }

    pub fn test_pairs(&self) -> Vec<(&SparseVector, u32)> {
        self.test.iter().map(|(x, y)| (x, *y)).collect()
    }
}
