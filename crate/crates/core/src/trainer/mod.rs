//! Online softmax-regression trainer and the read-only predictor handed to
//! teachers.

mod checkpoint;
mod metrics;
mod model;

pub use checkpoint::Checkpoint;
pub use metrics::{confusion_matrix, evaluate, scores_from_confusion, EvalSplit, EvaluationReport, LabelScores};
pub use model::{softmax, train_online, Gradient, LinearModel, Sample, TrainParams};

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::featurize::SparseVector;

/// Prediction-only view of the current model. Teachers get this, never the
/// trainer itself.
pub trait Predictor {
    fn label_count(&self) -> usize;

    /// Class probabilities for each train-pool id, in input order.
    fn predict_proba(&self, ids: &[DocId]) -> Result<Vec<Vec<f64>>>;
}

/// Predictor over the featurized train pool (`features[id]`).
pub struct PoolPredictor<'a> {
    model: &'a LinearModel,
    features: &'a [SparseVector],
}

impl<'a> PoolPredictor<'a> {
    pub fn new(model: &'a LinearModel, features: &'a [SparseVector]) -> Self {
        Self { model, features }
    }
}

impl Predictor for PoolPredictor<'_> {
    fn label_count(&self) -> usize {
        self.model.label_count()
    }

    fn predict_proba(&self, ids: &[DocId]) -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|&id| {
                let x = usize::try_from(id)
                    .ok()
                    .and_then(|i| self.features.get(i))
                    .ok_or(Error::UnknownId(id))?;
                Ok(self.model.predict_proba(x))
            })
            .collect()
    }
}
