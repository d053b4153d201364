use serde::{Deserialize, Serialize};

use super::LinearModel;
use crate::featurize::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    Dev,
    Test,
}

impl EvalSplit {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalSplit::Dev => "dev",
            EvalSplit::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub split: EvalSplit,
    pub labeled_count: usize,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub per_label: Vec<LabelScores>,
}

/// Per-label scores from a confusion matrix (`matrix[gold][predicted]`),
/// with 0/0 taken as 0. Returns the scores, macro-F1 over every label, and
/// accuracy.
pub fn scores_from_confusion(matrix: &[Vec<u64>]) -> (Vec<LabelScores>, f64, f64) {
    let n = matrix.len();
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mut per_label = Vec::with_capacity(n);
    for c in 0..n {
        let tp = matrix[c][c];
        let predicted: u64 = matrix.iter().map(|row| row[c]).sum();
        let actual: u64 = matrix[c].iter().sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_label.push(LabelScores {
            precision,
            recall,
            f1,
            support: actual,
        });
    }
    let macro_f1 = if n == 0 {
        0.0
    } else {
        per_label.iter().map(|s| s.f1).sum::<f64>() / n as f64
    };
    let total: u64 = matrix.iter().flatten().sum();
    let correct: u64 = (0..n).map(|c| matrix[c][c]).sum();
    (per_label, macro_f1, ratio(correct, total))
}

pub fn confusion_matrix(model: &LinearModel, docs: &[(&SparseVector, u32)]) -> Vec<Vec<u64>> {
    let n = model.label_count();
    let mut m = vec![vec![0u64; n]; n];
    for (x, gold) in docs {
        m[*gold as usize][model.predict(x) as usize] += 1;
    }
    m
}

/// Scores `model` on a split. Macro-F1 averages over all of the model's
/// labels, including labels absent from the split.
pub fn evaluate(
    model: &LinearModel,
    docs: &[(&SparseVector, u32)],
    split: EvalSplit,
    labeled_count: usize,
) -> EvaluationReport {
    let (per_label, macro_f1, accuracy) = scores_from_confusion(&confusion_matrix(model, docs));
    EvaluationReport {
        split,
        labeled_count,
        macro_f1,
        accuracy,
        per_label,
    }
}
