use super::{sample_without_replacement, ProposeContext, Teacher};
use crate::corpus::DocId;
use crate::error::{Error, Result};

/// Best-versus-second-best probability margin. For two labels this is
/// `|p0 - p1|`.
pub fn margin_score(probs: &[f64]) -> Result<f64> {
    if probs.len() < 2 {
        return Err(Error::Strategy(format!(
            "margin needs at least 2 labels, got {}",
            probs.len()
        )));
    }
    let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &p in probs {
        if p > best {
            second = best;
            best = p;
        } else if p > second {
            second = p;
        }
    }
    Ok(best - second)
}

/// Exploitation teacher: scores a random sample of `actual_budget` unlabeled
/// documents and proposes those with the smallest margin (ties by id).
#[derive(Debug, Default, Clone, Copy)]
pub struct MarginTeacher;

impl Teacher for MarginTeacher {
    fn name(&self) -> &str {
        "margin"
    }

    fn propose(&mut self, ctx: &mut ProposeContext<'_>) -> Result<Vec<DocId>> {
        let candidates = sample_without_replacement(ctx.potential_ids, ctx.actual_budget, ctx.rng);
        let probs = ctx.predictor.predict_proba(&candidates)?;
        let mut scored: Vec<(f64, DocId)> = candidates
            .iter()
            .zip(&probs)
            .map(|(&id, p)| margin_score(p).map(|m| (m, id)))
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(scored
            .into_iter()
            .take(ctx.actual_step_size)
            .map(|(_, id)| id)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::SparseVector;
    use crate::trainer::{LinearModel, PoolPredictor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn margin_examples() {
        assert!((margin_score(&[0.9, 0.1]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(margin_score(&[0.5, 0.5]).unwrap(), 0.0);
        assert!((margin_score(&[0.2, 0.5, 0.3]).unwrap() - 0.2).abs() < 1e-12);
        assert!(margin_score(&[1.0]).is_err());
        let (p0, p1) = (0.3, 0.7);
        assert_eq!(margin_score(&[p0, p1]).unwrap(), (p0 - p1).abs());
    }

    #[test]
    fn uniform_model_returns_lowest_ids() {
        let feats: Vec<SparseVector> = (0..8).map(|i| SparseVector::from_dense(&[i as f64, 1.0])).collect();
        let model = LinearModel::zeros(3, 2);
        let p = PoolPredictor::new(&model, &feats);
        let ids: Vec<DocId> = vec![7, 2, 5, 3, 6];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut ctx = ProposeContext::clamped(&ids, 3, ids.len(), &p, &mut rng);
        assert_eq!(MarginTeacher.propose(&mut ctx).unwrap(), vec![2, 3, 5]);
    }

    #[test]
    fn large_budget_is_clamped() {
        let feats: Vec<SparseVector> = (0..4).map(|_| SparseVector::default()).collect();
        let model = LinearModel::zeros(2, 1);
        let p = PoolPredictor::new(&model, &feats);
        let ids: Vec<DocId> = (0..4).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ctx = ProposeContext::clamped(&ids, 2, 5000, &p, &mut rng);
        assert_eq!(ctx.actual_budget, 4);
        assert_eq!(MarginTeacher.propose(&mut ctx).unwrap(), vec![0, 1]);
    }
}
