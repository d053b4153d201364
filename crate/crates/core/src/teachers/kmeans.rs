//! Exploration teacher: k-means over TF-IDF vectors, proposing the unlabeled
//! documents farthest (euclidean) from their own cluster center.
//!
//! The clustering is fitted once on the whole train pool. Documents are ranked
//! globally by distance, so a cluster with a large spread can dominate the
//! proposals; distances are not normalized per cluster.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{PoolView, ProposeContext, Teacher};
use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::featurize::SparseVector;

pub const MAX_LLOYD_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centers: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after seeding, then after each Lloyd
    /// iteration.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn objective(&self) -> f64 {
        *self.objective_history.last().unwrap_or(&0.0)
    }
}

fn norm_sq(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum()
}

fn nearest(x: &SparseVector, centers: &[Vec<f64>], norms: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = x.squared_distance_dense(c, norms[j]);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn objective(vectors: &[SparseVector], centers: &[Vec<f64>], assignments: &[usize]) -> f64 {
    let norms: Vec<f64> = centers.iter().map(|c| norm_sq(c)).collect();
    vectors
        .iter()
        .zip(assignments)
        .map(|(x, &a)| x.squared_distance_dense(&centers[a], norms[a]))
        .sum()
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or [`MAX_LLOYD_ITERATIONS`] is reached. Empty clusters keep their
/// previous center; distance ties go to the lower center index.
pub fn fit_kmeans(vectors: &[SparseVector], k: usize, dim: usize, rng: &mut ChaCha8Rng) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::validation("teacher.k", "must be at least 1"));
    }
    if vectors.len() < k {
        return Err(Error::Strategy(format!(
            "k-means needs at least k={k} points, got {}",
            vectors.len()
        )));
    }
    let dim = vectors
        .iter()
        .filter_map(|v| v.max_index())
        .map(|i| i as usize + 1)
        .max()
        .unwrap_or(0)
        .max(dim);
    let densify = |x: &SparseVector| {
        let mut c = vec![0.0; dim];
        for &(i, w) in x.entries() {
            c[i as usize] = w;
        }
        c
    };

    // k-means++ seeding
    let mut centers = vec![densify(&vectors[rng.gen_range(0..vectors.len())])];
    let mut d2: Vec<f64> = {
        let n = norm_sq(&centers[0]);
        vectors.iter().map(|x| x.squared_distance_dense(&centers[0], n)).collect()
    };
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.gen_range(0..vectors.len())
        };
        let c = densify(&vectors[pick]);
        let n = norm_sq(&c);
        for (x, d) in vectors.iter().zip(d2.iter_mut()) {
            *d = d.min(x.squared_distance_dense(&c, n));
        }
        centers.push(c);
    }

    let mut assignments = vec![usize::MAX; vectors.len()];
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let norms: Vec<f64> = centers.iter().map(|c| norm_sq(c)).collect();
        let next: Vec<usize> = vectors.iter().map(|x| nearest(x, &centers, &norms).0).collect();
        if history.is_empty() {
            history.push(objective(vectors, &centers, &next));
        }
        if next == assignments {
            break;
        }
        assignments = next;
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in vectors.iter().zip(&assignments) {
            counts[a] += 1;
            for &(i, w) in x.entries() {
                sums[a][i as usize] += w;
            }
        }
        for (j, (sum, count)) in sums.into_iter().zip(counts).enumerate() {
            if count > 0 {
                let inv = count as f64;
                centers[j] = sum.into_iter().map(|s| s / inv).collect();
            }
        }
        history.push(objective(vectors, &centers, &assignments));
    }

    Ok(KMeansFit {
        centers,
        assignments,
        objective_history: history,
        iterations,
    })
}

pub struct KMeansTeacher {
    /// Distance of each pool document to its own center, indexed by id.
    distances: Vec<f64>,
    fit: KMeansFit,
}

impl KMeansTeacher {
    pub fn fit(pool: PoolView<'_>, k: usize, mut rng: ChaCha8Rng) -> Result<Self> {
        let fit = fit_kmeans(pool.features, k, pool.feature_count, &mut rng)?;
        let norms: Vec<f64> = fit.centers.iter().map(|c| norm_sq(c)).collect();
        let distances = pool
            .features
            .iter()
            .zip(&fit.assignments)
            .map(|(x, &a)| x.squared_distance_dense(&fit.centers[a], norms[a]).sqrt())
            .collect();
        Ok(Self { distances, fit })
    }

    pub fn clustering(&self) -> &KMeansFit {
        &self.fit
    }

    pub fn distance(&self, id: DocId) -> Option<f64> {
        self.distances.get(usize::try_from(id).ok()?).copied()
    }
}

impl Teacher for KMeansTeacher {
    fn name(&self) -> &str {
        "kmeans"
    }

    fn propose(&mut self, ctx: &mut ProposeContext<'_>) -> Result<Vec<DocId>> {
        let mut ranked: Vec<(f64, DocId)> = ctx
            .potential_ids
            .iter()
            .map(|&id| self.distance(id).map(|d| (d, id)).ok_or(Error::UnknownId(id)))
            .collect::<Result<_>>()?;
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(ranked
            .into_iter()
            .take(ctx.actual_step_size)
            .map(|(_, id)| id)
            .collect())
    }
}
