//! Cross-seed aggregation of learning curves.

use serde::{Deserialize, Serialize};

use crate::curve::{write_rows, LearningCurve, POINT_METRICS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Sample standard deviation; 0 for a single contributor.
    pub std: f64,
}

impl MetricStats {
    /// Statistics of `values` (non-empty), summed in input order.
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "statistics of an empty sample");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, min, max, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatePoint {
    pub step_index: usize,
    pub labeled_count: usize,
    /// Seeds whose curve reaches this step.
    pub contributors: usize,
    /// One entry per name in [`POINT_METRICS`], same order.
    pub metrics: Vec<MetricStats>,
}

impl AggregatePoint {
    pub fn metric(&self, name: &str) -> Option<&MetricStats> {
        POINT_METRICS.iter().position(|m| *m == name).and_then(|i| self.metrics.get(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedCurve {
    pub teacher: String,
    pub seeds: Vec<u64>,
    pub points: Vec<AggregatePoint>,
}

impl AggregatedCurve {
    /// Rows `(step_index, labeled_count, <metric>_{mean,min,max,std}, value)`.
    pub fn to_csv(&self) -> Vec<u8> {
        let rows = self.points.iter().flat_map(|p| {
            POINT_METRICS.iter().zip(&p.metrics).flat_map(move |(m, s)| {
                [("mean", s.mean), ("min", s.min), ("max", s.max), ("std", s.std)]
                    .into_iter()
                    .map(move |(k, v)| (p.step_index, p.labeled_count, format!("{m}_{k}"), v))
            })
        });
        write_rows(rows)
    }
}

/// Aligns curves by labeled count and reduces each step across seeds.
///
/// The longest curve is the reference grid; every other curve must be a
/// prefix of it. Shorter curves contribute only where they are defined.
pub fn aggregate_seed_runs(teacher: &str, curves: &[LearningCurve]) -> Result<AggregatedCurve> {
    let reference = curves
        .iter()
        .max_by_key(|c| c.points.len())
        .ok_or(Error::EmptyAggregate)?;
    if reference.points.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let grid = reference.labeled_counts();
    let offending: Vec<u64> = curves
        .iter()
        .filter(|c| c.labeled_counts() != grid[..c.points.len()])
        .map(|c| c.seed)
        .collect();
    if !offending.is_empty() {
        return Err(Error::Alignment { seeds: offending });
    }

    let points = grid
        .iter()
        .enumerate()
        .map(|(step, &labeled_count)| {
            let present: Vec<_> = curves.iter().filter_map(|c| c.points.get(step)).collect();
            let metrics = (0..POINT_METRICS.len())
                .map(|m| {
                    let values: Vec<f64> = present.iter().map(|p| p.metrics()[m].1).collect();
                    MetricStats::of(&values)
                })
                .collect();
            AggregatePoint {
                step_index: step,
                labeled_count,
                contributors: present.len(),
                metrics,
            }
        })
        .collect();
    Ok(AggregatedCurve {
        teacher: teacher.to_string(),
        seeds: curves.iter().map(|c| c.seed).collect(),
        points,
    })
}
