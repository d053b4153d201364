//! Learning curves and their CSV form (`step_index,labeled_count,metric,value`).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::EvaluationReport;

pub const CSV_HEADER: [&str; 4] = ["step_index", "labeled_count", "metric", "value"];

/// Metric names emitted per curve point, in CSV order.
pub const POINT_METRICS: [&str; 4] = ["dev_macro_f1", "test_macro_f1", "dev_accuracy", "test_accuracy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// 0 is the cold-start training.
    pub step_index: usize,
    pub labeled_count: usize,
    pub dev: EvaluationReport,
    pub test: EvaluationReport,
}

impl CurvePoint {
    pub fn metrics(&self) -> [(&'static str, f64); 4] {
        [
            (POINT_METRICS[0], self.dev.macro_f1),
            (POINT_METRICS[1], self.test.macro_f1),
            (POINT_METRICS[2], self.dev.accuracy),
            (POINT_METRICS[3], self.test.accuracy),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub seed: u64,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn labeled_counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.labeled_count).collect()
    }

    /// First labeled count whose test macro-F1 reaches `threshold`.
    pub fn labeled_count_reaching(&self, threshold: f64) -> Option<usize> {
        self.points
            .iter()
            .find(|p| p.test.macro_f1 >= threshold)
            .map(|p| p.labeled_count)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let rows = self.points.iter().flat_map(|p| {
            p.metrics()
                .into_iter()
                .map(move |(m, v)| (p.step_index, p.labeled_count, m.to_string(), v))
        });
        write_rows(rows)
    }
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub step_index: usize,
    pub labeled_count: usize,
    pub metric: String,
    pub value: f64,
}

pub(crate) fn write_rows(rows: impl IntoIterator<Item = (usize, usize, String, f64)>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for (step, count, metric, value) in rows {
        w.write_record([step.to_string(), count.to_string(), metric, value.to_string()])
            .expect("in-memory write");
    }
    w.flush().expect("in-memory flush");
    w.into_inner().expect("in-memory writer")
}

pub fn read_csv(bytes: &[u8]) -> Result<Vec<CsvRow>> {
    let bad = |m: String| Error::CorruptArtifact {
        name: "curve csv".into(),
        message: m,
    };
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad("short row".into()));
        out.push(CsvRow {
            step_index: field(0)?.parse().map_err(|_| bad("step_index".into()))?,
            labeled_count: field(1)?.parse().map_err(|_| bad("labeled_count".into()))?,
            metric: field(2)?.to_string(),
            value: field(3)?.parse().map_err(|_| bad("value".into()))?,
        });
    }
    Ok(out)
}

pub fn write_csv_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
