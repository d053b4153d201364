//! Run tracking: the file-based store, cross-seed aggregation and exports.

mod aggregate;
mod export;
mod store;

pub use aggregate::{aggregate_seed_runs, AggregatePoint, AggregatedCurve, MetricStats};
pub use export::render_overlay_svg;
pub use store::{ArtifactRef, RunRecord, RunStatus, RunStore};
