//! Parameter sweeps over parallel chain ensembles, batch-means
//! aggregation and result persistence.

mod manifest;
mod output;
mod plan;
mod sweep;

pub use manifest::{PointStatus, RunManifest};
pub use output::{
    read_results, read_samples, write_correlations, write_histograms, write_results,
    write_samples, CorrelationRow, HistogramRow, ResultRow, SampleRow, OBSERVABLES,
};
pub use plan::{Ensemble, ProbeConfig, SamplingMode, SweepPlan, WithinSentenceProbe};
pub use sweep::{run_sweep, PointResult, SweepResult};
