use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::plan::SweepPlan;
use super::sweep::SweepResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStatus {
    pub q: f64,
    #[serde(with = "crate::model::temperature_serde")]
    pub temperature: f64,
    /// Samples aggregated at each size, ascending.
    pub n_samples: Vec<usize>,
    pub ok: bool,
    pub errors: Vec<String>,
}

/// Everything needed to reproduce a run with the same build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub code_version: String,
    pub plan: SweepPlan,
    /// Chain `c` of every point draws from stream `c` of a ChaCha8
    /// generator keyed by the master seed (per-size derived keys in
    /// independent mode).
    pub seed_scheme: String,
    pub master_seed: u64,
    pub chains_per_point: usize,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub points: Vec<PointStatus>,
}

impl RunManifest {
    pub(super) fn new(res: &SweepResult) -> Self {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        let started = now.saturating_sub(res.elapsed);
        Self {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            plan: res.plan.clone(),
            seed_scheme: "chacha8(master_seed).stream(chain_index)".to_string(),
            master_seed: res.plan.master_seed,
            chains_per_point: res.plan.ensemble.chains(),
            threads: res.threads,
            started_unix: started.as_secs(),
            wall_clock_seconds: res.elapsed.as_secs_f64(),
            points: res
                .points
                .iter()
                .map(|p| PointStatus {
                    q: p.params.q,
                    temperature: p.params.temperature,
                    n_samples: p.stats.iter().map(|s| s.n_samples).collect(),
                    ok: !p.failed(),
                    errors: p.failures.clone(),
                })
                .collect(),
        }
    }

    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| !p.ok).count()
    }
}
