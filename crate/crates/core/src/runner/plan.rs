use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::{ProbeKind, DEFAULT_DELTA_M};

/// `batches x chains_per_batch` independent chains per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ensemble {
    pub batches: usize,
    pub chains_per_batch: usize,
}

impl Ensemble {
    /// 80 x 80 chains.
    pub const PAPER: Ensemble = Ensemble { batches: 80, chains_per_batch: 80 };
    /// 10 x 32 chains, enough for quick checks.
    pub const DESK: Ensemble = Ensemble { batches: 10, chains_per_batch: 32 };

    pub fn chains(&self) -> usize {
        self.batches * self.chains_per_batch
    }
}

impl Default for Ensemble {
    fn default() -> Self {
        Self::PAPER
    }
}

/// How the lengths of the size axis are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// One growth trajectory per chain, snapshotted at every size.
    #[default]
    Snapshots,
    /// A separate trajectory per chain and size.
    Independent,
}

/// Positions `(anchor, anchor + offset)` inside one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WithinSentenceProbe {
    /// Defaults to `floor(N / 2)`.
    pub anchor: Option<usize>,
    /// Defaults to the powers of two that fit inside the sentence.
    pub offsets: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub within_sentence: Option<WithinSentenceProbe>,
    /// Adds the pair `(0, floor(N/4) - 1)` at every size.
    pub growth_pair: bool,
}

impl ProbeConfig {
    pub fn all() -> Self {
        Self { within_sentence: Some(WithinSentenceProbe::default()), growth_pair: true }
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Position pairs to measure in a sentence of length `n`.
    pub fn pairs(&self, n: usize) -> Vec<(ProbeKind, usize, usize)> {
        let mut out = Vec::new();
        if let Some(w) = &self.within_sentence {
            let anchor = w.anchor.unwrap_or(n / 2);
            let offsets: Vec<usize> = match &w.offsets {
                Some(o) => o.clone(),
                None => std::iter::successors(Some(1usize), |d| d.checked_mul(2))
                    .take_while(|d| anchor + d < n)
                    .collect(),
            };
            for d in offsets {
                if anchor + d < n {
                    out.push((ProbeKind::WithinSentence, anchor, anchor + d));
                }
            }
        }
        if self.growth_pair && n >= 4 {
            out.push((ProbeKind::GrowthPair, 0, n / 4 - 1));
        }
        out
    }
}

fn default_delta_m() -> f64 {
    DEFAULT_DELTA_M
}

fn default_true() -> bool {
    true
}

/// A grid of `q x temperature` points, each measured at every size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    /// Parameters shared by every point; `q`, `temperature` and
    /// `target_length` are overridden by the axes.
    #[serde(default)]
    pub base: ModelParams,
    #[serde(with = "crate::model::temperature_list")]
    pub temperatures: Vec<f64>,
    pub sizes: Vec<usize>,
    pub q_values: Vec<f64>,
    #[serde(default)]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub mode: SamplingMode,
    /// All probes when absent; a given table lists exactly the probes wanted.
    #[serde(default = "ProbeConfig::all")]
    pub probes: ProbeConfig,
    #[serde(default = "default_delta_m")]
    pub delta_m: f64,
    /// Keep one row per chain and size in `samples.csv`.
    #[serde(default = "default_true")]
    pub keep_samples: bool,
}

impl SweepPlan {
    pub fn new(base: ModelParams, temperatures: Vec<f64>, sizes: Vec<usize>) -> Self {
        let q_values = vec![base.q];
        Self {
            base,
            temperatures,
            sizes,
            q_values,
            ensemble: Ensemble::default(),
            master_seed: 0,
            mode: SamplingMode::default(),
            probes: ProbeConfig::all(),
            delta_m: DEFAULT_DELTA_M,
            keep_samples: true,
        }
    }

    /// Grid points in output order: `q` outer, temperature inner.
    pub fn points(&self) -> Vec<ModelParams> {
        let target = self.sizes.iter().copied().max().unwrap_or(2);
        self.q_values
            .iter()
            .flat_map(|&q| {
                self.temperatures.iter().map(move |&temperature| ModelParams {
                    q,
                    temperature,
                    target_length: target,
                    ..self.base.clone()
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures.is_empty() || self.sizes.is_empty() || self.q_values.is_empty() {
            return Err(Error::invalid("temperature, size and q axes must be nonempty"));
        }
        if self.ensemble.batches < 2 {
            return Err(Error::invalid("at least 2 batches are needed for standard errors"));
        }
        if self.ensemble.chains_per_batch == 0 {
            return Err(Error::invalid("chains_per_batch must be positive"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sizes must be strictly ascending"));
        }
        if self.sizes[0] < 2 {
            return Err(Error::invalid("sizes must be >= 2"));
        }
        if !(self.delta_m > 0.0) {
            return Err(Error::invalid("delta_m must be positive"));
        }
        if let Some(anchor) = self.probes.within_sentence.as_ref().and_then(|w| w.anchor) {
            if anchor >= self.sizes[0] {
                return Err(Error::invalid(format!(
                    "probe anchor {anchor} does not fit the smallest size {}",
                    self.sizes[0]
                )));
            }
        }
        for p in self.points() {
            p.validate()?;
        }
        Ok(())
    }
}
