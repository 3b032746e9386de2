use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::manifest::RunManifest;
use super::output;
use super::plan::{SamplingMode, SweepPlan};
use crate::error::{Error, Result};
use crate::grammar::{generate_sentence, ChainRng};
use crate::model::{build_simplex_basis, ModelParams, SimplexBasis};
use crate::observables::{EnsembleStats, ObservableRecord};

/// Aggregated outcome of one `(q, temperature)` grid point.
#[derive(Debug, Clone)]
pub struct PointResult {
    /// Point parameters; `target_length` is the largest size.
    pub params: ModelParams,
    /// One entry per size that aggregated successfully, ascending.
    pub stats: Vec<EnsembleStats>,
    /// Per-chain records, indexed `[size][chain]`, when samples are kept.
    pub records: Vec<Vec<ObservableRecord>>,
    pub failures: Vec<String>,
}

impl PointResult {
    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub points: Vec<PointResult>,
    pub elapsed: Duration,
    pub threads: usize,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Master seed of the trajectory that produces size `n`. Snapshot runs
/// share one trajectory for every size.
fn trajectory_seed(master_seed: u64, mode: SamplingMode, n: usize) -> u64 {
    match mode {
        SamplingMode::Snapshots => master_seed,
        SamplingMode::Independent => splitmix64(master_seed ^ splitmix64(n as u64)),
    }
}

fn run_chain(
    plan: &SweepPlan,
    params: &ModelParams,
    basis: &SimplexBasis,
    chain: u64,
) -> Result<Vec<Option<ObservableRecord>>> {
    let measure = |snapshots: &[crate::model::SentenceState], lengths: &[usize], wanted: &[usize]| {
        wanted
            .iter()
            .map(|&n| match lengths.iter().position(|&l| l == n) {
                Some(idx) => {
                    let pairs: Vec<(usize, usize)> =
                        plan.probes.pairs(n).into_iter().map(|(_, i, j)| (i, j)).collect();
                    ObservableRecord::with_pairs(&snapshots[idx], basis, &pairs).map(Some)
                }
                None => Ok(None),
            })
            .collect::<Result<Vec<_>>>()
    };
    match plan.mode {
        SamplingMode::Snapshots => {
            let seed = trajectory_seed(plan.master_seed, plan.mode, 0);
            let trace = generate_sentence(params, &mut ChainRng::new(seed, chain), &plan.sizes)?;
            measure(&trace.snapshots, &trace.recorded_lengths, &plan.sizes)
        }
        SamplingMode::Independent => {
            let mut out = Vec::with_capacity(plan.sizes.len());
            for &n in &plan.sizes {
                let p = ModelParams { target_length: n, ..params.clone() };
                let seed = trajectory_seed(plan.master_seed, plan.mode, n);
                let trace = generate_sentence(&p, &mut ChainRng::new(seed, chain), &[n])?;
                out.extend(measure(&trace.snapshots, &trace.recorded_lengths, &[n])?);
            }
            Ok(out)
        }
    }
}

fn aggregate(
    plan: &SweepPlan,
    params: ModelParams,
    chains: Vec<Result<Vec<Option<ObservableRecord>>>>,
) -> PointResult {
    let mut failures = Vec::new();
    let mut by_size: Vec<Vec<Option<ObservableRecord>>> = vec![Vec::new(); plan.sizes.len()];
    for (chain, res) in chains.into_iter().enumerate() {
        match res {
            Ok(recs) => {
                for (slot, r) in by_size.iter_mut().zip(recs) {
                    slot.push(r);
                }
            }
            Err(e) => failures.push(format!("chain {chain}: {e}")),
        }
    }
    let mut stats = Vec::new();
    let mut records = Vec::new();
    if failures.is_empty() {
        for (&n, recs) in plan.sizes.iter().zip(by_size) {
            let Some(recs) = recs.into_iter().collect::<Option<Vec<_>>>() else {
                failures.push(format!("N = {n}: some chains stopped before reaching this length"));
                continue;
            };
            let batches: Vec<Vec<ObservableRecord>> =
                recs.chunks(plan.ensemble.chains_per_batch).map(<[_]>::to_vec).collect();
            let probes = plan.probes.pairs(n);
            match EnsembleStats::from_batches(&batches, params.k, plan.delta_m, &probes) {
                Ok(s) => stats.push(s),
                Err(e) => failures.push(format!("N = {n}: {e}")),
            }
            if plan.keep_samples {
                records.push(recs);
            }
        }
    }
    PointResult { params, stats, records, failures }
}

/// Runs every grid point of `plan` and aggregates per size.
///
/// Chains are independent tasks on the current rayon pool; chain `c` of
/// every grid point uses stream `c` of the master seed, so results do not
/// depend on the thread count or schedule.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    plan.validate()?;
    let start = Instant::now();
    let basis = build_simplex_basis(plan.base.k)?;
    let points = plan.points();
    let chains = plan.ensemble.chains();

    let tasks: Vec<(usize, u64)> =
        (0..points.len()).flat_map(|p| (0..chains as u64).map(move |c| (p, c))).collect();
    let mut outputs: Vec<Result<Vec<Option<ObservableRecord>>>> = tasks
        .par_iter()
        .map(|&(p, c)| run_chain(plan, &points[p], &basis, c))
        .collect();

    let mut results = Vec::with_capacity(points.len());
    for params in points.into_iter().rev() {
        let chunk = outputs.split_off(outputs.len() - chains);
        results.push(aggregate(plan, params, chunk));
    }
    results.reverse();

    Ok(SweepResult {
        plan: plan.clone(),
        points: results,
        elapsed: start.elapsed(),
        threads: rayon::current_num_threads(),
    })
}

impl SweepResult {
    pub fn manifest(&self) -> RunManifest {
        RunManifest::new(self)
    }

    /// Writes `results.csv`, `correlations.csv`, `histogram.csv`,
    /// optionally `samples.csv`, and `manifest.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<BufWriter<File>> {
            Ok(BufWriter::new(File::create(dir.join(name))?))
        };
        output::write_results(open("results.csv")?, &self.points)?;
        output::write_correlations(open("correlations.csv")?, &self.points)?;
        output::write_histograms(open("histogram.csv")?, &self.points)?;
        if self.plan.keep_samples {
            output::write_samples(open("samples.csv")?, &self.points, &self.plan.sizes)?;
        }
        let manifest = serde_json::to_string_pretty(&self.manifest())?;
        fs::write(dir.join("manifest.json"), manifest + "\n")?;
        Ok(())
    }

    pub fn point(&self, q: f64, temperature: f64) -> Option<&PointResult> {
        self.points.iter().find(|p| p.params.q == q && p.params.temperature == temperature)
    }

    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| p.failed()).count()
    }
}

impl PointResult {
    pub fn at_length(&self, n: usize) -> Result<&EnsembleStats> {
        self.stats
            .iter()
            .find(|s| s.length == n)
            .ok_or_else(|| Error::invalid(format!("no statistics at N = {n}")))
    }
}
