use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};

use potts_csg::runner::{run_sweep, ProbeConfig, RunManifest, SamplingMode, SweepPlan};
use potts_csg::Branching;

use crate::{parse, Classify, Failure};

#[derive(Args)]
pub struct SimulateArgs {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long, conflicts_with = "from_manifest")]
    config: Option<PathBuf>,
    /// Re-run the plan recorded in a previous manifest.json.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    /// Alphabet size.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Coupling constant.
    #[arg(long = "J")]
    coupling: Option<f64>,
    /// Branching probability; a comma-separated list sweeps q.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    /// Termination probability given a branch.
    #[arg(long)]
    t: Option<f64>,
    /// Interaction decay exponent.
    #[arg(long)]
    s: Option<f64>,
    /// Sets both interaction ranges.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    r_minus: Option<f64>,
    #[arg(long)]
    r_plus: Option<f64>,
    /// random-pair (X -> YZ) or duplicate (X -> XX).
    #[arg(long, value_parser = parse_branching)]
    branching: Option<Branching>,
    /// `start:stop:step` or a list; `inf` means beta = 0.
    #[arg(long, required_unless_present_any = ["config", "from_manifest"])]
    temps: Option<String>,
    /// List of sizes or `2^a..2^b`.
    #[arg(long, required_unless_present_any = ["config", "from_manifest"])]
    sizes: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    chains_per_batch: Option<usize>,
    /// snapshots (one growth per chain) or independent (one growth per size).
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SamplingMode>,
    /// Magnetization histogram bin width.
    #[arg(long)]
    delta_m: Option<f64>,
    /// Skip the per-chain samples table.
    #[arg(long)]
    no_samples: bool,
    /// Skip the correlation and mutual-information probes.
    #[arg(long)]
    no_correlations: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "POTTS_CSG_THREADS")]
    threads: Option<usize>,
}

fn parse_branching(s: &str) -> Result<Branching, String> {
    s.parse().map_err(|e: potts_csg::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<SamplingMode, String> {
    match s {
        "snapshots" => Ok(SamplingMode::Snapshots),
        "independent" => Ok(SamplingMode::Independent),
        other => Err(format!("unknown mode `{other}` (snapshots|independent)")),
    }
}

/// On-disk run configuration.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plan: SweepPlan,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    pub dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text)?
    };
    Ok(cfg)
}

fn load_manifest(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text)?;
    Ok(RunConfig { plan: manifest.plan, output: OutputOptions::default() })
}

/// Starting configuration, overridden by whatever flags were given.
fn build_config(a: &SimulateArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match (&a.config, &a.from_manifest) {
        (Some(p), _) => load_config(p).with_context(|| format!("invalid config {}", p.display()))?,
        (None, Some(p)) => load_manifest(p).with_context(|| format!("invalid manifest {}", p.display()))?,
        (None, None) => RunConfig {
            plan: SweepPlan::new(Default::default(), vec![], vec![]),
            output: OutputOptions::default(),
        },
    };
    let plan = &mut cfg.plan;
    let base = &mut plan.base;
    if let Some(v) = a.k {
        base.k = v;
    }
    if let Some(v) = a.coupling {
        base.coupling = v;
    }
    if let Some(v) = a.t {
        base.t = v;
    }
    if let Some(v) = a.s {
        base.s = v;
    }
    if let Some(v) = a.r {
        base.r_minus = v;
        base.r_plus = v;
    }
    if let Some(v) = a.r_minus {
        base.r_minus = v;
    }
    if let Some(v) = a.r_plus {
        base.r_plus = v;
    }
    if let Some(v) = a.branching {
        base.branching = v;
    }
    if let Some(q) = &a.q {
        if q.is_empty() {
            bail!("--q needs at least one value");
        }
        base.q = q[0];
        plan.q_values = q.clone();
    }
    if let Some(t) = &a.temps {
        plan.temperatures = parse::temperatures(t)?;
    }
    if let Some(s) = &a.sizes {
        plan.sizes = parse::sizes(s)?;
    }
    if let Some(v) = a.seed {
        plan.master_seed = v;
    }
    if let Some(v) = a.batches {
        plan.ensemble.batches = v;
    }
    if let Some(v) = a.chains_per_batch {
        plan.ensemble.chains_per_batch = v;
    }
    if let Some(v) = a.mode {
        plan.mode = v;
    }
    if let Some(v) = a.delta_m {
        plan.delta_m = v;
    }
    if a.no_samples {
        plan.keep_samples = false;
    }
    if a.no_correlations {
        plan.probes = ProbeConfig::none();
    }
    if let Some(d) = &a.out {
        cfg.output.dir = Some(d.clone());
    }
    if let Some(t) = a.threads {
        cfg.output.threads = Some(t);
    }
    cfg.plan.validate()?;
    for p in cfg.plan.points() {
        p.validate()?;
    }
    if cfg.output.threads == Some(0) {
        bail!("threads must be positive");
    }
    Ok(cfg)
}

pub fn run(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = build_config(&args).usage()?;
    let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("potts-csg-out"));
    if let Some(n) = cfg.output.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().runtime()?;
    }
    let plan = &cfg.plan;
    eprintln!(
        "simulating {} q x {} T x {} sizes, {} chains per point",
        plan.q_values.len(),
        plan.temperatures.len(),
        plan.sizes.len(),
        plan.ensemble.chains()
    );
    let res = run_sweep(plan).runtime()?;
    res.write_to_dir(&dir).context("writing outputs").runtime()?;
    eprintln!("wrote {} in {:.1}s", dir.display(), res.elapsed.as_secs_f64());
    let failed = res.failed_points();
    if failed > 0 {
        for p in res.points.iter().filter(|p| p.failed()) {
            for e in &p.failures {
                eprintln!("q = {} T = {}: {e}", p.params.q, p.params.temperature);
            }
        }
        return Err(Failure::Runtime(anyhow!("{failed} grid points had failed chains; see manifest.json")));
    }
    Ok(())
}
