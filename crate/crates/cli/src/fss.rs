use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use serde::Serialize;

use potts_csg::fss::{scaling_collapse, write_collapse_csv, CollapsePoint, CollapseResult, ReducedTemperature, SearchRanges};

use crate::tables::{self, PARAM_COLUMNS};
use crate::{parse, Classify, Failure};

#[derive(Args)]
pub struct FssArgs {
    /// results.csv from `simulate`.
    #[arg(long)]
    input: PathBuf,
    /// T_c search range `lo:hi`; a single value pins it.
    #[arg(long, default_value = "0.5:1.5")]
    tc: String,
    #[arg(long, default_value = "0.5:5.0")]
    nu: String,
    #[arg(long, default_value = "0.5:4.0")]
    gamma: String,
    /// Grid points per free parameter before local refinement.
    #[arg(long, default_value_t = 11)]
    grid: usize,
    /// Use the signed reduced temperature so each side has its own branch.
    #[arg(long)]
    side_split: bool,
    /// Keep only rows with this q when the input holds several.
    #[arg(long)]
    q: Option<f64>,
    /// Output directory for collapse.json and collapse.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Serialize)]
struct Report<'a> {
    #[serde(flatten)]
    fit: &'a CollapseResult,
    input: String,
    parameters: BTreeMap<String, String>,
    sizes: Vec<usize>,
    temperatures: usize,
}

fn ranges(a: &FssArgs) -> anyhow::Result<SearchRanges> {
    let tc = parse::range(&a.tc).context("--tc")?;
    let nu = parse::range(&a.nu).context("--nu")?;
    let gamma = parse::range(&a.gamma).context("--gamma")?;
    if a.grid < 2 {
        bail!("--grid must be at least 2");
    }
    if tc.0 <= 0.0 || nu.0 <= 0.0 {
        bail!("--tc and --nu ranges must be positive");
    }
    let reduced_temperature =
        if a.side_split { ReducedTemperature::Signed } else { ReducedTemperature::TwoSided };
    Ok(SearchRanges { tc, nu, gamma, grid_steps: a.grid, reduced_temperature })
}

pub fn run(a: FssArgs) -> Result<(), Failure> {
    let search = ranges(&a).usage()?;
    let rows = tables::results(&a.input).runtime()?;
    let rows = rows
        .into_iter()
        .filter(|r| r.temperature.is_finite())
        .filter(|r| a.q.is_none_or(|q| (r.q - q).abs() <= 1e-9 * q.abs().max(1e-300)))
        .collect();
    let mut groups = tables::observable_groups(rows, "chi_tilde");
    let rows = match groups.len() {
        0 => return Err(Failure::Runtime(anyhow!("no finite-temperature chi_tilde rows in {}", a.input.display()))),
        1 => groups.remove(0),
        n => return Err(Failure::Usage(anyhow!("input holds {n} parameter sets; select one with --q"))),
    };
    let data: Vec<CollapsePoint> = rows
        .iter()
        .map(|r| CollapsePoint { temperature: r.temperature, size: r.n as f64, value: r.value, stderr: r.stderr })
        .collect();
    let fit = scaling_collapse(&data, &search).runtime()?;

    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let report = Report {
        fit: &fit,
        input: a.input.display().to_string(),
        parameters: PARAM_COLUMNS.iter().map(|c| c.to_string()).zip(tables::param_values(&rows[0])).collect(),
        temperatures: rows.len() / sizes.len().max(1),
        sizes,
    };
    fs::create_dir_all(&a.out).context("creating output directory").runtime()?;
    let json = serde_json::to_string_pretty(&report).runtime()?;
    fs::write(a.out.join("collapse.json"), json + "\n").runtime()?;
    let csv = BufWriter::new(File::create(a.out.join("collapse.csv")).runtime()?);
    write_collapse_csv(csv, &data, &fit).runtime()?;
    println!(
        "T_c = {:.6}  nu = {:.6}  gamma = {:.6}  residual = {:.3e}",
        fit.tc, fit.nu, fit.gamma, fit.residual
    );
    Ok(())
}
