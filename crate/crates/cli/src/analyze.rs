use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use serde::Serialize;

use potts_csg::fss::{
    all_crossings, divergence_boundary, BinderPoint, BoundaryCriteria, CrossingOutcome,
    SusceptibilityPoint,
};
use potts_csg::observables::{histogram_of, rank_frequency_average, DEFAULT_DELTA_M};
use potts_csg::runner::{ResultRow, SampleRow};

use crate::tables::{self, PARAM_COLUMNS};
use crate::{parse, Classify, Failure};

#[derive(Clone, Copy, ValueEnum)]
pub enum Mode {
    /// Binder crossing temperature for every size pair (input: results.csv).
    Crossings,
    /// Susceptibility-divergence boundary per q (input: results.csv).
    Boundary,
    /// Magnetization histograms (input: samples.csv).
    Histogram,
    /// Rank-frequency of symbols (input: samples.csv).
    Zipf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Axis {
    /// log10 of the branching probability.
    Log10Q,
    Q,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Histogram bin width.
    #[arg(long, default_value_t = DEFAULT_DELTA_M)]
    delta_m: f64,
    /// Keep only sentences with M in `lo:hi` (zipf mode).
    #[arg(long)]
    mag_window: Option<String>,
    /// Phase-diagram abscissa (boundary mode).
    #[arg(long, value_enum, default_value_t = Axis::Log10Q)]
    axis: Axis,
    #[arg(long, default_value_t = 0.1)]
    slope_min: f64,
    #[arg(long, default_value_t = 0.995)]
    r2_min: f64,
    #[arg(long, default_value_t = 4)]
    min_sizes: usize,
}

pub fn run(a: AnalyzeArgs) -> Result<(), Failure> {
    if !(a.delta_m > 0.0 && a.delta_m.is_finite()) {
        return Err(Failure::Usage(anyhow!("--delta-m must be positive")));
    }
    let window = a.mag_window.as_deref().map(parse::range).transpose().context("--mag-window").usage()?;
    fs::create_dir_all(&a.out).context("creating output directory").runtime()?;
    match a.mode {
        Mode::Crossings => crossings(&a),
        Mode::Boundary => boundary(&a),
        Mode::Histogram => histogram(&a),
        Mode::Zipf => zipf(&a, window),
    }
    .runtime()
}

fn writer(dir: &Path, name: &str) -> anyhow::Result<csv::Writer<BufWriter<File>>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn header(extra: &[&str]) -> Vec<String> {
    PARAM_COLUMNS.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn crossings(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let groups = tables::observable_groups(tables::results(&a.input)?, "binder");
    if groups.is_empty() {
        bail!("no Binder rows in {}", a.input.display());
    }
    let mut w = writer(&a.out, "crossings.csv")?;
    w.write_record(header(&["N1", "N2", "temperature", "error", "status"]))?;
    let mut rows = 0;
    for group in groups {
        let data: Vec<BinderPoint> = group
            .iter()
            .filter(|r| r.temperature.is_finite())
            .map(|r| BinderPoint { temperature: r.temperature, size: r.n, value: r.value, stderr: r.stderr })
            .collect();
        let params = tables::param_values(&group[0]);
        for (n1, n2, outcome) in all_crossings(&data)? {
            let (t, err, status) = match outcome {
                CrossingOutcome::Crossing(c) => (Some(c.temperature), Some(c.error), "crossing"),
                CrossingOutcome::NoCrossing => (None, None, "no-crossing"),
            };
            let mut rec = params.clone();
            rec.extend([n1.to_string(), n2.to_string(), opt(t), opt(err), status.to_string()]);
            w.write_record(rec)?;
            rows += 1;
        }
    }
    w.flush()?;
    eprintln!("wrote {rows} crossing rows");
    Ok(())
}

#[derive(Serialize)]
struct BoundaryReport {
    axis: &'static str,
    points: Vec<BoundaryRow>,
    /// `T_c(a) = c0 + c1 a + c2 a^2`.
    quadratic: Option<[f64; 3]>,
}

#[derive(Serialize)]
struct BoundaryRow {
    q: f64,
    axis: f64,
    tc: Option<f64>,
}

fn boundary(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let groups = tables::observable_groups(tables::results(&a.input)?, "chi_tilde");
    if groups.is_empty() {
        bail!("no chi_tilde rows in {}", a.input.display());
    }
    // every parameter except q must agree across groups
    let without_q = |r: &ResultRow| ResultRow { q: 0.0, ..r.clone() }.group_key();
    if groups.iter().any(|g| without_q(&g[0]) != without_q(&groups[0][0])) {
        bail!("boundary mode needs inputs that differ only in q");
    }
    let to_axis = |q: f64| match a.axis {
        Axis::Log10Q => q.log10(),
        Axis::Q => q,
    };
    let mut data = Vec::new();
    let mut q_of_axis = Vec::new();
    for g in &groups {
        q_of_axis.push((to_axis(g[0].q), g[0].q));
        data.extend(g.iter().filter(|r| r.temperature.is_finite()).map(|r| SusceptibilityPoint {
            axis: to_axis(r.q),
            temperature: r.temperature,
            size: r.n,
            chi_tilde: r.value,
        }));
    }
    let criteria = BoundaryCriteria { slope_min: a.slope_min, r2_min: a.r2_min, min_sizes: a.min_sizes };
    let res = divergence_boundary(&data, &criteria)?;
    let q_for = |axis: f64| q_of_axis.iter().find(|(x, _)| *x == axis).map_or(f64::NAN, |p| p.1);

    let mut fits = writer(&a.out, "boundary_fits.csv")?;
    fits.write_record(["q", "axis", "temperature", "slope", "intercept", "r2", "divergent"])?;
    for ax in &res.axes {
        for f in &ax.fits {
            fits.write_record([
                q_for(ax.axis).to_string(),
                ax.axis.to_string(),
                f.temperature.to_string(),
                f.slope.to_string(),
                f.intercept.to_string(),
                f.r2.to_string(),
                f.divergent.to_string(),
            ])?;
        }
    }
    fits.flush()?;

    let mut table = writer(&a.out, "boundary.csv")?;
    table.write_record(["q", "axis", "T_c", "T_c_fit"])?;
    for ax in &res.axes {
        let fitted = res.quadratic.map(|c| c[0] + c[1] * ax.axis + c[2] * ax.axis * ax.axis);
        table.write_record([q_for(ax.axis).to_string(), ax.axis.to_string(), opt(ax.tc), opt(fitted)])?;
    }
    table.flush()?;

    let report = BoundaryReport {
        axis: match a.axis {
            Axis::Log10Q => "log10-q",
            Axis::Q => "q",
        },
        points: res.axes.iter().map(|ax| BoundaryRow { q: q_for(ax.axis), axis: ax.axis, tc: ax.tc }).collect(),
        quadratic: res.quadratic,
    };
    fs::write(a.out.join("boundary.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    match res.quadratic {
        Some(c) => eprintln!("boundary T_c(a) = {:.6} + {:.6} a + {:.6} a^2", c[0], c[1], c[2]),
        None => eprintln!("fewer than 3 axis values have a divergent region; no quadratic fit"),
    }
    Ok(())
}

/// Samples grouped by parameter set, temperature and size, in input order.
fn sample_cells(rows: Vec<SampleRow>) -> Vec<Vec<SampleRow>> {
    tables::group_by(rows, |r| (r.group.clone(), r.temperature.to_bits(), r.n))
}

fn cell_prefix(r: &SampleRow) -> Vec<String> {
    let mut v = tables::group_values(&r.group);
    v.extend([r.temperature.to_string(), r.n.to_string()]);
    v
}

fn histogram(a: &AnalyzeArgs) -> anyhow::Result<()> {
    let cells = sample_cells(tables::samples(&a.input)?);
    if cells.is_empty() {
        bail!("no samples in {}", a.input.display());
    }
    let mut w = writer(&a.out, "histogram.csv")?;
    w.write_record(header(&["temperature", "N", "bin_left", "bin_right", "count"]))?;
    for cell in &cells {
        let h = histogram_of(cell.iter().map(|r| r.m), a.delta_m)?;
        for (i, &count) in h.counts.iter().enumerate() {
            let (lo, hi) = h.bin_edges(i);
            let mut rec = cell_prefix(&cell[0]);
            rec.extend([lo.to_string(), hi.to_string(), count.to_string()]);
            w.write_record(rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn zipf(a: &AnalyzeArgs, window: Option<(f64, f64)>) -> anyhow::Result<()> {
    let cells = sample_cells(tables::samples(&a.input)?);
    let mut w = writer(&a.out, "zipf.csv")?;
    w.write_record(header(&["temperature", "N", "rank", "frequency", "n_sentences"]))?;
    let mut written = 0;
    for cell in &cells {
        let kept: Vec<&[usize]> = cell
            .iter()
            .filter(|r| window.is_none_or(|(lo, hi)| r.m >= lo && r.m <= hi))
            .map(|r| r.counts.as_slice())
            .collect();
        if kept.is_empty() {
            continue;
        }
        let n = kept.len();
        for (rank, f) in rank_frequency_average(kept)?.into_iter().enumerate() {
            let mut rec = cell_prefix(&cell[0]);
            rec.extend([(rank + 1).to_string(), f.to_string(), n.to_string()]);
            w.write_record(rec)?;
        }
        written += 1;
    }
    w.flush()?;
    if written == 0 {
        bail!("no sentences inside the magnetization window");
    }
    Ok(())
}
