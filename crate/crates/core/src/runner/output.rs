//! CSV tables. Computed values carry 17 significant digits so they
//! round-trip through text; parameter columns use the shortest exact
//! representation.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::sweep::PointResult;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::{EnsembleStats, Estimate, ProbeKind};

/// Observables written to the results table, in row order.
pub const OBSERVABLES: [&str; 6] = ["M", "M2", "M4", "chi", "chi_tilde", "binder"];

const GRID_COLUMNS: [&str; 9] =
    ["K", "J", "q", "t", "s", "r_minus", "r_plus", "branching", "temperature"];

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn grid_fields(p: &ModelParams) -> Vec<String> {
    vec![
        p.k.to_string(),
        p.coupling.to_string(),
        p.q.to_string(),
        p.t.to_string(),
        p.s.to_string(),
        p.r_minus.to_string(),
        p.r_plus.to_string(),
        p.branching.to_string(),
        p.temperature.to_string(),
    ]
}

fn header(extra_front: &[&str], extra_back: &[&str]) -> Vec<String> {
    extra_front
        .iter()
        .chain(GRID_COLUMNS.iter())
        .chain(extra_back)
        .map(|s| s.to_string())
        .collect()
}

fn observable(stats: &EnsembleStats, name: &str) -> Option<Estimate> {
    match name {
        "M" => Some(stats.m),
        "M2" => Some(stats.m2),
        "M4" => Some(stats.m4),
        "chi" => Some(stats.chi),
        "chi_tilde" => Some(stats.chi_tilde),
        "binder" => stats.binder,
        _ => None,
    }
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub observable: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub q: f64,
    pub t: f64,
    pub s: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub branching: String,
    pub temperature: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

impl ResultRow {
    /// Key of every column except temperature, size and the measured value.
    pub fn group_key(&self) -> String {
        format!(
            "K={} J={} q={} t={} s={} r_minus={} r_plus={} branching={}",
            self.k, self.coupling, self.q, self.t, self.s, self.r_minus, self.r_plus, self.branching
        )
    }
}

pub fn write_results<W: Write>(w: W, points: &[PointResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(&["observable"], &["N", "value", "stderr", "n_samples"]))?;
    for name in OBSERVABLES {
        for p in points {
            for st in &p.stats {
                let Some(est) = observable(st, name) else { continue };
                let mut row = vec![name.to_string()];
                row.extend(grid_fields(&p.params));
                row.extend([
                    st.length.to_string(),
                    fmt_value(est.value),
                    fmt_value(est.stderr),
                    st.n_samples.to_string(),
                ]);
                out.write_record(row)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// One row of `correlations.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub observable: String,
    pub probe: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub coupling: f64,
    pub q: f64,
    pub t: f64,
    pub s: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub branching: String,
    pub temperature: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub delta_i: usize,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

fn probe_name(p: ProbeKind) -> &'static str {
    match p {
        ProbeKind::WithinSentence => "within-sentence",
        ProbeKind::GrowthPair => "growth-pair",
    }
}

pub fn write_correlations<W: Write>(w: W, points: &[PointResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(
        &["observable", "probe"],
        &["N", "i", "j", "delta_i", "value", "stderr", "n_samples"],
    ))?;
    for (name, pick) in [
        ("correlation", (|c: &crate::observables::CorrelationEntry| c.correlation) as fn(&_) -> Estimate),
        ("mutual_information", |c| c.mutual_information),
    ] {
        for p in points {
            for st in &p.stats {
                for c in &st.correlations {
                    let est = pick(c);
                    let mut row = vec![name.to_string(), probe_name(c.probe).to_string()];
                    row.extend(grid_fields(&p.params));
                    row.extend([
                        st.length.to_string(),
                        c.i.to_string(),
                        c.j.to_string(),
                        (c.j - c.i).to_string(),
                        fmt_value(est.value),
                        fmt_value(est.stderr),
                        st.n_samples.to_string(),
                    ]);
                    out.write_record(row)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// One row of a histogram table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

/// Histogram rows prefixed by the grid columns and `N`, followed by
/// `bin_left, bin_right, count`.
pub fn write_histograms<W: Write>(w: W, points: &[PointResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(&[], &["N", "bin_left", "bin_right", "count"]))?;
    for p in points {
        for st in &p.stats {
            for (n, &count) in st.histogram.counts.iter().enumerate() {
                let (lo, hi) = st.histogram.bin_edges(n);
                let mut row = grid_fields(&p.params);
                row.extend([st.length.to_string(), fmt_value(lo), fmt_value(hi), count.to_string()]);
                out.write_record(row)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// One chain's configuration summary at one size, from `samples.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub group: String,
    pub temperature: f64,
    pub n: usize,
    pub chain: usize,
    pub m: f64,
    pub counts: Vec<usize>,
}

pub fn write_samples<W: Write>(w: W, points: &[PointResult], sizes: &[usize]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let k = points.first().map_or(2, |p| p.params.k);
    let counts: Vec<String> = (1..=k).map(|s| format!("count_{s}")).collect();
    let mut head = header(&[], &["N", "chain", "M"]);
    head.extend(counts);
    out.write_record(head)?;
    for p in points {
        for (&n, recs) in sizes.iter().zip(&p.records) {
            for (chain, r) in recs.iter().enumerate() {
                let mut row = grid_fields(&p.params);
                row.extend([n.to_string(), chain.to_string(), fmt_value(r.m)]);
                row.extend(r.symbol_counts.iter().map(|c| c.to_string()));
                out.write_record(row)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(r: R) -> Result<Vec<SampleRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let head = rdr.headers()?.clone();
    let col = |name: &str| {
        head.iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("samples table lacks column `{name}`")))
    };
    let grid: Vec<usize> = GRID_COLUMNS
        .iter()
        .filter(|&&c| c != "temperature")
        .map(|c| col(c))
        .collect::<Result<_>>()?;
    let (t_col, n_col, chain_col, m_col) = (col("temperature")?, col("N")?, col("chain")?, col("M")?);
    let count_cols: Vec<usize> =
        (0..head.len()).filter(|&i| head[i].starts_with("count_")).collect();
    if count_cols.is_empty() {
        return Err(Error::invalid("samples table has no count columns"));
    }
    let parse_f = |s: &str| s.parse::<f64>().map_err(|e| Error::invalid(format!("`{s}`: {e}")));
    let parse_u = |s: &str| s.parse::<usize>().map_err(|e| Error::invalid(format!("`{s}`: {e}")));

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let group = grid
            .iter()
            .map(|&i| format!("{}={}", &head[i], &rec[i]))
            .collect::<Vec<_>>()
            .join(" ");
        rows.push(SampleRow {
            group,
            temperature: parse_f(&rec[t_col])?,
            n: parse_u(&rec[n_col])?,
            chain: parse_u(&rec[chain_col])?,
            m: parse_f(&rec[m_col])?,
            counts: count_cols.iter().map(|&i| parse_u(&rec[i])).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}
