use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simplex_search::NelderMead;
use crate::error::{Error, Result};

/// One measured `chi_tilde(T, L)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub temperature: f64,
    pub size: f64,
    pub value: f64,
    pub stderr: f64,
}

/// How the reduced temperature enters the scaling variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReducedTemperature {
    /// `|T_c - T| / T_c`: both sides share one branch of the master curve.
    #[default]
    TwoSided,
    /// `(T - T_c) / T_c`: each side keeps its own branch.
    Signed,
}

impl ReducedTemperature {
    fn apply(self, temperature: f64, tc: f64) -> f64 {
        let t = (temperature - tc) / tc;
        match self {
            ReducedTemperature::TwoSided => t.abs(),
            ReducedTemperature::Signed => t,
        }
    }
}

/// Closed search interval per parameter. `lo == hi` pins a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRanges {
    pub tc: (f64, f64),
    pub nu: (f64, f64),
    pub gamma: (f64, f64),
    /// Grid points per free parameter in the coarse scan.
    pub grid_steps: usize,
    pub reduced_temperature: ReducedTemperature,
}

impl Default for SearchRanges {
    fn default() -> Self {
        Self {
            tc: (0.5, 1.5),
            nu: (0.5, 5.0),
            gamma: (0.5, 4.0),
            grid_steps: 11,
            reduced_temperature: ReducedTemperature::TwoSided,
        }
    }
}

impl SearchRanges {
    fn bounds(&self) -> [(f64, f64); 3] {
        [self.tc, self.nu, self.gamma]
    }

    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in ["T_c", "nu", "gamma"].iter().zip(self.bounds()) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("{name} range [{lo}, {hi}] is not a finite interval")));
            }
        }
        if !(self.tc.0 > 0.0 && self.nu.0 > 0.0) {
            return Err(Error::invalid("T_c and nu ranges must be positive"));
        }
        if self.grid_steps < 2 {
            return Err(Error::invalid("grid_steps must be >= 2"));
        }
        Ok(())
    }
}

/// Best collapse found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub tc: f64,
    pub nu: f64,
    pub gamma: f64,
    pub residual: f64,
    pub reduced_temperature: ReducedTemperature,
    pub evaluations: usize,
}

/// Rescaled coordinates `(x, y, L)` with `x = L^(1/nu) t` and
/// `y = chi_tilde / L^(gamma/nu)`.
pub fn transform(
    data: &[CollapsePoint],
    tc: f64,
    nu: f64,
    gamma: f64,
    mode: ReducedTemperature,
) -> Vec<(f64, f64, f64)> {
    data.iter()
        .map(|p| {
            let x = p.size.powf(1.0 / nu) * mode.apply(p.temperature, tc);
            let y = p.value / p.size.powf(gamma / nu);
            (x, y, p.size)
        })
        .collect()
}

/// Writes the rescaled points at `fit` as CSV with columns
/// `x,y,N,temperature`, in input order.
pub fn write_collapse_csv<W: std::io::Write>(
    writer: W,
    data: &[CollapsePoint],
    fit: &CollapseResult,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "N", "temperature"])?;
    let pts = transform(data, fit.tc, fit.nu, fit.gamma, fit.reduced_temperature);
    for (p, (x, y, _)) in data.iter().zip(pts) {
        w.write_record([
            format!("{x:.16e}"),
            format!("{y:.16e}"),
            p.size.to_string(),
            p.temperature.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn sizes_of(data: &[CollapsePoint]) -> Vec<f64> {
    let mut sizes: Vec<f64> = data.iter().map(|p| p.size).collect();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    sizes
}

/// Piecewise-linear interpolation through `curve` sorted by `x`. Points
/// sharing an `x` are averaged. `None` outside the covered range.
fn interpolate(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (curve.first()?.0, curve.last()?.0);
    if x < first || x > last {
        return None;
    }
    let hi = curve.partition_point(|p| p.0 < x);
    if hi < curve.len() && curve[hi].0 == x {
        let same: Vec<f64> = curve[hi..].iter().take_while(|p| p.0 == x).map(|p| p.1).collect();
        return Some(same.iter().sum::<f64>() / same.len() as f64);
    }
    let (x0, y0) = curve[hi - 1];
    let (x1, y1) = curve[hi];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Leave-one-size-out collapse quality.
///
/// Every point is compared against the piecewise-linear master curve
/// through the pooled points of all other sizes; the mean squared
/// deviation over overlapping points is divided by the variance of all
/// rescaled `y`. Infinite when fewer than two sizes overlap.
pub fn collapse_residual(
    data: &[CollapsePoint],
    tc: f64,
    nu: f64,
    gamma: f64,
    mode: ReducedTemperature,
) -> f64 {
    let mut pts = transform(data, tc, nu, gamma, mode);
    if pts.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return f64::INFINITY;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));

    let n = pts.len() as f64;
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let var = pts.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return f64::INFINITY;
    }

    let mut sum = 0.0;
    let mut count = 0usize;
    let mut sizes_hit = 0usize;
    for size in sizes_of(data) {
        let master: Vec<(f64, f64)> =
            pts.iter().filter(|p| p.2 != size).map(|p| (p.0, p.1)).collect();
        let mut hit = false;
        for p in pts.iter().filter(|p| p.2 == size) {
            if let Some(m) = interpolate(&master, p.0) {
                sum += (p.1 - m).powi(2);
                count += 1;
                hit = true;
            }
        }
        sizes_hit += usize::from(hit);
    }
    if count < 3 || sizes_hit < 2 {
        return f64::INFINITY;
    }
    sum / count as f64 / var
}

/// Fits `(T_c, nu, gamma)` so that `chi_tilde / L^(gamma/nu)` collapses
/// onto one curve of `L^(1/nu) t`: coarse grid scan over `search`, then
/// Nelder–Mead refinement from the best grid point, confined to the
/// search box.
pub fn scaling_collapse(data: &[CollapsePoint], search: &SearchRanges) -> Result<CollapseResult> {
    search.validate()?;
    let sizes = sizes_of(data);
    if sizes.len() < 3 {
        return Err(Error::CollapseInfeasible(format!(
            "need at least 3 distinct sizes, got {}",
            sizes.len()
        )));
    }
    for &size in &sizes {
        let temps = data.iter().filter(|p| p.size == size).count();
        if temps < 5 {
            return Err(Error::CollapseInfeasible(format!(
                "size {size} has {temps} temperatures, need at least 5"
            )));
        }
    }
    if data.iter().any(|p| !(p.value.is_finite() && p.size > 0.0 && p.temperature.is_finite())) {
        return Err(Error::invalid("collapse data must be finite with positive sizes"));
    }

    let mode = search.reduced_temperature;
    let bounds = search.bounds();
    let free: Vec<usize> = (0..3).filter(|&d| bounds[d].0 < bounds[d].1).collect();
    let full = |free_x: &[f64]| -> [f64; 3] {
        let mut p = [bounds[0].0, bounds[1].0, bounds[2].0];
        for (&d, &v) in free.iter().zip(free_x) {
            p[d] = v;
        }
        p
    };
    let objective = |free_x: &[f64]| -> f64 {
        for (&d, &v) in free.iter().zip(free_x) {
            if v < bounds[d].0 || v > bounds[d].1 {
                return f64::INFINITY;
            }
        }
        let [tc, nu, gamma] = full(free_x);
        collapse_residual(data, tc, nu, gamma, mode)
    };

    let steps = search.grid_steps;
    let axis = |d: usize| -> Vec<f64> {
        let (lo, hi) = bounds[d];
        (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
    };
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for &d in &free {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis(d).into_iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    let scored: Vec<(f64, Vec<f64>)> = grid.into_par_iter().map(|x| (objective(&x), x)).collect();
    let mut evaluations = scored.len();
    // first minimum in grid order keeps the result schedule-independent
    let (best_val, best_x) = scored
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |acc, cur| if cur.0 < acc.0 { cur } else { acc });
    if !best_val.is_finite() {
        return Err(Error::CollapseInfeasible(
            "no parameters in the search box give overlapping rescaled sizes".into(),
        ));
    }

    let edge: Vec<f64> =
        free.iter().map(|&d| (bounds[d].1 - bounds[d].0) / (steps - 1) as f64 * 0.5).collect();
    let (x, v, n_eval) = NelderMead::default().minimize(objective, &best_x, &edge);
    evaluations += n_eval;
    let (x, residual) = if v <= best_val { (x, v) } else { (best_x, best_val) };
    let [tc, nu, gamma] = full(&x);
    Ok(CollapseResult { tc, nu, gamma, residual, reduced_temperature: mode, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn master(x: f64) -> f64 {
        1.0 / (1.0 + x * x) + 0.1
    }

    /// chi_tilde = L^(gamma/nu) f(L^(1/nu) |T - Tc| / Tc)
    fn synthetic(tc: f64, nu: f64, gamma: f64) -> Vec<CollapsePoint> {
        let mut out = Vec::new();
        for size in [16.0, 32.0, 64.0, 128.0f64] {
            for i in 0..21 {
                let temperature = 0.5 + 0.05 * i as f64;
                let x = size.powf(1.0 / nu) * ((temperature - tc) / tc).abs();
                out.push(CollapsePoint {
                    temperature,
                    size,
                    value: size.powf(gamma / nu) * master(x),
                    stderr: 0.0,
                });
            }
        }
        out
    }

    #[test]
    fn exact_data_has_zero_residual_at_truth() {
        let data = synthetic(1.0, 2.0, 1.5);
        let r = collapse_residual(&data, 1.0, 2.0, 1.5, ReducedTemperature::TwoSided);
        assert!(r < 1e-3, "{r}");
        let wrong = collapse_residual(&data, 1.0, 2.0, 1.8, ReducedTemperature::TwoSided);
        assert!(wrong > r);
    }

    #[test]
    fn interpolation_handles_ties_and_edges() {
        let c = [(0.0, 0.0), (1.0, 2.0), (1.0, 4.0), (2.0, 4.0)];
        assert_eq!(interpolate(&c, 0.5), Some(1.0));
        assert_eq!(interpolate(&c, 1.0), Some(3.0));
        assert_eq!(interpolate(&c, 2.0), Some(4.0));
        assert_eq!(interpolate(&c, 2.5), None);
        assert_eq!(interpolate(&[], 0.0), None);
    }

    #[test]
    fn too_few_sizes_is_infeasible() {
        let data: Vec<_> = synthetic(1.0, 2.0, 1.5).into_iter().filter(|p| p.size < 40.0).collect();
        assert!(matches!(
            scaling_collapse(&data, &SearchRanges::default()),
            Err(Error::CollapseInfeasible(_))
        ));
    }

    #[test]
    fn pinned_parameters_stay_put() {
        let data = synthetic(1.0, 2.0, 1.5);
        let search = SearchRanges { tc: (1.0, 1.0), nu: (2.0, 2.0), gamma: (1.0, 2.0), ..Default::default() };
        let fit = scaling_collapse(&data, &search).unwrap();
        assert_eq!(fit.tc, 1.0);
        assert_eq!(fit.nu, 2.0);
        assert!((fit.gamma - 1.5).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let data = synthetic(1.0, 2.0, 1.5);
        let search = SearchRanges { nu: (3.0, 1.0), ..Default::default() };
        assert!(matches!(scaling_collapse(&data, &search), Err(Error::InvalidParameter(_))));
    }
}
