use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `chi_tilde` at one `(axis, T, N)`; `axis` is typically `log10 q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityPoint {
    pub axis: f64,
    pub temperature: f64,
    pub size: usize,
    pub chi_tilde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCriteria {
    pub slope_min: f64,
    pub r2_min: f64,
    pub min_sizes: usize,
}

impl Default for BoundaryCriteria {
    fn default() -> Self {
        Self { slope_min: 0.1, r2_min: 0.995, min_sizes: 4 }
    }
}

/// Least-squares line `log chi_tilde = intercept + slope log N`.
/// `r2` is NaN when the data are constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub temperature: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub divergent: bool,
}

/// Per-axis classification and the largest divergent temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBoundary {
    pub axis: f64,
    pub fits: Vec<LogLogFit>,
    pub tc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResult {
    pub axes: Vec<AxisBoundary>,
    /// `T_c(a) = c0 + c1 a + c2 a^2`, present when at least three axis
    /// values have a boundary.
    pub quadratic: Option<[f64; 3]>,
}

/// Ordinary least squares of `ln y` on `ln x`. Returns `(slope, intercept, r2)`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InsufficientData("log-log fit needs at least 2 points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::invalid("log-log fit needs positive finite data"));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("log-log fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { f64::NAN };
    Ok((slope, intercept, r2))
}

/// Least-squares quadratic through `(a, T)` points, coefficients low to high.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<[f64; 3]> {
    if points.len() < 3 {
        return Err(Error::InsufficientData("quadratic fit needs at least 3 points".into()));
    }
    let design = DMatrix::from_fn(points.len(), 3, |i, j| points[i].0.powi(j as i32));
    let rhs = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let svd = design.svd(true, true);
    let rank = svd.rank(1e-12 * svd.singular_values.max());
    if rank < 3 {
        return Err(Error::InsufficientData("quadratic fit needs 3 distinct abscissae".into()));
    }
    let c = svd.solve(&rhs, 1e-12).map_err(|e| Error::invalid(e.to_string()))?;
    Ok([c[0], c[1], c[2]])
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Classifies each temperature as divergent when `chi_tilde` grows as a
/// clean power of `N`, and takes the largest divergent temperature as the
/// boundary for each axis value.
pub fn divergence_boundary(
    data: &[SusceptibilityPoint],
    criteria: &BoundaryCriteria,
) -> Result<BoundaryResult> {
    let mut axes = Vec::new();
    for axis in distinct(data.iter().map(|p| p.axis)) {
        let slice: Vec<&SusceptibilityPoint> = data.iter().filter(|p| p.axis == axis).collect();
        let mut fits = Vec::new();
        for temperature in distinct(slice.iter().map(|p| p.temperature)) {
            let mut pts: Vec<(f64, f64)> = slice
                .iter()
                .filter(|p| p.temperature == temperature)
                .map(|p| (p.size as f64, p.chi_tilde))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let sizes = distinct(pts.iter().map(|p| p.0)).len();
            if sizes < criteria.min_sizes {
                return Err(Error::InsufficientData(format!(
                    "T = {temperature} at axis {axis} has {sizes} sizes, need {}",
                    criteria.min_sizes
                )));
            }
            let (slope, intercept, r2) = fit_log_log(&pts)?;
            let divergent = slope > criteria.slope_min && r2 > criteria.r2_min;
            fits.push(LogLogFit { temperature, slope, intercept, r2, divergent });
        }
        let tc = fits.iter().filter(|f| f.divergent).map(|f| f.temperature).reduce(f64::max);
        axes.push(AxisBoundary { axis, fits, tc });
    }
    let known: Vec<(f64, f64)> = axes.iter().filter_map(|a| a.tc.map(|t| (a.axis, t))).collect();
    let quadratic = if known.len() >= 3 { fit_quadratic(&known).ok() } else { None };
    Ok(BoundaryResult { axes, quadratic })
}
