use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binder parameter `U(T)` at one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinderPoint {
    pub temperature: f64,
    pub size: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Intersection of two Binder curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub n1: usize,
    pub n2: usize,
    pub temperature: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CrossingOutcome {
    Crossing(CrossingEstimate),
    /// The curves never change order inside the common range.
    NoCrossing,
}

impl CrossingOutcome {
    pub fn estimate(&self) -> Option<&CrossingEstimate> {
        match self {
            CrossingOutcome::Crossing(c) => Some(c),
            CrossingOutcome::NoCrossing => None,
        }
    }
}

/// `(T, U, stderr)` for one size, sorted by temperature.
fn curve(data: &[BinderPoint], size: usize) -> Result<Vec<(f64, f64, f64)>> {
    let mut c: Vec<_> = data
        .iter()
        .filter(|p| p.size == size)
        .map(|p| (p.temperature, p.value, p.stderr))
        .collect();
    if c.is_empty() {
        return Err(Error::InsufficientData(format!("no Binder data for N = {size}")));
    }
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    if c.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid(format!("duplicate temperature for N = {size}")));
    }
    if c.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::invalid(format!("non-finite Binder data for N = {size}")));
    }
    Ok(c)
}

/// Linear interpolation of value and stderr at `t`, which must lie in range.
fn at(c: &[(f64, f64, f64)], t: f64) -> (f64, f64) {
    let hi = c.partition_point(|p| p.0 < t);
    if c[hi].0 == t {
        return (c[hi].1, c[hi].2);
    }
    let (a, b) = (c[hi - 1], c[hi]);
    let w = (t - a.0) / (b.0 - a.0);
    (a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2))
}

/// Root of `U_{n1}(T) - U_{n2}(T)` under linear interpolation.
///
/// Both curves are evaluated on the union of their temperatures inside the
/// common range. If the difference changes sign more than once, the crossing
/// whose bracketing differences are largest relative to their errors is
/// returned. The error bar propagates the interpolated stderr of the
/// difference at both bracket ends through the root formula.
pub fn binder_crossing(data: &[BinderPoint], n1: usize, n2: usize) -> Result<CrossingOutcome> {
    if n1 == n2 {
        return Err(Error::invalid("crossing needs two distinct sizes"));
    }
    // canonical order makes the result symmetric in (n1, n2)
    let (lo_n, hi_n) = (n1.min(n2), n1.max(n2));
    let a = curve(data, lo_n)?;
    let b = curve(data, hi_n)?;
    let t_lo = a[0].0.max(b[0].0);
    let t_hi = a[a.len() - 1].0.min(b[b.len() - 1].0);
    if t_lo >= t_hi {
        return Err(Error::InsufficientData(format!(
            "Binder curves for N = {lo_n} and N = {hi_n} do not overlap"
        )));
    }
    let mut grid: Vec<f64> = a
        .iter()
        .chain(&b)
        .map(|p| p.0)
        .filter(|&t| t >= t_lo && t <= t_hi)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // (T, difference, stderr of difference)
    let diff: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|&t| {
            let (ua, sa) = at(&a, t);
            let (ub, sb) = at(&b, t);
            (t, ua - ub, (sa * sa + sb * sb).sqrt())
        })
        .collect();

    let mut best: Option<(f64, CrossingEstimate)> = None;
    let mut consider = |score: f64, temperature: f64, error: f64| {
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, CrossingEstimate { n1, n2, temperature, error }));
        }
    };
    for (idx, w) in diff.windows(2).enumerate() {
        let (ta, da, sa) = w[0];
        let (tb, db, sb) = w[1];
        if da != 0.0 && db != 0.0 && (da < 0.0) != (db < 0.0) {
            let t = ta + da * (tb - ta) / (da - db);
            let denom = (db - da).powi(2);
            let dt_dda = db * (ta - tb) / denom;
            let dt_ddb = da * (tb - ta) / denom;
            let error = ((dt_dda * sa).powi(2) + (dt_ddb * sb).powi(2)).sqrt();
            let score = (db - da).abs() / (sa * sa + sb * sb).sqrt().max(f64::MIN_POSITIVE);
            consider(score, t, error);
        } else if db == 0.0 && idx + 2 < diff.len() {
            // touching zero on a grid point counts only when the sign flips
            let (_, dc, sc) = diff[idx + 2];
            if da != 0.0 && dc != 0.0 && (da < 0.0) != (dc < 0.0) {
                let score = (dc - da).abs() / (sa * sa + sc * sc).sqrt().max(f64::MIN_POSITIVE);
                let slope = ((dc - da) / (diff[idx + 2].0 - ta)).abs();
                consider(score, tb, sb / slope);
            }
        }
    }
    Ok(best.map_or(CrossingOutcome::NoCrossing, |(_, c)| CrossingOutcome::Crossing(c)))
}

/// Crossings for every unordered pair of sizes present in `data`, in
/// ascending `(n1, n2)` order.
pub fn all_crossings(data: &[BinderPoint]) -> Result<Vec<(usize, usize, CrossingOutcome)>> {
    let mut sizes: Vec<usize> = data.iter().map(|p| p.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut out = Vec::new();
    for (i, &n1) in sizes.iter().enumerate() {
        for &n2 in &sizes[i + 1..] {
            out.push((n1, n2, binder_crossing(data, n1, n2)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(size: usize, a: f64, b: f64, temps: &[f64]) -> Vec<BinderPoint> {
        temps
            .iter()
            .map(|&t| BinderPoint { temperature: t, size, value: a + b * t, stderr: 0.01 })
            .collect()
    }

    #[test]
    fn lines_cross_where_expected() {
        let temps: Vec<f64> = (0..7).map(|i| 0.7 + 0.1 * i as f64).collect();
        // both lines take the value 0.5 at T = 0.9
        let mut data = line(32, 0.5 + 0.9 * 0.4, -0.4, &temps);
        data.extend(line(64, 0.5 + 0.9 * 1.2, -1.2, &temps));
        let c = *binder_crossing(&data, 32, 64).unwrap().estimate().unwrap();
        assert!((c.temperature - 0.9).abs() < 1e-12, "{c:?}");
        assert!(c.error > 0.0 && c.error.is_finite());
    }

    #[test]
    fn identical_curves_do_not_cross() {
        let temps = [0.8, 0.9, 1.0, 1.1];
        let mut data = line(16, 0.3, 0.1, &temps);
        data.extend(line(32, 0.3, 0.1, &temps));
        assert_eq!(binder_crossing(&data, 16, 32).unwrap(), CrossingOutcome::NoCrossing);
    }

    #[test]
    fn parallel_curves_do_not_cross() {
        let temps = [0.8, 0.9, 1.0];
        let mut data = line(16, 0.3, 0.1, &temps);
        data.extend(line(32, 0.4, 0.1, &temps));
        assert_eq!(binder_crossing(&data, 16, 32).unwrap(), CrossingOutcome::NoCrossing);
    }

    #[test]
    fn symmetric_in_sizes() {
        let mut data = line(16, 1.0, -0.5, &[0.6, 0.8, 1.0, 1.2]);
        data.extend(line(32, 2.0, -1.5, &[0.7, 0.9, 1.1, 1.3]));
        let ab = binder_crossing(&data, 16, 32).unwrap();
        let ba = binder_crossing(&data, 32, 16).unwrap();
        let (x, y) = (ab.estimate().unwrap(), ba.estimate().unwrap());
        assert_eq!(x.temperature, y.temperature);
        assert_eq!(x.error, y.error);
        assert!((x.temperature - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_on_grid_point() {
        let temps = [0.8, 0.9, 1.0];
        let mut data = line(16, 0.0, 1.0, &temps);
        data.extend(line(32, -0.9, 2.0, &temps));
        let c = *binder_crossing(&data, 16, 32).unwrap().estimate().unwrap();
        assert!((c.temperature - 0.9).abs() < 1e-12);
    }

    #[test]
    fn missing_or_disjoint_sizes_error() {
        let a = line(16, 0.0, 1.0, &[0.1, 0.2]);
        assert!(binder_crossing(&a, 16, 32).is_err());
        let mut d = a.clone();
        d.extend(line(32, 0.0, 1.0, &[0.5, 0.6]));
        assert!(matches!(binder_crossing(&d, 16, 32), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn all_pairs_enumerated() {
        let temps = [0.8, 0.9, 1.0];
        let mut data = Vec::new();
        for (i, n) in [8, 16, 32].into_iter().enumerate() {
            data.extend(line(n, i as f64 * 0.1, 0.0, &temps));
        }
        let pairs: Vec<_> = all_crossings(&data).unwrap().iter().map(|c| (c.0, c.1)).collect();
        assert_eq!(pairs, vec![(8, 16), (8, 32), (16, 32)]);
    }
}
