use super::{ModelParams, SentenceState};
use crate::error::{Error, Result};

/// Energy change of replacing the symbol at `site` by the 1-based
/// `proposed` symbol.
///
/// Each site sees `floor(N r_minus)` neighbours to its left and
/// `floor(N r_plus)` to its right, `N` being the current length; terms
/// that fall off either end of the sentence are dropped.
pub fn energy_gap(
    state: &SentenceState,
    site: usize,
    proposed: usize,
    params: &ModelParams,
) -> Result<f64> {
    let n = state.len();
    if site >= n {
        return Err(Error::Index { index: site, len: n });
    }
    if !(1..=params.k).contains(&proposed) || params.k != state.alphabet_size() {
        return Err(Error::invalid(format!("proposed symbol {proposed} outside 1..={}", params.k)));
    }
    let sym = state.indices();
    let old = sym[site];
    let new = (proposed - 1) as u16;
    if old == new {
        return Ok(0.0);
    }
    let (left, right) = params.windows(n);
    let exponent = 1.0 + params.s;
    let term = |other: u16, dist: usize| {
        let d = f64::from(u8::from(old == other)) - f64::from(u8::from(new == other));
        d / (dist as f64).powf(exponent)
    };
    let mut sum = 0.0;
    for l in 1..=left.min(site) {
        sum += term(sym[site - l], l);
    }
    for l in 1..=right.min(n - 1 - site) {
        sum += term(sym[site + l], l);
    }
    Ok(params.coupling * sum)
}

/// Full Hamiltonian `H = -sum_{i<j} J_ij delta(s_i, s_j)` where pair
/// `(i, j)` interacts with strength `J / (j-i)^(1+s)` iff
/// `j - i <= floor(N r_plus)`.
pub fn total_energy(state: &SentenceState, params: &ModelParams) -> f64 {
    let sym = state.indices();
    let n = sym.len();
    let (_, window) = params.windows(n);
    let exponent = 1.0 + params.s;
    let mut h = 0.0;
    for i in 0..n {
        for j in (i + 1)..n.min(i + window + 1) {
            if sym[i] == sym[j] {
                h -= params.coupling / ((j - i) as f64).powf(exponent);
            }
        }
    }
    h
}

/// Precomputed couplings `J / l^(1+s)` for the sampling hot path.
#[derive(Debug, Clone)]
pub struct Couplings {
    // weights[l] for l >= 1; weights[0] unused
    weights: Vec<f64>,
    r_minus: f64,
    r_plus: f64,
}

impl Couplings {
    /// Table valid for sentences up to `max_len` symbols.
    pub fn new(params: &ModelParams, max_len: usize) -> Self {
        let exponent = 1.0 + params.s;
        let weights = (0..max_len.max(1))
            .map(|l| if l == 0 { 0.0 } else { params.coupling / (l as f64).powf(exponent) })
            .collect();
        Self { weights, r_minus: params.r_minus, r_plus: params.r_plus }
    }

    pub fn max_len(&self) -> usize {
        self.weights.len()
    }

    /// Same quantity as [`energy_gap`] (coupling included) on zero-based
    /// symbols, without validation.
    #[inline]
    pub fn gap(&self, sym: &[u16], site: usize, new: u16) -> f64 {
        let n = sym.len();
        debug_assert!(n <= self.weights.len());
        let old = sym[site];
        let nf = n as f64;
        let left = ((nf * self.r_minus).floor() as usize).min(site);
        let right = ((nf * self.r_plus).floor() as usize).min(n - 1 - site);
        let w = &self.weights;
        let mut sum = 0.0;
        for (l, &other) in sym[site - left..site].iter().rev().enumerate() {
            sum += w[l + 1] * (f64::from(u8::from(old == other)) - f64::from(u8::from(new == other)));
        }
        for (l, &other) in sym[site + 1..=site + right].iter().enumerate() {
            sum += w[l + 1] * (f64::from(u8::from(old == other)) - f64::from(u8::from(new == other)));
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(k: usize, r: f64) -> ModelParams {
        ModelParams { k, r_minus: r, r_plus: r, ..Default::default() }
    }

    #[test]
    fn worked_gap() {
        let p = params(2, 0.25);
        let s = SentenceState::new(2, &[1, 1, 2, 1, 1]).unwrap();
        assert_abs_diff_eq!(energy_gap(&s, 2, 1, &p).unwrap(), -2.0, epsilon = 1e-12);
        assert_eq!(energy_gap(&s, 2, 2, &p).unwrap(), 0.0);
    }

    #[test]
    fn left_edge_uses_right_window_only() {
        let p = params(2, 0.5);
        let s = SentenceState::new(2, &[1, 2, 2, 1]).unwrap();
        // window 2 each side; site 0 sees sites 1 and 2 only
        let want = -(1.0 + 1.0 / 2f64.powf(1.9));
        assert_abs_diff_eq!(energy_gap(&s, 0, 2, &p).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn worked_totals() {
        let p = params(2, 1.0);
        let same = SentenceState::new(2, &[1, 1, 1]).unwrap();
        let alt = SentenceState::new(2, &[1, 2, 1]).unwrap();
        let d2 = 1.0 / 2f64.powf(1.9);
        assert_abs_diff_eq!(total_energy(&same, &p), -(2.0 + d2), epsilon = 1e-12);
        assert_abs_diff_eq!(total_energy(&same, &p), -2.2679, epsilon = 1e-4);
        assert_abs_diff_eq!(total_energy(&alt, &p), -d2, epsilon = 1e-12);
        let one = SentenceState::new(2, &[2]).unwrap();
        assert_eq!(total_energy(&one, &p), 0.0);
    }

    #[test]
    fn errors() {
        let p = params(2, 0.25);
        let s = SentenceState::new(2, &[1, 2]).unwrap();
        assert!(matches!(energy_gap(&s, 2, 1, &p), Err(Error::Index { .. })));
        assert!(matches!(energy_gap(&s, 0, 3, &p), Err(Error::InvalidParameter(_))));
        assert!(energy_gap(&s, 0, 0, &p).is_err());
    }

    #[test]
    fn table_matches_direct_gap() {
        let p = ModelParams { k: 3, coupling: 1.5, s: 0.7, r_minus: 0.3, r_plus: 0.45, ..Default::default() };
        let s = SentenceState::new(3, &[1, 3, 2, 2, 1, 3, 3, 1, 2, 1, 1]).unwrap();
        let c = Couplings::new(&p, 64);
        for site in 0..s.len() {
            for new in 1..=3 {
                let direct = energy_gap(&s, site, new, &p).unwrap();
                let fast = c.gap(s.indices(), site, (new - 1) as u16);
                assert_abs_diff_eq!(direct, fast, epsilon = 1e-12);
            }
        }
    }
}
