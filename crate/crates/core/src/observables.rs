//! Measured quantities: magnetization and its moments, the two
//! susceptibilities, the Binder parameter, two-point correlations, mutual
//! information, magnetization histograms and rank-frequency tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SentenceState, SimplexBasis};

/// Symbols observed at one pair of positions `(i, j)` in one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSample {
    pub i: usize,
    pub j: usize,
    /// Zero-based symbol at `i`.
    pub a: u16,
    /// Zero-based symbol at `j`.
    pub b: u16,
}

/// One configuration's measured quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub length: usize,
    pub magnetization_vector: Vec<f64>,
    pub m: f64,
    pub m2: f64,
    pub m4: f64,
    pub symbol_counts: Vec<usize>,
    pub pair_samples: Vec<PairSample>,
}

impl ObservableRecord {
    pub fn from_state(state: &SentenceState, basis: &SimplexBasis) -> Result<Self> {
        Self::with_pairs(state, basis, &[])
    }

    /// Measures `state` and also keeps the symbols found at each `(i, j)`.
    pub fn with_pairs(
        state: &SentenceState,
        basis: &SimplexBasis,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        let (vector, m) = magnetization(state, basis)?;
        let sym = state.indices();
        let pair_samples = pairs
            .iter()
            .map(|&(i, j)| {
                let len = sym.len();
                let too_far = i.max(j);
                if too_far >= len {
                    return Err(Error::Index { index: too_far, len });
                }
                Ok(PairSample { i, j, a: sym[i], b: sym[j] })
            })
            .collect::<Result<Vec<_>>>()?;
        let m2 = m * m;
        Ok(Self {
            length: state.len(),
            magnetization_vector: vector,
            m,
            m2,
            m4: m2 * m2,
            symbol_counts: state.counts(),
            pair_samples,
        })
    }
}

/// `M = (1/N) sum_i e_{sigma_i}` and its norm.
pub fn magnetization(state: &SentenceState, basis: &SimplexBasis) -> Result<(Vec<f64>, f64)> {
    if state.alphabet_size() != basis.alphabet_size() {
        return Err(Error::invalid(format!(
            "sentence has K = {} but basis has K = {}",
            state.alphabet_size(),
            basis.alphabet_size()
        )));
    }
    if state.is_empty() {
        return Err(Error::invalid("magnetization of an empty sentence"));
    }
    Ok(magnetization_from_counts(&state.counts(), basis))
}

/// Magnetization depends on the configuration only through its counts.
pub fn magnetization_from_counts(counts: &[usize], basis: &SimplexBasis) -> (Vec<f64>, f64) {
    let n: usize = counts.iter().sum();
    let mut v = vec![0.0; basis.dim()];
    for (idx, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let w = c as f64 / n as f64;
        for (acc, e) in v.iter_mut().zip(basis.vector(idx)) {
            *acc += w * e;
        }
    }
    let m = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (v, m)
}

/// Sample means of `M`, `M^2`, `M^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub m: f64,
    pub m2: f64,
    pub m4: f64,
    pub count: usize,
}

impl Moments {
    pub fn of(records: &[ObservableRecord]) -> Self {
        let n = records.len() as f64;
        let (mut m, mut m2, mut m4) = (0.0, 0.0, 0.0);
        for r in records {
            m += r.m;
            m2 += r.m2;
            m4 += r.m4;
        }
        Self { m: m / n, m2: m2 / n, m4: m4 / n, count: records.len() }
    }

    pub fn chi(&self, n: usize) -> f64 {
        // clamp rounding noise; the variance is nonnegative
        n as f64 * (self.m2 - self.m * self.m).max(0.0)
    }

    pub fn chi_tilde(&self, n: usize) -> f64 {
        n as f64 * self.m2
    }

    pub fn binder(&self, k: usize) -> Result<f64> {
        binder_from_moments(self.m2, self.m4, k)
    }
}

fn check_samples(samples: &[ObservableRecord], n: Option<usize>) -> Result<usize> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {}", samples.len())));
    }
    let len = n.unwrap_or(samples[0].length);
    if let Some(bad) = samples.iter().find(|r| r.length != len) {
        return Err(Error::invalid(format!("mixed lengths {} and {}", len, bad.length)));
    }
    Ok(len)
}

/// `(chi, chi_tilde) = (N (<M^2> - <M>^2), N <M^2>)`.
pub fn susceptibilities(samples: &[ObservableRecord], n: usize) -> Result<(f64, f64)> {
    check_samples(samples, Some(n))?;
    let mo = Moments::of(samples);
    Ok((mo.chi(n), mo.chi_tilde(n)))
}

/// `U = -(K-1)/2 (<M^4>/<M^2>^2 - (K+1)/(K-1))`: zero for an isotropic
/// Gaussian order parameter, one for a fully ordered ensemble.
pub fn binder_parameter(samples: &[ObservableRecord], k: usize) -> Result<f64> {
    check_samples(samples, None)?;
    Moments::of(samples).binder(k)
}

pub fn binder_from_moments(m2: f64, m4: f64, k: usize) -> Result<f64> {
    if !(m2 > 0.0) {
        return Err(Error::DegenerateEnsemble("<M^2> = 0".into()));
    }
    let kf = k as f64;
    Ok(-(kf - 1.0) / 2.0 * (m4 / (m2 * m2) - (kf + 1.0) / (kf - 1.0)))
}

fn check_pair(samples: &[SentenceState], i: usize, j: usize, k: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    let far = i.max(j);
    for s in samples {
        if far >= s.len() {
            return Err(Error::invalid(format!("index {far} beyond sentence length {}", s.len())));
        }
        if s.alphabet_size() != k {
            return Err(Error::invalid("alphabet size mismatch"));
        }
    }
    Ok(())
}

/// `G(i, j) = <e_{sigma_i} . e_{sigma_j}> = (K <delta(sigma_i, sigma_j)> - 1) / (K - 1)`.
pub fn correlation(samples: &[SentenceState], i: usize, j: usize, k: usize) -> Result<f64> {
    check_pair(samples, i, j, k)?;
    let agree = samples.iter().filter(|s| s.indices()[i] == s.indices()[j]).count();
    let value = correlation_from_agreement(agree as f64 / samples.len() as f64, k);
    debug_assert!({
        let basis = SimplexBasis::iterative(k).expect("k validated");
        let dot = correlation_dot(samples, &basis, i, j).expect("checked above");
        (dot - value).abs() < 1e-12
    });
    Ok(value)
}

/// Correlation from the mean agreement `<delta(sigma_i, sigma_j)>`.
pub fn correlation_from_agreement(agreement: f64, k: usize) -> f64 {
    let kf = k as f64;
    (kf * agreement - 1.0) / (kf - 1.0)
}

pub fn correlation_from_pairs(pairs: &[PairSample], k: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    let agree = pairs.iter().filter(|p| p.a == p.b).count();
    Ok(correlation_from_agreement(agree as f64 / pairs.len() as f64, k))
}

/// Direct average of `e_{sigma_i} . e_{sigma_j}` over the ensemble.
pub fn correlation_dot(
    samples: &[SentenceState],
    basis: &SimplexBasis,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_pair(samples, i, j, basis.alphabet_size())?;
    let total: f64 = samples
        .iter()
        .map(|s| {
            let a = basis.vector(s.indices()[i] as usize);
            let b = basis.vector(s.indices()[j] as usize);
            a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
        })
        .sum();
    Ok(total / samples.len() as f64)
}

/// Plug-in mutual information (nats) of a `K x K` joint distribution given
/// row-major. `0 ln 0 = 0`.
pub fn mutual_information_from_joint(joint: &[f64], k: usize) -> f64 {
    debug_assert_eq!(joint.len(), k * k);
    let mut row = vec![0.0; k];
    let mut col = vec![0.0; k];
    for a in 0..k {
        for b in 0..k {
            row[a] += joint[a * k + b];
            col[b] += joint[a * k + b];
        }
    }
    let mut info = 0.0;
    for a in 0..k {
        for b in 0..k {
            let p = joint[a * k + b];
            if p > 0.0 {
                info += p * (p / (row[a] * col[b])).ln();
            }
        }
    }
    // rounding can leave a tiny negative value for factorizing joints
    info.max(0.0)
}

pub fn mutual_information_from_pairs(pairs: &[PairSample], k: usize) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("empty ensemble"));
    }
    let mut joint = vec![0.0; k * k];
    let w = 1.0 / pairs.len() as f64;
    for p in pairs {
        joint[p.a as usize * k + p.b as usize] += w;
    }
    Ok(mutual_information_from_joint(&joint, k))
}

/// Plug-in mutual information between positions `i` and `j`. Biased
/// upward by roughly `(K-1)^2 / (2 samples)`.
pub fn mutual_information(samples: &[SentenceState], i: usize, j: usize, k: usize) -> Result<f64> {
    check_pair(samples, i, j, k)?;
    let pairs: Vec<PairSample> = samples
        .iter()
        .map(|s| PairSample { i, j, a: s.indices()[i], b: s.indices()[j] })
        .collect();
    mutual_information_from_pairs(&pairs, k)
}

/// Counts over left-closed, right-open bins `[n dM, (n+1) dM)` for
/// `n = 0..=floor(1/dM)`, so `M = 1` lands in the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub delta: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn bin_edges(&self, n: usize) -> (f64, f64) {
        (n as f64 * self.delta, (n + 1) as f64 * self.delta)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

pub const DEFAULT_DELTA_M: f64 = 0.02;

// slack for values like 0.06 / 0.02 = 2.9999999999999996
const BIN_SLACK: f64 = 1e-9;

pub fn histogram_of(values: impl IntoIterator<Item = f64>, delta_m: f64) -> Result<Histogram> {
    if !(delta_m > 0.0 && delta_m.is_finite()) {
        return Err(Error::invalid(format!("delta_M must be positive, got {delta_m}")));
    }
    let bins = (1.0 / delta_m + BIN_SLACK).floor() as usize + 1;
    let mut counts = vec![0; bins];
    for m in values {
        let idx = ((m / delta_m + BIN_SLACK).floor().max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { delta: delta_m, counts })
}

pub fn magnetization_histogram(samples: &[ObservableRecord], delta_m: f64) -> Result<Histogram> {
    histogram_of(samples.iter().map(|r| r.m), delta_m)
}

/// Relative symbol frequencies `n_k / N`, sorted descending.
pub fn rank_frequency(counts: &[usize]) -> Result<Vec<f64>> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::invalid("rank-frequency of an empty sentence"));
    }
    let mut freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    freq.sort_by(|a, b| b.total_cmp(a));
    Ok(freq)
}

/// Mean rank-frequency curve: each sentence's frequencies are sorted, then
/// averaged rank by rank. All sentences must share one alphabet size.
pub fn rank_frequency_average<'a, I>(sentences: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut acc: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for counts in sentences {
        if n == 0 {
            acc = vec![0.0; counts.len()];
        } else if counts.len() != acc.len() {
            return Err(Error::invalid("alphabet size mismatch"));
        }
        for (a, f) in acc.iter_mut().zip(rank_frequency(counts)?) {
            *a += f;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::invalid("no sentences to average"));
    }
    Ok(acc.into_iter().map(|a| a / n as f64).collect())
}

/// Ensemble rank-frequency over records with `M` in `[lo, hi]` when a
/// window is given.
pub fn rank_frequency_ensemble(
    records: &[ObservableRecord],
    window: Option<(f64, f64)>,
) -> Result<Vec<f64>> {
    let kept: Vec<&[usize]> = records
        .iter()
        .filter(|r| window.is_none_or(|(lo, hi)| r.m >= lo && r.m <= hi))
        .map(|r| r.symbol_counts.as_slice())
        .collect();
    if kept.is_empty() {
        return Err(Error::invalid("no records inside the window"));
    }
    rank_frequency_average(kept)
}

/// A value with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Standard error of the mean of `values` treated as independent batch
/// estimates: sample standard deviation over `sqrt(B)`.
pub fn batch_stderr(values: &[f64]) -> f64 {
    let b = values.len();
    if b < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Which probe produced a correlation entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// `(i0, i0 + delta_i)` inside one sentence.
    WithinSentence,
    /// `(0, floor(N/4) - 1)` across recorded lengths.
    GrowthPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub probe: ProbeKind,
    pub i: usize,
    pub j: usize,
    pub correlation: Estimate,
    pub mutual_information: Estimate,
}

/// Aggregated statistics of one grid point at one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub length: usize,
    pub n_samples: usize,
    pub m: Estimate,
    pub m2: Estimate,
    pub m4: Estimate,
    pub chi: Estimate,
    pub chi_tilde: Estimate,
    /// `None` when `<M^2> = 0`.
    pub binder: Option<Estimate>,
    pub histogram: Histogram,
    pub correlations: Vec<CorrelationEntry>,
    pub rank_frequency: Vec<f64>,
}

impl EnsembleStats {
    /// Pools equal-sized batches of records: means over every record,
    /// standard errors from the spread of per-batch estimates.
    pub fn from_batches(
        batches: &[Vec<ObservableRecord>],
        k: usize,
        delta_m: f64,
        probes: &[(ProbeKind, usize, usize)],
    ) -> Result<Self> {
        if batches.len() < 2 {
            return Err(Error::invalid("need at least 2 batches for standard errors"));
        }
        let all: Vec<ObservableRecord> = batches.iter().flatten().cloned().collect();
        let length = check_samples(&all, None)?;
        let pooled = Moments::of(&all);
        let per_batch: Vec<Moments> = batches.iter().map(|b| Moments::of(b)).collect();

        let est = |value: f64, f: &dyn Fn(&Moments) -> f64| Estimate {
            value,
            stderr: batch_stderr(&per_batch.iter().map(f).collect::<Vec<_>>()),
        };
        let binder = match pooled.binder(k) {
            Ok(u) => {
                let per: Option<Vec<f64>> = per_batch.iter().map(|m| m.binder(k).ok()).collect();
                Some(Estimate { value: u, stderr: per.map_or(f64::NAN, |v| batch_stderr(&v)) })
            }
            Err(_) => None,
        };

        let mut correlations = Vec::with_capacity(probes.len());
        for &(probe, i, j) in probes {
            let pick = |recs: &[ObservableRecord]| -> Vec<PairSample> {
                recs.iter()
                    .filter_map(|r| r.pair_samples.iter().find(|p| p.i == i && p.j == j).copied())
                    .collect()
            };
            let pooled_pairs = pick(&all);
            if pooled_pairs.len() != all.len() {
                return Err(Error::invalid(format!("pair ({i}, {j}) missing from some records")));
            }
            let mut g = Vec::with_capacity(batches.len());
            let mut mi = Vec::with_capacity(batches.len());
            for b in batches {
                let pairs = pick(b);
                g.push(correlation_from_pairs(&pairs, k)?);
                mi.push(mutual_information_from_pairs(&pairs, k)?);
            }
            correlations.push(CorrelationEntry {
                probe,
                i,
                j,
                correlation: Estimate {
                    value: correlation_from_pairs(&pooled_pairs, k)?,
                    stderr: batch_stderr(&g),
                },
                mutual_information: Estimate {
                    value: mutual_information_from_pairs(&pooled_pairs, k)?,
                    stderr: batch_stderr(&mi),
                },
            });
        }

        Ok(Self {
            length,
            n_samples: all.len(),
            m: est(pooled.m, &|m| m.m),
            m2: est(pooled.m2, &|m| m.m2),
            m4: est(pooled.m4, &|m| m.m4),
            chi: est(pooled.chi(length), &|m| m.chi(length)),
            chi_tilde: est(pooled.chi_tilde(length), &|m| m.chi_tilde(length)),
            binder,
            histogram: magnetization_histogram(&all, delta_m)?,
            correlations,
            rank_frequency: rank_frequency_ensemble(&all, None)?,
        })
    }
}
