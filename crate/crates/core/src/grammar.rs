//! The generative process: pick a symbol uniformly, then terminate it
//! (probability `q t`), branch it (`q (1 - t)`) or attempt a
//! context-sensitive rewrite (`1 - q`) accepted by the Metropolis rule.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Branching, Couplings, ModelParams, SentenceState};

/// Per-chain random stream identified by `(master_seed, chain_index)`.
///
/// The master seed keys a ChaCha8 generator and the chain index selects
/// one of its 2^64 independent streams.
#[derive(Debug, Clone)]
pub struct ChainRng {
    master_seed: u64,
    chain_index: u64,
    inner: ChaCha8Rng,
}

impl ChainRng {
    pub fn new(master_seed: u64, chain_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(chain_index);
        Self { master_seed, chain_index, inner }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn chain_index(&self) -> u64 {
        self.chain_index
    }
}

impl RngCore for ChainRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Snapshots taken the first time the sentence reaches each requested
/// length, plus event counters for the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTrace {
    pub recorded_lengths: Vec<usize>,
    pub snapshots: Vec<SentenceState>,
    pub final_state: SentenceState,
    pub branch_events: usize,
    pub terminations: usize,
    pub flip_attempts: usize,
    pub flips_accepted: usize,
}

/// Single-site Metropolis kernel with a symmetric proposal: the new
/// symbol is uniform over the `K - 1` states different from the current
/// one.
#[derive(Debug, Clone)]
pub struct FlipKernel {
    couplings: Couplings,
    beta: f64,
    k: usize,
}

impl FlipKernel {
    pub fn new(params: &ModelParams, max_len: usize) -> Self {
        Self { couplings: Couplings::new(params, max_len), beta: params.beta(), k: params.k }
    }

    /// Proposed zero-based symbol replacing `old`.
    #[inline]
    pub fn propose<R: Rng + ?Sized>(&self, old: u16, rng: &mut R) -> u16 {
        let r = rng.random_range(0..(self.k - 1) as u16);
        if r >= old {
            r + 1
        } else {
            r
        }
    }

    /// Metropolis update at a fixed site. Returns whether the proposal
    /// was accepted.
    #[inline]
    pub fn flip_at<R: Rng + ?Sized>(&self, state: &mut SentenceState, site: usize, rng: &mut R) -> bool {
        let old = state.indices()[site];
        let new = self.propose(old, rng);
        let accept = if self.beta == 0.0 {
            true
        } else {
            let gap = self.couplings.gap(state.indices(), site, new);
            gap <= 0.0 || rng.random::<f64>() < (-self.beta * gap).exp()
        };
        if accept {
            state.set_index(site, new);
        }
        accept
    }

    /// Metropolis update at a uniformly chosen site.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut SentenceState, rng: &mut R) -> bool {
        let site = rng.random_range(0..state.len());
        self.flip_at(state, site, rng)
    }
}

/// One Metropolis rewrite attempt at a uniformly random site, accepted
/// with probability `min(1, exp(-beta dE))`.
///
/// Builds a coupling table on every call; loops should hold a
/// [`FlipKernel`] instead.
pub fn metropolis_flip<R: Rng + ?Sized>(
    state: &mut SentenceState,
    params: &ModelParams,
    rng: &mut R,
) -> bool {
    FlipKernel::new(params, state.len()).step(state, rng)
}

/// Replaces the symbol at `position` with two symbols according to the
/// branching rule. The sentence grows by exactly one.
pub fn branch<R: Rng + ?Sized>(
    state: &mut SentenceState,
    position: usize,
    params: &ModelParams,
    rng: &mut R,
) -> Result<()> {
    if position >= state.len() {
        return Err(Error::Index { index: position, len: state.len() });
    }
    branch_unchecked(state, position, params.branching, rng);
    Ok(())
}

#[inline]
fn branch_unchecked<R: Rng + ?Sized>(
    state: &mut SentenceState,
    position: usize,
    branching: Branching,
    rng: &mut R,
) {
    let (left, right) = match branching {
        Branching::RandomPair => {
            let k = state.alphabet_size() as u16;
            (rng.random_range(0..k), rng.random_range(0..k))
        }
        Branching::Duplicate => {
            let s = state.indices()[position];
            (s, s)
        }
    };
    state.replace_with_pair(position, left, right);
}

fn check_record_at(record_at: &[usize], target: usize) -> Result<()> {
    if record_at.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("record_at must be strictly ascending"));
    }
    if let (Some(&lo), Some(&hi)) = (record_at.first(), record_at.last()) {
        if lo < 2 || hi > target {
            return Err(Error::invalid(format!(
                "record_at lengths must lie in 2..={target}, got {lo}..={hi}"
            )));
        }
    }
    Ok(())
}

/// Grows one sentence from a single uniformly random symbol.
///
/// With `t = 0` every symbol stays rewritable and the run stops when the
/// length reaches `target_length`. With `t > 0` only nonterminals are
/// picked and the run stops when none remain or the length reaches
/// `target_length`, whichever comes first.
pub fn generate_sentence(
    params: &ModelParams,
    rng: &mut ChainRng,
    record_at: &[usize],
) -> Result<GenerationTrace> {
    params.validate()?;
    let target = params.target_length;
    check_record_at(record_at, target)?;

    let kernel = FlipKernel::new(params, target);
    let first = rng.random_range(0..params.k as u16);
    let mut state = SentenceState::from_indices(params.k, vec![first]);
    let tracking = params.t > 0.0;
    if tracking {
        state.enable_terminal_tracking();
    }

    let mut trace = GenerationTrace {
        recorded_lengths: Vec::with_capacity(record_at.len()),
        snapshots: Vec::with_capacity(record_at.len()),
        final_state: state.clone(),
        branch_events: 0,
        terminations: 0,
        flip_attempts: 0,
        flips_accepted: 0,
    };
    let mut pending = record_at.iter().copied().peekable();
    let p_terminate = params.q * params.t;

    while state.len() < target {
        let position = if tracking {
            let open = state.nonterminal_positions();
            if open.is_empty() {
                break;
            }
            open[rng.random_range(0..open.len())]
        } else {
            rng.random_range(0..state.len())
        };
        let u: f64 = rng.random();
        if u < p_terminate {
            state.mark_terminal(position);
            trace.terminations += 1;
        } else if u < params.q {
            branch_unchecked(&mut state, position, params.branching, rng);
            trace.branch_events += 1;
            if pending.peek() == Some(&state.len()) {
                pending.next();
                trace.recorded_lengths.push(state.len());
                trace.snapshots.push(state.clone());
            }
        } else {
            trace.flip_attempts += 1;
            if kernel.flip_at(&mut state, position, rng) {
                trace.flips_accepted += 1;
            }
        }
    }
    trace.final_state = state;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::energy_gap;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = ChainRng::new(7, 3);
        let mut b = ChainRng::new(7, 3);
        let mut c = ChainRng::new(7, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn polya_limit_is_fully_ordered() {
        let p = ModelParams { q: 1.0, branching: Branching::Duplicate, k: 5, target_length: 300, ..params() };
        for chain in 0..20 {
            let tr = generate_sentence(&p, &mut ChainRng::new(1, chain), &[]).unwrap();
            let counts = tr.final_state.counts();
            assert_eq!(counts.iter().filter(|&&c| c > 0).count(), 1);
            assert_eq!(tr.flip_attempts, 0);
        }
    }

    #[test]
    fn records_requested_lengths() {
        let p = ModelParams { target_length: 64, ..params() };
        let tr = generate_sentence(&p, &mut ChainRng::new(2, 0), &[16, 32]).unwrap();
        assert_eq!(tr.recorded_lengths, vec![16, 32]);
        assert_eq!(tr.snapshots.iter().map(|s| s.len()).collect::<Vec<_>>(), vec![16, 32]);
        assert_eq!(tr.final_state.len(), 64);
        assert_eq!(tr.branch_events, 63);
    }

    #[test]
    fn rejects_bad_record_at() {
        let p = ModelParams { target_length: 64, ..params() };
        let mut rng = ChainRng::new(0, 0);
        assert!(generate_sentence(&p, &mut rng, &[32, 16]).is_err());
        assert!(generate_sentence(&p, &mut rng, &[1]).is_err());
        assert!(generate_sentence(&p, &mut rng, &[128]).is_err());
        let short = ModelParams { target_length: 1, ..params() };
        assert!(generate_sentence(&short, &mut rng, &[]).is_err());
    }

    #[test]
    fn deterministic_trace() {
        let p = ModelParams { target_length: 128, temperature: 0.8, ..params() };
        let a = generate_sentence(&p, &mut ChainRng::new(11, 5), &[32, 64]).unwrap();
        let b = generate_sentence(&p, &mut ChainRng::new(11, 5), &[32, 64]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn termination_stops_growth() {
        let p = ModelParams { t: 0.6, q: 0.5, target_length: 10_000, ..params() };
        let tr = generate_sentence(&p, &mut ChainRng::new(3, 0), &[]).unwrap();
        assert!(tr.final_state.nonterminal_positions().is_empty() || tr.final_state.len() == 10_000);
        assert!(tr.terminations > 0);
        assert_eq!(tr.final_state.len(), tr.branch_events + 1);
    }

    #[test]
    fn duplicate_branch_copies() {
        let mut s = SentenceState::new(2, &[1, 2, 1]).unwrap();
        let p = ModelParams { branching: Branching::Duplicate, ..params() };
        branch(&mut s, 1, &p, &mut ChainRng::new(0, 0)).unwrap();
        assert_eq!(s.symbols(), vec![1, 2, 2, 1]);
        assert!(branch(&mut s, 4, &p, &mut ChainRng::new(0, 0)).is_err());
    }

    #[test]
    fn random_pair_outcomes_are_uniform() {
        let p = ModelParams { branching: Branching::RandomPair, ..params() };
        let mut rng = ChainRng::new(9, 0);
        let trials = 40_000;
        for start in [1, 2] {
            let mut counts = [0usize; 4];
            for _ in 0..trials {
                let mut s = SentenceState::new(2, &[start]).unwrap();
                branch(&mut s, 0, &p, &mut rng).unwrap();
                let v = s.indices();
                counts[(v[0] * 2 + v[1]) as usize] += 1;
            }
            for c in counts {
                let frac = c as f64 / trials as f64;
                // 5 sigma of a binomial(1/4)
                assert!((frac - 0.25).abs() < 5.0 * (0.1875 / trials as f64).sqrt(), "{counts:?}");
            }
        }
    }

    #[test]
    fn forced_site_worked_example_always_accepts() {
        let p = ModelParams { temperature: 1.0, ..params() };
        let base = SentenceState::new(2, &[1, 1, 2, 1, 1]).unwrap();
        assert_eq!(energy_gap(&base, 2, 1, &p).unwrap(), -2.0);
        let kernel = FlipKernel::new(&p, 5);
        let mut rng = ChainRng::new(4, 0);
        for _ in 0..100 {
            let mut s = base.clone();
            assert!(kernel.flip_at(&mut s, 2, &mut rng));
            assert_eq!(s.symbols(), vec![1, 1, 1, 1, 1]);
        }
    }

    #[test]
    fn infinite_temperature_accepts_everything() {
        let p = ModelParams { temperature: f64::INFINITY, k: 4, ..params() };
        let kernel = FlipKernel::new(&p, 16);
        let mut s = SentenceState::new(4, &[1; 16]).unwrap();
        let mut rng = ChainRng::new(5, 0);
        assert!((0..1000).all(|_| kernel.step(&mut s, &mut rng)));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn proposal_is_symmetric_and_never_stays() {
        let p = ModelParams { k: 4, ..params() };
        let kernel = FlipKernel::new(&p, 4);
        let mut rng = ChainRng::new(6, 0);
        let trials = 30_000;
        let mut m = [[0usize; 4]; 4];
        for old in 0..4u16 {
            for _ in 0..trials {
                let new = kernel.propose(old, &mut rng);
                m[old as usize][new as usize] += 1;
            }
        }
        let sd = (trials as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for a in 0..4 {
            assert_eq!(m[a][a], 0);
            for b in 0..4 {
                if a != b {
                    let expect = trials as f64 / 3.0;
                    assert!((m[a][b] as f64 - expect).abs() < 5.0 * sd);
                    assert!((m[a][b] as f64 - m[b][a] as f64).abs() < 7.0 * sd);
                }
            }
        }
    }
}
