use proptest::prelude::*;

use potts_csg::fss::{binder_crossing, collapse_residual, BinderPoint, CollapsePoint, ReducedTemperature};
use potts_csg::observables::{
    histogram_of, magnetization_from_counts, mutual_information_from_pairs, Moments, PairSample,
};
use potts_csg::{
    build_simplex_basis, energy_gap, generate_sentence, total_energy, ChainRng, ModelParams,
    ObservableRecord, SentenceState,
};

fn sentence(max_k: usize, max_n: usize) -> impl Strategy<Value = (usize, Vec<usize>)> {
    (2..=max_k).prop_flat_map(move |k| (Just(k), prop::collection::vec(1..=k, 2..=max_n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gap_matches_total_energy_difference(
        (k, symbols) in sentence(4, 32),
        site_frac in 0.0..1.0f64,
        new_frac in 0.0..1.0f64,
        s in 0.05..3.0f64,
        r in 0.0..=1.0f64,
        coupling in -2.0..2.0f64,
    ) {
        let n = symbols.len();
        // the pair Hamiltonian is only defined for symmetric windows
        let params = ModelParams { k, s, r_minus: r, r_plus: r, coupling, target_length: n, ..ModelParams::default() };
        let state = SentenceState::new(k, &symbols).unwrap();
        let site = ((site_frac * n as f64) as usize).min(n - 1);
        let new = 1 + ((new_frac * k as f64) as usize).min(k - 1);
        let gap = energy_gap(&state, site, new, &params).unwrap();
        let mut after = state.clone();
        after.set(site, new).unwrap();
        let diff = total_energy(&after, &params) - total_energy(&state, &params);
        prop_assert!((gap - diff).abs() < 1e-10, "gap {gap} vs diff {diff}");
    }

    #[test]
    fn magnetization_ignores_labels(counts in prop::collection::vec(0usize..50, 2..8), shift in 0usize..8) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let basis = build_simplex_basis(counts.len()).unwrap();
        let mut rotated = counts.clone();
        rotated.rotate_left(shift % counts.len());
        let mut reversed = counts.clone();
        reversed.reverse();
        let (_, m) = magnetization_from_counts(&counts, &basis);
        for other in [rotated, reversed] {
            let (_, m2) = magnetization_from_counts(&other, &basis);
            prop_assert!((m - m2).abs() < 1e-12);
        }
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&m));
    }

    #[test]
    fn mutual_information_is_nonnegative(
        k in 2usize..6,
        raw in prop::collection::vec((0u16..6, 0u16..6), 1..300),
    ) {
        let pairs: Vec<PairSample> = raw
            .into_iter()
            .map(|(a, b)| PairSample { i: 0, j: 1, a: a % k as u16, b: b % k as u16 })
            .collect();
        let mi = mutual_information_from_pairs(&pairs, k).unwrap();
        prop_assert!(mi >= 0.0 && mi <= (k as f64).ln() + 1e-12);
    }

    #[test]
    fn chi_tilde_dominates_chi(
        k in 2usize..5,
        sentences in prop::collection::vec(prop::collection::vec(0usize..5, 8), 1..40),
    ) {
        let basis = build_simplex_basis(k).unwrap();
        let records: Vec<ObservableRecord> = sentences
            .iter()
            .map(|s| {
                let symbols: Vec<usize> = s.iter().map(|v| 1 + v % k).collect();
                ObservableRecord::from_state(&SentenceState::new(k, &symbols).unwrap(), &basis).unwrap()
            })
            .collect();
        let mom = Moments::of(&records);
        prop_assert!(mom.chi(8) >= 0.0);
        prop_assert!(mom.chi_tilde(8) - mom.chi(8) >= -1e-12);
    }

    #[test]
    fn histogram_counts_every_value(values in prop::collection::vec(0.0..=1.0f64, 0..200), dm in 0.005..0.5f64) {
        let h = histogram_of(values.iter().copied(), dm).unwrap();
        prop_assert_eq!(h.total(), values.len());
    }

    #[test]
    fn crossing_is_symmetric(
        a in prop::collection::vec(-1.0..1.0f64, 4..10),
        b in prop::collection::vec(-1.0..1.0f64, 4..10),
    ) {
        let curve = |size: usize, vals: &[f64]| -> Vec<BinderPoint> {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| BinderPoint { temperature: 0.5 + 0.1 * i as f64, size, value: v, stderr: 0.01 })
                .collect()
        };
        let mut data = curve(16, &a);
        data.extend(curve(32, &b));
        let x = binder_crossing(&data, 16, 32).unwrap();
        let y = binder_crossing(&data, 32, 16).unwrap();
        prop_assert_eq!(
            x.estimate().map(|c| (c.temperature, c.error)),
            y.estimate().map(|c| (c.temperature, c.error))
        );
    }

    #[test]
    fn collapse_residual_ignores_row_order(
        seed in any::<u64>(),
        tc in 0.8..1.2f64,
        nu in 1.0..3.0f64,
        gamma in 1.0..2.5f64,
    ) {
        let mut data = Vec::new();
        for (n, size) in [16.0, 32.0, 64.0f64].iter().enumerate() {
            for i in 0..8 {
                let temperature = 0.6 + 0.1 * i as f64;
                let value = size.powf(0.7) / (1.0 + (temperature - 1.0).powi(2) * size) + 0.01 * ((i * 7 + n * 3) % 5) as f64;
                data.push(CollapsePoint { temperature, size: *size, value, stderr: 0.0 });
            }
        }
        let mut shuffled = data.clone();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        for mode in [ReducedTemperature::TwoSided, ReducedTemperature::Signed] {
            let a = collapse_residual(&data, tc, nu, gamma, mode);
            let b = collapse_residual(&shuffled, tc, nu, gamma, mode);
            prop_assert!(a == b || (a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn growth_reaches_target_with_valid_symbols(
        seed in any::<u64>(),
        k in 2usize..5,
        q in 0.05..1.0f64,
        n in 2usize..64,
        temperature in 0.2..3.0f64,
    ) {
        let params = ModelParams { k, q, temperature, target_length: n, ..ModelParams::default() };
        let trace = generate_sentence(&params, &mut ChainRng::new(seed, 0), &[n]).unwrap();
        prop_assert_eq!(trace.final_state.len(), n);
        prop_assert!(trace.final_state.indices().iter().all(|&s| (s as usize) < k));
        prop_assert_eq!(trace.branch_events, n - 1);
        prop_assert_eq!(trace.final_state.counts().iter().sum::<usize>(), n);
    }
}
