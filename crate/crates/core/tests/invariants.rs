//! Property tests over the communication ledger, permutations, the
//! cumulative-cost identity, and the exponent fitter.

use proptest::prelude::*;

use lu25d::engine::{self, EngineConfig};
use lu25d::fabric::{CommFabric, Phase};
use lu25d::grid::GridConfig;
use lu25d::harness::fit_exponent;
use lu25d::matrix::{apply_permutation, random_matrix, residual_norm, RowPermutation};
use lu25d::model::{eq3_closed_scaled, eq3_summation_scaled};

proptest! {
    #[test]
    fn conservation_under_arbitrary_sends(
        sends in prop::collection::vec((0usize..8, 0usize..8, 1u64..100), 1..40),
    ) {
        let grid = GridConfig::new(4, 2, 1).unwrap();
        let procs = grid.all_procs();
        let mut fabric = CommFabric::new(grid);
        fabric.begin_superstep(Phase::Bcast, None).unwrap();
        for (from, to, words) in &sends {
            fabric.send(procs[*from], procs[*to], *words).unwrap();
        }
        fabric.end_superstep().unwrap();
        let ledger = fabric.finalize().unwrap();
        prop_assert!(ledger.check_conservation().is_ok());

        // The critical path never exceeds total traffic and is at
        // least the average over processors.
        let rec = &ledger.supersteps()[0];
        let crit = ledger.critical_path_cost(None);
        prop_assert!(crit <= rec.total_received());
        prop_assert!(crit * 8 >= rec.total_received());
    }

    #[test]
    fn broadcast_delivers_exactly_once(
        root in 0usize..6,
        words in 1u64..500,
    ) {
        let grid = GridConfig::new(6, 1, 1).unwrap();
        let procs = grid.all_procs();
        let mut fabric = CommFabric::new(grid);
        fabric.begin_superstep(Phase::PanelFactor, None).unwrap();
        fabric.broadcast(&procs, procs[root], words).unwrap();
        fabric.end_superstep().unwrap();
        let ledger = fabric.finalize().unwrap();
        let rec = &ledger.supersteps()[0];
        prop_assert_eq!(rec.total_received(), words * 5);
        for (i, p) in procs.iter().enumerate() {
            let got = rec.recv.get(p).copied().unwrap_or(0);
            prop_assert_eq!(got, if i == root { 0 } else { words });
        }
    }

    #[test]
    fn permutation_roundtrip(map in Just(()).prop_flat_map(|_| {
        prop::collection::vec(0usize..64, 2..64).prop_map(|v| {
            let mut m: Vec<usize> = (0..v.len()).collect();
            for (i, &r) in v.iter().enumerate() {
                m.swap(i, r % v.len());
            }
            m
        })
    })) {
        let n = map.len();
        let p = RowPermutation::new(map).unwrap();
        let a = random_matrix(n, 5).unwrap();
        let pa = apply_permutation(&a, &p).unwrap();
        let back = apply_permutation(&pa, &p.inverse()).unwrap();
        prop_assert_eq!(back.data(), a.data());
    }

    #[test]
    fn cumulative_identity(v in 1u64..32, k in 1u64..64) {
        let n = v * k;
        prop_assert_eq!(eq3_closed_scaled(n, v), eq3_summation_scaled(n, v));
    }

    #[test]
    fn fit_recovers_planted_exponent(
        slope in -2.0f64..0.5,
        scale in 1.0f64..1e6,
    ) {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&p: &f64| (p, scale * p.powf(slope)))
            .collect();
        let f = fit_exponent(&pts).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!((f.r2 - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn factorization_correct_on_random_seeds(seed in 0u64..10_000) {
        let grid = GridConfig::new(2, 2, 2).unwrap();
        let cfg = EngineConfig::new(32, 4, grid, seed);
        let a = random_matrix(32, seed).unwrap();
        let run = engine::run(&cfg, &a).unwrap();
        prop_assert!(residual_norm(&a, &run.factors).unwrap() < 1e-10);
        prop_assert!(run.ledger.check_conservation().is_ok());
        let total: u64 = run.pivot_owner_counts.values().sum();
        prop_assert_eq!(total, 32);
        for proc in run.pivot_owner_counts.keys() {
            prop_assert!(grid.contains(*proc));
        }
    }
}
