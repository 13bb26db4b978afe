use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isl_core::allocation::AllocationAlgorithm;
use isl_core::allocation::{
    evaluate, gra, gra_instrumented, random_alloc_with, round_robin, GraMode,
};
use isl_core::geometry::{ConstellationConfig, Direction, SatId};
use isl_core::graph::{Edge, FeasibilityGraph, Matching};
use isl_core::linkbudget::{worst_case_interference, AccessScheme, RadioConfig, ResourceSet};
use isl_core::matching::{geo, giem, gmm, MatchingAlgorithm};
use isl_core::oracle::{
    interference_by_enumeration, optimal_allocation, optimal_matching, random_instance,
};
use isl_core::report::write_all;
use isl_core::sim::{run_detailed, ExperimentSpec, RunOptions};

fn side() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Minus), Just(Direction::Plus)]
}

/// Arbitrary graph on up to 8 vertices with random rates and antenna sides.
fn synthetic_graph() -> impl Strategy<Value = FeasibilityGraph> {
    (2usize..=8).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        let k = pairs.len();
        (
            Just(n),
            Just(pairs),
            proptest::collection::vec((any::<bool>(), 1e3f64..1e8, side(), side()), k),
        )
            .prop_map(|(n, pairs, attrs)| {
                let edges = pairs
                    .iter()
                    .zip(attrs)
                    .filter(|(_, a)| a.0)
                    .take(20)
                    .map(|(&(u, v), (_, rate, du, dv))| Edge {
                        u: SatId(u),
                        v: SatId(v),
                        plane_u: u,
                        plane_v: v,
                        dist_m: 1e6,
                        loss: 1e17,
                        rate_snr_bps: rate,
                        dir_u: du,
                        dir_v: dv,
                    })
                    .collect();
                FeasibilityGraph::from_edges(n, edges)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn greedy_reaches_half_the_optimum_synthetic(g in synthetic_graph()) {
        let greedy = giem(&g, 1, 1e4);
        let (best, _) = optimal_matching(&g, 1, 1e4).unwrap();
        prop_assert!(greedy.is_permissible(1));
        prop_assert!(greedy.weight() >= 0.5 * best * (1.0 - 1e-12));
        prop_assert!(greedy.weight() <= best * (1.0 + 1e-12));
    }

    #[test]
    fn greedy_reaches_half_the_optimum_geometric(seed in any::<u64>()) {
        let (c, radio) = random_instance(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(c.len() <= 8);
        let g = FeasibilityGraph::build(&c, &radio);
        let greedy = giem(&g, 1, radio.r_min_bps);
        let (best, _) = optimal_matching(&g, 1, radio.r_min_bps).unwrap();
        prop_assert!(greedy.weight() >= 0.5 * best * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn closed_form_interference_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, radio) = random_instance(&mut rng).unwrap();
        let g = FeasibilityGraph::build(&c, &radio);
        // up to five pairs on one resource: at most four interferers each
        let mut edges = g.edges().to_vec();
        let take = edges.len().min(5);
        for i in 0..take {
            let j = rng.random_range(i..edges.len());
            edges.swap(i, j);
        }
        let plan: Vec<_> = edges[..take].iter().map(|&e| (e, 0)).collect();
        let rs = ResourceSet::new(1, AccessScheme::Ofdma).unwrap();
        let alloc = evaluate(&c, &radio, &rs, &plan);
        for x in alloc.assignments() {
            let others: Vec<_> = alloc
                .assignments()
                .iter()
                .filter(|y| y.pair.key() != x.pair.key())
                .map(|y| (y.pair.u, y.pair.v))
                .collect();
            prop_assert!(others.len() <= 4);
            for rx in [x.pair.u, x.pair.v] {
                let closed =
                    worst_case_interference(&c, &radio, &alloc, rx, (x.pair.u, x.pair.v), 0).unwrap();
                let brute = interference_by_enumeration(&c, &radio, rx, &others).unwrap();
                let scale = brute.abs().max(f64::MIN_POSITIVE);
                prop_assert!((closed - brute).abs() / scale < 1e-9 || closed == brute,
                    "closed {closed} vs enumeration {brute}");
            }
        }
    }

    #[test]
    fn gra_dominates_baselines_and_is_bounded_by_optimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, radio) = random_instance(&mut rng).unwrap();
        let g = FeasibilityGraph::build(&c, &radio);
        let m = giem(&g, 2, radio.r_min_bps);
        prop_assume!(!m.is_empty() && m.len() <= 5);
        let k = rng.random_range(1..=3);
        let scheme = if rng.random_bool(0.5) { AccessScheme::Ofdma } else { AccessScheme::Cdma };
        let rs = ResourceSet::new(k, scheme).unwrap();
        let w_gra = gra(&c, &radio, &rs, &m).value();
        let tol = 1e-9 * w_gra.max(1.0);
        prop_assert!(w_gra + tol >= round_robin(&c, &radio, &rs, &m).value());
        let best_random = (0..100)
            .map(|_| random_alloc_with(&c, &radio, &rs, &m, &mut rng).value())
            .fold(0.0, f64::max);
        prop_assert!(w_gra + tol >= best_random);
        let pairs: Vec<_> = m.pairs().iter().map(|e| (e.u, e.v)).collect();
        let (w_opt, _) = optimal_allocation(&c, &radio, &rs, &pairs).unwrap();
        prop_assert!(w_opt + tol >= w_gra, "optimum {w_opt} below GRA {w_gra}");
    }

    #[test]
    fn gra_modes_agree(seed in any::<u64>(), k in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, radio) = random_instance(&mut rng).unwrap();
        let g = FeasibilityGraph::build(&c, &radio);
        let m = giem(&g, 2, radio.r_min_bps);
        let rs = ResourceSet::new(k, AccessScheme::Ofdma).unwrap();
        let (a, sa) = gra_instrumented(&c, &radio, &rs, &m, GraMode::Incremental);
        let (b, _) = gra_instrumented(&c, &radio, &rs, &m, GraMode::Full);
        prop_assert_eq!(a.resources(), b.resources());
        prop_assert!(a.covers(&m));
        let v = a.value();
        prop_assert!((sa.incremental_value - v).abs() <= 1e-9 * v.max(1.0));
        // at most 4K(m−1) interference terms at the m-th pair
        let n = m.len() as u64;
        prop_assert!(sa.interference_terms <= 4 * k as u64 * n * n.saturating_sub(1) / 2);
    }

    #[test]
    fn every_matching_is_permissible(g in synthetic_graph(), q in 1usize..=2, mask in any::<u32>()) {
        let mut prev = Matching::new(g.vertex_count());
        for (i, e) in g.edges().iter().enumerate() {
            if mask >> (i % 32) & 1 == 1 {
                prev.try_insert(e, q);
            }
        }
        prop_assert!(prev.is_permissible(q));
        prop_assert!(giem(&g, q, 1e4).is_permissible(q));
        prop_assert!(gmm(&g, q, 1e4, &prev).is_permissible(q));
    }
}

fn small_spec(seed: u64) -> ExperimentSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let algo = [
        MatchingAlgorithm::Giem,
        MatchingAlgorithm::Gmm,
        MatchingAlgorithm::Geo,
    ][rng.random_range(0..3)];
    let alloc = [
        AllocationAlgorithm::Gra,
        AllocationAlgorithm::RoundRobin,
        AllocationAlgorithm::Random,
        AllocationAlgorithm::None,
    ][rng.random_range(0..4)];
    let mut radio = RadioConfig::default();
    if rng.random_bool(0.5) {
        radio.antenna = isl_core::linkbudget::Antenna::Isotropic;
    }
    ExperimentSpec {
        constellation: ConstellationConfig::walker_star(
            rng.random_range(3..=8),
            rng.random_range(4..=16),
            600e3,
            10e3,
        ),
        radio,
        transceivers: rng.random_range(1..=2),
        matching_algo: algo,
        allocation_algo: alloc,
        resource_set: ResourceSet::new(
            rng.random_range(1..=4),
            if rng.random_bool(0.5) {
                AccessScheme::Ofdma
            } else {
                AccessScheme::Cdma
            },
        )
        .unwrap(),
        period_s: 30.0,
        n_sim: rng.random_range(1..=40),
        seed: rng.random(),
    }
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .filter(|p| p.file_name().unwrap() != "runtimes.csv")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulations_are_permissible_and_reproducible(seed in any::<u64>()) {
        let spec = small_spec(seed);
        let opts = RunOptions { keep_realizations: true, keep_edges: true };
        let a = run_detailed(&spec, &opts).unwrap();
        let b = run_detailed(&spec, &opts).unwrap();
        prop_assert_eq!(a.report.permissibility_violations, 0);
        prop_assert_eq!(a.report.mu_m_hat, a.report.mu_m_hat_degrees);
        for r in &a.realizations {
            prop_assert!(r.matching.matching.is_permissible(spec.transceivers));
        }
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_all(da.path(), &[&a]).unwrap();
        write_all(db.path(), &[&b]).unwrap();
        let (fa, fb) = (csv_files(da.path()), csv_files(db.path()));
        prop_assert_eq!(fa.len(), 9);
        prop_assert_eq!(fa, fb);
    }
}

#[test]
fn geo_on_every_table_size_is_permissible() {
    for planes in 5..=8 {
        for q in 1..=2 {
            let c = isl_core::geometry::Constellation::new(ConstellationConfig::walker_star(
                planes, 40, 600e3, 10e3,
            ))
            .unwrap()
            .propagate(12_345.0)
            .unwrap();
            let g = FeasibilityGraph::build(&c, &RadioConfig::default());
            assert!(geo(&c, &g, q, 10e3).is_permissible(q));
        }
    }
}
