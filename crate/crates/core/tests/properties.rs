// SPDX-License-Identifier: Apache-2.0
//! Randomized invariants, checked against brute-force oracles.

mod common;

use common::*;
use maxlin::graph::{CausalOrdering, Dag};
use maxlin::identify::{
    enumerate_all, enumerate_all_rmwm, reachability_from_initials, recover_from_ordering,
    recover_from_reachability, recover_from_reachability_rmwm, recover_rmwm_from_initials,
    EnumerateOptions,
};
use maxlin::mlcm::{
    destandardize, is_mlcm, is_rmwm_mlcm, max_weighted_triple, minimum_ml_dag,
    minimum_ml_dag_unstandardized, standardize, triple_gap,
};
use maxlin::random::{generate, random_dag, GenConfig, ModelKind};
use maxlin::simulate::LimitDistribution;
use maxlin::taildep::{
    check_rmwm_tdm, clique_initial_filter, independence_pattern_check, lambda_coefficients,
    lambda_representation, maximum_chi_cliques, mu_coefficients, mu_representation,
    tdm_from_std_mlcm,
};
use maxlin::{Tolerance, WeightedModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn kind_of(k: u8) -> ModelKind {
    match k % 4 {
        0 => ModelKind::Random,
        1 => ModelKind::Polytree,
        2 => ModelKind::Homogeneous,
        _ => ModelKind::MaxWeighted,
    }
}

fn model(d: usize, density: f64, alpha_ix: usize, kind: u8, seed: u64) -> WeightedModel {
    let mut cfg = GenConfig::new(d, kind_of(kind));
    cfg.density = density;
    cfg.alpha = [0.5, 1.0, 2.0][alpha_ix % 3];
    cfg.weight_range = (0.5, 2.0);
    generate(&cfg, seed).unwrap()
}

fn arb_model(max_d: usize) -> impl Strategy<Value = WeightedModel> {
    (
        1..=max_d,
        0.0..=1.0f64,
        0..3usize,
        any::<u8>(),
        any::<u64>(),
    )
        .prop_map(|(d, p, a, k, s)| model(d, p, a, k, s))
}

fn arb_rmwm(max_d: usize) -> impl Strategy<Value = WeightedModel> {
    (1..=max_d, 0.0..=1.0f64, 0..3usize, 1..4u8, any::<u64>())
        .prop_map(|(d, p, a, k, s)| model(d, p, a, k, s))
}

fn arb_dag(max_d: usize) -> impl Strategy<Value = Dag> {
    (1..=max_d, 0.0..=1.0f64, any::<u64>()).prop_map(|(d, p, s)| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        random_dag(d, p, &mut rng).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reachability_matches_bfs(g in arb_dag(8)) {
        let bfs = reach_by_bfs(&g);
        for (j, row) in bfs.iter().enumerate() {
            for (i, &r) in row.iter().enumerate() {
                prop_assert_eq!(g.reach().get(j, i), r);
            }
        }
    }

    #[test]
    fn transitive_reduction_is_minimal_and_idempotent(g in arb_dag(7)) {
        let tr = g.transitive_reduction();
        prop_assert_eq!(tr.reachability_matrix(), g.reachability_matrix());
        prop_assert_eq!(&tr.transitive_reduction(), &tr);
        prop_assert_eq!(tr.edges().collect::<Vec<_>>(), reduction_by_paths(&g));
        prop_assert_eq!(&Dag::from_reachability(g.reach()), &tr);
    }

    #[test]
    fn random_causal_orderings_validate(g in arb_dag(8), s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sigma = g.random_causal_ordering(&mut rng);
        prop_assert!(g.validate_causal_ordering(&sigma).unwrap());
        let topo = CausalOrdering::from_order(g.topological_order().to_vec()).unwrap();
        prop_assert!(g.validate_causal_ordering(&topo).unwrap());
    }

    #[test]
    fn path_analysis_matches_path_enumeration(m in arb_model(6)) {
        let oracle = mlcm_by_paths(&m);
        let b = m.mlcm();
        for (x, y) in b.as_array().iter().zip(oracle.iter()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn standardized_matrix_properties(m in arb_model(8)) {
        let b = m.std_mlcm();
        let a = b.as_array();
        let d = b.dim();
        let reach = m.dag().reach();
        for i in 0..d {
            prop_assert!((a.column(i).sum() - 1.0).abs() < 1e-12);
            for j in 0..d {
                prop_assert_eq!(a[(j, i)] > 0.0, reach.get(j, i));
                if i != j {
                    prop_assert!(a[(j, j)] > a[(j, i)]);
                }
            }
        }
        let check = is_mlcm(&b, tol());
        prop_assert!(check.valid, "{:?}", check);
        prop_assert_eq!(
            minimum_ml_dag(&b, tol()).unwrap(),
            minimum_ml_dag_unstandardized(&m.mlcm(), tol()).unwrap()
        );
    }

    #[test]
    fn triple_gap_is_nonnegative(m in arb_model(7)) {
        let b = m.std_mlcm();
        let reach = m.dag().reach();
        let d = b.dim();
        for j in 0..d {
            for k in 0..d {
                for i in 0..d {
                    if reach.is_strict(j, k) && reach.is_strict(k, i) {
                        let gap = triple_gap(&b, j, k, i).unwrap();
                        prop_assert!(gap >= -1e-12);
                        prop_assert_eq!(
                            max_weighted_triple(&b, j, k, i, tol()).unwrap(),
                            gap <= tol().eps
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn destandardize_round_trip(m in arb_model(8), alpha in 0.3..4.0f64, s in any::<u64>()) {
        let b = m.std_mlcm();
        let d = b.dim();
        let betas: Vec<f64> = (0..d).map(|i| 0.1 + ((s >> (i % 60)) & 0xff) as f64 / 16.0).collect();
        let back = standardize(&destandardize(&b, &betas, alpha).unwrap(), alpha).unwrap();
        prop_assert!(back.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn max_weighted_generators_pass_the_identity(m in arb_rmwm(8)) {
        let check = is_rmwm_mlcm(&m.std_mlcm(), tol()).unwrap();
        prop_assert!(check.valid, "{:?}", check);
        let b = m.std_mlcm();
        prop_assert_eq!(minimum_ml_dag(&b, tol()).unwrap(), m.dag().transitive_reduction());
    }

    #[test]
    fn tail_dependence_invariants(m in arb_model(8)) {
        let b = m.std_mlcm();
        let chi = tdm_from_std_mlcm(&b);
        let g = m.dag();
        let reach = g.reach();
        let d = g.node_count();
        prop_assert!(independence_pattern_check(&chi, reach).unwrap());
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(chi.get(i, j), chi.get(j, i));
                if reach.is_strict(j, i) {
                    // Lower and upper bounds along an ancestor pair.
                    prop_assert!(b.get(j, i) / b.get(j, j) <= chi.get(j, i) + 1e-12);
                    let s: f64 = reach.col(j).ones().map(|k| b.get(k, i)).sum();
                    prop_assert!(chi.get(i, j) <= s + 1e-12);
                    prop_assert!(s < 1.0);
                }
            }
        }
        let v0 = g.initial_nodes();
        for &j in &v0 {
            for i in 0..d {
                prop_assert!((chi.get(j, i) - b.get(j, i)).abs() < 1e-12);
                if v0.contains(&i) && i != j {
                    prop_assert_eq!(chi.get(i, j), 0.0);
                }
            }
        }
        let cliques = maximum_chi_cliques(&chi);
        prop_assert!(cliques.contains(&v0));
        prop_assert!(clique_initial_filter(&chi, &v0, tol()).unwrap());
        if d <= 8 {
            let mut brute = cliques_by_subsets(&chi);
            let mut found = cliques;
            brute.sort();
            found.sort();
            prop_assert_eq!(found, brute);
        }
    }

    #[test]
    fn limit_law_reproduces_tail_dependence(m in arb_model(8)) {
        let chi = tdm_from_std_mlcm(&m.std_mlcm());
        let g = LimitDistribution::new(&m);
        let d = m.node_count();
        for i in 0..d {
            let p = g.standardization_point(i);
            prop_assert!((g.marginal_cdf(i, p).unwrap() - (-1.0f64).exp()).abs() < 1e-14);
            for j in 0..d {
                if i != j {
                    prop_assert!((g.tail_dependence(i, j) - chi.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn max_weighted_tail_dependence_structure(m in arb_rmwm(10)) {
        let b = m.std_mlcm();
        let chi = tdm_from_std_mlcm(&b);
        let g = m.dag();
        let reach = g.reach();
        let d = g.node_count();
        for i in 0..d {
            for k in reach.col(i).ones().filter(|&k| k != i) {
                for j in reach.col(k).ones().filter(|&j| j != k) {
                    let prod = chi.get(j, k) * chi.get(k, i);
                    prop_assert!((chi.get(j, i) - prod).abs() < 1e-12);
                    prop_assert!(prod < chi.get(j, k).min(chi.get(k, i)));
                }
            }
            for j in reach.col(i).ones() {
                let v = lambda_representation(g, &chi, j, i).unwrap();
                prop_assert!((v - b.get(j, i)).abs() < 1e-10, "lambda ({}, {})", j, i);
                let s: f64 = reach.col(j).ones().map(|k| b.get(k, k) * chi.get(k, i)).sum();
                prop_assert!((chi.get(j, i) - s).abs() < 1e-10);
            }
            for j in 0..d {
                let v = mu_representation(g, &chi, i, j).unwrap();
                prop_assert!((v - chi.get(i, j)).abs() < 1e-10, "mu ({}, {})", i, j);
            }
            // Every path multiplies out to the end-to-end coefficient.
            for j in reach.col(i).ones().filter(|&j| j != i).take(2) {
                for p in all_paths(g, j, i).into_iter().take(4) {
                    let prod: f64 = p.windows(2).map(|w| chi.get(w[0], w[1])).product();
                    prop_assert!((prod - chi.get(j, i)).abs() < 1e-12);
                }
            }
        }
        let report = check_rmwm_tdm(g, &chi, tol()).unwrap();
        prop_assert!(report.accepted, "{:?}", report.failure);
        prop_assert!(report.std_mlcm.unwrap().max_abs_diff(&b) < 1e-10);
        let v0 = g.initial_nodes();
        prop_assert_eq!(reachability_from_initials(&chi, &v0, tol()).unwrap(), g.reachability_matrix());
    }

    #[test]
    fn lambda_zero_pattern(g in arb_dag(9)) {
        let tr = g.transitive_reduction();
        let reach = g.reach();
        for j in 0..g.node_count() {
            let lam = lambda_coefficients(&g, j).unwrap();
            let pa: Vec<usize> = tr.parents(j).to_vec();
            let hits = |k: usize| pa.iter().filter(|&&p| reach.get(k, p)).count();
            for k in g.ancestors(j) {
                if pa.contains(&k) {
                    prop_assert_eq!(lam.get(k), 1.0);
                    continue;
                }
                let shadowed = g
                    .descendants(k)
                    .into_iter()
                    .filter(|&l| reach.is_strict(l, j))
                    .any(|l| hits(l) == hits(k));
                if !shadowed {
                    prop_assert!(lam.get(k) != 0.0, "j={} k={}", j, k);
                }
            }
        }
    }

    #[test]
    fn mu_zero_pattern(g in arb_dag(9)) {
        let reach = g.reach();
        let d = g.node_count();
        for i in 0..d {
            for j in i..d {
                let mu = mu_coefficients(&g, i, j).unwrap();
                let lca = &mu.lowest_common_ancestors;
                let hits = |k: usize| lca.iter().filter(|&&l| reach.get(k, l)).count();
                for (&k, &v) in &mu.coefficients {
                    if lca.contains(&k) {
                        prop_assert_eq!(v, 1.0);
                        continue;
                    }
                    let shadowed = mu
                        .coefficients
                        .keys()
                        .filter(|&&l| reach.is_strict(k, l))
                        .any(|&l| hits(l) == hits(k));
                    prop_assert_eq!(v == 0.0, shadowed, "({}, {}) k={}", i, j, k);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn recovery_inverts_tail_dependence(m in arb_model(8), s in any::<u64>()) {
        let b = m.std_mlcm();
        let chi = tdm_from_std_mlcm(&b);
        let g = m.dag();
        let rec = recover_from_reachability(&chi, g.reach(), tol()).unwrap();
        prop_assert!(rec.max_abs_diff(&b) < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        for _ in 0..5 {
            let sigma = g.random_causal_ordering(&mut rng);
            let rec = recover_from_ordering(&chi, &sigma, tol()).unwrap();
            prop_assert!(rec.max_abs_diff(&b) < 1e-9);
        }
    }

    #[test]
    fn max_weighted_recovery(m in arb_rmwm(8)) {
        let b = m.std_mlcm();
        let chi = tdm_from_std_mlcm(&b);
        let g = m.dag();
        let rec = recover_from_reachability_rmwm(&chi, g.reach(), tol()).unwrap();
        prop_assert!(rec.max_abs_diff(&b) < 1e-9);
        let rec = recover_rmwm_from_initials(&chi, &g.initial_nodes(), tol()).unwrap();
        prop_assert!(rec.max_abs_diff(&b) < 1e-9);

        let all = enumerate_all_rmwm(&chi, tol()).unwrap();
        prop_assert!(all.iter().any(|x| x.std_mlcm.max_abs_diff(&b) < 1e-9));
        for x in &all {
            prop_assert!(is_rmwm_mlcm(&x.std_mlcm, tol()).unwrap().valid);
            prop_assert!(tdm_from_std_mlcm(&x.std_mlcm).max_abs_diff(&chi) < 1e-9);
        }
    }

    #[test]
    fn enumeration_contains_the_generator(m in arb_model(7)) {
        let b = m.std_mlcm();
        let chi = tdm_from_std_mlcm(&b);
        let all = enumerate_all(&chi, EnumerateOptions::default()).unwrap();
        prop_assert!(all.iter().any(|x| x.std_mlcm.max_abs_diff(&b) < 1e-9));
        let v0_len = m.dag().initial_nodes().len();
        for x in &all {
            prop_assert!(is_mlcm(&x.std_mlcm, tol()).valid);
            prop_assert!(tdm_from_std_mlcm(&x.std_mlcm).max_abs_diff(&chi) < 1e-9);
            prop_assert_eq!(x.initial_nodes.len(), v0_len);
            prop_assert_eq!(&x.min_ml_dag, &minimum_ml_dag(&x.std_mlcm, tol()).unwrap());
            prop_assert!(x.min_ml_dag.validate_causal_ordering(&x.ordering_used).unwrap());
        }
    }
}

/// A descendant of `k` hitting as many transitive-reduction parents of `j`
/// as `k` does not force `λ_jk = 0`.
#[test]
fn lambda_nonzero_despite_equal_parent_cover() {
    let g = Dag::new(
        8,
        vec![
            (0, 1),
            (0, 3),
            (1, 3),
            (2, 1),
            (2, 3),
            (2, 5),
            (2, 7),
            (4, 0),
            (4, 1),
            (4, 3),
            (4, 7),
            (5, 0),
            (5, 3),
            (6, 2),
            (6, 4),
            (6, 5),
            (7, 3),
        ],
    )
    .unwrap();
    let lam = lambda_coefficients(&g, 3).unwrap();
    assert_eq!(g.transitive_reduction().parents(3), &[1, 7]);
    assert_eq!(lam.get(2), -1.0);
    assert_eq!(lam.get(6), 1.0);
    // Every ancestor l of 3 gets total weight one over De(l) ∩ an(3).
    for l in g.ancestors(3) {
        let total: f64 = g
            .ancestors(3)
            .into_iter()
            .filter(|&k| g.reach().get(l, k))
            .map(|k| lam.get(k))
            .sum();
        assert_eq!(total, 1.0);
    }
}

#[test]
fn deterministic_corpus_is_reproducible() {
    assert_eq!(corpus(40, 5), corpus(40, 5));
}
