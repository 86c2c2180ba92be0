// SPDX-License-Identifier: Apache-2.0
//! Fixtures and brute-force oracles shared by the integration tests.
//!
//! Node labels in comments are 1-based; indices in code are 0-based.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use maxlin::random::{generate, GenConfig, ModelKind};
use maxlin::{Array2, Dag, StdMlcMatrix, TailDepMatrix, WeightedModel};

pub fn mat(rows: &[&[f64]]) -> Array2<f64> {
    let d = rows.len();
    Array2::from_shape_fn((d, rows[0].len()), |(r, c)| rows[r][c])
}

pub fn std_mlcm(rows: &[&[f64]]) -> StdMlcMatrix {
    StdMlcMatrix::new(mat(rows)).expect("fixture is a valid standardized matrix")
}

pub fn tdm(rows: &[&[f64]]) -> TailDepMatrix {
    TailDepMatrix::new(mat(rows)).expect("fixture is a valid tail dependence matrix")
}

pub fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

/// Two nodes, `1 → 2`, `b̄_12 = b`.
pub fn two_node_std(b: f64) -> Array2<f64> {
    mat(&[&[1.0, b], &[0.0, 1.0 - b]])
}

/// D₁: 1→3, 1→4, 2→3, 2→4, 3→4.
pub fn d1_dense() -> Dag {
    Dag::new(4, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
}

/// Path 2→3→4 is max-weighted.
pub fn four_node_mw_path() -> StdMlcMatrix {
    std_mlcm(&[
        &[1.0, 0.0, 0.4, 0.3],
        &[0.0, 1.0, 0.4, 0.25],
        &[0.0, 0.0, 0.2, 0.125],
        &[0.0, 0.0, 0.0, 0.325],
    ])
}

/// Path 2→3→4 is not max-weighted, yet χ(2,4) = χ(2,3) χ(3,4).
pub fn four_node_non_mw_path() -> StdMlcMatrix {
    std_mlcm(&[
        &[1.0, 0.0, 0.1, 0.085],
        &[0.0, 1.0, 0.8, 0.5],
        &[0.0, 0.0, 0.1, 0.04],
        &[0.0, 0.0, 0.0, 0.375],
    ])
}

/// χ with maximum cliques {1,2} and {1,4}.
pub fn two_clique_chi() -> TailDepMatrix {
    tdm(&[
        &[1.0, 0.0, 0.2, 0.0],
        &[0.0, 1.0, 0.6, 0.5],
        &[0.2, 0.6, 1.0, 0.5],
        &[0.0, 0.5, 0.5, 1.0],
    ])
}

/// Max-weighted model on 1→3, 2→3, 2→4 with TDM [`two_clique_chi`].
pub fn two_clique_first() -> StdMlcMatrix {
    std_mlcm(&[
        &[1.0, 0.0, 0.2, 0.0],
        &[0.0, 1.0, 0.6, 0.5],
        &[0.0, 0.0, 0.2, 0.0],
        &[0.0, 0.0, 0.0, 0.5],
    ])
}

/// Non-max-weighted model on 1→3, 4→2, 2→3, 4→3 with the same TDM.
pub fn two_clique_second() -> StdMlcMatrix {
    std_mlcm(&[
        &[1.0, 0.0, 0.2, 0.0],
        &[0.0, 0.5, 0.1, 0.0],
        &[0.0, 0.0, 0.2, 0.0],
        &[0.0, 0.5, 0.5, 1.0],
    ])
}

pub fn two_clique_first_dag() -> Dag {
    Dag::new(4, [(0, 2), (1, 2), (1, 3)]).unwrap()
}

pub fn two_clique_second_dag() -> Dag {
    Dag::new(4, [(0, 2), (3, 1), (1, 2), (3, 2)]).unwrap()
}

pub fn three_node_chi() -> TailDepMatrix {
    tdm(&[
        &[1.0, 0.1, 1.0 / 3.0],
        &[0.1, 1.0, 13.0 / 30.0],
        &[1.0 / 3.0, 13.0 / 30.0, 1.0],
    ])
}

pub fn three_node_valid() -> StdMlcMatrix {
    std_mlcm(&[
        &[1.0, 0.1, 1.0 / 3.0],
        &[0.0, 0.9, 1.0 / 3.0],
        &[0.0, 0.0, 1.0 / 3.0],
    ])
}

pub fn three_node_invalid() -> StdMlcMatrix {
    std_mlcm(&[
        &[1.0, 0.1, 1.0 / 3.0],
        &[0.0, 17.0 / 30.0, 0.0],
        &[0.0, 1.0 / 3.0, 2.0 / 3.0],
    ])
}

/// Ordering 2, 1, 3 also yields a valid model for [`three_node_chi`].
pub fn three_node_alternative() -> StdMlcMatrix {
    std_mlcm(&[
        &[0.9, 0.0, 7.0 / 30.0],
        &[0.1, 1.0, 13.0 / 30.0],
        &[0.0, 0.0, 1.0 / 3.0],
    ])
}

/// Two different models sharing χ(1,2)=0.2, χ(1,3)=0.3, χ(2,3)=0.6.
pub fn shared_tdm_pair() -> (StdMlcMatrix, StdMlcMatrix) {
    (
        std_mlcm(&[&[1.0, 0.2, 0.3], &[0.0, 0.8, 0.4], &[0.0, 0.0, 0.3]]),
        std_mlcm(&[&[1.0, 0.2, 0.3], &[0.0, 0.4, 0.0], &[0.0, 0.4, 0.7]]),
    )
}

pub fn homogeneous_chain_chi() -> TailDepMatrix {
    tdm(&[
        &[1.0, 0.5, 1.0 / 3.0],
        &[0.5, 1.0, 2.0 / 3.0],
        &[1.0 / 3.0, 2.0 / 3.0, 1.0],
    ])
}

/// Diamond 1→2, 1→3, 2→4, 3→4.
pub fn diamond() -> Dag {
    Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap()
}

/// 99 nodes (1-based): 1→2, 2→3→…→34→98, 2→35→36→…→66→98,
/// 35→67→…→97→98, 98→99.
pub fn lambda_dag() -> Dag {
    let mut e = vec![
        (1, 2),
        (98, 99),
        (2, 3),
        (34, 98),
        (2, 35),
        (35, 67),
        (66, 98),
        (97, 98),
    ];
    e.extend((3..34).map(|k| (k, k + 1)));
    e.extend((35..66).map(|k| (k, k + 1)));
    e.extend((67..97).map(|k| (k, k + 1)));
    Dag::new(99, e.into_iter().map(|(a, b)| (a - 1, b - 1))).unwrap()
}

/// 97 nodes (1-based): 1→2, 2→3→…→33, 2→34→35→…→64, 34→65→…→94,
/// 33→95, 33→96, 64→96, 94→96, 33→97, 64→97, 94→97.
pub fn mu_dag() -> Dag {
    let mut e = vec![
        (1, 2),
        (2, 3),
        (2, 34),
        (34, 65),
        (33, 95),
        (33, 96),
        (64, 96),
        (94, 96),
        (33, 97),
        (64, 97),
        (94, 97),
    ];
    e.extend((3..33).map(|k| (k, k + 1)));
    e.extend((34..64).map(|k| (k, k + 1)));
    e.extend((65..94).map(|k| (k, k + 1)));
    Dag::new(97, e.into_iter().map(|(a, b)| (a - 1, b - 1))).unwrap()
}

// ---------------------------------------------------------------- oracles

/// Every directed path from `from` to `to`, as node lists.
pub fn all_paths(dag: &Dag, from: usize, to: usize) -> Vec<Vec<usize>> {
    fn walk(dag: &Dag, at: usize, to: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == to {
            out.push(cur.clone());
            return;
        }
        for &c in dag.children(at) {
            cur.push(c);
            walk(dag, c, to, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    walk(dag, from, to, &mut vec![from], &mut out);
    out
}

/// Coefficient matrix by maximizing over explicitly enumerated paths.
pub fn mlcm_by_paths(model: &WeightedModel) -> Array2<f64> {
    let d = model.node_count();
    Array2::from_shape_fn((d, d), |(j, i)| {
        all_paths(model.dag(), j, i)
            .iter()
            .map(|p| {
                p.windows(2)
                    .map(|w| model.edge_weight(w[0], w[1]).unwrap())
                    .product::<f64>()
                    * model.noise_scale(j)
            })
            .fold(0.0, f64::max)
    })
}

/// Breadth-first reachability, reflexive.
pub fn reach_by_bfs(dag: &Dag) -> Vec<Vec<bool>> {
    let d = dag.node_count();
    (0..d)
        .map(|s| {
            let mut seen = vec![false; d];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(k) = q.pop_front() {
                for &c in dag.children(k) {
                    if !seen[c] {
                        seen[c] = true;
                        q.push_back(c);
                    }
                }
            }
            seen
        })
        .collect()
}

/// Edges kept iff no other path connects their endpoints.
pub fn reduction_by_paths(dag: &Dag) -> Vec<(usize, usize)> {
    dag.edges()
        .filter(|&(k, i)| all_paths(dag, k, i).iter().all(|p| p.len() == 2))
        .collect()
}

/// Maximum sets of pairwise zero χ, by subset enumeration.
pub fn cliques_by_subsets(chi: &TailDepMatrix) -> Vec<BTreeSet<usize>> {
    let d = chi.dim();
    let mut best = 0;
    let mut out = Vec::new();
    for mask in 1u32..(1 << d) {
        let s: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
        let ok = s
            .iter()
            .enumerate()
            .all(|(a, &u)| s[a + 1..].iter().all(|&v| chi.get(u, v) == 0.0));
        if !ok {
            continue;
        }
        if s.len() > best {
            best = s.len();
            out.clear();
        }
        if s.len() == best {
            out.push(s.into_iter().collect());
        }
    }
    out
}

/// A model for every combination drawn from a fixed pool: `d ≤ 8`, mixed
/// density, α ∈ {0.5, 1, 2}, all weight structures.
pub fn corpus(n: usize, seed: u64) -> Vec<WeightedModel> {
    let kinds = [
        ModelKind::Random,
        ModelKind::Random,
        ModelKind::Polytree,
        ModelKind::Homogeneous,
        ModelKind::MaxWeighted,
    ];
    let alphas = [0.5, 1.0, 2.0];
    let densities = [0.2, 0.5, 0.8];
    (0..n)
        .map(|t| {
            let mut cfg = GenConfig::new(1 + t % 8, kinds[t % kinds.len()]);
            cfg.alpha = alphas[(t / 8) % 3];
            cfg.density = densities[(t / 24) % 3];
            cfg.weight_range = (0.5, 2.0);
            generate(&cfg, seed.wrapping_mul(1_000_003).wrapping_add(t as u64)).unwrap()
        })
        .collect()
}

/// Max-weighted instances only (polytree, homogeneous, potential weights).
pub fn rmwm_corpus(n: usize, seed: u64) -> Vec<WeightedModel> {
    let kinds = [
        ModelKind::Polytree,
        ModelKind::Homogeneous,
        ModelKind::MaxWeighted,
    ];
    (0..n)
        .map(|t| {
            let mut cfg = GenConfig::new(2 + t % 7, kinds[t % 3]);
            cfg.alpha = [0.5, 1.0, 2.0][(t / 3) % 3];
            cfg.density = [0.3, 0.6, 0.9][(t / 9) % 3];
            cfg.weight_range = (0.5, 2.0);
            generate(&cfg, seed.wrapping_mul(7_919).wrapping_add(t as u64)).unwrap()
        })
        .collect()
}
