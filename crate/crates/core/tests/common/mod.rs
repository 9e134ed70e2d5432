//! Independent oracles and the property suites shared by `properties` and
//! `acceptance`.
#![allow(dead_code)]

use coevolve::dynamics::opinion_step;
use coevolve::recommender::{
    combined_distribution, opinion_weights, rewire_step, structural_weights,
};
use coevolve::{
    consensus_fixed_point, metrics, DynamicsParams, Graph, RecommenderParams, RemovalPolicy,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------- oracles

/// Probabilities computed straight from the defining formulas, with a
/// triple loop for common neighbours and no rescaling.
pub fn oracle_distribution(
    g: &Graph,
    x: &[f64],
    i: usize,
    p: &RecommenderParams,
) -> Vec<(usize, f64)> {
    let n = g.node_count();
    let cands: Vec<usize> = (0..n).filter(|&j| j != i && !g.has_edge(i, j)).collect();
    let eps = p.epsilon;
    let s: Vec<f64> = cands
        .iter()
        .map(|&j| {
            let c = (0..n)
                .filter(|&k| g.has_edge(i, k) && g.has_edge(j, k))
                .count() as f64;
            (c * (1.0 - 2.0 * eps) + eps).powf(p.eta)
        })
        .collect();
    let h: Vec<f64> = cands
        .iter()
        .map(|&j| ((x[i] - x[j]).abs() * (1.0 - 2.0 * eps) + eps).powf(-p.beta))
        .collect();
    let (ss, hs): (f64, f64) = (s.iter().sum(), h.iter().sum());
    cands
        .iter()
        .enumerate()
        .map(|(k, &j)| (j, p.rho * h[k] / hs + (1.0 - p.rho) * s[k] / ss))
        .collect()
}

/// Component count from the transitive closure of the adjacency matrix.
pub fn closure_components(g: &Graph) -> usize {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
        for &j in g.neighbors_of(i) {
            row[j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                let via = r[k].clone();
                for (dst, &reach) in r[i].iter_mut().zip(&via) {
                    *dst |= reach;
                }
            }
        }
    }
    // a node represents its component when no smaller node reaches it
    (0..n).filter(|&i| (0..i).all(|j| !r[i][j])).count()
}

pub fn graph_from_mask(n: usize, mask: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask[k] {
                edges.push((i, j));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Relabels node `v` as `perm[v]`.
pub fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    let edges: Vec<_> = g
        .edges()
        .into_iter()
        .map(|(a, b)| (perm[a], perm[b]))
        .collect();
    Graph::from_edges(g.node_count(), &edges).unwrap()
}

// ---------------------------------------------------------------- strategies

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub opinions: Vec<f64>,
    pub focal: usize,
}

pub fn instance(
    nodes: std::ops::RangeInclusive<usize>,
    span: f64,
) -> impl Strategy<Value = Instance> {
    nodes.prop_flat_map(move |n| {
        (0.0..1.0f64)
            .prop_flat_map(move |density| {
                (
                    vec(proptest::bool::weighted(density), n * (n - 1) / 2),
                    vec(-span..span, n),
                    0..n,
                )
            })
            .prop_map(move |(mask, opinions, focal)| Instance {
                graph: graph_from_mask(n, &mask),
                opinions,
                focal,
            })
    })
}

pub fn recommender_params() -> impl Strategy<Value = RecommenderParams> {
    (0.0..=1.0f64, 0.0..5.0f64, 0.0..5.0f64, 0.001..0.2f64)
        .prop_map(|(rho, beta, eta, eps)| RecommenderParams::new(rho, beta, eta, eps).unwrap())
}

pub fn dynamics_params() -> impl Strategy<Value = DynamicsParams> {
    (0.0..1.0f64, 0.0..0.999f64, 0.0..3.0f64)
        .prop_map(|(k, g, a)| DynamicsParams::new(k, g, a).unwrap())
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

// ---------------------------------------------------------------- runner

/// Runs `test` on `cases` inputs. `deterministic` fixes the input stream.
pub fn check<S: Strategy>(
    cases: u32,
    deterministic: bool,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = if deterministic {
        TestRunner::new_with_rng(
            config.clone(),
            TestRng::deterministic_rng(config.rng_algorithm),
        )
    } else {
        TestRunner::new(config)
    };
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn has_candidates(inst: &Instance) -> bool {
    inst.graph.degree(inst.focal) + 1 < inst.graph.node_count()
}

// ---------------------------------------------------------------- suites

pub fn normalization(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(2..=30, 10.0), recommender_params()),
        |(inst, p)| {
            prop_assume!(has_candidates(&inst));
            let d = combined_distribution(&inst.graph, &inst.opinions, inst.focal, &p).unwrap();
            let sum: f64 = d.probabilities.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
            prop_assert!(d.probabilities.iter().all(|&q| (0.0..=1.0).contains(&q)));
            for w in [
                structural_weights(&inst.graph, inst.focal, &p).unwrap(),
                opinion_weights(&inst.graph, &inst.opinions, inst.focal, &p).unwrap(),
            ] {
                let sum: f64 = w.probabilities.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
            }
            Ok(())
        },
    )
}

pub fn monotonicity(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(3..=25, 10.0), recommender_params()),
        |(inst, p)| {
            prop_assume!(has_candidates(&inst) && p.eta > 1e-3 && p.beta > 1e-3);
            let (g, x, i) = (&inst.graph, &inst.opinions, inst.focal);
            let s = structural_weights(g, i, &p).unwrap();
            let h = opinion_weights(g, x, i, &p).unwrap();
            let cands = &s.candidates;
            for a in 0..cands.len() {
                for b in 0..cands.len() {
                    let (ja, jb) = (cands[a], cands[b]);
                    let (ca, cb) = (
                        g.common_neighbor_count(i, ja).unwrap(),
                        g.common_neighbor_count(i, jb).unwrap(),
                    );
                    if ca > cb {
                        prop_assert!(
                            s.probabilities[a] > s.probabilities[b],
                            "S not increasing in c"
                        );
                    } else if ca == cb {
                        prop_assert_eq!(s.probabilities[a], s.probabilities[b]);
                    }
                    let (da, db) = ((x[i] - x[ja]).abs(), (x[i] - x[jb]).abs());
                    if da < db {
                        prop_assert!(
                            h.probabilities[a] >= h.probabilities[b],
                            "H not decreasing in |dx|"
                        );
                    }
                }
            }
            Ok(())
        },
    )
}

pub fn rho_affinity(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(2..=30, 10.0), recommender_params()),
        |(inst, p)| {
            prop_assume!(has_candidates(&inst));
            let (g, x, i) = (&inst.graph, &inst.opinions, inst.focal);
            let at = |rho: f64| {
                combined_distribution(g, x, i, &RecommenderParams { rho, ..p })
                    .unwrap()
                    .probabilities
            };
            let (p0, p1) = (at(0.0), at(1.0));
            for rho in [0.0, 0.25, 0.5, 0.75, 1.0] {
                for (k, q) in at(rho).into_iter().enumerate() {
                    let lin = rho * p1[k] + (1.0 - rho) * p0[k];
                    prop_assert!((q - lin).abs() < 1e-12, "rho {rho}: {q} vs {lin}");
                }
            }
            Ok(())
        },
    )
}

pub fn oracle_equivalence(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(2..=6, 10.0), recommender_params()),
        |(inst, p)| {
            prop_assume!(has_candidates(&inst));
            let d = combined_distribution(&inst.graph, &inst.opinions, inst.focal, &p).unwrap();
            let oracle = oracle_distribution(&inst.graph, &inst.opinions, inst.focal, &p);
            prop_assert_eq!(d.candidates.len(), oracle.len());
            for (k, (j, q)) in oracle.into_iter().enumerate() {
                prop_assert_eq!(d.candidates[k], j);
                prop_assert!(
                    (d.probabilities[k] - q).abs() < 1e-12,
                    "node {j}: {} vs {q}",
                    d.probabilities[k]
                );
            }
            Ok(())
        },
    )
}

/// 10⁴ rewires per case on one evolving graph.
pub fn edge_conservation(cases: u32, det: bool) -> Result<(), String> {
    let strategy = (
        instance(3..=40, 10.0),
        recommender_params(),
        any::<bool>(),
        any::<u64>(),
    );
    check(cases, det, strategy, |(inst, p, uniform, seed)| {
        let policy = if uniform {
            RemovalPolicy::Uniform
        } else {
            RemovalPolicy::SpareLastLink
        };
        let p = p.with_removal(policy);
        let mut g = inst.graph.clone();
        let m = g.edge_count();
        let n = g.node_count();
        let mut rng = StdRng::seed_from_u64(seed);
        for step in 0..10_000 {
            let i = rng.random_range(0..n);
            let before = g.clone();
            let out = rewire_step(&mut g, &inst.opinions, i, &p, &mut rng).unwrap();
            prop_assert_eq!(g.edge_count(), m, "step {}", step);
            if out.skipped {
                prop_assert_eq!(&g, &before);
            } else {
                let (a, r) = (out.added.unwrap(), out.removed.unwrap());
                prop_assert!(!before.has_edge(a.0, a.1) && g.has_edge(a.0, a.1));
                prop_assert!(before.has_edge(r.0, r.1) && !g.has_edge(r.0, r.1));
            }
        }
        prop_assert!(g.check_invariants());
        Ok(())
    })
}

/// Under SpareLastLink nobody loses their last link.
pub fn min_degree_preserved(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(3..=30, 10.0), recommender_params(), any::<u64>()),
        |(inst, p, seed)| {
            let mut g = inst.graph.clone();
            let n = g.node_count();
            let had_link: Vec<bool> = (0..n).map(|v| g.degree(v) > 0).collect();
            let mut rng = StdRng::seed_from_u64(seed);
            for _ in 0..2_000 {
                let i = rng.random_range(0..n);
                rewire_step(&mut g, &inst.opinions, i, &p, &mut rng).unwrap();
            }
            for (v, &had) in had_link.iter().enumerate() {
                prop_assert!(!had || g.degree(v) > 0, "node {v} isolated");
            }
            Ok(())
        },
    )
}

/// 10³ opinion steps per case.
pub fn boundedness_and_symmetry(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(2..=30, 1.0), dynamics_params()),
        |(inst, d)| {
            let bound = d.opinion_bound();
            let mut x: Vec<f64> = inst.opinions.iter().map(|v| v * bound).collect();
            let mut y: Vec<f64> = x.iter().map(|v| -v).collect();
            for step in 0..1_000 {
                x = opinion_step(&inst.graph, &x, &d).unwrap().into_inner();
                y = opinion_step(&inst.graph, &y, &d).unwrap().into_inner();
                for (a, b) in x.iter().zip(&y) {
                    prop_assert!(
                        a.abs() <= bound * (1.0 + 1e-12),
                        "step {step}: |{a}| > {bound}"
                    );
                    prop_assert_eq!(*a, -*b, "negation symmetry broken at step {}", step);
                }
            }
            Ok(())
        },
    )
}

pub fn decoupled_decay(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (instance(1..=20, 10.0), 0.0..0.999f64, 0.0..3.0f64),
        |(inst, gamma, alpha)| {
            let d = DynamicsParams::new(0.0, gamma, alpha).unwrap();
            let next = opinion_step(&inst.graph, &inst.opinions, &d).unwrap();
            for (a, b) in next.iter().zip(&inst.opinions) {
                prop_assert_eq!(*a, gamma * b);
            }
            Ok(())
        },
    )
}

pub fn relabeling_equivariance(cases: u32, det: bool) -> Result<(), String> {
    let strategy = (
        instance(2..=20, 10.0),
        dynamics_params(),
        recommender_params(),
    )
        .prop_flat_map(|(inst, d, p)| {
            let n = inst.graph.node_count();
            (Just(inst), Just(d), Just(p), permutation(n))
        });
    check(cases, det, strategy, |(inst, d, p, perm)| {
        let n = inst.graph.node_count();
        let g2 = relabel(&inst.graph, &perm);
        let mut x2 = vec![0.0; n];
        for v in 0..n {
            x2[perm[v]] = inst.opinions[v];
        }
        let a = opinion_step(&inst.graph, &inst.opinions, &d).unwrap();
        let b = opinion_step(&g2, &x2, &d).unwrap();
        for v in 0..n {
            prop_assert!((a[v] - b[perm[v]]).abs() < 1e-12);
        }
        prop_assert_eq!(
            metrics::component_count(&inst.graph),
            metrics::component_count(&g2)
        );
        if has_candidates(&inst) {
            let da = combined_distribution(&inst.graph, &inst.opinions, inst.focal, &p).unwrap();
            let db = combined_distribution(&g2, &x2, perm[inst.focal], &p).unwrap();
            for (k, &j) in da.candidates.iter().enumerate() {
                prop_assert!((da.probabilities[k] - db.probability_of(perm[j])).abs() < 1e-12);
            }
        }
        Ok(())
    })
}

/// Brute-force component count on random graphs with n ≤ 7.
pub fn components_match_closure(cases: u32, det: bool) -> Result<(), String> {
    check(cases, det, instance(1..=7, 1.0), |inst| {
        let labels = inst.graph.connected_components();
        prop_assert_eq!(labels.count, closure_components(&inst.graph));
        prop_assert_eq!(
            labels.sizes().iter().sum::<usize>(),
            inst.graph.node_count()
        );
        for (a, b) in inst.graph.edges() {
            prop_assert_eq!(labels.labels[a], labels.labels[b]);
        }
        Ok(())
    })
}

/// Every graph on up to five nodes (1 + 1 + 2 + 8 + 64 + 1024 graphs).
pub fn components_exhaustive() -> Result<usize, String> {
    let mut checked = 0;
    for n in 0..=5usize {
        let pairs = n * n.saturating_sub(1) / 2;
        for bits in 0u32..(1 << pairs) {
            let mask: Vec<bool> = (0..pairs).map(|k| bits >> k & 1 == 1).collect();
            let g = graph_from_mask(n, &mask);
            let (got, want) = (g.connected_components().count, closure_components(&g));
            if got != want {
                return Err(format!("n={n} mask={bits:b}: {got} vs {want}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn fixed_point_residual(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (0.001..1.0f64, 0.0..0.999f64, 0.0..5.0f64),
        |(k, gamma, alpha)| {
            let d = DynamicsParams::new(k, gamma, alpha).unwrap();
            let xs = consensus_fixed_point(&d);
            prop_assert!(xs >= 0.0 && xs <= d.opinion_bound() * (1.0 + 1e-12));
            let residual = k * (alpha * xs).tanh() - (1.0 - gamma) * xs;
            prop_assert!(residual.abs() < 1e-9, "residual {residual} at x*={xs}");
            if k * alpha > (1.0 - gamma) * (1.0 + 1e-6) {
                prop_assert!(xs > 0.0, "missed the non-trivial root");
            } else if k * alpha < (1.0 - gamma) * (1.0 - 1e-6) {
                prop_assert_eq!(xs, 0.0);
            }
            Ok(())
        },
    )
}

pub fn metric_invariances(cases: u32, det: bool) -> Result<(), String> {
    check(
        cases,
        det,
        (vec(-10.0..10.0f64, 1..60), -5.0..5.0f64),
        |(x, shift)| {
            let pol = metrics::polarization(&x).unwrap();
            let rad = metrics::radicalization(&x).unwrap();
            let mean = metrics::mean_opinion(&x).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let negated: Vec<f64> = x.iter().map(|v| -v).collect();
            let mut reversed = x.clone();
            reversed.reverse();
            prop_assert!((metrics::polarization(&shifted).unwrap() - pol).abs() < 1e-9);
            prop_assert_eq!(metrics::polarization(&negated).unwrap(), pol);
            prop_assert_eq!(metrics::radicalization(&negated).unwrap(), rad);
            prop_assert_eq!(metrics::mean_opinion(&negated).unwrap(), -mean);
            prop_assert!((metrics::radicalization(&reversed).unwrap() - rad).abs() < 1e-12);
            prop_assert!(pol >= 0.0 && rad >= mean.abs() - 1e-12);
            Ok(())
        },
    )
}
