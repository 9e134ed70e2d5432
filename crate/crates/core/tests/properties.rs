mod common;

use common::*;

fn ok(r: Result<(), String>) {
    if let Err(e) = r {
        panic!("{e}");
    }
}

#[test]
fn distributions_sum_to_one() {
    ok(normalization(512, false));
}

#[test]
fn weights_are_monotone() {
    ok(monotonicity(256, false));
}

#[test]
fn mixture_is_affine_in_rho() {
    ok(rho_affinity(256, false));
}

#[test]
fn matches_direct_summation_on_small_graphs() {
    ok(oracle_equivalence(1_000, false));
}

#[test]
fn rewiring_conserves_edges() {
    ok(edge_conservation(8, false));
}

#[test]
fn spare_last_link_never_isolates() {
    ok(min_degree_preserved(64, false));
}

#[test]
fn opinions_stay_bounded_and_odd() {
    ok(boundedness_and_symmetry(32, false));
}

#[test]
fn zero_coupling_is_pure_decay() {
    ok(decoupled_decay(256, false));
}

#[test]
fn relabeling_commutes() {
    ok(relabeling_equivariance(256, false));
}

#[test]
fn components_match_transitive_closure() {
    ok(components_match_closure(10_000, false));
}

#[test]
fn components_on_every_small_graph() {
    assert_eq!(components_exhaustive().unwrap(), 1100);
}

#[test]
fn fixed_point_is_a_root() {
    ok(fixed_point_residual(2_000, false));
}

#[test]
fn metrics_invariances() {
    ok(metric_invariances(1_000, false));
}
