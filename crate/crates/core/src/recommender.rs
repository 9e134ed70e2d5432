//! Link recommendation mixing opinion similarity (homophily) and structural
//! similarity (triadic closure), and the rewiring move built on it.
//!
//! For a focal node `i` and each non-neighbor `j`:
//!
//! ```text
//! S_ij ∝ [c_ij (1 - 2ε) + ε]^η          c_ij = |N_i ∩ N_j|
//! H_ij ∝ [|x_i - x_j| (1 - 2ε) + ε]^-β
//! P_ij = ρ H_ij + (1 - ρ) S_ij
//! ```
//!
//! Both similarity distributions are normalized over the candidate set.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommenderParams {
    /// Weight of opinion similarity, in `[0, 1]`.
    pub rho: f64,
    /// Opinion-similarity exponent.
    pub beta: f64,
    /// Structural-similarity exponent.
    pub eta: f64,
    /// Algorithmic noise, in `(0, 1/2)`.
    pub epsilon: f64,
    /// Which pre-existing links the focal may drop.
    #[serde(default)]
    pub removal: RemovalPolicy,
}

/// Links eligible for removal after a focal accepts a recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalPolicy {
    /// Any link of the focal that existed before the addition.
    Uniform,
    /// Only links whose other end keeps at least one link afterwards, so
    /// rewiring never isolates a node. Every node then keeps degree ≥ 1.
    #[default]
    SpareLastLink,
}

impl Default for RecommenderParams {
    fn default() -> Self {
        RecommenderParams {
            rho: 0.5,
            beta: 0.0,
            eta: 0.0,
            epsilon: 0.01,
            removal: RemovalPolicy::default(),
        }
    }
}

impl RecommenderParams {
    pub fn new(rho: f64, beta: f64, eta: f64, epsilon: f64) -> Result<Self> {
        let p = RecommenderParams {
            rho,
            beta,
            eta,
            epsilon,
            removal: RemovalPolicy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_removal(self, removal: RemovalPolicy) -> Self {
        RecommenderParams { removal, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParam(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "eta must be finite and >= 0, got {}",
                self.eta
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParam(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Recommendation probabilities over the non-neighbors of `focal`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDistribution {
    pub focal: usize,
    pub candidates: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl CandidateDistribution {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Probability assigned to node `j`, zero if `j` is not a candidate.
    pub fn probability_of(&self, j: usize) -> f64 {
        self.candidates
            .binary_search(&j)
            .map(|k| self.probabilities[k])
            .unwrap_or(0.0)
    }
}

/// Non-neighbors of `i`, excluding `i`, in ascending order.
pub fn candidate_set(g: &Graph, i: usize) -> Vec<usize> {
    let mut out = Vec::new();
    fill_candidates(g, i, &mut out);
    out
}

fn fill_candidates(g: &Graph, i: usize, out: &mut Vec<usize>) {
    out.clear();
    let nb = g.neighbors_of(i);
    let mut p = 0;
    for j in 0..g.node_count() {
        if p < nb.len() && nb[p] == j {
            p += 1;
            continue;
        }
        if j != i {
            out.push(j);
        }
    }
}

/// Normalizes `w` in place to sum to one.
fn normalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= total;
    }
}

/// Fills `out` with structural similarity probabilities for `candidates`.
/// `counts` holds common-neighbor counts indexed by node.
fn structural_into(counts: &[u32], candidates: &[usize], eta: f64, eps: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        candidates
            .iter()
            .map(|&j| counts[j] as f64 * (1.0 - 2.0 * eps) + eps),
    );
    // scale by the largest base so the power never overflows
    let top = out.iter().copied().fold(f64::MIN, f64::max);
    for v in out.iter_mut() {
        *v = (*v / top).powf(eta);
    }
    normalize(out);
}

fn opinion_into(
    x: &[f64],
    i: usize,
    candidates: &[usize],
    beta: f64,
    eps: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    let xi = x[i];
    out.extend(
        candidates
            .iter()
            .map(|&j| (xi - x[j]).abs() * (1.0 - 2.0 * eps) + eps),
    );
    let bottom = out.iter().copied().fold(f64::MAX, f64::min);
    for v in out.iter_mut() {
        *v = (bottom / *v).powf(beta);
    }
    normalize(out);
}

fn check_focal(g: &Graph, i: usize) -> Result<()> {
    if i >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            node: i,
            n: g.node_count(),
        });
    }
    Ok(())
}

fn check_opinions(g: &Graph, x: &[f64]) -> Result<()> {
    if x.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            graph: g.node_count(),
            opinions: x.len(),
        });
    }
    Ok(())
}

pub fn structural_weights(
    g: &Graph,
    i: usize,
    params: &RecommenderParams,
) -> Result<CandidateDistribution> {
    check_focal(g, i)?;
    let candidates = candidate_set(g, i);
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates(i));
    }
    let mut counts = Vec::new();
    g.common_neighbor_counts_from(i, &mut counts);
    let mut probabilities = Vec::new();
    structural_into(
        &counts,
        &candidates,
        params.eta,
        params.epsilon,
        &mut probabilities,
    );
    Ok(CandidateDistribution {
        focal: i,
        candidates,
        probabilities,
    })
}

pub fn opinion_weights(
    g: &Graph,
    x: &[f64],
    i: usize,
    params: &RecommenderParams,
) -> Result<CandidateDistribution> {
    check_focal(g, i)?;
    check_opinions(g, x)?;
    let candidates = candidate_set(g, i);
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates(i));
    }
    let mut probabilities = Vec::new();
    opinion_into(
        x,
        i,
        &candidates,
        params.beta,
        params.epsilon,
        &mut probabilities,
    );
    Ok(CandidateDistribution {
        focal: i,
        candidates,
        probabilities,
    })
}

/// `ρ H + (1 - ρ) S` over the candidates of `i`.
pub fn combined_distribution(
    g: &Graph,
    x: &[f64],
    i: usize,
    params: &RecommenderParams,
) -> Result<CandidateDistribution> {
    check_focal(g, i)?;
    check_opinions(g, x)?;
    let mut scratch = Scratch::default();
    scratch.fill(g, x, i, params)?;
    Ok(CandidateDistribution {
        focal: i,
        candidates: scratch.candidates,
        probabilities: scratch.combined,
    })
}

/// Draws one candidate according to `dist`.
pub fn sample_recommendation<R: Rng + ?Sized>(dist: &CandidateDistribution, rng: &mut R) -> usize {
    dist.candidates[sample_index(&dist.probabilities, rng)]
}

fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    if probabilities.len() == 1 {
        return 0;
    }
    WeightedIndex::new(probabilities)
        .expect("recommendation probabilities must be finite, non-negative and not all zero")
        .sample(rng)
}

/// Reusable buffers for computing distributions without per-call allocation.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    counts: Vec<u32>,
    candidates: Vec<usize>,
    opinion: Vec<f64>,
    structural: Vec<f64>,
    combined: Vec<f64>,
    pool: Vec<usize>,
}

impl Scratch {
    /// Computes the combined distribution of focal `i` into `self.combined`.
    fn fill(&mut self, g: &Graph, x: &[f64], i: usize, params: &RecommenderParams) -> Result<()> {
        fill_candidates(g, i, &mut self.candidates);
        if self.candidates.is_empty() {
            return Err(Error::EmptyCandidates(i));
        }
        let rho = params.rho;
        self.combined.clear();
        if rho > 0.0 {
            opinion_into(
                x,
                i,
                &self.candidates,
                params.beta,
                params.epsilon,
                &mut self.opinion,
            );
        }
        if rho < 1.0 {
            g.common_neighbor_counts_from(i, &mut self.counts);
            structural_into(
                &self.counts,
                &self.candidates,
                params.eta,
                params.epsilon,
                &mut self.structural,
            );
        }
        if rho == 1.0 {
            self.combined.extend_from_slice(&self.opinion);
        } else if rho == 0.0 {
            self.combined.extend_from_slice(&self.structural);
        } else {
            self.combined.extend(
                self.opinion
                    .iter()
                    .zip(&self.structural)
                    .map(|(h, s)| rho * h + (1.0 - rho) * s),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RewireOutcome {
    pub added: Option<(usize, usize)>,
    pub removed: Option<(usize, usize)>,
    pub skipped: bool,
}

impl RewireOutcome {
    const SKIPPED: RewireOutcome = RewireOutcome {
        added: None,
        removed: None,
        skipped: true,
    };
}

/// One rewiring move for focal `i`: accept a recommended non-neighbor, then
/// drop one of `i`'s links that existed before the addition, uniformly among
/// those the [`RemovalPolicy`] allows.
///
/// Skips without touching the graph when `i` has no candidates or nothing it
/// may drop, so the edge count never changes.
pub fn rewire_step<R: Rng + ?Sized>(
    g: &mut Graph,
    x: &[f64],
    i: usize,
    params: &RecommenderParams,
    rng: &mut R,
) -> Result<RewireOutcome> {
    check_focal(g, i)?;
    check_opinions(g, x)?;
    let mut scratch = Scratch::default();
    rewire_with(g, x, i, params, rng, &mut scratch)
}

pub(crate) fn rewire_with<R: Rng + ?Sized>(
    g: &mut Graph,
    x: &[f64],
    i: usize,
    params: &RecommenderParams,
    rng: &mut R,
    scratch: &mut Scratch,
) -> Result<RewireOutcome> {
    scratch.pool.clear();
    match params.removal {
        RemovalPolicy::Uniform => scratch.pool.extend_from_slice(g.neighbors_of(i)),
        RemovalPolicy::SpareLastLink => scratch.pool.extend(
            g.neighbors_of(i)
                .iter()
                .copied()
                .filter(|&l| g.degree(l) >= 2),
        ),
    }
    if scratch.pool.is_empty() {
        return Ok(RewireOutcome::SKIPPED);
    }
    match scratch.fill(g, x, i, params) {
        Ok(()) => {}
        Err(Error::EmptyCandidates(_)) => return Ok(RewireOutcome::SKIPPED),
        Err(e) => return Err(e),
    }

    let j = scratch.candidates[sample_index(&scratch.combined, rng)];
    g.add_edge(i, j)?;
    let l = scratch.pool[rng.random_range(0..scratch.pool.len())];
    g.remove_edge(i, l)?;
    Ok(RewireOutcome {
        added: Some((i, j)),
        removed: Some((i, l)),
        skipped: false,
    })
}
