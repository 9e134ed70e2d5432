//! Synchronous opinion update with bounded (tanh) social influence and decay
//! toward neutrality:
//!
//! ```text
//! x_i' = γ x_i + (K / k_i) Σ_{j ∈ N_i} tanh(α x_j)
//! ```

use std::ops::{Deref, DerefMut};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    /// Social influence strength; zero decouples opinions from the graph.
    pub k: f64,
    /// Opinion persistence, in `[0, 1)`.
    pub gamma: f64,
    /// Controversy / social reinforcement.
    pub alpha: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            k: 0.1,
            gamma: 0.99,
            alpha: 0.3,
        }
    }
}

impl DynamicsParams {
    pub fn new(k: f64, gamma: f64, alpha: f64) -> Result<Self> {
        let p = DynamicsParams { k, gamma, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "K must be finite and >= 0, got {}",
                self.k
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParam(format!(
                "gamma must lie in [0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `K / (1 - γ)`: trajectories starting inside `[-bound, bound]` stay there.
    pub fn opinion_bound(&self) -> f64 {
        self.k / (1.0 - self.gamma)
    }
}

/// One real-valued opinion per node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OpinionState(pub Vec<f64>);

impl OpinionState {
    pub fn zeros(n: usize) -> Self {
        OpinionState(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for OpinionState {
    fn from(v: Vec<f64>) -> Self {
        OpinionState(v)
    }
}

impl Deref for OpinionState {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for OpinionState {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Applies one synchronous update, reading from `x` and writing a fresh
/// state. Isolated nodes get no social term and simply decay.
pub fn opinion_step(g: &Graph, x: &[f64], params: &DynamicsParams) -> Result<OpinionState> {
    let mut out = Vec::new();
    let mut influence = Vec::new();
    opinion_step_into(g, x, params, &mut influence, &mut out)?;
    Ok(OpinionState(out))
}

pub(crate) fn opinion_step_into(
    g: &Graph,
    x: &[f64],
    params: &DynamicsParams,
    influence: &mut Vec<f64>,
    out: &mut Vec<f64>,
) -> Result<()> {
    if x.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            graph: g.node_count(),
            opinions: x.len(),
        });
    }
    if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteOpinion(bad));
    }
    influence.clear();
    influence.extend(x.iter().map(|&v| (params.alpha * v).tanh()));
    out.clear();
    out.extend(x.iter().enumerate().map(|(i, &xi)| {
        let nb = g.neighbors_of(i);
        let decayed = params.gamma * xi;
        if nb.is_empty() {
            return decayed;
        }
        // ascending neighbor order fixes the summation order
        let mut sum = 0.0;
        for &j in nb {
            sum += influence[j];
        }
        decayed + params.k * (sum / nb.len() as f64)
    }));
    Ok(())
}

/// Positive root of `(1 - γ) x = K tanh(α x)`, or 0 when `K α ≤ 1 - γ`.
pub fn consensus_fixed_point(params: &DynamicsParams) -> f64 {
    let DynamicsParams { k, gamma, alpha } = *params;
    let decay = 1.0 - gamma;
    if k * alpha <= decay {
        return 0.0;
    }
    // K tanh(αx)/x - (1-γ) is strictly decreasing on (0, ∞), positive near 0
    // and negative at the opinion bound
    let slope_gap = |x: f64| k * (alpha * x).tanh() / x - decay;
    let mut lo = 0.0;
    let mut hi = k / decay;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope_gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// I.i.d. uniform opinions on `[lo, hi]`. A degenerate range `lo == hi`
/// yields a constant state.
pub fn init_opinions<R: Rng + ?Sized>(
    n: usize,
    range: (f64, f64),
    rng: &mut R,
) -> Result<OpinionState> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidParam(format!(
            "invalid opinion range [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(OpinionState(vec![lo; n]));
    }
    Ok(OpinionState(
        (0..n).map(|_| rng.random_range(lo..=hi)).collect(),
    ))
}

/// Like [`init_opinions`] but also requires the range to lie within the
/// opinion bound of `params`.
pub fn init_opinions_bounded<R: Rng + ?Sized>(
    n: usize,
    range: (f64, f64),
    params: &DynamicsParams,
    rng: &mut R,
) -> Result<OpinionState> {
    let bound = params.opinion_bound();
    if range.0 < -bound || range.1 > bound {
        return Err(Error::InvalidParam(format!(
            "opinion range [{}, {}] exceeds bound ±{bound}",
            range.0, range.1
        )));
    }
    init_opinions(n, range, rng)
}
