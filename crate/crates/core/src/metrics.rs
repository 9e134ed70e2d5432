//! Population observables: polarization, radicalization, fragmentation and
//! mean opinion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub t: u64,
    pub polarization: f64,
    pub radicalization: f64,
    pub n_components: usize,
    pub mean_opinion: f64,
}

impl MetricsRow {
    pub fn measure(t: u64, g: &Graph, x: &[f64]) -> Result<Self> {
        Ok(MetricsRow {
            t,
            polarization: polarization(x)?,
            radicalization: radicalization(x)?,
            n_components: component_count(g),
            mean_opinion: mean_opinion(x)?,
        })
    }
}

pub fn mean_opinion(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyState);
    }
    Ok(x.iter().sum::<f64>() / x.len() as f64)
}

/// Population standard deviation (divisor `n`).
pub fn polarization(x: &[f64]) -> Result<f64> {
    let mean = mean_opinion(x)?;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
    Ok(var.sqrt())
}

/// Mean absolute opinion.
pub fn radicalization(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptyState);
    }
    Ok(x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64)
}

pub fn component_count(g: &Graph) -> usize {
    g.connected_components().count
}
