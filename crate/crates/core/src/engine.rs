//! Runs one co-evolution: each step is a full rewiring round in random focal
//! order followed by one synchronous opinion update.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, init_opinions_bounded, DynamicsParams, OpinionState};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::MetricsRow;
use crate::recommender::{self, RecommenderParams, Scratch};

/// Independent random streams derived from one root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    GraphInit = 1,
    OpinionInit = 2,
    FocalOrder = 3,
    Recommendation = 4,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub n: usize,
    pub mean_degree: f64,
    pub t_max: u64,
    pub seed: u64,
    pub init_range: [f64; 2],
    pub record_every: u64,
    pub snapshot_times: Vec<u64>,
    pub record_opinions: bool,
    pub require_connected: bool,
    pub max_retries: usize,
    pub recommender: RecommenderParams,
    pub dynamics: DynamicsParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 100,
            mean_degree: 10.0,
            t_max: 1200,
            seed: 0,
            init_range: [-1.0, 1.0],
            record_every: 10,
            snapshot_times: Vec::new(),
            record_opinions: false,
            require_connected: true,
            max_retries: 1000,
            recommender: RecommenderParams::default(),
            dynamics: DynamicsParams::default(),
        }
    }
}

impl SimConfig {
    /// Edge count `round(n ⟨k⟩ / 2)`.
    pub fn edge_count(&self) -> usize {
        (self.n as f64 * self.mean_degree / 2.0).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParam(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if !(self.mean_degree > 0.0 && self.mean_degree.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "mean_degree must be > 0, got {}",
                self.mean_degree
            )));
        }
        if self.t_max < 1 {
            return Err(Error::InvalidParam("t_max must be >= 1".into()));
        }
        if self.record_every < 1 {
            return Err(Error::InvalidParam("record_every must be >= 1".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|&&t| t > self.t_max) {
            return Err(Error::InvalidParam(format!(
                "snapshot time {t} exceeds t_max {}",
                self.t_max
            )));
        }
        self.recommender.validate()?;
        self.dynamics.validate()?;
        let [lo, hi] = self.init_range;
        let bound = self.dynamics.opinion_bound();
        if !(lo <= hi && lo >= -bound && hi <= bound) {
            return Err(Error::InvalidParam(format!(
                "init_range [{lo}, {hi}] must be ordered and inside ±{bound}"
            )));
        }
        let m = self.edge_count();
        let max = crate::graph::max_edges(self.n);
        if m == 0 || m > max || (self.require_connected && m + 1 < self.n) {
            return Err(Error::InfeasibleEdgeCount {
                n: self.n,
                m,
                reason: "mean_degree incompatible with n",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub rewires: usize,
    pub skips: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub graph: Graph,
    pub opinions: OpinionState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<MetricsRow>,
    pub final_graph: Graph,
    pub final_opinions: OpinionState,
    pub initial_edge_count: usize,
    pub skip_count: usize,
    /// Per-node opinions at each recorded time, when requested.
    pub opinion_series: Option<Vec<(u64, Vec<f64>)>>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn final_row(&self) -> &MetricsRow {
        self.rows.last().expect("trajectory has at least one row")
    }
}

/// Live simulation state with its random streams.
pub struct Simulation {
    cfg: SimConfig,
    t: u64,
    graph: Graph,
    opinions: OpinionState,
    order_rng: ChaCha8Rng,
    sample_rng: ChaCha8Rng,
    order: Vec<usize>,
    scratch: Scratch,
    influence: Vec<f64>,
    next: Vec<f64>,
    skips: usize,
}

impl Simulation {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let graph = Graph::random(
            cfg.n,
            cfg.edge_count(),
            &mut stream_rng(cfg.seed, Stream::GraphInit),
            cfg.require_connected,
            cfg.max_retries,
        )?;
        let opinions = init_opinions_bounded(
            cfg.n,
            (cfg.init_range[0], cfg.init_range[1]),
            &cfg.dynamics,
            &mut stream_rng(cfg.seed, Stream::OpinionInit),
        )?;
        Self::from_state(cfg, graph, opinions)
    }

    /// Starts from a given graph and opinion state instead of sampling them.
    pub fn from_state(cfg: SimConfig, graph: Graph, opinions: OpinionState) -> Result<Self> {
        if graph.node_count() != opinions.len() {
            return Err(Error::LengthMismatch {
                graph: graph.node_count(),
                opinions: opinions.len(),
            });
        }
        Ok(Simulation {
            order_rng: stream_rng(cfg.seed, Stream::FocalOrder),
            sample_rng: stream_rng(cfg.seed, Stream::Recommendation),
            order: (0..graph.node_count()).collect(),
            cfg,
            t: 0,
            graph,
            opinions,
            scratch: Scratch::default(),
            influence: Vec::new(),
            next: Vec::new(),
            skips: 0,
        })
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn opinions(&self) -> &OpinionState {
        &self.opinions
    }

    pub fn skip_count(&self) -> usize {
        self.skips
    }

    pub fn metrics(&self) -> Result<MetricsRow> {
        MetricsRow::measure(self.t, &self.graph, &self.opinions)
    }

    /// One rewiring round followed by one synchronous opinion update.
    pub fn step(&mut self) -> Result<StepStats> {
        let mut stats = StepStats::default();
        // fresh permutation each round, drawn from the identity
        for (k, v) in self.order.iter_mut().enumerate() {
            *v = k;
        }
        self.order.shuffle(&mut self.order_rng);
        for idx in 0..self.order.len() {
            let focal = self.order[idx];
            let outcome = recommender::rewire_with(
                &mut self.graph,
                &self.opinions,
                focal,
                &self.cfg.recommender,
                &mut self.sample_rng,
                &mut self.scratch,
            )?;
            if outcome.skipped {
                stats.skips += 1;
            } else {
                stats.rewires += 1;
            }
        }
        dynamics::opinion_step_into(
            &self.graph,
            &self.opinions,
            &self.cfg.dynamics,
            &mut self.influence,
            &mut self.next,
        )?;
        std::mem::swap(&mut self.opinions.0, &mut self.next);
        self.skips += stats.skips;
        self.t += 1;
        Ok(stats)
    }
}

/// Runs `cfg.t_max` steps, recording metrics at `t = 0`, every
/// `record_every` steps, and at `t_max`.
pub fn simulate(cfg: &SimConfig) -> Result<Trajectory> {
    let mut sim = Simulation::new(cfg.clone())?;
    let initial_edge_count = sim.graph.edge_count();
    let mut rows = Vec::new();
    let mut series = cfg.record_opinions.then(Vec::new);
    let mut snapshots = Vec::new();
    let mut snap_times = cfg.snapshot_times.clone();
    snap_times.sort_unstable();
    snap_times.dedup();

    let mut observe = |sim: &Simulation,
                       rows: &mut Vec<MetricsRow>,
                       series: &mut Option<Vec<(u64, Vec<f64>)>>|
     -> Result<()> {
        let t = sim.t;
        if t.is_multiple_of(cfg.record_every) || t == cfg.t_max {
            rows.push(sim.metrics()?);
            if let Some(s) = series.as_mut() {
                s.push((t, sim.opinions.to_vec()));
            }
        }
        if snap_times.binary_search(&t).is_ok() {
            snapshots.push(Snapshot {
                t,
                graph: sim.graph.clone(),
                opinions: sim.opinions.clone(),
            });
        }
        Ok(())
    };

    observe(&sim, &mut rows, &mut series)?;
    while sim.t < cfg.t_max {
        sim.step()?;
        observe(&sim, &mut rows, &mut series)?;
    }
    debug_assert_eq!(sim.graph.edge_count(), initial_edge_count);

    Ok(Trajectory {
        rows,
        initial_edge_count,
        skip_count: sim.skips,
        final_graph: sim.graph,
        final_opinions: sim.opinions,
        opinion_series: series,
        snapshots,
    })
}
