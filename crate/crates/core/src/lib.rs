//! Co-evolving opinions and network structure under a link recommender that
//! mixes opinion similarity (homophily) with structural similarity (triadic
//! closure).

pub mod dynamics;
pub mod engine;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod output;
pub mod recommender;

pub use dynamics::{consensus_fixed_point, opinion_step, DynamicsParams, OpinionState};
pub use engine::{simulate, SimConfig, Simulation, Trajectory};
pub use error::{Error, Result};
pub use graph::{ComponentLabeling, Graph};
pub use harness::{run_sweep, SweepSpec};
pub use metrics::MetricsRow;
pub use recommender::{CandidateDistribution, RecommenderParams, RemovalPolicy, RewireOutcome};
