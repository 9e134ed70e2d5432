//! Parameter sweeps with replicate aggregation, config files and presets.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{simulate, SimConfig};
use crate::error::{Error, Result};
use crate::output::{CellRecord, RawRecord};

/// Environment variable consulted for the default sweep worker count.
pub const WORKERS_ENV: &str = "COEVOLVE_WORKERS";

/// A sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Rho,
    Beta,
    Eta,
    /// Sets `eta` and `beta` to the same value.
    EtaBeta,
    Epsilon,
    K,
    Gamma,
    Alpha,
    N,
    MeanDegree,
    TMax,
}

impl Param {
    fn id(self) -> u64 {
        self as u64 + 1
    }

    /// Writes `value` into `cfg`. Integer parameters must be integral.
    pub fn apply(self, cfg: &mut SimConfig, value: f64) -> Result<()> {
        let integral = |v: f64| -> Result<u64> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as u64)
            } else {
                Err(Error::InvalidParam(format!(
                    "{self} needs a non-negative integer, got {v}"
                )))
            }
        };
        match self {
            Param::Rho => cfg.recommender.rho = value,
            Param::Beta => cfg.recommender.beta = value,
            Param::Eta => cfg.recommender.eta = value,
            Param::EtaBeta => {
                cfg.recommender.eta = value;
                cfg.recommender.beta = value;
            }
            Param::Epsilon => cfg.recommender.epsilon = value,
            Param::K => cfg.dynamics.k = value,
            Param::Gamma => cfg.dynamics.gamma = value,
            Param::Alpha => cfg.dynamics.alpha = value,
            Param::N => cfg.n = integral(value)? as usize,
            Param::MeanDegree => cfg.mean_degree = value,
            Param::TMax => cfg.t_max = integral(value)?,
        }
        Ok(())
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Param::Rho => "rho",
            Param::Beta => "beta",
            Param::Eta => "eta",
            Param::EtaBeta => "eta_beta",
            Param::Epsilon => "epsilon",
            Param::K => "k",
            Param::Gamma => "gamma",
            Param::Alpha => "alpha",
            Param::N => "n",
            Param::MeanDegree => "mean_degree",
            Param::TMax => "t_max",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub replicates: usize,
    pub seed_base: u64,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub base: SimConfig,
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis values of cell `index`; the last axis varies fastest.
    pub fn coords(&self, mut index: usize) -> Vec<(Param, f64)> {
        let mut out = vec![(Param::Rho, 0.0); self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let len = axis.values.len();
            out[k] = (axis.param, axis.values[index % len]);
            index /= len;
        }
        out
    }

    pub fn cell_config(&self, index: usize) -> Result<SimConfig> {
        let mut cfg = self.base.clone();
        for (param, value) in self.coords(index) {
            param.apply(&mut cfg, value)?;
        }
        Ok(cfg)
    }

    /// Structural checks plus validation of every cell's configuration.
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::InvalidParam("replicates must be >= 1".into()));
        }
        if self.axes.len() > 2 {
            return Err(Error::InvalidParam(format!(
                "at most two axes, got {}",
                self.axes.len()
            )));
        }
        for (k, a) in self.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(Error::InvalidParam(format!(
                    "axis {} has no values",
                    a.param
                )));
            }
            if self.axes[..k].iter().any(|b| b.param == a.param) {
                return Err(Error::InvalidParam(format!(
                    "axis {} declared twice",
                    a.param
                )));
            }
        }
        let has = |p: Param| self.axes.iter().any(|a| a.param == p);
        if has(Param::EtaBeta) && (has(Param::Eta) || has(Param::Beta)) {
            return Err(Error::InvalidParam(
                "joint eta_beta axis conflicts with an independent eta or beta axis".into(),
            ));
        }
        for index in 0..self.cell_count() {
            self.cell_config(index)?
                .validate()
                .map_err(|e| Error::InvalidParam(format!("cell {index}: {e}")))?;
        }
        Ok(())
    }

    /// Seed of replicate `r` in cell `index`. Depends on the cell's axis
    /// values rather than its position, so growing a grid leaves the seeds of
    /// existing cells untouched.
    pub fn replicate_seed(&self, index: usize, r: usize) -> u64 {
        let mut words = vec![self.seed_base];
        for (param, value) in self.coords(index) {
            words.push(param.id());
            words.push(value.to_bits());
        }
        words.push(r as u64);
        stable_hash(&words)
    }
}

/// Binds a value of the joint `eta_beta` axis: `eta = beta = value`.
pub fn joint_axis_binding(spec: &SweepSpec, value: f64) -> Result<SimConfig> {
    if !spec.axes.iter().any(|a| a.param == Param::EtaBeta) {
        return Err(Error::InvalidParam(
            "no joint eta_beta axis declared".into(),
        ));
    }
    if spec
        .axes
        .iter()
        .any(|a| matches!(a.param, Param::Eta | Param::Beta))
    {
        return Err(Error::InvalidParam(
            "joint eta_beta axis conflicts with an independent eta or beta axis".into(),
        ));
    }
    let mut cfg = spec.base.clone();
    Param::EtaBeta.apply(&mut cfg, value)?;
    Ok(cfg)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive 64-bit mix of `words`, identical on every platform.
pub fn stable_hash(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6a09_e667_f3bc_c909, |h, &w| splitmix64(h ^ splitmix64(w)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateFinal {
    pub polarization: f64,
    pub radicalization: f64,
    pub n_components: usize,
    pub mean_opinion: f64,
    pub skip_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub seed: u64,
    pub outcome: std::result::Result<ReplicateFinal, String>,
}

/// Mean and standard error of one metric over a cell's successful
/// replicates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Summary { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        Summary {
            mean,
            se: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub index: usize,
    pub coords: Vec<(Param, f64)>,
    pub config: SimConfig,
    pub replicates: Vec<ReplicateResult>,
    pub polarization: Summary,
    pub radicalization: Summary,
    pub n_components: Summary,
    pub mean_opinion: Summary,
    pub abs_mean_opinion: Summary,
}

impl CellResult {
    pub fn finals(&self) -> impl Iterator<Item = &ReplicateFinal> {
        self.replicates
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.replicates
            .iter()
            .filter(|r| r.outcome.is_err())
            .count()
    }

    pub fn first_error(&self) -> Option<&str> {
        self.replicates
            .iter()
            .find_map(|r| r.outcome.as_ref().err().map(String::as_str))
    }

    fn aggregate(
        index: usize,
        coords: Vec<(Param, f64)>,
        config: SimConfig,
        replicates: Vec<ReplicateResult>,
    ) -> Self {
        let mut cell = CellResult {
            index,
            coords,
            config,
            replicates,
            polarization: Summary::default(),
            radicalization: Summary::default(),
            n_components: Summary::default(),
            mean_opinion: Summary::default(),
            abs_mean_opinion: Summary::default(),
        };
        let finals: Vec<ReplicateFinal> = cell.finals().copied().collect();
        let column =
            |f: fn(&ReplicateFinal) -> f64| Summary::of(&finals.iter().map(f).collect::<Vec<_>>());
        cell.polarization = column(|r| r.polarization);
        cell.radicalization = column(|r| r.radicalization);
        cell.n_components = column(|r| r.n_components as f64);
        cell.mean_opinion = column(|r| r.mean_opinion);
        cell.abs_mean_opinion = column(|r| r.mean_opinion.abs());
        cell
    }

    pub fn to_record(&self) -> CellRecord {
        let c = &self.config;
        CellRecord {
            cell: self.index,
            n: c.n,
            mean_degree: c.mean_degree,
            t_max: c.t_max,
            rho: c.recommender.rho,
            beta: c.recommender.beta,
            eta: c.recommender.eta,
            epsilon: c.recommender.epsilon,
            k: c.dynamics.k,
            gamma: c.dynamics.gamma,
            alpha: c.dynamics.alpha,
            replicates: self.replicates.len(),
            failed: self.failures(),
            polarization_mean: self.polarization.mean,
            polarization_se: self.polarization.se,
            radicalization_mean: self.radicalization.mean,
            radicalization_se: self.radicalization.se,
            n_components_mean: self.n_components.mean,
            n_components_se: self.n_components.se,
            mean_opinion_mean: self.mean_opinion.mean,
            mean_opinion_se: self.mean_opinion.se,
            abs_mean_opinion_mean: self.abs_mean_opinion.mean,
            abs_mean_opinion_se: self.abs_mean_opinion.se,
            error: self.first_error().unwrap_or_default().to_string(),
        }
    }

    pub fn raw_records(&self) -> Vec<RawRecord> {
        self.replicates
            .iter()
            .map(|r| match &r.outcome {
                Ok(f) => RawRecord {
                    cell: self.index,
                    replicate: r.replicate,
                    seed: r.seed,
                    polarization: f.polarization,
                    radicalization: f.radicalization,
                    n_components: f.n_components,
                    mean_opinion: f.mean_opinion,
                    skip_count: f.skip_count,
                    error: String::new(),
                },
                Err(e) => RawRecord {
                    cell: self.index,
                    replicate: r.replicate,
                    seed: r.seed,
                    polarization: f64::NAN,
                    radicalization: f64::NAN,
                    n_components: 0,
                    mean_opinion: f64::NAN,
                    skip_count: 0,
                    error: e.clone(),
                },
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn cell_records(&self) -> Vec<CellRecord> {
        self.cells.iter().map(CellResult::to_record).collect()
    }

    pub fn raw_records(&self) -> Vec<RawRecord> {
        self.cells
            .iter()
            .flat_map(CellResult::raw_records)
            .collect()
    }

    /// Writes `sweep_cells.csv` and `sweep_raw.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        crate::output::write_records(
            std::fs::File::create(dir.join("sweep_cells.csv"))?,
            &self.cell_records(),
        )?;
        crate::output::write_records(
            std::fs::File::create(dir.join("sweep_raw.csv"))?,
            &self.raw_records(),
        )?;
        Ok(())
    }
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run_replicate(cfg: &SimConfig, replicate: usize, seed: u64) -> ReplicateResult {
    let cfg = SimConfig {
        seed,
        record_every: cfg.t_max,
        record_opinions: false,
        snapshot_times: Vec::new(),
        ..cfg.clone()
    };
    let outcome = simulate(&cfg)
        .map(|traj| {
            let last = traj.final_row();
            ReplicateFinal {
                polarization: last.polarization,
                radicalization: last.radicalization,
                n_components: last.n_components,
                mean_opinion: last.mean_opinion,
                skip_count: traj.skip_count,
            }
        })
        .map_err(|e| e.to_string());
    ReplicateResult {
        replicate,
        seed,
        outcome,
    }
}

/// Runs every (cell, replicate) pair on a pool of `parallelism` workers.
/// Results are merged by position, so the output does not depend on the
/// worker count or completion order.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<SweepResult> {
    if spec.replicates < 1 {
        return Err(Error::InvalidParam("replicates must be >= 1".into()));
    }
    if spec.axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::InvalidParam("empty axis".into()));
    }
    let cells = spec.cell_count();
    let configs: Vec<std::result::Result<SimConfig, String>> = (0..cells)
        .map(|c| spec.cell_config(c).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells)
        .flat_map(|c| (0..spec.replicates).map(move |r| (c, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParam(format!("worker pool: {e}")))?;
    let results: Vec<ReplicateResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, r)| {
                let seed = spec.replicate_seed(c, r);
                match &configs[c] {
                    Ok(cfg) => run_replicate(cfg, r, seed),
                    Err(e) => ReplicateResult {
                        replicate: r,
                        seed,
                        outcome: Err(e.clone()),
                    },
                }
            })
            .collect()
    });

    let mut results = results.into_iter();
    let cells = (0..cells)
        .map(|c| {
            let reps: Vec<_> = results.by_ref().take(spec.replicates).collect();
            let config = configs[c].clone().unwrap_or_else(|_| spec.base.clone());
            CellResult::aggregate(c, spec.coords(c), config, reps)
        })
        .collect();
    Ok(SweepResult { cells })
}

/// A parsed configuration file: a single run or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigFile {
    Run(SimConfig),
    Sweep(SweepSpec),
}

/// Parses TOML text. A document with an `axes` key is a sweep spec.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    if table.contains_key("axes") {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(ConfigFile::Sweep(spec))
    } else {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(ConfigFile::Run(cfg))
    }
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Parse(e.to_string()))
}

/// Bundled experiment presets, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("baseline", include_str!("../presets/baseline.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
];

pub fn preset(name: &str) -> Result<ConfigFile> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::InvalidParam(format!(
                "unknown preset {name:?}; known: {}",
                names.join(", ")
            ))
        })?;
    parse_config(text)
}
