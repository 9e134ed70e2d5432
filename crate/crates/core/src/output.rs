//! CSV and text formats written by the runner.
//!
//! | file                       | columns                                              |
//! |----------------------------|------------------------------------------------------|
//! | `trajectory.csv`           | `t,polarization,radicalization,n_components,mean_opinion` |
//! | `opinion_series.csv`       | `t,node,opinion`                                     |
//! | `snapshots/opinions_t*.csv`| `node,opinion`                                       |
//! | `snapshots/edges_t*.txt`   | edge list, see [`Graph::to_edge_list`]               |
//! | `sweep_cells.csv`          | see [`CellRecord`]                                   |
//! | `sweep_raw.csv`            | see [`RawRecord`]                                    |
//!
//! Floats are written in shortest round-trip form.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::{Snapshot, Trajectory};
use crate::error::Result;
use crate::graph::Graph;
use crate::metrics::MetricsRow;

pub const TRAJECTORY_HEADER: &str = "t,polarization,radicalization,n_components,mean_opinion";

pub fn write_trajectory<W: Write>(w: W, rows: &[MetricsRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, TRAJECTORY_HEADER)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &str) -> Result<()> {
    let got = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if got != expected {
        return Err(crate::Error::Parse(format!(
            "expected header {expected:?}, got {got:?}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpinionSample {
    pub t: u64,
    pub node: usize,
    pub opinion: f64,
}

pub fn write_opinion_series<W: Write>(w: W, series: &[(u64, Vec<f64>)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for (t, x) in series {
        for (node, &opinion) in x.iter().enumerate() {
            wtr.serialize(OpinionSample {
                t: *t,
                node,
                opinion,
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_opinion_series<R: Read>(r: R) -> Result<Vec<OpinionSample>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, "t,node,opinion")?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct NodeOpinion {
    node: usize,
    opinion: f64,
}

pub fn write_node_opinions<W: Write>(w: W, x: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for (node, &opinion) in x.iter().enumerate() {
        wtr.serialize(NodeOpinion { node, opinion })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_node_opinions<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, "node,opinion")?;
    let mut out = Vec::new();
    for (k, rec) in rdr.deserialize::<NodeOpinion>().enumerate() {
        let rec = rec?;
        if rec.node != k {
            return Err(crate::Error::Parse(format!(
                "node {} out of order at row {k}",
                rec.node
            )));
        }
        out.push(rec.opinion);
    }
    Ok(out)
}

pub fn write_snapshot(dir: &Path, snap: &Snapshot) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join(format!("edges_t{}.txt", snap.t)),
        snap.graph.to_edge_list(snap.t),
    )?;
    write_node_opinions(
        fs::File::create(dir.join(format!("opinions_t{}.csv", snap.t)))?,
        &snap.opinions,
    )?;
    Ok(())
}

pub fn read_snapshot_graph(path: &Path) -> Result<(Graph, u64)> {
    Graph::read_edge_list(std::io::BufReader::new(fs::File::open(path)?))
}

/// Writes `trajectory.csv`, the optional opinion series and snapshots into
/// `dir`.
pub fn write_trajectory_dir(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_trajectory(fs::File::create(dir.join("trajectory.csv"))?, &traj.rows)?;
    if let Some(series) = &traj.opinion_series {
        write_opinion_series(fs::File::create(dir.join("opinion_series.csv"))?, series)?;
    }
    for snap in &traj.snapshots {
        write_snapshot(&dir.join("snapshots"), snap)?;
    }
    Ok(())
}

/// One aggregated sweep cell. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell: usize,
    pub n: usize,
    pub mean_degree: f64,
    pub t_max: u64,
    pub rho: f64,
    pub beta: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub k: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub replicates: usize,
    pub failed: usize,
    pub polarization_mean: f64,
    pub polarization_se: f64,
    pub radicalization_mean: f64,
    pub radicalization_se: f64,
    pub n_components_mean: f64,
    pub n_components_se: f64,
    pub mean_opinion_mean: f64,
    pub mean_opinion_se: f64,
    pub abs_mean_opinion_mean: f64,
    pub abs_mean_opinion_se: f64,
    pub error: String,
}

pub const CELLS_HEADER: &str = "cell,n,mean_degree,t_max,rho,beta,eta,epsilon,k,gamma,alpha,replicates,failed,\
polarization_mean,polarization_se,radicalization_mean,radicalization_se,n_components_mean,n_components_se,\
mean_opinion_mean,mean_opinion_se,abs_mean_opinion_mean,abs_mean_opinion_se,error";

/// One replicate's final state. Failed replicates carry NaN metrics and an
/// error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub cell: usize,
    pub replicate: usize,
    pub seed: u64,
    pub polarization: f64,
    pub radicalization: f64,
    pub n_components: usize,
    pub mean_opinion: f64,
    pub skip_count: usize,
    pub error: String,
}

pub const RAW_HEADER: &str =
    "cell,replicate,seed,polarization,radicalization,n_components,mean_opinion,skip_count,error";

pub fn write_records<W: Write, T: Serialize>(w: W, records: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_cells<R: Read>(r: R) -> Result<Vec<CellRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, CELLS_HEADER)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_raw<R: Read>(r: R) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    check_header(&mut rdr, RAW_HEADER)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}
