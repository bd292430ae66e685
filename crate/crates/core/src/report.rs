//! Output emission: the trajectory CSV and the structured metrics summary.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{sync_metrics, TrajectoryLog};

/// Writes one record per grid point per agent with the fixed column set
/// `t, agent_id, x_1..x_n, u_1..u_m, epoch_index`.
pub fn write_csv<W: Write>(log: &TrajectoryLog, mut out: W) -> Result<()> {
    let nf = log.follower_count();
    if nf == 0 {
        return Err(Error::Domain("log holds no followers".into()));
    }
    let n = log.states[0][0].len();
    let m = log.inputs[0][0].len();
    if log.states.iter().any(|s| s[0].len() != n) || log.inputs.iter().any(|u| u[0].len() != m) {
        return Err(Error::Domain(
            "trajectory export needs uniform state and input dimensions".into(),
        ));
    }
    let mut header = String::from("t,agent_id");
    for d in 1..=n {
        header.push_str(&format!(",x_{d}"));
    }
    for d in 1..=m {
        header.push_str(&format!(",u_{d}"));
    }
    header.push_str(",epoch_index");
    writeln!(out, "{header}")?;
    for g in 0..log.grid_len() {
        for i in 0..nf {
            let mut row = format!("{},{}", log.times[g], log.agent_ids[i]);
            for v in &log.states[i][g] {
                row.push_str(&format!(",{v}"));
            }
            for v in &log.inputs[i][g] {
                row.push_str(&format!(",{v}"));
            }
            row.push_str(&format!(",{}", log.epoch_of[g]));
            writeln!(out, "{row}")?;
        }
    }
    Ok(())
}

pub fn write_csv_file(log: &TrajectoryLog, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(log, std::io::BufWriter::new(file))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FollowerMetricsRecord {
    pub id: usize,
    pub arrival_error: f64,
    pub energy: f64,
    pub oracle_energy: f64,
    pub max_abs_input: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochMetricsRecord {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub law_equivalence: f64,
    /// Peak pairwise state residual over the epoch's grid points.
    pub sync_state_residual: f64,
    /// Peak pairwise law-input residual over the epoch's interior points.
    pub sync_input_residual: f64,
    pub leader_sample: Vec<f64>,
    pub follower: Vec<FollowerMetricsRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub scenario: String,
    pub steps_per_epoch: usize,
    pub epoch: Vec<EpochMetricsRecord>,
}

/// Builds the per-epoch metrics summary of a finished run.
pub fn metrics_summary(log: &TrajectoryLog, scenario: &str, steps_per_epoch: usize) -> MetricsSummary {
    let sync = sync_metrics(log);
    let mut records = Vec::with_capacity(log.epochs.len());
    for em in &log.epochs {
        // Grid range of this epoch: its interior and closing points.
        let range: Vec<usize> = (0..log.grid_len())
            .filter(|&g| log.epoch_of[g] == em.k && log.times[g] > em.t_start)
            .collect();
        let sync_state = range.iter().map(|&g| sync.state[g]).fold(0.0, f64::max);
        let sync_input = range.iter().map(|&g| sync.input[g]).fold(0.0, f64::max);
        records.push(EpochMetricsRecord {
            k: em.k,
            t_start: em.t_start,
            t_end: em.t_end,
            law_equivalence: em.law_equivalence,
            sync_state_residual: sync_state,
            sync_input_residual: sync_input,
            leader_sample: em.leader_sample.clone(),
            follower: em
                .followers
                .iter()
                .enumerate()
                .map(|(i, f)| FollowerMetricsRecord {
                    id: log.agent_ids[i],
                    arrival_error: f.arrival_error,
                    energy: f.energy,
                    oracle_energy: f.oracle_energy,
                    max_abs_input: f.max_abs_input,
                })
                .collect(),
        });
    }
    MetricsSummary {
        scenario: scenario.to_string(),
        steps_per_epoch,
        epoch: records,
    }
}

pub fn write_metrics_file(summary: &MetricsSummary, path: &Path) -> Result<()> {
    let text = toml::to_string_pretty(summary).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}
