//! Replication harness: independent runs, per-day percentile bands and
//! peak / size summaries.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact_data::DegreeSequence;
use crate::epidemic::{self, DiseaseParams, Trajectory};
use crate::error::{Error, Result};
use crate::interventions::InterventionPolicy;
use crate::netgen::{self, GenReport};
use crate::network::Network;
use crate::rng::{self, tag};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkSpec {
    /// Degree-calibrated network with closure probability `p`.
    Dc { degrees: DegreeSequence, p: f64 },
    /// `G(n, q)` with matched average degree.
    Er { n: usize, avg_degree: f64 },
}

impl NetworkSpec {
    pub fn generate(&self, seed: u64) -> Result<(Network, Option<GenReport>)> {
        match self {
            NetworkSpec::Dc { degrees, p } => {
                let (net, report) = netgen::generate_dc(degrees, *p, seed)?;
                Ok((net, Some(report)))
            }
            NetworkSpec::Er { n, avg_degree } => {
                Ok((netgen::generate_er(*n, *avg_degree, seed)?, None))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkSpec,
    pub disease: DiseaseParams,
    pub policy: InterventionPolicy,
    pub replications: usize,
    /// Fresh network per replication; otherwise one network shared by all.
    pub regenerate_network: bool,
    pub master_seed: u64,
    pub max_days: u32,
}

impl ExperimentConfig {
    pub fn new(network: NetworkSpec, r_mean: f64, policy: InterventionPolicy) -> Self {
        ExperimentConfig {
            network,
            disease: DiseaseParams::with_transmission(r_mean, 0.02),
            policy,
            replications: 100,
            regenerate_network: true,
            master_seed: 1,
            max_days: epidemic::DEFAULT_MAX_DAYS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        if self.max_days < 1 {
            return Err(Error::InvalidParameter("max_days must be at least 1".into()));
        }
        if let NetworkSpec::Dc { p, .. } = self.network {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("closure probability {p} outside [0, 1]")));
            }
        }
        self.disease.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
}

impl Band {
    pub fn of(xs: &[f64]) -> Band {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        Band {
            median: stats::quantile_sorted(&sorted, 0.5),
            p5: stats::quantile_sorted(&sorted, 0.05),
            p95: stats::quantile_sorted(&sorted, 0.95),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayBand {
    pub day: u32,
    pub infectious: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replications: usize,
    /// Per-day band of the I count; shorter runs are padded with zeros.
    pub daily: Vec<DayBand>,
    pub peak_height: Band,
    /// Median of per-run peak days (earliest day of the maximum).
    pub peak_time: f64,
    pub peak_time_min: u32,
    pub peak_time_max: u32,
    pub epidemic_size: Band,
}

pub const SUMMARY_CSV_HEADER: &str =
    "peak_median,peak_p5,peak_p95,peak_time,size_median,size_p5,size_p95";
pub const BAND_CSV_HEADER: &str = "day,i_median,i_p5,i_p95";

impl ReplicationSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.peak_height.median,
            self.peak_height.p5,
            self.peak_height.p95,
            self.peak_time,
            self.epidemic_size.median,
            self.epidemic_size.p5,
            self.epidemic_size.p95
        )
    }

    pub fn band_csv(&self) -> String {
        let mut s = String::from(BAND_CSV_HEADER);
        s.push('\n');
        for d in &self.daily {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                d.day, d.infectious.median, d.infectious.p5, d.infectious.p95
            );
        }
        s
    }
}

/// One replication's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub gen_report: Option<GenReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub runs: Vec<RunOutcome>,
    pub summary: ReplicationSummary,
}

pub fn summarize(trajectories: &[&Trajectory]) -> ReplicationSummary {
    let reps = trajectories.len();
    let horizon = trajectories.iter().map(|t| t.records.len()).max().unwrap_or(0);
    let mut daily = Vec::with_capacity(horizon);
    let mut column = vec![0.0; reps];
    for day in 0..horizon {
        for (slot, t) in column.iter_mut().zip(trajectories) {
            *slot = t.records.get(day).map_or(0.0, |r| r.infectious as f64);
        }
        daily.push(DayBand {
            day: day as u32,
            infectious: Band::of(&column),
        });
    }
    let peaks: Vec<(usize, u32)> = trajectories.iter().map(|t| t.peak()).collect();
    let heights: Vec<f64> = peaks.iter().map(|p| p.0 as f64).collect();
    let days: Vec<f64> = peaks.iter().map(|p| f64::from(p.1)).collect();
    let sizes: Vec<f64> = trajectories.iter().map(|t| t.epidemic_size() as f64).collect();
    ReplicationSummary {
        replications: reps,
        daily,
        peak_height: Band::of(&heights),
        peak_time: stats::median(&days),
        peak_time_min: peaks.iter().map(|p| p.1).min().unwrap_or(0),
        peak_time_max: peaks.iter().map(|p| p.1).max().unwrap_or(0),
        epidemic_size: Band::of(&sizes),
    }
}

fn run_one(cfg: &ExperimentConfig, shared: Option<&Network>, index: usize) -> Result<RunOutcome> {
    let owned;
    let (net, gen_report) = match shared {
        Some(net) => (net, None),
        None => {
            let seed = rng::derive_seed(cfg.master_seed, tag::NETWORK, index as u64);
            let (net, report) = cfg.network.generate(seed)?;
            owned = net;
            (&owned, report)
        }
    };
    let seed = rng::derive_seed(cfg.master_seed, tag::EPIDEMIC, index as u64);
    let trajectory = epidemic::run_to_completion(net, &cfg.disease, &cfg.policy, seed, cfg.max_days)?;
    Ok(RunOutcome {
        trajectory,
        gen_report,
    })
}

/// Runs every replication on the current rayon pool and keeps the
/// per-run trajectories.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let shared = if cfg.regenerate_network {
        None
    } else {
        let seed = rng::derive_seed(cfg.master_seed, tag::NETWORK, 0);
        Some(cfg.network.generate(seed)?.0)
    };
    let runs: Vec<RunOutcome> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| run_one(cfg, shared.as_ref(), i))
        .collect::<Result<_>>()?;
    let trajectories: Vec<&Trajectory> = runs.iter().map(|r| &r.trajectory).collect();
    let summary = summarize(&trajectories);
    Ok(ExperimentResult { runs, summary })
}

pub fn run_replications(cfg: &ExperimentConfig) -> Result<ReplicationSummary> {
    run_experiment(cfg).map(|r| r.summary)
}

/// [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    pool.install(|| run_experiment(cfg))
}

/// Evaluates each configuration; output order follows input order.
pub fn sweep(grid: &[ExperimentConfig]) -> Result<Vec<ReplicationSummary>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(index, cfg)| {
            run_replications(cfg).map_err(|e| Error::Sweep {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}
