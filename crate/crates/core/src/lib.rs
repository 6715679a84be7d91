//! Contact-network epidemic simulation: degree-calibrated network
//! generation, agent-based SEIR dynamics and daily targeted-intervention
//! policies, with a deterministic parallel replication harness.

pub mod contact_data;
pub mod epidemic;
pub mod error;
pub mod experiment;
pub mod interventions;
pub mod netgen;
pub mod netmetrics;
pub mod network;
pub mod rng;
pub mod stats;

pub use contact_data::{
    combine_with_job_contacts, degree_stats, fit_power_law_tail, load_degree_file,
    power_law_gof, DegreeSequence, PowerLawFit, SummaryStats,
};
pub use epidemic::{
    compute_r0, init_epidemic, run_to_completion, step_day, Compartment, DailyRecord,
    DiseaseParams, EpidemicState, Trajectory,
};
pub use error::{Error, Result};
pub use experiment::{
    run_experiment, run_replications, sweep, ExperimentConfig, NetworkSpec, ReplicationSummary,
};
pub use interventions::{Intervention, InterventionPolicy, PolicyKind};
pub use netgen::{generate_dc, generate_er, GenReport};
pub use netmetrics::{compute_metrics, NetworkMetrics};
pub use network::{Network, NodeId};
