//! `hubsim`: contact-network epidemic experiments from the command line.

mod config;
mod output;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use hubsim_core::contact_data::{self, powerlaw, surrogate};
use hubsim_core::experiment::{self, SUMMARY_CSV_HEADER};
use hubsim_core::netmetrics::METRICS_CSV_HEADER;
use hubsim_core::{
    combine_with_job_contacts, compute_metrics, degree_stats, generate_dc, generate_er, Error,
};

use config::{ConfigError, DataError};
use output::{write_atomic, Staging};

#[derive(Parser)]
#[command(name = "hubsim", version, about = "Contact-network SEIR experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a discrete power law to the tail of a degree file.
    Fit {
        file: PathBuf,
        /// Lower cutoff of the tail.
        #[arg(long, required_unless_present = "auto_xmin")]
        xmin: Option<u32>,
        /// Choose xmin by minimizing the KS distance.
        #[arg(long, conflicts_with = "xmin")]
        auto_xmin: bool,
        /// Bootstrap replicates for a goodness-of-fit p-value (at least 100).
        #[arg(long)]
        gof: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Generate one network and write its edges, metrics and report.
    Netgen {
        /// Degree file; omit with --n/--avg-degree for a plain random graph.
        file: Option<PathBuf>,
        /// Closure probability for the degree-calibrated generator.
        #[arg(long)]
        p: Option<f64>,
        /// Random graph instead, matching the file's size and mean degree.
        #[arg(long)]
        er: bool,
        #[arg(long, requires = "avg_degree", conflicts_with = "file")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        avg_degree: Option<f64>,
        /// `index extra` pairs added to the diary degrees.
        #[arg(long)]
        job_extras: Option<PathBuf>,
        #[arg(long, default_value_t = surrogate::JOB_CAP)]
        job_cap: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes PREFIX.edges, PREFIX.metrics.csv, PREFIX.report.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the replications described by a TOML configuration.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write stand-in degree files with the published summary statistics.
    Surrogate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-respondent contact duration profiles from a CSV, as JSON.
    Durations { file: PathBuf },
}

/// Bad invocation detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() || err.downcast_ref::<ConfigError>().is_some() {
        return 1;
    }
    if err.downcast_ref::<DataError>().is_some() {
        return 2;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidParameter(_) => 1,
                Error::Sweep { source, .. } if matches!(**source, Error::InvalidParameter(_)) => 1,
                Error::NonConvergence(_) | Error::UndefinedCorrelation(_) | Error::Sweep { .. } => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit { file, xmin, auto_xmin, gof, seed } => fit(&file, xmin, auto_xmin, gof, seed),
        Command::Netgen { file, p, er, n, avg_degree, job_extras, job_cap, seed, out } => {
            netgen(NetgenArgs { file, p, er, n, avg_degree, job_extras, job_cap, seed, out })
        }
        Command::Simulate { config, out, threads } => simulate(&config, &out, threads),
        Command::Surrogate { out } => write_surrogate(&out),
        Command::Durations { file } => durations(&file),
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    fit: powerlaw::PowerLawFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
}

fn fit(file: &Path, xmin: Option<u32>, auto: bool, gof: Option<usize>, seed: u64) -> Result<()> {
    let seq = contact_data::load_degree_file(file)?;
    let fit = if auto {
        powerlaw::select_xmin(&seq, powerlaw::MIN_TAIL)?
    } else {
        powerlaw::fit_power_law_tail(&seq, xmin.expect("clap enforces xmin"))?
    };
    let p_value = gof
        .map(|reps| powerlaw::power_law_gof(&seq, &fit, reps, seed))
        .transpose()?;
    print_json(&FitOutput { fit, p_value })
}

struct NetgenArgs {
    file: Option<PathBuf>,
    p: Option<f64>,
    er: bool,
    n: Option<usize>,
    avg_degree: Option<f64>,
    job_extras: Option<PathBuf>,
    job_cap: u32,
    seed: u64,
    out: PathBuf,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn netgen(a: NetgenArgs) -> Result<()> {
    let degrees = match &a.file {
        Some(f) => {
            let mut d = contact_data::load_degree_file(f)?;
            if let Some(path) = &a.job_extras {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let extras = contact_data::parse_job_extras(&text)
                    .with_context(|| path.display().to_string())?;
                d = combine_with_job_contacts(&d, &extras, a.job_cap)?;
            }
            Some(d)
        }
        None => None,
    };
    let (net, report) = match (&degrees, a.er, a.n) {
        (Some(d), false, _) => {
            let p = a.p.ok_or_else(|| usage("--p is required for a degree-calibrated network"))?;
            let (net, rep) = generate_dc(d, p, a.seed)?;
            (net, serde_json::to_value(&rep)?)
        }
        (Some(d), true, _) => {
            if a.p.is_some() {
                return Err(usage("--p does not apply to a random graph"));
            }
            let mean = degree_stats(d).mean;
            let net = generate_er(d.len(), mean, a.seed)?;
            (net, serde_json::json!({ "n": d.len(), "avg_degree": mean }))
        }
        (None, _, Some(n)) => {
            if a.p.is_some() || a.job_extras.is_some() {
                return Err(usage("--p and --job-extras need a degree file"));
            }
            let k = a.avg_degree.expect("clap enforces --avg-degree");
            (generate_er(n, k, a.seed)?, serde_json::json!({ "n": n, "avg_degree": k }))
        }
        (None, _, None) => return Err(usage("give a degree file or --n and --avg-degree")),
    };
    eprintln!("generated {} nodes, {} edges; computing metrics", net.node_count(), net.edge_count());
    let metrics = compute_metrics(&net);
    write_atomic(&with_suffix(&a.out, ".edges"), net.to_edge_list().as_bytes())?;
    write_atomic(
        &with_suffix(&a.out, ".metrics.csv"),
        format!("{METRICS_CSV_HEADER}\n{}\n", metrics.csv_row()).as_bytes(),
    )?;
    let mut json = serde_json::to_string_pretty(&serde_json::json!({
        "seed": a.seed,
        "metrics": metrics,
        "generator": report,
    }))?;
    json.push('\n');
    write_atomic(&with_suffix(&a.out, ".report.json"), json.as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    hubsim_version: &'static str,
    config_file: String,
    config_raw: &'a str,
    config: &'a hubsim_core::ExperimentConfig,
    master_seed: u64,
    files: &'a [String],
    duration_seconds: f64,
}

fn simulate(config_path: &Path, out: &Path, threads: Option<usize>) -> Result<()> {
    let started = Instant::now();
    let raw = fs::read_to_string(config_path)
        .map_err(|e| DataError(anyhow!("{}: {e}", config_path.display())))?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let cfg = config::parse(&raw, base)?.resolve()?;
    cfg.validate()?;
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let mut staging = Staging::new(out).map_err(|e| usage(format!("{e:#}")))?;

    eprintln!("running {} replications", cfg.replications);
    let result = match threads {
        Some(t) => experiment::run_experiment_with_threads(&cfg, t)?,
        None => experiment::run_experiment(&cfg)?,
    };
    let width = cfg.replications.saturating_sub(1).to_string().len().max(3);
    for (i, run) in result.runs.iter().enumerate() {
        staging.write(&format!("trajectories/run_{i:0width$}.csv"), run.trajectory.to_csv().as_bytes())?;
    }
    let s = &result.summary;
    staging.write("summary.csv", format!("{SUMMARY_CSV_HEADER}\n{}\n", s.csv_row()).as_bytes())?;
    staging.write("bands.csv", s.band_csv().as_bytes())?;

    let mut files = staging.files().to_vec();
    files.push("manifest.json".into());
    let manifest = Manifest {
        hubsim_version: env!("CARGO_PKG_VERSION"),
        config_file: config_path.display().to_string(),
        config_raw: &raw,
        config: &cfg,
        master_seed: cfg.master_seed,
        files: &files,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    staging.write("manifest.json", json.as_bytes())?;
    let dest = staging.commit()?;
    eprintln!(
        "peak {} (day {}), size {}; wrote {}",
        s.peak_height.median,
        s.peak_time,
        s.epidemic_size.median,
        dest.display()
    );
    Ok(())
}

fn write_surrogate(out: &Path) -> Result<()> {
    let extras: String = surrogate::job_extras_like()
        .iter()
        .map(|(i, x)| format!("{i} {x}\n"))
        .collect();
    let files = [
        ("diary.txt", contact_data::format_degrees(&surrogate::diary_like())),
        ("job_extras.txt", extras),
        ("extended.txt", contact_data::format_degrees(&surrogate::extended_like())),
    ];
    for (name, text) in files {
        write_atomic(&out.join(name), text.as_bytes())?;
    }
    eprintln!("wrote stand-in data to {}", out.display());
    Ok(())
}

fn durations(file: &Path) -> Result<()> {
    let f = fs::File::open(file).map_err(|e| DataError(anyhow!("{}: {e}", file.display())))?;
    let records = contact_data::read_contact_records(f)?;
    if records.is_empty() {
        bail!(DataError(anyhow!("{}: no contact records", file.display())));
    }
    print_json(&contact_data::duration_profiles(&records)?)
}
