//! Experiment configuration file.
//!
//! A TOML document with the keys below, either as tables or as dotted keys.
//! Every missing or invalid key is collected and reported in one error.
//!
//! ```toml
//! network.kind = "dc"            # or "er"
//! network.degree_file = "diary.txt"
//! network.job_extras = "jobs.txt" # optional, dc only
//! network.job_cap = 134           # optional
//! network.p = 0.0                 # dc only
//! network.n = 2029                # er only, unless degree_file is given
//! network.avg_degree = 9.72       # er only, unless degree_file is given
//! disease.r_mean = 0.05
//! disease.r_sd = 0.02
//! intervention.kind = "hub_target"
//! intervention.budget = 10
//! experiment.replications = 100
//! experiment.max_days = 365
//! experiment.regenerate_network = true
//! rng.master_seed = 1
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use hubsim_core::contact_data::{self, surrogate};
use hubsim_core::{
    combine_with_job_contacts, degree_stats, DiseaseParams, ExperimentConfig, InterventionPolicy,
    NetworkSpec, PolicyKind,
};
use toml::{Table, Value};

const KNOWN: &[(&str, &[&str])] = &[
    ("network", &["kind", "degree_file", "job_extras", "job_cap", "p", "n", "avg_degree"]),
    ("disease", &["r_mean", "r_sd"]),
    ("intervention", &["kind", "budget"]),
    ("experiment", &["replications", "max_days", "regenerate_network"]),
    ("rng", &["master_seed"]),
];

#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for p in &self.0 {
            write!(f, "\n  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Failure to load a file the configuration points at.
#[derive(Debug)]
pub struct DataError(pub anyhow::Error);

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for DataError {}

struct Reader<'a> {
    root: &'a Table,
    problems: Vec<String>,
}

impl<'a> Reader<'a> {
    fn raw(&self, key: &str) -> Option<&'a Value> {
        let (section, name) = key.split_once('.').unwrap();
        self.root.get(section)?.as_table()?.get(name)
    }

    fn missing(&mut self, key: &str) {
        self.problems.push(format!("{key}: missing"));
    }

    fn invalid(&mut self, key: &str, want: &str, got: &Value) {
        self.problems.push(format!("{key}: expected {want}, found {got}"));
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.invalid(key, "a number", other);
                None
            }
        }
    }

    fn opt_u64(&mut self, key: &str) -> Option<u64> {
        match self.raw(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            other => {
                self.invalid(key, "a non-negative integer", other);
                None
            }
        }
    }

    fn opt_str(&mut self, key: &str) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s),
            other => {
                self.invalid(key, "a string", other);
                None
            }
        }
    }

    fn opt_bool(&mut self, key: &str) -> Option<bool> {
        match self.raw(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.invalid(key, "true or false", other);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, get: fn(&mut Self, &str) -> Option<T>) -> Option<T> {
        let present = self.raw(key).is_some();
        let v = get(self, key);
        if !present {
            self.missing(key);
        }
        v
    }

    fn check_unknown(&mut self) {
        for (section, value) in self.root {
            let Some(&(_, names)) = KNOWN.iter().find(|(s, _)| s == section) else {
                self.problems.push(format!("{section}: unknown section"));
                continue;
            };
            let Some(table) = value.as_table() else {
                self.problems.push(format!("{section}: expected a table"));
                continue;
            };
            for name in table.keys() {
                if !names.contains(&name.as_str()) {
                    self.problems.push(format!("{section}.{name}: unknown key"));
                }
            }
        }
    }
}

enum Source {
    Dc { degree_file: PathBuf, job_extras: Option<PathBuf>, job_cap: u32, p: f64 },
    ErFromFile { degree_file: PathBuf },
    Er { n: usize, avg_degree: f64 },
}

/// Validated configuration, before any data files are read.
pub struct Parsed {
    source: Source,
    disease: DiseaseParams,
    policy: InterventionPolicy,
    replications: usize,
    max_days: u32,
    regenerate_network: bool,
    master_seed: u64,
}

fn in_range(r: &mut Reader, key: &str, v: Option<f64>, lo: f64, hi: f64) -> Option<f64> {
    match v {
        Some(x) if !(lo..=hi).contains(&x) => {
            r.problems.push(format!("{key}: {x} outside [{lo}, {hi}]"));
            None
        }
        other => other,
    }
}

/// Parses and validates `text`; relative paths resolve against `base`.
pub fn parse(text: &str, base: &Path) -> Result<Parsed, ConfigError> {
    let root: Table = toml::from_str(text)
        .map_err(|e: toml::de::Error| ConfigError(vec![e.message().trim().to_string()]))?;
    let mut r = Reader { root: &root, problems: Vec::new() };
    r.check_unknown();

    let resolve = |p: &str| base.join(p);
    let kind = r.required("network.kind", Reader::opt_str);
    let source = match kind {
        Some("dc") => {
            let file = r.required("network.degree_file", Reader::opt_str);
            let p = r.required("network.p", Reader::opt_f64);
            let p = in_range(&mut r, "network.p", p, 0.0, 1.0);
            let extras = r.opt_str("network.job_extras");
            let cap = r.opt_u64("network.job_cap").unwrap_or(u64::from(surrogate::JOB_CAP));
            for key in ["network.n", "network.avg_degree"] {
                if r.raw(key).is_some() {
                    r.problems.push(format!("{key}: only valid for kind = \"er\""));
                }
            }
            match (file, p) {
                (Some(f), Some(p)) => Some(Source::Dc {
                    degree_file: resolve(f),
                    job_extras: extras.map(resolve),
                    job_cap: cap.min(u64::from(u32::MAX)) as u32,
                    p,
                }),
                _ => None,
            }
        }
        Some("er") => {
            if r.raw("network.p").is_some() {
                r.problems.push("network.p: only valid for kind = \"dc\"".into());
            }
            match r.opt_str("network.degree_file") {
                Some(f) => Some(Source::ErFromFile { degree_file: resolve(f) }),
                None => {
                    let n = r.required("network.n", Reader::opt_u64);
                    let k = r.required("network.avg_degree", Reader::opt_f64);
                    match (n, k) {
                        (Some(n), Some(k)) if n >= 2 && k >= 0.0 && k <= (n - 1) as f64 => {
                            Some(Source::Er { n: n as usize, avg_degree: k })
                        }
                        (Some(n), Some(k)) => {
                            r.problems.push(format!(
                                "network.avg_degree: {k} outside [0, n - 1] for n = {n} (n must be at least 2)"
                            ));
                            None
                        }
                        _ => None,
                    }
                }
            }
        }
        Some(other) => {
            r.problems.push(format!("network.kind: expected \"dc\" or \"er\", found {other:?}"));
            None
        }
        None => None,
    };

    let r_mean = r.required("disease.r_mean", Reader::opt_f64);
    let r_mean = in_range(&mut r, "disease.r_mean", r_mean, 0.0, 1.0);
    let r_sd = r.required("disease.r_sd", Reader::opt_f64);
    let r_sd = in_range(&mut r, "disease.r_sd", r_sd, 0.0, f64::INFINITY);

    let policy_kind = match r.required("intervention.kind", Reader::opt_str) {
        Some(s) => match s.parse::<PolicyKind>() {
            Ok(k) => Some(k),
            Err(_) => {
                r.problems.push(format!(
                    "intervention.kind: expected one of none, no_target, contact_target, hub_target, found {s:?}"
                ));
                None
            }
        },
        None => None,
    };
    let budget = match policy_kind {
        Some(PolicyKind::None) => r.opt_u64("intervention.budget").or(Some(0)),
        _ => r.required("intervention.budget", Reader::opt_u64),
    };

    let replications = r.required("experiment.replications", Reader::opt_u64);
    if replications == Some(0) {
        r.problems.push("experiment.replications: must be at least 1".into());
    }
    let max_days = r.required("experiment.max_days", Reader::opt_u64);
    if max_days == Some(0) || max_days.is_some_and(|d| d > u64::from(u32::MAX)) {
        r.problems.push("experiment.max_days: must be between 1 and 2^32 - 1".into());
    }
    let regenerate = r.required("experiment.regenerate_network", Reader::opt_bool);
    let master_seed = r.required("rng.master_seed", Reader::opt_u64);

    if !r.problems.is_empty() {
        return Err(ConfigError(r.problems));
    }
    Ok(Parsed {
        source: source.unwrap(),
        disease: DiseaseParams::with_transmission(r_mean.unwrap(), r_sd.unwrap()),
        policy: InterventionPolicy::new(policy_kind.unwrap(), budget.unwrap() as usize),
        replications: replications.unwrap() as usize,
        max_days: max_days.unwrap() as u32,
        regenerate_network: regenerate.unwrap(),
        master_seed: master_seed.unwrap(),
    })
}

impl Parsed {
    /// Reads the referenced data files and builds the experiment.
    pub fn resolve(self) -> Result<ExperimentConfig, DataError> {
        let load = |p: &Path| contact_data::load_degree_file(p).map_err(|e| DataError(e.into()));
        let network = match self.source {
            Source::Dc { degree_file, job_extras, job_cap, p } => {
                let mut degrees = load(&degree_file)?;
                if let Some(path) = job_extras {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| DataError(anyhow::anyhow!("{}: {e}", path.display())))?;
                    let extras = contact_data::parse_job_extras(&text)
                        .map_err(|e| DataError(anyhow::anyhow!("{}: {e}", path.display())))?;
                    degrees = combine_with_job_contacts(&degrees, &extras, job_cap)
                        .map_err(|e| DataError(e.into()))?;
                }
                NetworkSpec::Dc { degrees, p }
            }
            Source::ErFromFile { degree_file } => {
                let degrees = load(&degree_file)?;
                NetworkSpec::Er {
                    n: degrees.len(),
                    avg_degree: degree_stats(&degrees).mean,
                }
            }
            Source::Er { n, avg_degree } => NetworkSpec::Er { n, avg_degree },
        };
        Ok(ExperimentConfig {
            network,
            disease: self.disease,
            policy: self.policy,
            replications: self.replications,
            regenerate_network: self.regenerate_network,
            master_seed: self.master_seed,
            max_days: self.max_days,
        })
    }
}
