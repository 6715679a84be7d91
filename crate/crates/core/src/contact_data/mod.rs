//! Contact-survey calibration data: per-respondent daily contact counts,
//! job-contact augmentation, summary statistics, power-law tail fits and
//! contact-duration profiles.

mod duration;
pub mod powerlaw;
pub mod surrogate;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

pub use duration::{
    centroid_minutes, duration_profiles, read_contact_records, ContactRecord, DurationProfile,
};
pub use powerlaw::{fit_power_law_tail, power_law_gof, select_xmin, PowerLawFit};

/// Daily close-range contact counts, one entry per respondent, in input order.
///
/// Every entry is at least 1: respondents with no contacts are excluded
/// upstream of calibration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct DegreeSequence(Vec<u32>);

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(pos) = degrees.iter().position(|&d| d == 0) {
            return Err(Error::NonPositiveDegree {
                line: pos + 1,
                value: 0,
            });
        }
        Ok(DegreeSequence(degrees))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl TryFrom<Vec<u32>> for DegreeSequence {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        DegreeSequence::new(v)
    }
}

impl From<DegreeSequence> for Vec<u32> {
    fn from(d: DegreeSequence) -> Self {
        d.0
    }
}

/// Parses the degree file format: one base-10 integer per line, `#` starts a
/// comment line, blank lines are skipped.
pub fn parse_degrees(text: &str) -> Result<DegreeSequence> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: i64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            token: line.to_string(),
        })?;
        if value <= 0 {
            return Err(Error::NonPositiveDegree { line: i + 1, value });
        }
        let value = u32::try_from(value).map_err(|_| Error::Parse {
            line: i + 1,
            token: line.to_string(),
        })?;
        out.push(value);
    }
    if out.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(DegreeSequence(out))
}

pub fn load_degree_file(path: impl AsRef<Path>) -> Result<DegreeSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_degrees(&text)
}

pub fn format_degrees(seq: &DegreeSequence) -> String {
    let mut s = String::with_capacity(seq.len() * 3);
    for d in seq.as_slice() {
        s.push_str(&d.to_string());
        s.push('\n');
    }
    s
}

/// Adds job-related extra contacts to the listed respondents, censoring each
/// augmented total at `cap`.
pub fn combine_with_job_contacts(
    diary: &DegreeSequence,
    job_extra: &[(usize, u32)],
    cap: u32,
) -> Result<DegreeSequence> {
    let max = diary.max();
    if cap < max {
        return Err(Error::CapTooSmall { cap, max });
    }
    let mut out = diary.0.clone();
    for &(index, extra) in job_extra {
        let slot = out.get_mut(index).ok_or(Error::IndexOutOfRange {
            index,
            len: diary.len(),
        })?;
        *slot = slot.saturating_add(extra).min(cap);
    }
    Ok(DegreeSequence(out))
}

/// Parses `index extra` pairs, one per line (whitespace or comma separated).
pub fn parse_job_extras(text: &str) -> Result<Vec<(usize, u32)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
        let bad = || Error::Parse {
            line: i + 1,
            token: line.to_string(),
        };
        let index = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let extra = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        out.push((index, extra));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    /// Population form.
    pub stdev: f64,
    pub n: usize,
}

pub fn degree_stats(seq: &DegreeSequence) -> SummaryStats {
    let xs: Vec<f64> = seq.as_slice().iter().map(|&d| f64::from(d)).collect();
    SummaryStats {
        mean: stats::mean(&xs),
        median: stats::median(&xs),
        stdev: stats::population_stdev(&xs),
        n: xs.len(),
    }
}
