//! Deterministic stand-ins for the survey extracts.
//!
//! The survey microdata are not redistributed with this crate. These
//! sequences are built to match the published marginals of the diary extract
//! (2029 respondents, 19 728 contacts in total, median 8, population standard
//! deviation 6.56, 175 respondents at or above 19 contacts whose tail fits a
//! discrete power law with exponent 5.1, at most 40 contacts) and of the
//! job-contact augmentation (257 respondents, 190 of them at or above 17 extra
//! contacts), so every pipeline stage can be exercised end to end when the
//! real files are absent. Nothing here is random at run time: the same
//! sequence is produced on every call.

use rand::seq::SliceRandom;

use super::powerlaw::fit_power_law_tail;
use super::{combine_with_job_contacts, DegreeSequence};
use crate::rng;

pub const DIARY_N: usize = 2029;
pub const DIARY_TOTAL: u64 = 19_728;
pub const DIARY_MEDIAN: u32 = 8;
pub const DIARY_STDEV: f64 = 6.56;
pub const DIARY_TAIL_XMIN: u32 = 19;
pub const DIARY_TAIL_N: usize = 175;
pub const DIARY_TAIL_ALPHA: f64 = 5.1;
pub const DIARY_MAX: u32 = 40;

pub const JOB_N: usize = 257;
pub const JOB_TAIL_XMIN: u32 = 17;
pub const JOB_TAIL_N: usize = 190;
pub const JOB_MAX: u32 = 999;
pub const JOB_CAP: u32 = 134;
/// Target mean of the capped diary + job sequence.
pub const COMBINED_MEAN: f64 = 14.80;

const SHUFFLE_SEED: u64 = 2012;

/// Mid-point quantiles of a power law with exponent `beta` restricted to
/// `lo..=hi`.
fn power_quantiles(beta: f64, lo: u32, hi: u32, n: usize) -> Vec<u32> {
    let weights: Vec<f64> = (lo..=hi).map(|x| f64::from(x).powf(-beta)).collect();
    quantiles_from_weights(lo, &weights, n)
}

fn quantiles_from_weights(lo: u32, weights: &[f64], n: usize) -> Vec<u32> {
    let total: f64 = weights.iter().sum();
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w / total;
        cdf.push(acc);
    }
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let k = cdf.partition_point(|&c| c < u).min(weights.len() - 1);
            lo + k as u32
        })
        .collect()
}

fn tail_alpha(values: &[u32], xmin: u32) -> f64 {
    let seq = DegreeSequence::new(values.to_vec()).expect("positive values");
    fit_power_law_tail(&seq, xmin).expect("fit").alpha
}

/// Bisects a monotone decreasing-in-`param` objective towards `target`.
fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f is increasing in the parameter for every caller here.
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Body {
    counts: [usize; 19], // index = value, 1..=18 used
}

impl Body {
    fn sum(&self) -> i64 {
        (1..=18).map(|v| v as i64 * self.counts[v] as i64).sum()
    }
    fn sumsq(&self) -> i64 {
        (1..=18).map(|v| (v * v) as i64 * self.counts[v] as i64).sum()
    }
    /// The overall median sits at sorted index `DIARY_N / 2`; the tail lies
    /// entirely above it.
    fn median_ok(&self) -> bool {
        let idx = DIARY_N / 2;
        let below: usize = self.counts[1..DIARY_MEDIAN as usize].iter().sum();
        let upto = below + self.counts[DIARY_MEDIAN as usize];
        below <= idx && upto > idx
    }
    fn try_shift(&mut self, from: usize, to: usize) -> bool {
        if self.counts[from] == 0 {
            return false;
        }
        self.counts[from] -= 1;
        self.counts[to] += 1;
        if self.median_ok() {
            true
        } else {
            self.counts[to] -= 1;
            self.counts[from] += 1;
            false
        }
    }
}

fn build_body(n: usize, target_sum: i64, target_sumsq: i64, sumsq_tol: i64) -> Vec<u32> {
    // Gamma-like starting shape on 1..=18.
    let weights: Vec<f64> = (1..=18u32)
        .map(|x| f64::from(x).powf(2.0) * (-f64::from(x) / 2.8).exp())
        .collect();
    let mut body = Body { counts: [0; 19] };
    for v in quantiles_from_weights(1, &weights, n) {
        body.counts[v as usize] += 1;
    }
    assert!(body.median_ok(), "starting body must respect the median");

    // Match the sum, steering the sum of squares towards its target.
    let mut guard = 0;
    while body.sum() != target_sum {
        guard += 1;
        assert!(guard < 100_000, "body sum repair did not terminate");
        let need_sq_up = body.sumsq() < target_sumsq;
        let moved = if body.sum() < target_sum {
            let order: Vec<usize> = if need_sq_up {
                (1..18).rev().collect()
            } else {
                (1..18).collect()
            };
            order.into_iter().any(|v| body.try_shift(v, v + 1))
        } else {
            let order: Vec<usize> = if need_sq_up {
                (2..=18).collect()
            } else {
                (2..=18).rev().collect()
            };
            order.into_iter().any(|v| body.try_shift(v, v - 1))
        };
        assert!(moved, "no admissible unit move");
    }

    // Sum-preserving spreads (a+1, b-1) or contractions (a-1, b+1).
    guard = 0;
    while (body.sumsq() - target_sumsq).abs() > sumsq_tol {
        guard += 1;
        assert!(guard < 100_000, "body variance repair did not terminate");
        let gap = target_sumsq - body.sumsq();
        let mut done = false;
        if gap > 0 {
            // Spreading a >= b changes sumsq by 2 (a - b) + 2.
            let want = ((gap - 2) / 2).clamp(0, 16) as usize;
            'outer: for diff in (0..=want).rev() {
                for b in 2..=18usize {
                    let a = b + diff;
                    if a >= 18 {
                        break;
                    }
                    if body.counts[a] == 0 || body.counts[b] == 0 || (a == b && body.counts[a] < 2) {
                        continue;
                    }
                    if body.try_shift(a, a + 1) {
                        if body.try_shift(b, b - 1) {
                            done = true;
                            break 'outer;
                        }
                        body.counts[a + 1] -= 1;
                        body.counts[a] += 1;
                    }
                }
            }
        } else {
            // Contracting a > b + 1 changes sumsq by -2 (a - b) + 2.
            let want = ((-gap + 2) / 2).clamp(2, 17) as usize;
            'outer: for diff in (2..=want).rev() {
                for b in 1..=18usize {
                    let a = b + diff;
                    if a > 18 {
                        break;
                    }
                    if body.counts[a] == 0 || body.counts[b] == 0 {
                        continue;
                    }
                    if body.try_shift(a, a - 1) {
                        if body.try_shift(b, b + 1) {
                            done = true;
                            break 'outer;
                        }
                        body.counts[a - 1] -= 1;
                        body.counts[a] += 1;
                    }
                }
            }
        }
        assert!(done, "no admissible variance move");
    }

    let mut out = Vec::with_capacity(n);
    for v in 1..=18u32 {
        out.extend(std::iter::repeat_n(v, body.counts[v as usize]));
    }
    out
}

fn diary_tail() -> Vec<u32> {
    let beta = bisect(2.0, 9.0, DIARY_TAIL_ALPHA, |b| {
        tail_alpha(
            &power_quantiles(b, DIARY_TAIL_XMIN, DIARY_MAX, DIARY_TAIL_N),
            DIARY_TAIL_XMIN,
        )
    });
    power_quantiles(beta, DIARY_TAIL_XMIN, DIARY_MAX, DIARY_TAIL_N)
}

/// Diary-contact stand-in: 2029 daily contact counts in shuffled respondent
/// order.
pub fn diary_like() -> DegreeSequence {
    let tail = diary_tail();
    let tail_sum: i64 = tail.iter().map(|&x| i64::from(x)).sum();
    let tail_sumsq: i64 = tail.iter().map(|&x| i64::from(x) * i64::from(x)).sum();
    let n = DIARY_N as f64;
    let mean = DIARY_TOTAL as f64 / n;
    let total_sumsq = (n * (DIARY_STDEV * DIARY_STDEV + mean * mean)).round() as i64;
    let mut values = build_body(
        DIARY_N - DIARY_TAIL_N,
        DIARY_TOTAL as i64 - tail_sum,
        total_sumsq - tail_sumsq,
        10,
    );
    values.extend(tail);
    values.shuffle(&mut rng::from_seed(SHUFFLE_SEED));
    DegreeSequence::new(values).expect("positive")
}

fn job_extras_with(alpha: f64, diary: &DegreeSequence) -> Vec<(usize, u32)> {
    let n_body = JOB_N - JOB_TAIL_N;
    let mut extras: Vec<u32> = (0..n_body)
        .map(|i| 2 + ((i * (JOB_TAIL_XMIN as usize - 3)) / (n_body - 1)) as u32)
        .collect();
    extras.extend(power_quantiles(alpha, JOB_TAIL_XMIN, JOB_MAX, JOB_TAIL_N));
    let mut r = rng::from_seed(SHUFFLE_SEED + 1);
    extras.shuffle(&mut r);
    let mut who: Vec<usize> = (0..diary.len()).collect();
    who.shuffle(&mut r);
    who.truncate(JOB_N);
    who.sort_unstable();
    who.into_iter().zip(extras).collect()
}

fn job_exponent(diary: &DegreeSequence) -> f64 {
    // Mean of the capped combination decreases as the exponent grows.
    bisect(1.2, 4.0, -COMBINED_MEAN, |a| {
        let comb =
            combine_with_job_contacts(diary, &job_extras_with(a, diary), JOB_CAP).expect("combine");
        -(comb.total() as f64 / comb.len() as f64)
    })
}

/// Job-related extra contacts as `(respondent index, extra count)` pairs,
/// aligned with [`diary_like`].
pub fn job_extras_like() -> Vec<(usize, u32)> {
    let diary = diary_like();
    job_extras_with(job_exponent(&diary), &diary)
}

/// Diary plus job contacts, censored at 134.
pub fn extended_like() -> DegreeSequence {
    let diary = diary_like();
    let extras = job_extras_with(job_exponent(&diary), &diary);
    combine_with_job_contacts(&diary, &extras, JOB_CAP).expect("combine")
}
