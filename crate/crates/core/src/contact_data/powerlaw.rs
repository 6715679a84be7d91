//! Discrete power-law tail fitting.
//!
//! The model for observations `x >= xmin` is `P(x) = x^-alpha / zeta(alpha, xmin)`
//! where `zeta` is the Hurwitz zeta function. Alpha is the maximum-likelihood
//! estimate, goodness of fit is the Kolmogorov-Smirnov distance between the
//! empirical and fitted tail CDFs, and the p-value comes from a
//! semi-parametric bootstrap.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DegreeSequence;
use crate::error::{Error, Result};
use crate::rng;

const ALPHA_MIN: f64 = 1.0 + 1e-9;
const ALPHA_MAX: f64 = 50.0;
pub const MIN_TAIL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub xmin: u32,
    pub n_tail: usize,
    pub ks_statistic: f64,
}

// B_2, B_4, ..., B_16
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `sum_{k>=0} (a + k)^-s` for `s > 1`, `a > 0`, by Euler-Maclaurin
/// summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const DIRECT: usize = 9;
    let mut sum = 0.0;
    for k in 0..DIRECT {
        sum += (a + k as f64).powf(-s);
    }
    let x = a + DIRECT as f64;
    let xs = x.powf(-s);
    sum += x * xs / (s - 1.0) + 0.5 * xs;

    // Correction terms B_2j / (2j)! * s (s+1) ... (s+2j-2) * x^(-s-2j+1)
    let mut rising = s; // s (s+1) ... (s+2j-2)
    let mut fact = 2.0; // (2j)!
    let mut xpow = xs / x; // x^(-s-2j+1)
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * rising * xpow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (s + m - 1.0) * (s + m);
        fact *= (m + 1.0) * (m + 2.0);
        xpow /= x * x;
    }
    sum
}

fn tail_of(seq: &[u32], xmin: u32) -> Vec<u64> {
    let mut tail: Vec<u64> = seq
        .iter()
        .filter(|&&x| x >= xmin)
        .map(|&x| u64::from(x))
        .collect();
    tail.sort_unstable();
    tail
}

/// Log-likelihood of a sorted tail sample, given `sum ln x`.
fn log_likelihood(alpha: f64, xmin: u64, n: usize, sum_ln: f64) -> f64 {
    -(n as f64) * hurwitz_zeta(alpha, xmin as f64).ln() - alpha * sum_ln
}

fn mle_alpha(tail: &[u64], xmin: u64) -> Result<f64> {
    let n = tail.len();
    if tail.iter().all(|&x| x == xmin) {
        return Err(Error::NonConvergence(
            "every tail observation equals xmin; the likelihood has no interior maximum".into(),
        ));
    }
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    let f = |a: f64| -log_likelihood(a, xmin, n, sum_ln);

    // Golden-section search; the negative log-likelihood is convex in alpha.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (ALPHA_MIN, ALPHA_MAX);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iters = 0;
    while hi - lo > 1e-10 {
        iters += 1;
        if iters > 500 {
            return Err(Error::NonConvergence("golden-section iteration limit".into()));
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let alpha = 0.5 * (lo + hi);
    if !alpha.is_finite() || alpha >= ALPHA_MAX - 1e-6 || alpha <= ALPHA_MIN + 1e-6 {
        return Err(Error::NonConvergence(format!(
            "maximum on the search boundary (alpha = {alpha})"
        )));
    }
    Ok(alpha)
}

/// Largest gap between the empirical tail CDF and the fitted model CDF.
fn ks_distance(tail: &[u64], xmin: u64, alpha: f64) -> f64 {
    let n = tail.len() as f64;
    let norm = hurwitz_zeta(alpha, xmin as f64);
    let model_cdf = |x: u64| 1.0 - hurwitz_zeta(alpha, (x + 1) as f64) / norm;
    let mut d: f64 = 0.0;
    let mut below = 0usize; // observations strictly below the current value
    let mut i = 0;
    while i < tail.len() {
        let v = tail[i];
        let mut j = i;
        while j < tail.len() && tail[j] == v {
            j += 1;
        }
        // Step is flat on [prev value, v - 1]; check its right end.
        if v > xmin {
            d = d.max((below as f64 / n - model_cdf(v - 1)).abs());
        }
        d = d.max((j as f64 / n - model_cdf(v)).abs());
        below = j;
        i = j;
    }
    d
}

fn fit_sorted_tail(tail: &[u64], xmin: u32) -> Result<PowerLawFit> {
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientTail {
            xmin,
            found: tail.len(),
            needed: MIN_TAIL,
        });
    }
    let alpha = mle_alpha(tail, u64::from(xmin))?;
    Ok(PowerLawFit {
        alpha,
        xmin,
        n_tail: tail.len(),
        ks_statistic: ks_distance(tail, u64::from(xmin), alpha),
    })
}

/// Maximum-likelihood fit of a discrete power law to the observations
/// `>= xmin`.
pub fn fit_power_law_tail(seq: &DegreeSequence, xmin: u32) -> Result<PowerLawFit> {
    if xmin == 0 {
        return Err(Error::InvalidParameter("xmin must be positive".into()));
    }
    fit_sorted_tail(&tail_of(seq.as_slice(), xmin), xmin)
}

/// Chooses xmin by minimizing the KS distance over the distinct observed
/// values that leave at least `min_tail` observations in the tail.
pub fn select_xmin(seq: &DegreeSequence, min_tail: usize) -> Result<PowerLawFit> {
    let mut candidates: Vec<u32> = seq.as_slice().to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    let mut best: Option<PowerLawFit> = None;
    for xmin in candidates {
        let tail = tail_of(seq.as_slice(), xmin);
        if tail.len() < min_tail.max(MIN_TAIL) {
            break;
        }
        let Ok(fit) = fit_sorted_tail(&tail, xmin) else {
            continue;
        };
        if best.is_none_or(|b| fit.ks_statistic < b.ks_statistic) {
            best = Some(fit);
        }
    }
    best.ok_or(Error::InsufficientTail {
        xmin: 1,
        found: 0,
        needed: min_tail.max(MIN_TAIL),
    })
}

/// Inverse-CDF sampler for the discrete power law on `x >= xmin`.
#[derive(Debug, Clone)]
pub struct PowerLawSampler {
    alpha: f64,
    xmin: u64,
    norm: f64,
    /// `survival[i] = P(X >= xmin + 1 + i)`
    survival: Vec<f64>,
}

impl PowerLawSampler {
    const TABLE: usize = 4096;

    pub fn new(alpha: f64, xmin: u32) -> Self {
        assert!(alpha > 1.0 && xmin >= 1);
        let xmin = u64::from(xmin);
        let norm = hurwitz_zeta(alpha, xmin as f64);
        let mut survival = Vec::with_capacity(Self::TABLE);
        // Walk downward by subtracting point masses, re-anchoring occasionally
        // against the zeta function to bound round-off drift.
        let mut s = 1.0;
        for i in 0..Self::TABLE as u64 {
            let x = xmin + i;
            s -= (x as f64).powf(-alpha) / norm;
            if i % 256 == 255 {
                s = hurwitz_zeta(alpha, (x + 1) as f64) / norm;
            }
            survival.push(s.max(0.0));
        }
        PowerLawSampler {
            alpha,
            xmin,
            norm,
            survival,
        }
    }

    fn survival_at(&self, x: u64) -> f64 {
        if x <= self.xmin {
            1.0
        } else {
            hurwitz_zeta(self.alpha, x as f64) / self.norm
        }
    }

    /// Smallest `x` with `P(X >= x + 1) < v`, for `v` in `(0, 1]`.
    fn invert(&self, v: f64) -> u64 {
        // survival is non-increasing; find the first index with survival < v.
        let idx = self.survival.partition_point(|&s| s >= v);
        if idx < self.survival.len() {
            return self.xmin + idx as u64;
        }
        let mut lo = self.xmin + self.survival.len() as u64; // survival(lo + 1) >= v
        let mut hi = lo.saturating_mul(2);
        while self.survival_at(hi + 1) >= v {
            lo = hi;
            hi = hi.saturating_mul(2);
            if hi == u64::MAX {
                return hi;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.survival_at(mid + 1) >= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let v = 1.0 - rng.random::<f64>();
        self.invert(v)
    }
}

/// Semi-parametric bootstrap p-value for a fitted tail.
///
/// Each replicate draws a synthetic data set of the same total size: each
/// observation falls in the tail with probability `n_tail / n` and is then
/// sampled from the fitted model. Alpha is refitted at the same xmin and the
/// replicate counts when its KS distance is at least the observed one.
/// Replicate `i` uses its own derived RNG stream, so the result does not
/// depend on evaluation order.
pub fn power_law_gof(
    seq: &DegreeSequence,
    fit: &PowerLawFit,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if replicates < 100 {
        return Err(Error::InvalidParameter(format!(
            "goodness-of-fit needs at least 100 replicates, got {replicates}"
        )));
    }
    let n = seq.len();
    let frac = fit.n_tail as f64 / n as f64;
    let sampler = PowerLawSampler::new(fit.alpha, fit.xmin);
    let count_dist = Binomial::new(n as u64, frac.clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let exceed: usize = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, rng::tag::BOOTSTRAP, i as u64);
            loop {
                let m = count_dist.sample(&mut rng) as usize;
                if m < MIN_TAIL {
                    continue;
                }
                let mut tail: Vec<u64> = (0..m).map(|_| sampler.sample(&mut rng)).collect();
                tail.sort_unstable();
                match fit_sorted_tail(&tail, fit.xmin) {
                    Ok(f) => return usize::from(f.ks_statistic >= fit.ks_statistic),
                    // Degenerate synthetic draw (all at xmin): redraw.
                    Err(_) => continue,
                }
            }
        })
        .sum();
    Ok(exceed as f64 / replicates as f64)
}
