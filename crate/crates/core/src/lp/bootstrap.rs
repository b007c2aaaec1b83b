//! Pairs bootstrap with bias-corrected (BC) percentile intervals.
//!
//! Rows are resampled with replacement and the regression refit. For each
//! coefficient with point estimate `b` and sorted replicates `B`:
//!
//! ```text
//! p  = #{B < b} / reps, clamped to [1/(reps+1), reps/(reps+1)]
//! z0 = Phi^-1(p)
//! lo = quantile(B, Phi(2 z0 - z_{1-alpha/2}))
//! hi = quantile(B, Phi(2 z0 + z_{1-alpha/2}))
//! ```
//!
//! Quantiles interpolate linearly between order statistics. There is no
//! acceleration term (BC, not BCa).
//!
//! Replicate `r` of horizon `h` draws from its own ChaCha stream keyed by
//! `(seed, h, r, attempt)`, so results do not depend on thread scheduling.
//! A resample whose design is rank deficient is redrawn with the next
//! attempt number.

use super::ols::{self, Design, OlsError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

pub const MIN_REPS: usize = 100;
/// Redraws allowed per replicate before giving up.
pub const MAX_ATTEMPTS: u64 = 64;
/// Replicate spread, relative to the estimate's scale, treated as zero.
pub const DEGENERATE_SPREAD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BootstrapError {
    #[error("invalid bootstrap configuration: {0}")]
    InvalidConfig(String),
    #[error("replicate {replicate}: every resample was rank deficient")]
    DegenerateResample { replicate: usize },
    #[error(transparent)]
    Ols(#[from] OlsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Standard deviation of the replicates, per coefficient.
    pub se: Vec<f64>,
    /// Resamples discarded as rank deficient.
    pub redraws: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the RNG stream for one replicate attempt.
pub fn stream_seed(seed: u64, horizon: u64, replicate: u64, attempt: u64) -> u64 {
    [horizon, replicate, attempt]
        .into_iter()
        .fold(splitmix64(seed), |acc, part| splitmix64(acc ^ splitmix64(part)))
}

/// Linear interpolation between order statistics at position `q * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// BC percentile interval for one coefficient.
pub fn bc_interval(point: f64, replicates: &[f64], alpha: f64) -> (f64, f64) {
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let reps = sorted.len();
    let (min, max) = (sorted[0], sorted[reps - 1]);
    let scale = 1f64.max(point.abs()).max(min.abs()).max(max.abs());
    if max - min <= DEGENERATE_SPREAD * scale {
        return (point, point);
    }
    let below = sorted.partition_point(|&b| b < point);
    let n = reps as f64;
    let p = (below as f64 / n).clamp(1.0 / (n + 1.0), n / (n + 1.0));
    let normal = Normal::standard();
    let z0 = normal.inverse_cdf(p);
    let z = normal.inverse_cdf(1.0 - alpha / 2.0);
    (
        quantile_sorted(&sorted, normal.cdf(2.0 * z0 - z)),
        quantile_sorted(&sorted, normal.cdf(2.0 * z0 + z)),
    )
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn validate(reps: usize, alpha: f64) -> Result<(), BootstrapError> {
    if reps < MIN_REPS {
        return Err(BootstrapError::InvalidConfig(format!("reps must be at least {MIN_REPS}, got {reps}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BootstrapError::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Pairs bootstrap of the OLS coefficients of `y` on `x`.
pub fn pairs_bootstrap(
    x: &Design,
    y: &[f64],
    point: &[f64],
    reps: usize,
    alpha: f64,
    seed: u64,
    horizon: u64,
) -> Result<BootstrapSummary, BootstrapError> {
    validate(reps, alpha)?;
    let n = x.rows();
    let draws: Vec<(Vec<f64>, u64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, horizon, r as u64, attempt));
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
                match ols::solve(&x.select_rows(&idx), &ys) {
                    Ok(beta) => return Ok((beta, attempt)),
                    Err(OlsError::CollinearDesign { .. }) => continue,
                    Err(e) => return Err(BootstrapError::Ols(e)),
                }
            }
            Err(BootstrapError::DegenerateResample { replicate: r })
        })
        .collect::<Result<_, _>>()?;

    let k = point.len();
    let mut summary = BootstrapSummary {
        ci_low: Vec::with_capacity(k),
        ci_high: Vec::with_capacity(k),
        se: Vec::with_capacity(k),
        redraws: draws.iter().map(|(_, a)| a).sum(),
    };
    for (j, &b) in point.iter().enumerate() {
        let column: Vec<f64> = draws.iter().map(|(beta, _)| beta[j]).collect();
        let (lo, hi) = bc_interval(b, &column, alpha);
        summary.ci_low.push(lo);
        summary.ci_high.push(hi);
        summary.se.push(std_dev(&column));
    }
    Ok(summary)
}
