//! Nonparametric bootstrap intervals for the transition-probability
//! estimators. Whole subjects are resampled, which keeps `(T0, T)` together.

use std::borrow::Borrow;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::io::format_number;
use crate::model::{IllnessDeathRecord, TransitionQuery};
use crate::simulation::replication_rng;
use crate::Method;

#[derive(Debug, Clone, PartialEq)]
pub struct CiResult {
    pub point: f64,
    pub boot_variance: f64,
    pub quantile_ci: (f64, f64),
    pub normal_ci: (f64, f64),
    pub n_boot: usize,
    pub n_failed: usize,
}

impl CiResult {
    pub const CSV_HEADER: &'static str = "method,s,t,estimate,boot_variance,q_lo,q_hi,n_lo,n_hi,n_boot,n_failed";

    pub fn write_csv_row<W: Write>(&self, mut out: W, method: Method, q: &TransitionQuery) -> Result<()> {
        writeln!(
            out,
            "{method},{},{},{},{},{},{},{},{},{},{}",
            format_number(q.s()),
            format_number(q.t()),
            format_number(self.point),
            format_number(self.boot_variance),
            format_number(self.quantile_ci.0),
            format_number(self.quantile_ci.1),
            format_number(self.normal_ci.0),
            format_number(self.normal_ci.1),
            self.n_boot,
            self.n_failed
        )?;
        Ok(())
    }
}

/// `z` with `P(Z <= z) = p` for a standard normal `Z`.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Empirical quantile that inverts the empirical distribution function, so
/// the result is always one of the observations. `sorted` must be ascending.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let k = (p * sorted.len() as f64).ceil() as usize;
    sorted[k.clamp(1, sorted.len()) - 1]
}

fn clip(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Estimates from `n_boot` subject-level resamples; resample `b` draws from
/// stream `b` of `seed`. Failed resamples are `None`.
pub fn bootstrap_estimates<R: Borrow<IllnessDeathRecord> + Sync>(
    cohort: &[R],
    q: &TransitionQuery,
    method: Method,
    n_boot: usize,
    seed: u64,
) -> Vec<Option<f64>> {
    let n = cohort.len();
    (0..n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = replication_rng(seed, b);
            let sample: Vec<&IllnessDeathRecord> = (0..n).map(|_| cohort[rng.random_range(0..n)].borrow()).collect();
            method.evaluate(&sample, q).ok()
        })
        .collect()
}

/// Quantile and normal-approximation bootstrap intervals at confidence
/// `level`, both clipped to `[0, 1]` after construction.
pub fn bootstrap_ci<R: Borrow<IllnessDeathRecord> + Sync>(
    cohort: &[R],
    q: &TransitionQuery,
    method: Method,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<CiResult> {
    if n_boot < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bootstrap resamples, got {n_boot}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence level {level} outside (0, 1)")));
    }
    let point = method.evaluate(cohort, q)?;
    summarize(point, bootstrap_estimates(cohort, q, method, n_boot, seed), level)
}

fn summarize(point: f64, estimates: Vec<Option<f64>>, level: f64) -> Result<CiResult> {
    let n_boot = estimates.len();
    let mut values: Vec<f64> = estimates.into_iter().flatten().collect();
    let n_failed = n_boot - values.len();
    if 2 * n_failed > n_boot || values.len() < 2 {
        return Err(Error::TooManyFailures { failed: n_failed, total: n_boot });
    }
    values.sort_by(f64::total_cmp);

    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let boot_variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    let alpha = 1.0 - level;
    let quantile_ci = (
        clip(empirical_quantile(&values, alpha / 2.0)),
        clip(empirical_quantile(&values, 1.0 - alpha / 2.0)),
    );
    let half = normal_quantile(1.0 - alpha / 2.0) * boot_variance.sqrt();
    let normal_ci = (clip(point - half), clip(point + half));
    Ok(CiResult { point, boot_variance, quantile_ci, normal_ci, n_boot, n_failed })
}
