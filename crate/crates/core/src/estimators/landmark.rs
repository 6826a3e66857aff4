//! The landmark estimator: a competing-risks incidence limit computed inside
//! the subset of subjects in state 0 and under observation at `s`.
//!
//! Delayed entry needs no special handling here because the subset already
//! requires `entry < s`.

use std::borrow::Borrow;

use super::counting::{build_counting, CountingProcesses};
use super::product_limit::cif_in;
use super::{ratio, Diagnostic, Estimate};
use crate::error::{Error, Result};
use crate::model::{landmark_subset, IllnessDeathRecord, TransitionQuery};
use crate::step::StepFunction;

fn landmark_processes<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<CountingProcesses> {
    build_counting(cohort, q, true).map_err(|e| match e {
        Error::EmptyRiskSet => Error::EmptyLandmark(q.s()),
        other => other,
    })
}

/// Two-block Kaplan-Meier estimate of `P(C >= u)`: censorings in state 0 up
/// to `s`, then censorings after `s` within the landmark subset.
pub fn tsai_crowley_weight<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery, u: f64) -> Result<f64> {
    let landmark = build_counting(cohort, q, true)?;
    let full = build_counting(cohort, q, false)?;
    let before: f64 = full
        .initial
        .iter()
        .take_while(|s| s.time <= q.s())
        .map(|s| 1.0 - ratio::<f64>(s.censored, s.at_risk - s.exits))
        .product();
    let after: f64 = landmark
        .kappa
        .iter()
        .filter(|s| s.time > q.s() && s.time < u)
        .map(|s| 1.0 - ratio::<f64>(s.censored, s.at_risk - s.events()))
        .product();
    Ok(before * after)
}

pub fn p01_check<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<Estimate> {
    let cp = landmark_processes(cohort, q)?;
    let mut est = Estimate::new(cif_in::<f64>(&cp.kappa));
    if cp.largest_observation_censored() {
        est.diagnostics.push(Diagnostic::LargestObservationCensored);
    }
    // The risk set is non-increasing after s, so its minimum over (s, t] is Y(t).
    let still_at_risk = landmark_subset(cohort, q.s()).iter().filter(|r| r.final_time() >= q.t()).count();
    est.diagnostics.push(Diagnostic::RiskSetRatio(still_at_risk as f64 / cp.size as f64));
    Ok(est)
}

/// Partial landmark incidence integral as a function of its upper limit.
pub fn check_path<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<StepFunction> {
    let cp = landmark_processes(cohort, q)?;
    Ok(super::product_limit::cif_path(&cp))
}

/// Plug-in variance of [`p01_check`]:
///
/// ```text
/// sum_u S(u)^2 {1 - R(u)}^2 dN1(u)/Y(u) + sum_u {S(u) R(u)}^2 dN2(u)/Y(u)
/// ```
///
/// where `S(u) = prod_{v in (s,u]} (1 - dN(v)/Y(v))` and `R(u)` is the
/// type-1 incidence accumulated strictly after `u` given survival to `u`.
pub fn var_check<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<f64> {
    let cp = landmark_processes(cohort, q)?;
    let steps = &cp.kappa;

    // remaining[k] = sum_{m>k} prod_{k<j<m} (1 - dN_j/Y_j) dN1_m/Y_m
    let mut remaining = vec![0.0; steps.len()];
    for k in (0..steps.len().saturating_sub(1)).rev() {
        let next = &steps[k + 1];
        remaining[k] = ratio::<f64>(next.event1, next.at_risk)
            + (1.0 - ratio::<f64>(next.events(), next.at_risk)) * remaining[k + 1];
    }

    let mut surv = 1.0;
    let mut var = 0.0;
    for (step, rem) in steps.iter().zip(&remaining) {
        surv *= 1.0 - ratio::<f64>(step.events(), step.at_risk);
        let own = surv * (1.0 - rem);
        let other = surv * rem;
        var += own * own * ratio::<f64>(step.event1, step.at_risk);
        var += other * other * ratio::<f64>(step.event2, step.at_risk);
    }
    Ok(var)
}
