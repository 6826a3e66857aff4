use std::borrow::Borrow;

use super::counting::{build_counting, CountingProcesses, InitialStep, KappaStep};
use super::{count, ratio, Diagnostic, Estimate, Scalar};
use crate::error::{Error, Result};
use crate::model::{IllnessDeathRecord, TransitionQuery};
use crate::step::StepFunction;

pub(crate) fn km_in<T: Scalar>(steps: &[InitialStep], horizon: f64) -> T {
    steps
        .iter()
        .take_while(|s| s.time <= horizon)
        .fold(T::one(), |acc, s| acc * (T::one() - ratio::<T>(s.exits, s.at_risk)))
}

/// Right-hand limit of the type-1 cumulative incidence:
/// `sum_u prod_{v<u} (1 - dN(v)/Y(v)) dN1(u)/Y(u)`.
pub(crate) fn cif_in<T: Scalar>(steps: &[KappaStep]) -> T {
    let mut surv = T::one();
    let mut total = T::zero();
    for s in steps {
        if s.event1 > 0 {
            total = total + surv.clone() * ratio::<T>(s.event1, s.at_risk);
        }
        surv = surv * (T::one() - ratio::<T>(s.events(), s.at_risk));
    }
    total
}

/// Kaplan-Meier estimate of `P(T0 > horizon)`.
pub fn kaplan_meier(cp: &CountingProcesses, horizon: f64) -> f64 {
    km_in::<f64>(&cp.initial, horizon)
}

/// Kaplan-Meier curve of the sojourn in state 0.
pub fn survival_path(cp: &CountingProcesses) -> StepFunction {
    let mut surv = 1.0;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for s in cp.initial.iter().filter(|s| s.exits > 0) {
        surv *= 1.0 - ratio::<f64>(s.exits, s.at_risk);
        times.push(s.time);
        values.push(surv);
    }
    StepFunction::new(1.0, times, values)
}

pub fn cif_limit(cp: &CountingProcesses) -> Estimate {
    let mut est = Estimate::new(cif_in::<f64>(&cp.kappa));
    if cp.largest_observation_censored() {
        est.diagnostics.push(Diagnostic::LargestObservationCensored);
    }
    est
}

/// The type-1 cumulative incidence as a function of its upper limit.
pub fn cif_path(cp: &CountingProcesses) -> StepFunction {
    let mut surv = 1.0;
    let mut total = 0.0;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for s in &cp.kappa {
        if s.event1 > 0 {
            total += surv * ratio::<f64>(s.event1, s.at_risk);
            times.push(s.time);
            values.push(total);
        }
        surv *= 1.0 - ratio::<f64>(s.events(), s.at_risk);
    }
    StepFunction::new(0.0, times, values)
}

/// `prod_{v<u} (1 - dN(v)/Y(v))`.
pub fn kappa_survival_before<T: Scalar>(cp: &CountingProcesses, u: f64) -> T {
    cp.kappa
        .iter()
        .take_while(|s| s.time < u)
        .fold(T::one(), |acc, s| acc * (T::one() - ratio::<T>(s.events(), s.at_risk)))
}

/// Kaplan-Meier estimate of `P(C >= u)` from the censored absorption times,
/// `prod_{v<u} (1 - dN^C(v)/(Y(v) - dN(v)))`.
pub fn censoring_survival_before<T: Scalar>(cp: &CountingProcesses, u: f64) -> T {
    cp.kappa
        .iter()
        .take_while(|s| s.time < u)
        .fold(T::one(), |acc, s| acc * (T::one() - ratio::<T>(s.censored, s.at_risk - s.events())))
}

fn denominator<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<(CountingProcesses, f64)> {
    let cp = build_counting(cohort, q, false)?;
    let km = kaplan_meier(&cp, q.s());
    if km == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((cp, km))
}

fn flag_ratio(mut est: Estimate) -> Estimate {
    if est.value > 1.0 {
        est.diagnostics.push(Diagnostic::ExceedsOne(est.value));
    }
    est
}

/// Ratio of the type-1 incidence limit to the Kaplan-Meier estimate of
/// `P(T0 > s)`. Values above one are flagged, never clipped.
pub fn p01_mm<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<Estimate> {
    let (cp, km) = denominator(cohort, q)?;
    let mut est = cif_limit(&cp);
    est.value /= km;
    Ok(flag_ratio(est))
}

/// Kaplan-Meier-integral form of [`p01_mm`]: subjects ordered by observed
/// absorption time, each observed absorption carrying the product-limit jump
/// `prod_{j<i} (1 - xi_j/(n-j+1)) * xi_i/(n-i+1)`.
///
/// Tied times are ordered with observed absorptions before censorings and
/// then by id. Delayed entry is ignored.
pub fn p01_mm_stute<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<Estimate> {
    let (_, km) = denominator(cohort, q)?;
    let mut order: Vec<&IllnessDeathRecord> = cohort.iter().map(Borrow::borrow).collect();
    order.sort_by(|a, b| {
        a.final_time()
            .total_cmp(&b.final_time())
            .then(a.is_censored().cmp(&b.is_censored()))
            .then_with(|| a.id().cmp(b.id()))
    });
    let n = order.len();
    let mut prefix = 1.0;
    let mut total = 0.0;
    for (i, r) in order.iter().enumerate() {
        if r.is_censored() {
            continue;
        }
        let remaining = (n - i) as f64;
        if q.indicator(r.exit0(), r.final_time()) {
            total += prefix / remaining;
        }
        prefix *= 1.0 - 1.0 / remaining;
    }
    let est = Estimate { value: total / km, diagnostics: Vec::new() };
    Ok(flag_ratio(est))
}

/// Inverse-probability-of-censoring weighted form of the type-1 incidence
/// limit, `(1/Y(0)) sum_u G(u-)^{-1} dN1(u)` with `G` the censoring
/// Kaplan-Meier of [`censoring_survival_before`].
pub fn ipcw_numerator<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<f64> {
    let cp = build_counting(cohort, q, false)?;
    let mut weight = 1.0;
    let mut total = 0.0;
    for s in &cp.kappa {
        if s.event1 > 0 {
            if weight == 0.0 {
                return Err(Error::DegenerateWeight(s.time));
            }
            total += f64::from(s.event1) / weight;
        }
        weight *= 1.0 - ratio::<f64>(s.censored, s.at_risk - s.events());
    }
    Ok(total / cp.size as f64)
}

pub(crate) fn multinomial_counts<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<(u32, u32)> {
    let mut num = 0;
    let mut den = 0;
    for r in cohort.iter().map(Borrow::borrow) {
        if r.is_censored() || r.entry() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "crude-count estimator needs complete data; subject {} is censored or truncated",
                r.id()
            )));
        }
        if r.exit0() > q.s() {
            den += 1;
            if q.indicator(r.exit0(), r.final_time()) {
                num += 1;
            }
        }
    }
    if den == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((num, den))
}

/// `#{X_s = 0, X_t = 1} / #{X_s = 0}` on complete data.
pub fn multinomial_uncensored<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<f64> {
    let (num, den) = multinomial_counts(cohort, q)?;
    Ok(count::<f64>(num) / count::<f64>(den))
}
