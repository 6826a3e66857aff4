//! Estimators evaluated in an arbitrary [`Scalar`] type, e.g. exact rationals.

use std::borrow::Borrow;

use super::counting::{build_counting, CountingProcesses};
use super::product_limit::{cif_in, km_in, multinomial_counts};
use super::{count, Scalar};
use crate::error::{Error, Result};
use crate::model::{IllnessDeathRecord, TransitionQuery};

pub fn kaplan_meier<T: Scalar>(cp: &CountingProcesses, horizon: f64) -> T {
    km_in(&cp.initial, horizon)
}

pub fn cif_limit<T: Scalar>(cp: &CountingProcesses) -> T {
    cif_in(&cp.kappa)
}

pub fn p01_mm<T: Scalar, R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<T> {
    let cp = build_counting(cohort, q, false)?;
    let km: T = kaplan_meier(&cp, q.s());
    if km.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(cif_limit::<T>(&cp) / km)
}

pub fn p01_check<T: Scalar, R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<T> {
    let cp = build_counting(cohort, q, true).map_err(|e| match e {
        Error::EmptyRiskSet => Error::EmptyLandmark(q.s()),
        other => other,
    })?;
    Ok(cif_limit(&cp))
}

pub fn multinomial_uncensored<T: Scalar, R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<T> {
    let (num, den) = multinomial_counts(cohort, q)?;
    Ok(count::<T>(num) / count::<T>(den))
}
