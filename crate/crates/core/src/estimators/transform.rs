use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::model::{IllnessDeathRecord, IllnessExit, InitialExit};

/// Replaces `(T0, T)` by `(min(T0, tau), min(T, tau))`. A time clipped at
/// `tau` becomes an observed absorption at `tau`, whether it was an event or
/// a censoring. Subjects entering at or after `tau` are dropped.
pub fn artificial_censoring<R: Borrow<IllnessDeathRecord>>(cohort: &[R], tau: f64) -> Result<Vec<IllnessDeathRecord>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive and finite")));
    }
    cohort
        .iter()
        .map(Borrow::borrow)
        .filter(|r| r.entry() < tau)
        .map(|r| {
            if r.exit0() >= tau {
                IllnessDeathRecord::new(r.id(), r.entry(), tau, InitialExit::Absorbed, None, None)
            } else if r.exit1().is_some_and(|t| t >= tau) {
                IllnessDeathRecord::new(r.id(), r.entry(), r.exit0(), r.cause0(), Some(tau), Some(IllnessExit::Absorbed))
            } else {
                Ok(r.clone())
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_beyond_last_time() {
        let cohort = vec![
            IllnessDeathRecord::ill_then_censored("a", 1.0, 7.0).unwrap(),
            IllnessDeathRecord::absorbed("b", 2.0).unwrap(),
        ];
        assert_eq!(artificial_censoring(&cohort, 7.5).unwrap(), cohort);
    }

    #[test]
    fn censoring_after_tau_becomes_observed() {
        let cohort = vec![IllnessDeathRecord::ill_then_censored("a", 1.0, 7.0).unwrap()];
        let out = artificial_censoring(&cohort, 5.0).unwrap();
        assert_eq!(out[0].exit1(), Some(5.0));
        assert_eq!(out[0].cause1(), Some(IllnessExit::Absorbed));
        assert!(out[0].absorption_observed());
    }

    #[test]
    fn clipped_onset_becomes_direct_absorption() {
        let cohort = vec![
            IllnessDeathRecord::ill_then_absorbed("a", 6.0, 9.0).unwrap(),
            IllnessDeathRecord::censored("b", 5.0).unwrap(),
        ];
        let out = artificial_censoring(&cohort, 5.0).unwrap();
        for r in &out {
            assert_eq!((r.exit0(), r.cause0(), r.exit1()), (5.0, InitialExit::Absorbed, None));
        }
    }

    #[test]
    fn rejects_bad_tau_and_drops_late_entries() {
        let cohort = vec![IllnessDeathRecord::absorbed("a", 9.0).unwrap().with_entry(6.0).unwrap()];
        assert!(artificial_censoring(&cohort, 5.0).unwrap().is_empty());
        assert!(artificial_censoring(&cohort, 0.0).is_err());
        assert!(artificial_censoring(&cohort, f64::INFINITY).is_err());
    }
}
