use std::borrow::Borrow;

use super::ratio;
use crate::error::{Error, Result};
use crate::model::{in_landmark, IllnessDeathRecord, IllnessExit, InitialExit, TransitionQuery};

#[derive(Default)]
struct Transitions {
    to_ill: u32,
    to_absorbed: u32,
    ill_to_absorbed: u32,
}

fn risk(starts: &[f64], ends: &[f64], u: f64) -> u32 {
    (starts.partition_point(|&x| x < u) - ends.partition_point(|&x| x < u)) as u32
}

/// Aalen-Johansen estimate of `P(X_t = 1 | X_s = 0)` under a Markov
/// assumption: the state distribution `(1, 0, 0)` at `s` pushed through the
/// empirical transition matrix at every observed transition time in `(s, t]`.
///
/// Delayed entry is handled through the risk sets, including subjects who
/// entered the study already ill.
pub fn p01_aalen_johansen<R: Borrow<IllnessDeathRecord>>(cohort: &[R], q: &TransitionQuery) -> Result<f64> {
    let records: Vec<&IllnessDeathRecord> = cohort.iter().map(Borrow::borrow).collect();
    if !records.iter().any(|r| in_landmark(r, q.s())) {
        return Err(Error::EmptyRiskSet);
    }
    let in_window = |u: f64| u > q.s() && u <= q.t();

    let (mut starts0, mut ends0, mut starts1, mut ends1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut events: Vec<(f64, u8)> = Vec::new();
    for r in &records {
        if r.entered_in_initial_state() {
            starts0.push(r.entry());
            ends0.push(r.exit0());
            let code = match r.cause0() {
                InitialExit::Ill => Some(1),
                InitialExit::Absorbed => Some(2),
                InitialExit::Censored => None,
            };
            if let (Some(code), true) = (code, in_window(r.exit0())) {
                events.push((r.exit0(), code));
            }
        }
        if let (Some(exit1), Some(cause1)) = (r.exit1(), r.cause1()) {
            let start = r.entry().max(r.exit0());
            if start < exit1 {
                starts1.push(start);
                ends1.push(exit1);
                if cause1 == IllnessExit::Absorbed && in_window(exit1) {
                    events.push((exit1, 3));
                }
            }
        }
    }
    for v in [&mut starts0, &mut ends0, &mut starts1, &mut ends1] {
        v.sort_by(f64::total_cmp);
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (mut p0, mut p1) = (1.0_f64, 0.0_f64);
    let mut i = 0;
    while i < events.len() {
        let u = events[i].0;
        let mut tr = Transitions::default();
        while i < events.len() && events[i].0 == u {
            match events[i].1 {
                1 => tr.to_ill += 1,
                2 => tr.to_absorbed += 1,
                _ => tr.ill_to_absorbed += 1,
            }
            i += 1;
        }
        let y0 = risk(&starts0, &ends0, u);
        let y1 = risk(&starts1, &ends1, u);
        let next_p1 = p1 * (1.0 - ratio::<f64>(tr.ill_to_absorbed, y1)) + p0 * ratio::<f64>(tr.to_ill, y0);
        p0 *= 1.0 - ratio::<f64>(tr.to_ill + tr.to_absorbed, y0);
        p1 = next_p1;
    }
    Ok(p1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> Vec<IllnessDeathRecord> {
        vec![
            IllnessDeathRecord::ill_then_absorbed("A", 1.0, 4.0).unwrap(),
            IllnessDeathRecord::absorbed("B", 2.0).unwrap(),
            IllnessDeathRecord::ill_then_absorbed("C", 3.0, 6.0).unwrap(),
        ]
    }

    #[test]
    fn hand_matrix_product() {
        let q = TransitionQuery::new(1.5, 3.5).unwrap();
        assert_eq!(p01_aalen_johansen(&three(), &q).unwrap(), 0.5);
        // (1.5, 5]: the 1 -> 2 exit of A at 4 hits a state-1 risk set {A, C}
        let q = TransitionQuery::new(1.5, 5.0).unwrap();
        assert_eq!(p01_aalen_johansen(&three(), &q).unwrap(), 0.25);
    }

    #[test]
    fn no_events_in_window() {
        let q = TransitionQuery::new(1.2, 1.8).unwrap();
        assert_eq!(p01_aalen_johansen(&three(), &q).unwrap(), 0.0);
        let q = TransitionQuery::new(1.5, 1.5).unwrap();
        assert_eq!(p01_aalen_johansen(&three(), &q).unwrap(), 0.0);
    }

    #[test]
    fn empty_initial_state_at_s() {
        let q = TransitionQuery::new(7.0, 8.0).unwrap();
        assert!(matches!(p01_aalen_johansen(&three(), &q), Err(Error::EmptyRiskSet)));
    }

    #[test]
    fn prevalent_illness_enters_state_one_risk_set() {
        let mut cohort = three();
        cohort.push(IllnessDeathRecord::ill_then_absorbed("P", 0.5, 10.0).unwrap().with_entry(1.0).unwrap());
        let q = TransitionQuery::new(1.5, 5.0).unwrap();
        // state-1 risk set at 4 is {A, C, P}
        assert!((p01_aalen_johansen(&cohort, &q).unwrap() - 0.5 * 2.0 / 3.0).abs() < 1e-15);
    }
}
