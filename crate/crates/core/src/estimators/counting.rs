use std::borrow::Borrow;

use crate::error::{Error, Result};
use crate::model::{derive_kappa, in_landmark, IllnessDeathRecord, KappaKind, TransitionQuery};

/// Initial-state increments at one observed exit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStep {
    pub time: f64,
    /// `dN0`: observed exits from state 0.
    pub exits: u32,
    /// `dN0^C`: censorings in state 0.
    pub censored: u32,
    /// `Y0`: subjects in state 0 and under observation just before `time`.
    pub at_risk: u32,
}

/// Increments of the derived competing-risks process at one observed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaStep {
    pub time: f64,
    pub event1: u32,
    pub event2: u32,
    pub censored: u32,
    pub at_risk: u32,
}

impl KappaStep {
    /// `dN = dN1 + dN2`.
    pub fn events(&self) -> u32 {
        self.event1 + self.event2
    }
}

/// Risk sets and counting-process increments at every observed time.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingProcesses {
    pub query: TransitionQuery,
    /// Built on the landmark subset at `s` rather than the whole cohort.
    pub landmark: bool,
    /// Number of subjects the processes were built on.
    pub size: usize,
    pub initial: Vec<InitialStep>,
    pub kappa: Vec<KappaStep>,
}

impl CountingProcesses {
    /// `Y(0)`, or `sY(s+)` for a landmark bundle.
    pub fn initial_at_risk(&self) -> u32 {
        self.size as u32
    }

    /// Whether the last observed kappa time carries a censoring.
    pub fn largest_observation_censored(&self) -> bool {
        self.kappa.last().is_some_and(|k| k.censored > 0)
    }
}

/// Number of `(start, end]` intervals containing `u`, from sorted bounds.
fn at_risk(starts: &[f64], ends: &[f64], u: f64) -> u32 {
    let entered = starts.partition_point(|&x| x < u);
    let left = ends.partition_point(|&x| x < u);
    (entered - left) as u32
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn build_counting<R: Borrow<IllnessDeathRecord>>(
    cohort: &[R],
    q: &TransitionQuery,
    landmark: bool,
) -> Result<CountingProcesses> {
    let records: Vec<&IllnessDeathRecord> = cohort
        .iter()
        .map(Borrow::borrow)
        .filter(|r| !landmark || in_landmark(r, q.s()))
        .collect();
    if records.is_empty() {
        return Err(Error::EmptyRiskSet);
    }

    // State 0 is only observed for subjects entering before their exit.
    let in_state0: Vec<_> = records.iter().filter(|r| r.entered_in_initial_state()).collect();
    let starts0 = sorted(in_state0.iter().map(|r| r.entry()).collect());
    let ends0 = sorted(in_state0.iter().map(|r| r.exit0()).collect());
    let mut exits0: Vec<(f64, bool)> = in_state0.iter().map(|r| (r.exit0(), !r.is_censored_in_state0())).collect();
    exits0.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut initial: Vec<InitialStep> = Vec::new();
    for (time, observed) in exits0 {
        if initial.last().is_none_or(|s| s.time != time) {
            initial.push(InitialStep { time, exits: 0, censored: 0, at_risk: at_risk(&starts0, &ends0, time) });
        }
        let step = initial.last_mut().expect("pushed above");
        if observed {
            step.exits += 1;
        } else {
            step.censored += 1;
        }
    }

    let starts = sorted(records.iter().map(|r| r.entry()).collect());
    let mut obs: Vec<_> = records.iter().map(|r| derive_kappa(r, q)).collect();
    obs.sort_by(|a, b| a.time.total_cmp(&b.time));
    let ends: Vec<f64> = obs.iter().map(|o| o.time).collect();
    let mut kappa: Vec<KappaStep> = Vec::new();
    for o in obs {
        if kappa.last().is_none_or(|s| s.time != o.time) {
            kappa.push(KappaStep {
                time: o.time,
                event1: 0,
                event2: 0,
                censored: 0,
                at_risk: at_risk(&starts, &ends, o.time),
            });
        }
        let step = kappa.last_mut().expect("pushed above");
        match o.kind {
            KappaKind::Event1 => step.event1 += 1,
            KappaKind::Event2 => step.event2 += 1,
            KappaKind::Censored => step.censored += 1,
        }
    }

    Ok(CountingProcesses { query: *q, landmark, size: records.len(), initial, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> Vec<IllnessDeathRecord> {
        vec![
            IllnessDeathRecord::ill_then_absorbed("A", 1.0, 4.0).unwrap(),
            IllnessDeathRecord::absorbed("B", 2.0).unwrap(),
            IllnessDeathRecord::ill_then_absorbed("C", 3.0, 6.0).unwrap(),
            IllnessDeathRecord::censored("D", 2.5).unwrap(),
        ]
    }

    #[test]
    fn initial_risk_set_counts() {
        let q = TransitionQuery::new(1.5, 3.5).unwrap();
        let cp = build_counting(&four(), &q, false).unwrap();
        let at2 = cp.initial.iter().find(|s| s.time == 2.0).unwrap();
        assert_eq!(at2.at_risk, 3);
        assert_eq!(cp.initial.iter().map(|s| s.at_risk).collect::<Vec<_>>(), [4, 3, 2, 1]);
    }

    #[test]
    fn landmark_risk_set_counts() {
        let q = TransitionQuery::new(1.5, 3.5).unwrap();
        let cp = build_counting(&four(), &q, true).unwrap();
        assert_eq!(cp.initial_at_risk(), 3);
        assert_eq!(cp.kappa[0].at_risk, 3);
        assert!(cp.kappa.iter().all(|k| k.time > 1.5));
    }

    #[test]
    fn empty_cohort_is_an_error() {
        let q = TransitionQuery::new(1.5, 3.5).unwrap();
        let empty: Vec<IllnessDeathRecord> = Vec::new();
        assert!(matches!(build_counting(&empty, &q, false), Err(Error::EmptyRiskSet)));
        let early = vec![IllnessDeathRecord::absorbed("x", 1.0).unwrap()];
        assert!(matches!(build_counting(&early, &q, true), Err(Error::EmptyRiskSet)));
    }

    #[test]
    fn ties_pool_events_and_keep_censorings() {
        let q = TransitionQuery::new(0.0, 1.0).unwrap();
        let cohort = vec![
            IllnessDeathRecord::absorbed("a", 2.0).unwrap(),
            IllnessDeathRecord::ill_then_absorbed("b", 0.5, 2.0).unwrap(),
            IllnessDeathRecord::censored("c", 2.0).unwrap(),
            IllnessDeathRecord::absorbed("d", 3.0).unwrap(),
        ];
        let cp = build_counting(&cohort, &q, false).unwrap();
        assert_eq!(cp.kappa[0], KappaStep { time: 2.0, event1: 1, event2: 1, censored: 1, at_risk: 4 });
        assert_eq!(cp.kappa[1].at_risk, 1);
    }

    #[test]
    fn delayed_entry_enters_risk_set_late() {
        let q = TransitionQuery::new(0.0, 1.0).unwrap();
        let cohort = vec![
            IllnessDeathRecord::absorbed("a", 1.0).unwrap(),
            IllnessDeathRecord::absorbed("b", 3.0).unwrap().with_entry(2.0).unwrap(),
        ];
        let cp = build_counting(&cohort, &q, false).unwrap();
        assert_eq!(cp.initial[0].at_risk, 1);
        assert_eq!(cp.initial[1].at_risk, 1);
    }
}
