//! Subject records, the transition query, and the derived competing-risks
//! observation.
//!
//! A subject starts in the initial state 0, may move to the illness state 1,
//! and ends in the absorbing state 2. Observation starts at the truncation
//! time `entry` and stops at absorption or censoring. Records are validated
//! once and never mutated; every derived structure is a new value.

use std::borrow::Borrow;
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};

/// How the stay in the initial state ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialExit {
    Ill,
    Absorbed,
    Censored,
}

impl InitialExit {
    /// CSV code: 1 ill, 2 absorbed, 0 censored.
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "1" => Some(Self::Ill),
            "2" => Some(Self::Absorbed),
            "0" => Some(Self::Censored),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Ill => 1,
            Self::Absorbed => 2,
            Self::Censored => 0,
        }
    }
}

/// How the stay in the illness state ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IllnessExit {
    Absorbed,
    Censored,
}

impl IllnessExit {
    /// CSV code: 2 absorbed, 0 censored.
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "2" => Some(Self::Absorbed),
            "0" => Some(Self::Censored),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Absorbed => 2,
            Self::Censored => 0,
        }
    }
}

/// One subject's observed path through the illness-death model.
///
/// `entry < exit0` for subjects who enter in the initial state. A subject
/// who fell ill before entering the study (`exit0 <= entry < exit1`) is also
/// valid: such a prevalent case contributes to the illness-state risk set of
/// the Markov comparator but can never belong to a landmark subset.
#[derive(Debug, Clone, PartialEq)]
pub struct IllnessDeathRecord {
    id: String,
    entry: f64,
    exit0: f64,
    cause0: InitialExit,
    illness: Option<(f64, IllnessExit)>,
}

impl IllnessDeathRecord {
    pub fn new(
        id: impl Into<String>,
        entry: f64,
        exit0: f64,
        cause0: InitialExit,
        exit1: Option<f64>,
        cause1: Option<IllnessExit>,
    ) -> Result<Self> {
        let id = id.into();
        for (name, v) in [("entry", Some(entry)), ("exit0", Some(exit0)), ("exit1", exit1)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::malformed(format!("{id}: {name} is not finite")));
                }
            }
        }
        // Negative truncation carries no information beyond full observation.
        let entry = entry.max(0.0);
        if exit0 < 0.0 {
            return Err(Error::malformed(format!("{id}: exit0 is negative")));
        }
        let illness = match (cause0, exit1, cause1) {
            (InitialExit::Ill, Some(t), Some(c)) => {
                if t < exit0 {
                    return Err(Error::malformed(format!("{id}: exit1 {t} precedes exit0 {exit0}")));
                }
                Some((t, c))
            }
            (InitialExit::Ill, _, _) => {
                return Err(Error::malformed(format!("{id}: cause0 = ill requires exit1 and cause1")))
            }
            (_, None, None) => None,
            (_, _, _) => {
                return Err(Error::malformed(format!(
                    "{id}: exit1/cause1 given without an observed illness"
                )))
            }
        };
        let entered_ill = matches!(illness, Some((t, _)) if exit0 <= entry && entry < t);
        if entry >= exit0 && !entered_ill {
            return Err(Error::malformed(format!("{id}: entry {entry} is not before exit0 {exit0}")));
        }
        Ok(Self { id, entry, exit0, cause0, illness })
    }

    /// Direct `0 -> 2` transition at `time`, observed from the origin.
    pub fn absorbed(id: impl Into<String>, time: f64) -> Result<Self> {
        Self::new(id, 0.0, time, InitialExit::Absorbed, None, None)
    }

    /// Illness at `onset` followed by observed absorption at `time`.
    pub fn ill_then_absorbed(id: impl Into<String>, onset: f64, time: f64) -> Result<Self> {
        Self::new(id, 0.0, onset, InitialExit::Ill, Some(time), Some(IllnessExit::Absorbed))
    }

    /// Illness at `onset`, censored in the illness state at `time`.
    pub fn ill_then_censored(id: impl Into<String>, onset: f64, time: f64) -> Result<Self> {
        Self::new(id, 0.0, onset, InitialExit::Ill, Some(time), Some(IllnessExit::Censored))
    }

    /// Censored in the initial state.
    pub fn censored(id: impl Into<String>, time: f64) -> Result<Self> {
        Self::new(id, 0.0, time, InitialExit::Censored, None, None)
    }

    /// Same path with a delayed entry.
    pub fn with_entry(self, entry: f64) -> Result<Self> {
        let (exit1, cause1) = self.illness.map_or((None, None), |(t, c)| (Some(t), Some(c)));
        Self::new(self.id, entry, self.exit0, self.cause0, exit1, cause1)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn entry(&self) -> f64 {
        self.entry
    }

    pub fn exit0(&self) -> f64 {
        self.exit0
    }

    pub fn cause0(&self) -> InitialExit {
        self.cause0
    }

    pub fn exit1(&self) -> Option<f64> {
        self.illness.map(|(t, _)| t)
    }

    pub fn cause1(&self) -> Option<IllnessExit> {
        self.illness.map(|(_, c)| c)
    }

    /// Observed absorption-or-censoring time, `min(T, C)`.
    pub fn final_time(&self) -> f64 {
        self.exit1().unwrap_or(self.exit0)
    }

    /// Whether absorption was observed, i.e. `T <= C`.
    pub fn absorption_observed(&self) -> bool {
        match self.cause0 {
            InitialExit::Absorbed => true,
            InitialExit::Censored => false,
            InitialExit::Ill => self.cause1() == Some(IllnessExit::Absorbed),
        }
    }

    /// True when the subject was under observation in the initial state.
    pub fn entered_in_initial_state(&self) -> bool {
        self.entry < self.exit0
    }

    pub fn is_censored(&self) -> bool {
        !self.absorption_observed()
    }

    pub fn is_censored_in_state0(&self) -> bool {
        self.cause0 == InitialExit::Censored
    }
}

/// Raw CSV row; `validate_record` turns it into an [`IllnessDeathRecord`].
#[derive(Debug, Clone, Default, Deserialize)]
pub struct RawRecord {
    pub id: Option<String>,
    pub entry: Option<String>,
    pub exit0: Option<String>,
    pub cause0: Option<String>,
    pub exit1: Option<String>,
    pub cause1: Option<String>,
}

fn non_empty(field: &Option<String>) -> Option<&str> {
    field.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

fn parse_time(id: &str, name: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::malformed(format!("{id}: {name} = {value:?} is not a number")))
}

pub fn validate_record(raw: &RawRecord) -> Result<IllnessDeathRecord> {
    let id = non_empty(&raw.id).ok_or_else(|| Error::malformed("missing id"))?;
    let entry = match non_empty(&raw.entry) {
        Some(v) => parse_time(id, "entry", v)?,
        None => 0.0,
    };
    let exit0 = non_empty(&raw.exit0).ok_or_else(|| Error::malformed(format!("{id}: missing exit0")))?;
    let exit0 = parse_time(id, "exit0", exit0)?;
    let cause0 = non_empty(&raw.cause0).ok_or_else(|| Error::malformed(format!("{id}: missing cause0")))?;
    let cause0 = InitialExit::from_code(cause0)
        .ok_or_else(|| Error::malformed(format!("{id}: cause0 = {cause0:?} not in {{0,1,2}}")))?;
    let exit1 = non_empty(&raw.exit1).map(|v| parse_time(id, "exit1", v)).transpose()?;
    let cause1 = non_empty(&raw.cause1)
        .map(|v| IllnessExit::from_code(v).ok_or_else(|| Error::malformed(format!("{id}: cause1 = {v:?} not in {{0,2}}"))))
        .transpose()?;
    IllnessDeathRecord::new(id, entry, exit0, cause0, exit1, cause1)
}

/// The fixed pair `(s, t)` with `0 <= s <= t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionQuery {
    s: f64,
    t: f64,
}

impl TransitionQuery {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !s.is_finite() || !t.is_finite() {
            return Err(Error::InvalidQuery(format!("non-finite times s = {s}, t = {t}")));
        }
        if s < 0.0 {
            return Err(Error::InvalidQuery(format!("s = {s} is negative")));
        }
        if t < s {
            return Err(Error::InvalidQuery(format!("t = {t} is before s = {s}")));
        }
        Ok(Self { s, t })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `1(s < T0 <= t, t < T)`.
    pub fn indicator(&self, t0: f64, t: f64) -> bool {
        self.s < t0 && t0 <= self.t && self.t < t
    }
}

impl fmt::Display for TransitionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.s, self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KappaKind {
    /// Absorbed, having been ill at `t` after leaving state 0 in `(s, t]`.
    Event1,
    /// Absorbed otherwise.
    Event2,
    Censored,
}

/// Observed absorption-or-censoring time of the derived competing-risks
/// process together with its mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaObservation {
    pub time: f64,
    pub kind: KappaKind,
}

pub fn derive_kappa(record: &IllnessDeathRecord, q: &TransitionQuery) -> KappaObservation {
    let time = record.final_time();
    let kind = if record.is_censored() {
        KappaKind::Censored
    } else if q.indicator(record.exit0(), time) {
        KappaKind::Event1
    } else {
        KappaKind::Event2
    };
    KappaObservation { time, kind }
}

/// Subjects who entered before `s` and are still in state 0 and uncensored
/// at `s`. At `s = 0` every subject observed from the origin is kept.
pub fn landmark_subset<R: Borrow<IllnessDeathRecord>>(cohort: &[R], s: f64) -> Vec<&IllnessDeathRecord> {
    cohort
        .iter()
        .map(Borrow::borrow)
        .filter(|r| in_landmark(r, s))
        .collect()
}

pub(crate) fn in_landmark(r: &IllnessDeathRecord, s: f64) -> bool {
    let entered = if s == 0.0 { r.entry() == 0.0 } else { r.entry() < s };
    entered && r.exit0() > s
}
