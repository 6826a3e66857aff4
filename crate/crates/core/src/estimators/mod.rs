//! Counting-process construction and the transition-probability estimators.
//!
//! Product-limit kernels are generic over [`Scalar`] so the same code runs in
//! `f64` and, for verification, in exact rational arithmetic.
//!
//! Conventions shared by every estimator:
//! - at a tied time, events are counted before censorings, and type-1 and
//!   type-2 events are pooled in the survival factor;
//! - a hazard increment over an empty risk set contributes a factor of 1.

mod counting;
pub mod exact;
mod landmark;
mod markov;
mod product_limit;
mod transform;

use num_traits::{FromPrimitive, Num};

pub use counting::{build_counting, CountingProcesses, InitialStep, KappaStep};
pub use landmark::{check_path, p01_check, tsai_crowley_weight, var_check};
pub use markov::p01_aalen_johansen;
pub use product_limit::{
    censoring_survival_before, cif_limit, cif_path, ipcw_numerator, kaplan_meier, kappa_survival_before,
    multinomial_uncensored, p01_mm, p01_mm_stute, survival_path,
};
pub use transform::artificial_censoring;

/// Arithmetic needed by the product-limit kernels.
pub trait Scalar: Num + Clone + FromPrimitive {}

impl<T: Num + Clone + FromPrimitive> Scalar for T {}

pub(crate) fn count<T: Scalar>(k: u32) -> T {
    T::from_u32(k).expect("counts are representable")
}

/// `num / den`, or zero when the risk set is empty.
pub(crate) fn ratio<T: Scalar>(num: u32, den: u32) -> T {
    if den == 0 {
        T::zero()
    } else {
        count::<T>(num) / count::<T>(den)
    }
}

/// Non-fatal conditions reported next to an estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagnostic {
    /// The largest observed time is a censoring, so part of the mass of the
    /// absorption time is not identified.
    LargestObservationCensored,
    /// Unclipped ratio estimate above one.
    ExceedsOne(f64),
    /// `min Y(v) / Y(s+)` over `(s, t]` in the landmark subset.
    RiskSetRatio(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub diagnostics: Vec<Diagnostic>,
}

impl Estimate {
    pub fn new(value: f64) -> Self {
        Self { value, diagnostics: Vec::new() }
    }

    pub fn support_warning(&self) -> bool {
        self.diagnostics.contains(&Diagnostic::LargestObservationCensored)
    }

    pub fn exceeds_one(&self) -> bool {
        self.diagnostics.iter().any(|d| matches!(d, Diagnostic::ExceedsOne(_)))
    }

    pub fn risk_set_ratio(&self) -> Option<f64> {
        self.diagnostics.iter().find_map(|d| match d {
            Diagnostic::RiskSetRatio(r) => Some(*r),
            _ => None,
        })
    }
}
