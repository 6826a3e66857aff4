mod common;

use common::*;
use illdeath::estimators::{
    artificial_censoring, build_counting, check_path, cif_path, p01_aalen_johansen, p01_check, p01_mm, p01_mm_stute,
    var_check,
};
use illdeath::{derive_kappa, landmark_subset, IllnessDeathRecord, InitialExit, KappaKind, TransitionQuery};
use proptest::prelude::*;
use rand::Rng;

fn cohort_and_query(seed: u64, censor_prob: f64) -> (Vec<IllnessDeathRecord>, TransitionQuery) {
    let mut rng = rng(seed);
    let n = rng.random_range(1..=40);
    let cohort = random_cohort(&mut rng, n, censor_prob);
    (cohort, random_query(&mut rng))
}

fn with_delayed_entry(seed: u64, cohort: Vec<IllnessDeathRecord>) -> Vec<IllnessDeathRecord> {
    let mut rng = rng(seed ^ 0x5eed);
    cohort
        .into_iter()
        .map(|r| {
            if rng.random_bool(0.4) {
                let entry = r.exit0() * rng.random_range(0.0..1.0);
                r.with_entry(entry).unwrap()
            } else {
                r
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn estimates_lie_in_unit_interval(seed in any::<u64>(), censor in 0.0..0.8f64) {
        let (cohort, q) = cohort_and_query(seed, censor);
        if let Ok(e) = p01_check(&cohort, &q) {
            prop_assert!((0.0..=1.0).contains(&e.value));
        }
        if let Ok(v) = p01_aalen_johansen(&cohort, &q) {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
        if let Ok(e) = p01_mm(&cohort, &q) {
            prop_assert!(e.value >= 0.0);
            prop_assert_eq!(e.exceeds_one(), e.value > 1.0);
        }
    }

    #[test]
    fn incidence_paths_are_nondecreasing(seed in any::<u64>(), censor in 0.0..0.8f64) {
        let (cohort, q) = cohort_and_query(seed, censor);
        let cohort = with_delayed_entry(seed, cohort);
        if let Ok(cp) = build_counting(&cohort, &q, false) {
            prop_assert!(cif_path(&cp).values().windows(2).all(|w| w[0] <= w[1]));
        }
        if let Ok(path) = check_path(&cohort, &q) {
            prop_assert!(path.values().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn variance_is_nonnegative(seed in any::<u64>(), censor in 0.0..0.8f64) {
        let (cohort, q) = cohort_and_query(seed, censor);
        if let Ok(v) = var_check(&cohort, &q) {
            prop_assert!(v >= 0.0);
            let subset = landmark_subset(&cohort, q.s());
            let type1 = subset.iter().filter(|r| derive_kappa(r, &q).kind == KappaKind::Event1).count();
            if subset.len() <= 1 || type1 == 0 {
                prop_assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn kappa_matches_summary_form(seed in any::<u64>(), censor in 0.0..0.8f64) {
        let (cohort, q) = cohort_and_query(seed, censor);
        for r in &cohort {
            // (T0~, T~, delta0, delta) summary of the same path
            let t0 = r.exit0();
            let t = r.exit1().unwrap_or(t0);
            let delta0 = r.cause0() != InitialExit::Censored;
            let delta = delta0 && r.cause1().is_none_or(|c| c == illdeath::IllnessExit::Absorbed);
            let expected = if !delta {
                KappaKind::Censored
            } else if q.s() < t0 && t0 <= q.t() && q.t() < t {
                KappaKind::Event1
            } else {
                KappaKind::Event2
            };
            let k = derive_kappa(r, &q);
            prop_assert_eq!(k.time, t);
            prop_assert_eq!(k.kind, expected);
        }
    }

    #[test]
    fn landmark_subset_is_in_state0_at_s(seed in any::<u64>(), censor in 0.0..0.8f64) {
        let (cohort, q) = cohort_and_query(seed, censor);
        let cohort = with_delayed_entry(seed, cohort);
        let subset = landmark_subset(&cohort, q.s());
        for r in &subset {
            prop_assert!(r.exit0() > q.s());
            prop_assert!(r.entry() < q.s() || (q.s() == 0.0 && r.entry() == 0.0));
        }
        let expected = cohort
            .iter()
            .filter(|r| r.exit0() > q.s() && (r.entry() < q.s() || (q.s() == 0.0 && r.entry() == 0.0)))
            .count();
        prop_assert_eq!(subset.len(), expected);
    }

    #[test]
    fn artificial_censoring_beyond_t_keeps_check(seed in any::<u64>(), gap in 0.25..10.0f64) {
        let (cohort, q) = cohort_and_query(seed, 0.0);
        let tau = q.t() + gap;
        let cut = artificial_censoring(&cohort, tau).unwrap();
        match (p01_check(&cohort, &q), p01_check(&cut, &q)) {
            (Ok(a), Ok(b)) => prop_assert!((a.value - b.value).abs() < 1e-12),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn no_type1_events_when_s_equals_t(seed in any::<u64>(), censor in 0.0..0.8f64) {
        let (cohort, q) = cohort_and_query(seed, censor);
        let q = TransitionQuery::new(q.s(), q.s()).unwrap();
        prop_assert!(cohort.iter().all(|r| derive_kappa(r, &q).kind != KappaKind::Event1));
        if let Ok(e) = p01_check(&cohort, &q) {
            prop_assert_eq!(e.value, 0.0);
        }
        if let Ok(e) = p01_mm_stute(&cohort, &q) {
            prop_assert_eq!(e.value, 0.0);
        }
    }
}
