#![allow(dead_code)]

use illdeath::{IllnessDeathRecord, TransitionQuery};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// `{T0=1 ill T=4; T0=T=2; T0=3 ill T=6}`.
pub fn uncensored_fixture() -> Vec<IllnessDeathRecord> {
    vec![
        IllnessDeathRecord::ill_then_absorbed("A", 1.0, 4.0).unwrap(),
        IllnessDeathRecord::absorbed("B", 2.0).unwrap(),
        IllnessDeathRecord::ill_then_absorbed("C", 3.0, 6.0).unwrap(),
    ]
}

/// The uncensored fixture plus a subject censored in state 0 at 2.5.
pub fn censored_fixture() -> Vec<IllnessDeathRecord> {
    let mut c = uncensored_fixture();
    c.push(IllnessDeathRecord::censored("D", 2.5).unwrap());
    c
}

pub fn fixture_query() -> TransitionQuery {
    TransitionQuery::new(1.5, 3.5).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Times on a half-unit grid so ties are common.
fn grid_time<R: Rng>(rng: &mut R, lo: u32, hi: u32) -> f64 {
    rng.random_range(lo..=hi) as f64 / 2.0
}

/// Random cohort of `n` subjects with ties; `censor_prob` of each subject's
/// path being cut by censoring.
pub fn random_cohort<R: Rng>(rng: &mut R, n: usize, censor_prob: f64) -> Vec<IllnessDeathRecord> {
    (0..n)
        .map(|i| {
            let id = format!("s{i:03}");
            let t0 = grid_time(rng, 1, 20);
            let ill = rng.random_bool(0.5);
            let censored = rng.random_bool(censor_prob);
            match (ill, censored) {
                (false, false) => IllnessDeathRecord::absorbed(id, t0),
                (false, true) => IllnessDeathRecord::censored(id, t0),
                (true, cens) => {
                    let t = t0 + grid_time(rng, 0, 12);
                    if cens && rng.random_bool(0.5) {
                        IllnessDeathRecord::censored(id, t0)
                    } else if cens {
                        IllnessDeathRecord::ill_then_censored(id, t0, t)
                    } else {
                        IllnessDeathRecord::ill_then_absorbed(id, t0, t)
                    }
                }
            }
            .unwrap()
        })
        .collect()
}

pub fn random_query<R: Rng>(rng: &mut R) -> TransitionQuery {
    let s = grid_time(rng, 0, 14);
    let t = s + grid_time(rng, 0, 14);
    TransitionQuery::new(s, t).unwrap()
}

pub fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
