//! Simulation scenarios and the Monte-Carlo bias/variance harness.
//!
//! The default scenario has competing exponential exits from state 0 and a
//! deterministic progression `T = factor * T0` after illness, so the process
//! is not Markov. Replication `k` of a study draws from its own ChaCha8
//! stream (`seed`, stream `k`), which makes every table independent of the
//! number of worker threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::format_number;
use crate::model::{IllnessDeathRecord, IllnessExit, InitialExit, TransitionQuery};
use crate::Method;

/// Skew-normal law of the truncation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormal {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

impl SkewNormal {
    /// `location + scale * (delta |U0| + sqrt(1 - delta^2) U1)` with
    /// `delta = shape / sqrt(1 + shape^2)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let delta = self.shape / (1.0 + self.shape * self.shape).sqrt();
        let u0: f64 = rng.sample(StandardNormal);
        let u1: f64 = rng.sample(StandardNormal);
        self.location + self.scale * (delta * u0.abs() + (1.0 - delta * delta).sqrt() * u1)
    }

    pub fn mean(&self) -> f64 {
        let delta = self.shape / (1.0 + self.shape * self.shape).sqrt();
        self.location + self.scale * delta * (2.0 / std::f64::consts::PI).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Subjects drawn per replication (before truncation).
    pub n: usize,
    pub hazard_ill: f64,
    pub hazard_direct: f64,
    pub progression_factor: f64,
    /// Exponential censoring hazard; zero disables censoring.
    pub censor_hazard: f64,
    pub truncation: Option<SkewNormal>,
    pub seed: u64,
    pub replications: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::table1()
    }
}

impl ScenarioConfig {
    /// Right-censoring with hazard 0.013.
    pub fn table1() -> Self {
        Self {
            n: 100,
            hazard_ill: 0.039,
            hazard_direct: 0.026,
            progression_factor: 1.7,
            censor_hazard: 0.013,
            truncation: None,
            seed: 7,
            replications: 1000,
        }
    }

    /// Right-censoring with hazard 0.035.
    pub fn table2() -> Self {
        Self { censor_hazard: 0.035, ..Self::table1() }
    }

    /// Skew-normal left-truncation plus censoring with hazard 0.013.
    pub fn table3() -> Self {
        Self { truncation: Some(SkewNormal { location: -5.0, scale: 10.0, shape: 10.0 }), ..Self::table1() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if self.replications == 0 {
            return bad("replications must be positive".into());
        }
        for (name, v) in [("hazard_ill", self.hazard_ill), ("hazard_direct", self.hazard_direct)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if !(self.censor_hazard >= 0.0 && self.censor_hazard.is_finite()) {
            return bad(format!("censor_hazard = {} must be non-negative", self.censor_hazard));
        }
        if !(self.progression_factor > 1.0 && self.progression_factor.is_finite()) {
            return bad(format!("progression_factor = {} must exceed 1", self.progression_factor));
        }
        if let Some(sn) = self.truncation {
            if !(sn.scale > 0.0 && sn.location.is_finite() && sn.shape.is_finite() && sn.scale.is_finite()) {
                return bad("truncation needs finite location/shape and positive scale".into());
            }
        }
        Ok(())
    }

    fn exit_rate(&self) -> f64 {
        self.hazard_ill + self.hazard_direct
    }

    /// Parses flat `key = value` lines; `#` starts a comment. Keys not given
    /// keep the Table 1 defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::table1();
        let mut trunc: [Option<f64>; 3] = [None; 3];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("line {}: {key} = {value:?} is not a number", lineno + 1)))
            };
            let int = || {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidConfig(format!("line {}: {key} = {value:?} is not an integer", lineno + 1)))
            };
            match key {
                "n" => cfg.n = int()? as usize,
                "hazard_ill" => cfg.hazard_ill = num()?,
                "hazard_direct" => cfg.hazard_direct = num()?,
                "progression_factor" => cfg.progression_factor = num()?,
                "censor_hazard" => cfg.censor_hazard = num()?,
                "truncation_location" => trunc[0] = Some(num()?),
                "truncation_scale" => trunc[1] = Some(num()?),
                "truncation_shape" => trunc[2] = Some(num()?),
                "seed" => cfg.seed = int()?,
                "replications" => cfg.replications = int()? as usize,
                other => return Err(Error::InvalidConfig(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        cfg.truncation = match trunc {
            [Some(location), Some(scale), Some(shape)] => Some(SkewNormal { location, scale, shape }),
            [None, None, None] => None,
            _ => return Err(Error::InvalidConfig("truncation needs location, scale and shape together".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`ScenarioConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let mut out = format!(
            "n = {}\nhazard_ill = {}\nhazard_direct = {}\nprogression_factor = {}\ncensor_hazard = {}\n",
            self.n, self.hazard_ill, self.hazard_direct, self.progression_factor, self.censor_hazard
        );
        if let Some(sn) = self.truncation {
            out += &format!(
                "truncation_location = {}\ntruncation_scale = {}\ntruncation_shape = {}\n",
                sn.location, sn.scale, sn.shape
            );
        }
        out += &format!("seed = {}\nreplications = {}\n", self.seed, self.replications);
        out
    }
}

/// Generator for replication `rep_index` of a study seeded with `seed`.
pub fn replication_rng(seed: u64, rep_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep_index);
    rng
}

fn censoring_time<R: Rng>(rng: &mut R, hazard: f64) -> f64 {
    if hazard > 0.0 {
        Exp::new(hazard).expect("positive rate").sample(rng)
    } else {
        f64::INFINITY
    }
}

fn observed_record(id: usize, entry: f64, t0: f64, ill: bool, t: f64, c: f64) -> Result<IllnessDeathRecord> {
    let id = id.to_string();
    if t0 > c {
        IllnessDeathRecord::new(id, entry, c, InitialExit::Censored, None, None)
    } else if ill {
        let (exit1, cause1) = if t <= c { (t, IllnessExit::Absorbed) } else { (c, IllnessExit::Censored) };
        IllnessDeathRecord::new(id, entry, t0, InitialExit::Ill, Some(exit1), Some(cause1))
    } else {
        IllnessDeathRecord::new(id, entry, t0, InitialExit::Absorbed, None, None)
    }
}

/// Draws one study. With truncation, a subject is observed only if its
/// truncation time precedes absorption; censoring then runs from entry.
pub fn simulate_cohort(cfg: &ScenarioConfig, rep_index: u64) -> Result<Vec<IllnessDeathRecord>> {
    let mut rng = replication_rng(cfg.seed, rep_index);
    let exit = Exp::new(cfg.exit_rate()).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let p_ill = cfg.hazard_ill / cfg.exit_rate();
    let mut cohort = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let t0: f64 = exit.sample(&mut rng);
        let ill = rng.random::<f64>() < p_ill;
        let t = if ill { cfg.progression_factor * t0 } else { t0 };
        let entry = match cfg.truncation {
            Some(sn) => sn.sample(&mut rng).max(0.0),
            None => 0.0,
        };
        if entry >= t {
            continue;
        }
        let c = entry + censoring_time(&mut rng, cfg.censor_hazard);
        cohort.push(observed_record(i, entry, t0, ill, t, c)?);
    }
    if cohort.is_empty() {
        return Err(Error::DegenerateCohort);
    }
    Ok(cohort)
}

/// Closed-form `P01(s, t)` for the progression scenario: `t < T` is
/// `T0 > t / factor` for an ill subject.
pub fn true_p01_for(cfg: &ScenarioConfig, q: &TransitionQuery) -> f64 {
    let rate = cfg.exit_rate();
    let p_ill = cfg.hazard_ill / rate;
    let lower = q.s().max(q.t() / cfg.progression_factor);
    if lower >= q.t() {
        return 0.0;
    }
    p_ill * ((-rate * (lower - q.s())).exp() - (-rate * (q.t() - q.s())).exp())
}

/// [`true_p01_for`] under the default scenario parameters.
pub fn true_p01(q: &TransitionQuery) -> f64 {
    true_p01_for(&ScenarioConfig::table1(), q)
}

/// Time-homogeneous Markov illness-death model with constant hazards.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovScenario {
    pub n: usize,
    pub hazard_ill: f64,
    pub hazard_direct: f64,
    pub hazard_ill_death: f64,
    pub censor_hazard: f64,
    pub seed: u64,
}

impl MarkovScenario {
    pub fn simulate(&self, rep_index: u64) -> Result<Vec<IllnessDeathRecord>> {
        let mut rng = replication_rng(self.seed, rep_index);
        let rate = self.hazard_ill + self.hazard_direct;
        let exit = Exp::new(rate).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let sojourn = Exp::new(self.hazard_ill_death).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        (0..self.n)
            .map(|i| {
                let t0: f64 = exit.sample(&mut rng);
                let ill = rng.random::<f64>() < self.hazard_ill / rate;
                let t = if ill { t0 + sojourn.sample(&mut rng) } else { t0 };
                let c = censoring_time(&mut rng, self.censor_hazard);
                observed_record(i, 0.0, t0, ill, t, c)
            })
            .collect()
    }

    /// `int_s^t e^{-a(u-s)} h e^{-c(t-u)} du` with `a` the total exit rate.
    pub fn true_p01(&self, q: &TransitionQuery) -> f64 {
        let a = self.hazard_ill + self.hazard_direct;
        let c = self.hazard_ill_death;
        let width = q.t() - q.s();
        if (a - c).abs() < 1e-12 {
            return self.hazard_ill * width * (-a * width).exp();
        }
        self.hazard_ill * ((-c * width).exp() - (-a * width).exp()) / (a - c)
    }
}

/// Estimates from one replication, `None` where the estimator failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub cohort_size: usize,
    pub landmark_size: usize,
    /// Indexed `[method][time]`.
    pub estimates: Vec<Vec<Option<f64>>>,
}

pub fn replicate(
    cfg: &ScenarioConfig,
    methods: &[Method],
    eval_times: &[f64],
    s: f64,
    rep_index: u64,
) -> Result<Replication> {
    let cohort = simulate_cohort(cfg, rep_index)?;
    let queries = eval_times.iter().map(|&t| TransitionQuery::new(s, t)).collect::<Result<Vec<_>>>()?;
    let estimates = methods
        .iter()
        .map(|m| queries.iter().map(|q| m.evaluate(&cohort, q).ok()).collect())
        .collect();
    Ok(Replication {
        cohort_size: cohort.len(),
        landmark_size: crate::model::landmark_subset(&cohort, s).len(),
        estimates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasVarianceRow {
    pub estimator: Method,
    pub s: f64,
    pub t: f64,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    /// Sample variance across contributing replications.
    pub variance: f64,
    /// Replications that produced an estimate.
    pub replications: usize,
    /// Replications excluded because the study or the estimator degenerated.
    pub excluded: usize,
    /// Mean landmark-subset size over contributing replications.
    pub mean_effective_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasVarianceTable {
    pub rows: Vec<BiasVarianceRow>,
    pub replications: usize,
    pub degenerate_replications: usize,
    /// Average retained cohort size per study.
    pub mean_cohort_size: f64,
}

impl BiasVarianceTable {
    pub fn row(&self, estimator: Method, t: f64) -> Option<&BiasVarianceRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.t == t)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "estimator,s,t,bias,variance,n_effective,n_excluded")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.estimator,
                format_number(r.s),
                format_number(r.t),
                format_number(r.bias),
                format_number(r.variance),
                r.replications,
                r.excluded
            )?;
        }
        Ok(())
    }
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Simulates `cfg.replications` studies and summarises each estimator at
/// `(s, t)` for every `t` against the closed-form truth. Rows are ordered by
/// estimator (as given) then time.
pub fn run_monte_carlo(cfg: &ScenarioConfig, methods: &[Method], eval_times: &[f64], s: f64) -> Result<BiasVarianceTable> {
    cfg.validate()?;
    if methods.is_empty() || eval_times.is_empty() {
        return Err(Error::InvalidArgument("need at least one estimator and one evaluation time".into()));
    }
    let queries = eval_times.iter().map(|&t| TransitionQuery::new(s, t)).collect::<Result<Vec<_>>>()?;
    let reps: Vec<Option<Replication>> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|k| match replicate(cfg, methods, eval_times, s, k) {
            Ok(r) => Ok(Some(r)),
            Err(Error::DegenerateCohort) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    let done: Vec<&Replication> = reps.iter().flatten().collect();
    if done.is_empty() {
        return Err(Error::DegenerateCohort);
    }
    let mean_cohort_size = done.iter().map(|r| r.cohort_size as f64).sum::<f64>() / done.len() as f64;

    let mut rows = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (ti, q) in queries.iter().enumerate() {
            let (values, sizes): (Vec<f64>, Vec<f64>) = done
                .iter()
                .filter_map(|r| r.estimates[mi][ti].map(|v| (v, r.landmark_size as f64)))
                .unzip();
            let truth = true_p01_for(cfg, q);
            let (mean, variance, mean_n) = if values.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                let (m, v) = mean_and_variance(&values);
                (m, v, sizes.iter().sum::<f64>() / sizes.len() as f64)
            };
            rows.push(BiasVarianceRow {
                estimator: method,
                s,
                t: q.t(),
                truth,
                mean,
                bias: mean - truth,
                variance,
                replications: values.len(),
                excluded: cfg.replications - values.len(),
                mean_effective_n: mean_n,
            });
        }
    }
    Ok(BiasVarianceTable {
        rows,
        replications: cfg.replications,
        degenerate_replications: reps.len() - done.len(),
        mean_cohort_size,
    })
}

/// Named built-in scenarios together with the estimators they report.
pub fn preset(name: &str) -> Option<(ScenarioConfig, Vec<Method>)> {
    let full = vec![Method::Check, Method::Mm, Method::AalenJohansen];
    match name {
        "table1" => Some((ScenarioConfig::table1(), full)),
        "table2" => Some((ScenarioConfig::table2(), full)),
        "table3" => Some((ScenarioConfig::table3(), vec![Method::AalenJohansen, Method::Check])),
        _ => None,
    }
}

/// Evaluation times used by the built-in scenarios.
pub const TABLE_TIMES: [f64; 8] = [30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];

/// Landmark used by the built-in scenarios.
pub const TABLE_LANDMARK: f64 = 10.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_time_and_illness_fraction() {
        let cfg = ScenarioConfig { n: 100_000, censor_hazard: 0.0, ..ScenarioConfig::table1() };
        let cohort = simulate_cohort(&cfg, 0).unwrap();
        let mean_t0 = cohort.iter().map(|r| r.exit0()).sum::<f64>() / cohort.len() as f64;
        assert!((mean_t0 - 1.0 / 0.065).abs() < 0.2, "{mean_t0}");
        let ill = cohort.iter().filter(|r| r.cause0() == InitialExit::Ill).count() as f64 / cohort.len() as f64;
        assert!((ill - 0.6).abs() < 0.01, "{ill}");
        for r in cohort.iter().filter(|r| r.cause0() == InitialExit::Ill) {
            assert!((r.exit1().unwrap() - 1.7 * r.exit0()).abs() < 1e-9);
        }
    }

    #[test]
    fn skew_normal_moments() {
        let sn = SkewNormal { location: -5.0, scale: 10.0, shape: 10.0 };
        let mut rng = replication_rng(1, 0);
        let n = 200_000;
        let mean = (0..n).map(|_| sn.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - sn.mean()).abs() < 0.05, "{mean} vs {}", sn.mean());
    }

    #[test]
    fn simulation_is_deterministic_per_replication() {
        let cfg = ScenarioConfig::table3();
        assert_eq!(simulate_cohort(&cfg, 3).unwrap(), simulate_cohort(&cfg, 3).unwrap());
        assert_ne!(simulate_cohort(&cfg, 3).unwrap(), simulate_cohort(&cfg, 4).unwrap());
    }

    #[test]
    fn truncated_records_enter_before_absorption() {
        let cfg = ScenarioConfig::table3();
        for k in 0..20 {
            for r in simulate_cohort(&cfg, k).unwrap() {
                assert!(r.entry() >= 0.0 && r.entry() < r.final_time());
            }
        }
    }

    #[test]
    fn truth_values() {
        let q = |t| TransitionQuery::new(10.0, t).unwrap();
        assert!((true_p01(&q(30.0)) - 0.201).abs() < 1e-3);
        assert!((true_p01(&q(100.0)) - 0.023).abs() < 1e-3);
        assert_eq!(true_p01(&q(10.0)), 0.0);
        assert!(true_p01(&q(1e4)) < 1e-12);
    }

    #[test]
    fn markov_truth_matches_numeric_integral() {
        let m = MarkovScenario { n: 1, hazard_ill: 0.04, hazard_direct: 0.02, hazard_ill_death: 0.05, censor_hazard: 0.0, seed: 0 };
        let q = TransitionQuery::new(5.0, 25.0).unwrap();
        let steps = 200_000;
        let h = 20.0 / steps as f64;
        let integral: f64 = (0..steps)
            .map(|i| {
                let u = 5.0 + (i as f64 + 0.5) * h;
                (-(0.06) * (u - 5.0)).exp() * 0.04 * (-0.05 * (25.0 - u)).exp() * h
            })
            .sum();
        assert!((m.true_p01(&q) - integral).abs() < 1e-9);
    }

    #[test]
    fn config_round_trip() {
        for cfg in [ScenarioConfig::table1(), ScenarioConfig::table3()] {
            assert_eq!(ScenarioConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
        }
        let cfg = ScenarioConfig::parse("# comment\nn = 50\ncensor_hazard=0.035\n").unwrap();
        assert_eq!((cfg.n, cfg.censor_hazard), (50, 0.035));
        assert!(ScenarioConfig::parse("bogus = 1").is_err());
        assert!(ScenarioConfig::parse("n = 1").is_err());
        assert!(ScenarioConfig::parse("truncation_scale = 3").is_err());
        assert!(ScenarioConfig::parse("progression_factor = 0.5").is_err());
    }

    #[test]
    fn uncensored_studies_make_check_and_mm_agree() {
        let cfg = ScenarioConfig { censor_hazard: 0.0, replications: 30, ..ScenarioConfig::table1() };
        let times = [30.0, 60.0, 100.0];
        for k in 0..30 {
            let rep = replicate(&cfg, &[Method::Check, Method::Mm], &times, 10.0, k).unwrap();
            for (a, b) in rep.estimates[0].iter().zip(&rep.estimates[1]) {
                let (a, b) = (a.unwrap(), b.unwrap());
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn monte_carlo_small_run() {
        let cfg = ScenarioConfig { replications: 40, ..ScenarioConfig::table1() };
        let table = run_monte_carlo(&cfg, &[Method::Check, Method::AalenJohansen], &[30.0, 50.0], 10.0).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert_eq!(table.mean_cohort_size, 100.0);
        for r in &table.rows {
            assert!(r.variance >= 0.0);
            assert_eq!(r.replications + r.excluded, 40);
        }
        assert!(run_monte_carlo(&cfg, &[], &[30.0], 10.0).is_err());
        assert!(run_monte_carlo(&cfg, &[Method::Check], &[5.0], 10.0).is_err());
    }
}
