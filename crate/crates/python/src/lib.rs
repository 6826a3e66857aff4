//! Python bindings for the `illdeath` crate.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use illdeath::estimators;
use illdeath::inference;
use illdeath::simulation::{self, ScenarioConfig};
use illdeath::{IllnessDeathRecord, IllnessExit, InitialExit, Method, TransitionQuery};

create_exception!(illdeath, IllDeathError, PyValueError);

fn err(e: illdeath::Error) -> PyErr {
    IllDeathError::new_err(e.to_string())
}

fn query(s: f64, t: f64) -> PyResult<TransitionQuery> {
    TransitionQuery::new(s, t).map_err(err)
}

/// One subject: entry time, exit from state 0 with cause (0 censored, 1 ill,
/// 2 absorbed), and for ill subjects the exit from state 1 (0 censored, 2 absorbed).
#[pyclass(name = "Record", frozen)]
struct PyRecord(IllnessDeathRecord);

#[pymethods]
impl PyRecord {
    #[new]
    #[pyo3(signature = (id, exit0, cause0, exit1=None, cause1=None, entry=0.0))]
    fn new(id: String, exit0: f64, cause0: u8, exit1: Option<f64>, cause1: Option<u8>, entry: f64) -> PyResult<Self> {
        let cause0 = InitialExit::from_code(&cause0.to_string())
            .ok_or_else(|| IllDeathError::new_err(format!("cause0 = {cause0} not in {{0, 1, 2}}")))?;
        let cause1 = cause1
            .map(|c| IllnessExit::from_code(&c.to_string()).ok_or_else(|| IllDeathError::new_err(format!("cause1 = {c} not in {{0, 2}}"))))
            .transpose()?;
        IllnessDeathRecord::new(id, entry, exit0, cause0, exit1, cause1).map(Self).map_err(err)
    }

    #[getter]
    fn id(&self) -> &str {
        self.0.id()
    }

    #[getter]
    fn entry(&self) -> f64 {
        self.0.entry()
    }

    #[getter]
    fn exit0(&self) -> f64 {
        self.0.exit0()
    }

    #[getter]
    fn cause0(&self) -> u8 {
        self.0.cause0().code()
    }

    #[getter]
    fn exit1(&self) -> Option<f64> {
        self.0.exit1()
    }

    #[getter]
    fn cause1(&self) -> Option<u8> {
        self.0.cause1().map(IllnessExit::code)
    }

    fn __repr__(&self) -> String {
        format!("Record({:?}, exit0={}, cause0={})", self.0.id(), self.0.exit0(), self.0.cause0().code())
    }
}

#[pyclass(name = "Cohort", frozen)]
struct PyCohort(Vec<IllnessDeathRecord>);

#[pymethods]
impl PyCohort {
    #[new]
    fn new(records: Vec<PyRef<'_, PyRecord>>) -> Self {
        Self(records.iter().map(|r| r.0.clone()).collect())
    }

    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        illdeath::io::read_cohort_path(path).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        illdeath::io::read_cohort(text.as_bytes()).map(Self).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        illdeath::io::write_cohort(&self.0, &mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    fn records(&self) -> Vec<PyRecord> {
        self.0.iter().cloned().map(PyRecord).collect()
    }

    /// Subjects in state 0 and under observation at `s`.
    fn landmark(&self, s: f64) -> Self {
        Self(illdeath::landmark_subset(&self.0, s).into_iter().cloned().collect())
    }

    fn artificial_censoring(&self, tau: f64) -> PyResult<Self> {
        estimators::artificial_censoring(&self.0, tau).map(Self).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(err)
}

/// `P01(s, t)` by the named method: "check", "mm", "mm-stute" or "aj".
#[pyfunction]
#[pyo3(signature = (cohort, s, t, method="check"))]
fn estimate(cohort: &PyCohort, s: f64, t: f64, method: &str) -> PyResult<f64> {
    self::method(method)?.evaluate(&cohort.0, &query(s, t)?).map_err(err)
}

#[pyfunction]
fn p01_check(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::p01_check(&cohort.0, &query(s, t)?).map(|e| e.value).map_err(err)
}

#[pyfunction]
fn p01_mm(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::p01_mm(&cohort.0, &query(s, t)?).map(|e| e.value).map_err(err)
}

#[pyfunction]
fn p01_mm_stute(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::p01_mm_stute(&cohort.0, &query(s, t)?).map(|e| e.value).map_err(err)
}

#[pyfunction]
fn p01_aalen_johansen(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::p01_aalen_johansen(&cohort.0, &query(s, t)?).map_err(err)
}

#[pyfunction]
fn var_check(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::var_check(&cohort.0, &query(s, t)?).map_err(err)
}

#[pyfunction]
fn ipcw_numerator(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::ipcw_numerator(&cohort.0, &query(s, t)?).map_err(err)
}

#[pyfunction]
fn tsai_crowley_weight(cohort: &PyCohort, s: f64, t: f64, u: f64) -> PyResult<f64> {
    estimators::tsai_crowley_weight(&cohort.0, &query(s, t)?, u).map_err(err)
}

#[pyfunction]
fn multinomial_uncensored(cohort: &PyCohort, s: f64, t: f64) -> PyResult<f64> {
    estimators::multinomial_uncensored(&cohort.0, &query(s, t)?).map_err(err)
}

/// Closed-form `P01(s, t)` in the default simulation scenario.
#[pyfunction]
fn true_p01(s: f64, t: f64) -> PyResult<f64> {
    Ok(simulation::true_p01(&query(s, t)?))
}

fn scenario(name: &str, n: Option<usize>, seed: Option<u64>, reps: Option<usize>) -> PyResult<(ScenarioConfig, Vec<Method>)> {
    let (mut cfg, methods) =
        simulation::preset(name).ok_or_else(|| IllDeathError::new_err(format!("unknown scenario {name:?}")))?;
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(reps) = reps {
        cfg.replications = reps;
    }
    cfg.validate().map_err(err)?;
    Ok((cfg, methods))
}

/// One simulated study from a built-in scenario.
#[pyfunction]
#[pyo3(signature = (scenario="table1", rep=0, n=None, seed=None))]
fn simulate_cohort(scenario: &str, rep: u64, n: Option<usize>, seed: Option<u64>) -> PyResult<PyCohort> {
    let (cfg, _) = self::scenario(scenario, n, seed, None)?;
    simulation::simulate_cohort(&cfg, rep).map(PyCohort).map_err(err)
}

/// Bias and variance table as a list of dicts, one per estimator and time.
#[pyfunction]
#[pyo3(signature = (scenario="table1", reps=None, n=None, seed=None, s=simulation::TABLE_LANDMARK, times=None))]
fn run_monte_carlo<'py>(
    py: Python<'py>,
    scenario: &str,
    reps: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    s: f64,
    times: Option<Vec<f64>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let (cfg, methods) = self::scenario(scenario, n, seed, reps)?;
    let times = times.unwrap_or_else(|| simulation::TABLE_TIMES.to_vec());
    let table = py
        .detach(|| simulation::run_monte_carlo(&cfg, &methods, &times, s))
        .map_err(err)?;
    table
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("estimator", r.estimator.name())?;
            d.set_item("s", r.s)?;
            d.set_item("t", r.t)?;
            d.set_item("truth", r.truth)?;
            d.set_item("bias", r.bias)?;
            d.set_item("variance", r.variance)?;
            d.set_item("n_effective", r.replications)?;
            d.set_item("n_excluded", r.excluded)?;
            Ok(d)
        })
        .collect()
}

/// Bootstrap quantile and normal intervals, as a dict.
#[pyfunction]
#[pyo3(signature = (cohort, s, t, method="check", n_boot=1000, level=0.95, seed=1))]
#[allow(clippy::too_many_arguments)]
fn bootstrap_ci<'py>(
    py: Python<'py>,
    cohort: &PyCohort,
    s: f64,
    t: f64,
    method: &str,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let q = query(s, t)?;
    let m = self::method(method)?;
    let ci = py
        .detach(|| inference::bootstrap_ci(&cohort.0, &q, m, n_boot, level, seed))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("point", ci.point)?;
    d.set_item("boot_variance", ci.boot_variance)?;
    d.set_item("quantile_ci", ci.quantile_ci)?;
    d.set_item("normal_ci", ci.normal_ci)?;
    d.set_item("n_boot", ci.n_boot)?;
    d.set_item("n_failed", ci.n_failed)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "illdeath")]
fn illdeath_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IllDeathError", m.py().get_type::<IllDeathError>())?;
    m.add_class::<PyRecord>()?;
    m.add_class::<PyCohort>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(p01_check, m)?)?;
    m.add_function(wrap_pyfunction!(p01_mm, m)?)?;
    m.add_function(wrap_pyfunction!(p01_mm_stute, m)?)?;
    m.add_function(wrap_pyfunction!(p01_aalen_johansen, m)?)?;
    m.add_function(wrap_pyfunction!(var_check, m)?)?;
    m.add_function(wrap_pyfunction!(ipcw_numerator, m)?)?;
    m.add_function(wrap_pyfunction!(tsai_crowley_weight, m)?)?;
    m.add_function(wrap_pyfunction!(multinomial_uncensored, m)?)?;
    m.add_function(wrap_pyfunction!(true_p01, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cohort, m)?)?;
    m.add_function(wrap_pyfunction!(run_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_ci, m)?)?;
    Ok(())
}
