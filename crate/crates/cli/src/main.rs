//! Command-line front end: `estimate`, `simulate` and `transform`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use illdeath::estimators::{self, artificial_censoring};
use illdeath::inference::{bootstrap_ci, CiResult};
use illdeath::io::{format_number, read_cohort, write_cohort};
use illdeath::simulation::{preset, run_monte_carlo, ScenarioConfig, TABLE_LANDMARK, TABLE_TIMES};
use illdeath::{Error, Estimate, IllnessDeathRecord, Method, TransitionQuery};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Worker-count override for the internal thread pool. Results never depend on it.
const THREADS_ENV: &str = "ILLDEATH_THREADS";

/// Largest tolerated disagreement between the two forms of the ratio estimator.
const MM_FORMS_TOLERANCE: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "illdeath", version, about = "Transition probabilities in the illness-death model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate P01(s, t) from a cohort CSV.
    Estimate(EstimateArgs),
    /// Monte Carlo bias and variance of the estimators.
    Simulate(SimulateArgs),
    /// Apply artificial censoring at tau and write the cohort back out.
    Transform(TransformArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Check,
    Mm,
    MmStute,
    Aj,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Check => vec![Method::Check],
            MethodArg::Mm => vec![Method::Mm],
            MethodArg::MmStute => vec![Method::MmStute],
            MethodArg::Aj => vec![Method::AalenJohansen],
            MethodArg::All => vec![Method::Check, Method::Mm, Method::MmStute, Method::AalenJohansen],
        }
    }

    fn name(self) -> &'static str {
        match self {
            MethodArg::All => "all",
            m => m.methods()[0].name(),
        }
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Cohort CSV with columns id,entry,exit0,cause0,exit1,cause1.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    s: f64,
    /// Comma-separated evaluation times.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value = "check")]
    method: MethodArg,
    /// Bootstrap resamples; intervals are reported when given.
    #[arg(long)]
    boot: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Artificially censor at this time before estimating.
    #[arg(long)]
    tau: Option<f64>,
    /// Output file; the manifest is written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Table1,
    Table2,
    Table3,
    Custom,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "table1")]
    scenario: ScenarioArg,
    /// key=value scenario file; required for `custom`, overrides a preset otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = TABLE_LANDMARK)]
    s: f64,
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failed run and the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MalformedRecord { .. }
            | Error::Csv(_)
            | Error::InvalidQuery(_)
            | Error::InvalidConfig(_)
            | Error::InvalidArgument(_) => 2,
            Error::DegenerateCohort => 4,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::runtime(e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Everything needed to reproduce one run.
#[derive(Serialize)]
struct RunManifest {
    subcommand: &'static str,
    /// Resolved argument vector; `illdeath <argv...>` reruns the command.
    argv: Vec<String>,
    seed: Option<u64>,
    /// SHA-256 of the input file, if any.
    input_digest: Option<String>,
    version: &'static str,
}

impl RunManifest {
    fn new(subcommand: &'static str, argv: Vec<String>, seed: Option<u64>, input: Option<&[u8]>) -> Self {
        Self {
            subcommand,
            argv,
            seed,
            input_digest: input.map(|bytes| hex::encode(Sha256::digest(bytes))),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `body` to `output` (or stdout) and the manifest next to it (or to stderr).
fn emit(body: &[u8], output: Option<&Path>, manifest: &RunManifest) -> CmdResult<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Failure::runtime(e.to_string()))?;
    match output {
        Some(path) => {
            fs::write(path, body)?;
            fs::write(manifest_path(path), json + "\n")?;
        }
        None => {
            io::stdout().write_all(body)?;
            eprintln!("{json}");
        }
    }
    Ok(())
}

fn read_input(path: &Path) -> CmdResult<(Vec<u8>, Vec<IllnessDeathRecord>)> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let cohort = read_cohort(bytes.as_slice())?;
    Ok((bytes, cohort))
}

fn join_times(ts: &[f64]) -> String {
    ts.iter().map(|t| format_number(*t)).collect::<Vec<_>>().join(",")
}

fn estimate_flags(est: &Estimate) -> Vec<String> {
    let mut flags = Vec::new();
    if est.support_warning() {
        flags.push("largest-censored".to_string());
    }
    if est.exceeds_one() {
        flags.push("exceeds-one".to_string());
    }
    flags
}

/// Point estimate with diagnostics flags for one method.
fn point_estimate(method: Method, cohort: &[IllnessDeathRecord], q: &TransitionQuery) -> illdeath::Result<(f64, Vec<String>)> {
    let est = match method {
        Method::Check => estimators::p01_check(cohort, q)?,
        Method::Mm => estimators::p01_mm(cohort, q)?,
        Method::MmStute => estimators::p01_mm_stute(cohort, q)?,
        Method::AalenJohansen => Estimate::new(estimators::p01_aalen_johansen(cohort, q)?),
    };
    Ok((est.value, estimate_flags(&est)))
}

fn error_flag(e: &Error) -> String {
    let kind = match e {
        Error::EmptyLandmark(_) => "empty-landmark",
        Error::EmptyRiskSet => "empty-risk-set",
        Error::ZeroDenominator => "zero-denominator",
        Error::TooManyFailures { .. } => "too-many-failures",
        _ => "error",
    };
    kind.to_string()
}

struct Row {
    method: Method,
    q: TransitionQuery,
    ci: Option<CiResult>,
    point: Option<f64>,
    flags: Vec<String>,
}

impl Row {
    fn write(&self, out: &mut Vec<u8>) -> io::Result<()> {
        let flags = self.flags.join(";");
        match (&self.ci, self.point) {
            (Some(ci), _) => {
                let mut line = Vec::new();
                ci.write_csv_row(&mut line, self.method, &self.q).map_err(io::Error::other)?;
                line.pop();
                out.extend_from_slice(&line);
                writeln!(out, ",{flags}")
            }
            (None, Some(p)) => writeln!(
                out,
                "{},{},{},{},,,,,,,,{flags}",
                self.method,
                format_number(self.q.s()),
                format_number(self.q.t()),
                format_number(p)
            ),
            (None, None) => writeln!(
                out,
                "{},{},{},,,,,,,,,{flags}",
                self.method,
                format_number(self.q.s()),
                format_number(self.q.t())
            ),
        }
    }
}

fn cmd_estimate(args: &EstimateArgs) -> CmdResult<()> {
    let queries = args
        .t
        .iter()
        .map(|&t| TransitionQuery::new(args.s, t))
        .collect::<illdeath::Result<Vec<_>>>()?;
    if let Some(b) = args.boot {
        if b < 2 {
            return Err(Failure::usage(format!("--boot must be at least 2, got {b}")));
        }
    }
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(Failure::usage(format!("--level {} outside (0, 1)", args.level)));
    }
    let (bytes, mut cohort) = read_input(&args.input)?;
    if let Some(tau) = args.tau {
        cohort = artificial_censoring(&cohort, tau)?;
    }

    let mut rows = Vec::new();
    for q in &queries {
        let start = rows.len();
        for method in args.method.methods() {
            let mut row = Row { method, q: *q, ci: None, point: None, flags: Vec::new() };
            match point_estimate(method, &cohort, q) {
                Ok((value, flags)) => {
                    row.point = Some(value);
                    row.flags = flags;
                    if let Some(n_boot) = args.boot {
                        match bootstrap_ci(&cohort, q, method, n_boot, args.level, args.seed) {
                            Ok(ci) => row.ci = Some(ci),
                            Err(e) => row.flags.push(error_flag(&e)),
                        }
                    }
                }
                Err(e) => row.flags.push(error_flag(&e)),
            }
            rows.push(row);
        }
        flag_mm_mismatch(&mut rows[start..]);
    }

    let mut body = Vec::new();
    writeln!(body, "{},flags", CiResult::CSV_HEADER)?;
    for row in &rows {
        row.write(&mut body)?;
    }

    let mut argv = vec![
        "estimate".to_string(),
        "--input".into(),
        args.input.display().to_string(),
        "--s".into(),
        format_number(args.s),
        "--t".into(),
        join_times(&args.t),
        "--method".into(),
        args.method.name().into(),
    ];
    if let Some(b) = args.boot {
        argv.extend(["--boot".into(), b.to_string(), "--level".into(), format_number(args.level)]);
        argv.extend(["--seed".into(), args.seed.to_string()]);
    }
    if let Some(tau) = args.tau {
        argv.extend(["--tau".into(), format_number(tau)]);
    }
    let manifest = RunManifest::new("estimate", argv, args.boot.map(|_| args.seed), Some(&bytes));
    emit(&body, args.output.as_deref(), &manifest)?;

    if rows.iter().all(|r| r.point.is_none()) {
        return Err(Failure { code: 3, message: "no requested time could be estimated".into() });
    }
    Ok(())
}

/// Marks the mm and mm-stute rows of one query when the two forms disagree.
fn flag_mm_mismatch(rows: &mut [Row]) {
    let value = |m: Method, rows: &[Row]| rows.iter().find(|r| r.method == m).and_then(|r| r.point);
    if let (Some(a), Some(b)) = (value(Method::Mm, rows), value(Method::MmStute, rows)) {
        if (a - b).abs() > MM_FORMS_TOLERANCE {
            for r in rows.iter_mut().filter(|r| matches!(r.method, Method::Mm | Method::MmStute)) {
                r.flags.push("mm-forms-disagree".into());
            }
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult<()> {
    let (mut cfg, methods) = match args.scenario {
        ScenarioArg::Custom => {
            if args.config.is_none() {
                return Err(Failure::usage("--scenario custom needs --config"));
            }
            (ScenarioConfig::table1(), vec![Method::Check, Method::Mm, Method::AalenJohansen])
        }
        ScenarioArg::Table1 => preset("table1").expect("built-in"),
        ScenarioArg::Table2 => preset("table2").expect("built-in"),
        ScenarioArg::Table3 => preset("table3").expect("built-in"),
    };
    let mut config_bytes = None;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        cfg = ScenarioConfig::parse(&text)?;
        config_bytes = Some(text.into_bytes());
    }
    if let Some(reps) = args.reps {
        cfg.replications = reps;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let times = args.t.clone().unwrap_or_else(|| TABLE_TIMES.to_vec());

    let table = run_monte_carlo(&cfg, &methods, &times, args.s)?;
    let mut body = Vec::new();
    table.write_csv(&mut body)?;

    let scenario = args.scenario.to_possible_value().expect("named").get_name().to_string();
    let mut argv = vec!["simulate".to_string(), "--scenario".into(), scenario];
    if let Some(path) = &args.config {
        argv.extend(["--config".into(), path.display().to_string()]);
    }
    argv.extend([
        "--reps".into(),
        cfg.replications.to_string(),
        "--n".into(),
        cfg.n.to_string(),
        "--seed".into(),
        cfg.seed.to_string(),
        "--s".into(),
        format_number(args.s),
        "--t".into(),
        join_times(&times),
    ]);
    let manifest = RunManifest::new("simulate", argv, Some(cfg.seed), config_bytes.as_deref());
    emit(&body, args.output.as_deref(), &manifest)?;
    if table.degenerate_replications > 0 {
        eprintln!("{} of {} replications degenerate and excluded", table.degenerate_replications, table.replications);
    }
    Ok(())
}

fn cmd_transform(args: &TransformArgs) -> CmdResult<()> {
    let (bytes, cohort) = read_input(&args.input)?;
    let cut = artificial_censoring(&cohort, args.tau)?;
    let mut body = Vec::new();
    write_cohort(&cut, &mut body)?;
    let argv = vec![
        "transform".to_string(),
        "--input".into(),
        args.input.display().to_string(),
        "--tau".into(),
        format_number(args.tau),
    ];
    emit(&body, args.output.as_deref(), &RunManifest::new("transform", argv, None, Some(&bytes)))
}

fn configure_threads() -> CmdResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("{THREADS_ENV}={value:?} is not a worker count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::runtime(e.to_string()))
}

fn run(cli: &Cli) -> CmdResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Transform(a) => cmd_transform(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("illdeath: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
