//! Command-line front end.
//!
//! The binary is a thin shim over [`main_with_args`]; every subcommand is
//! also callable as a library function returning a serialisable report.
//!
//! Exit codes: 0 success, 1 other failure, 2 unreadable input, 3 unparseable
//! row, 4 invalid overrides or scenario spec.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimation::{self, LagVarianceProfile, PhiGrid, DEFAULT_MAX_LAG};
use crate::evaluate::{match_changepoints, EvalReport, DEFAULT_TOLERANCE};
use crate::oracle;
use crate::simulate::{self, DriftSpec, NoiseSpec, ScenarioSpec};
use crate::solver::{self, ModelParams, ModelVariant, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest series the hidden `oracle` subcommand will enumerate.
pub const ORACLE_MAX_N: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {msg}")]
    Unreadable { path: String, msg: String },
    #[error("row {row}: {msg}")]
    Parse { row: u64, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Other(_) => 1,
            Self::Unreadable { .. } => 2,
            Self::Parse { .. } => 3,
            Self::Invalid(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Self::Invalid(e.to_string()),
            _ => Self::Other(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rwar-cpd", version, about = "Changepoint detection under random-walk drift and AR(1) noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a series and report changepoints.
    Detect(DetectArgs),
    /// Estimate model parameters only.
    Estimate(EstimateArgs),
    /// Run a simulated scenario many times and score the detections.
    Benchmark(BenchmarkArgs),
    /// Brute-force segmentation of a short series.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Text or CSV file, one observation per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Column by header name or 0-based index.
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub sigma_eta_sq: Option<f64>,
    #[arg(long)]
    pub sigma_nu_sq: Option<f64>,
    #[arg(long)]
    pub phi: Option<f64>,
}

impl ParamArgs {
    pub fn is_complete(&self) -> bool {
        self.sigma_eta_sq.is_some() && self.sigma_nu_sq.is_some() && self.phi.is_some()
    }

    fn is_empty(&self) -> bool {
        self.sigma_eta_sq.is_none() && self.sigma_nu_sq.is_none() && self.phi.is_none()
    }

    fn apply(&self, base: ModelParams) -> ModelParams {
        ModelParams {
            sigma_eta_sq: self.sigma_eta_sq.unwrap_or(base.sigma_eta_sq),
            sigma_nu_sq: self.sigma_nu_sq.unwrap_or(base.sigma_nu_sq),
            phi: self.phi.unwrap_or(base.phi),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Penalty per change; defaults to 2 log n times --penalty-scale.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub penalty_scale: f64,
    #[arg(long, default_value = "rw-ar")]
    pub model: ModelVariant,
    /// Largest lag used by the estimator.
    #[arg(long, default_value_t = DEFAULT_MAX_LAG)]
    pub lags: usize,
    /// Include the fitted signal in the output.
    #[arg(long)]
    pub emit_signal: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "rw-ar")]
    pub model: ModelVariant,
    #[arg(long, default_value_t = DEFAULT_MAX_LAG)]
    pub lags: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// Scenario spec as JSON.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub replicates: u64,
    /// Overrides the seed in the spec.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub penalty_scale: f64,
    #[arg(long, default_value = "rw-ar")]
    pub model: ModelVariant,
    #[arg(long, default_value_t = DEFAULT_MAX_LAG)]
    pub lags: usize,
    /// JSON report path; CSV tables are written next to it.
    #[arg(long, default_value = "benchmark.json")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub penalty_scale: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 4 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: &Command) -> CliResult<()> {
    match command {
        Command::Detect(args) => {
            let report = run_detect(args)?;
            write_json(args.output.as_deref(), &report)
        }
        Command::Estimate(args) => {
            let report = run_estimate(args)?;
            write_json(args.output.as_deref(), &report)
        }
        Command::Benchmark(args) => {
            let report = run_benchmark(args)?;
            write_benchmark(&args.output, &report)
        }
        Command::Oracle(args) => {
            let report = run_oracle(args)?;
            write_json(args.output.as_deref(), &report)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Other(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(output: Option<&Path>, value: &T) -> CliResult<()> {
    let text = to_json(value)?;
    match output {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------- input

fn parse_value(field: &str, row: u64) -> CliResult<f64> {
    let v: f64 = field.trim().parse().map_err(|_| CliError::Parse {
        row,
        msg: format!("cannot parse {field:?} as a number"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Parse {
            row,
            msg: format!("non-finite value {field:?}"),
        })
    }
}

/// Reads one column of numbers from text or CSV. A first row whose selected
/// field is not numeric is taken as a header. Rows are numbered from 1.
pub fn parse_series(text: &str, column: Option<&str>) -> CliResult<Vec<f64>> {
    let first_line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let delimiter = if !first_line.contains(',') && first_line.contains('\t') {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let by_name = column.filter(|c| c.parse::<usize>().is_err());
    let mut index: usize = column.and_then(|c| c.parse().ok()).unwrap_or(0);
    let mut values = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Parse {
            row: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if std::mem::take(&mut first) {
            if let Some(name) = by_name {
                index = record
                    .iter()
                    .position(|f| f == name)
                    .ok_or_else(|| CliError::Invalid(format!("no column named {name:?} in the header")))?;
                continue;
            }
            if record.get(index).is_some_and(|f| f.parse::<f64>().is_err()) {
                continue;
            }
        }
        let field = record.get(index).ok_or_else(|| CliError::Parse {
            row,
            msg: format!("missing column {index}"),
        })?;
        values.push(parse_value(field, row)?);
    }
    if values.is_empty() {
        return Err(CliError::Parse {
            row: 0,
            msg: "no observations".into(),
        });
    }
    Ok(values)
}

pub fn read_series(input: &InputArgs) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(&input.input).map_err(|e| CliError::Unreadable {
        path: input.input.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_series(&text, input.column.as_deref())
}

// ---------------------------------------------------------------- detect

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub sigma_eta_sq: f64,
    pub sigma_nu_sq: f64,
    pub phi: f64,
    pub estimated: bool,
}

impl ParamsReport {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            sigma_eta_sq: self.sigma_eta_sq,
            sigma_nu_sq: self.sigma_nu_sq,
            phi: self.phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub schema_version: u32,
    pub n: usize,
    pub params: ParamsReport,
    pub beta: f64,
    pub changepoints: Vec<usize>,
    pub cost: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub signal: Option<Vec<f64>>,
}

/// Parameters used when estimation is impossible: i.i.d. unit noise.
pub const FALLBACK_PARAMS: ModelParams = ModelParams {
    sigma_eta_sq: 0.0,
    sigma_nu_sq: 1.0,
    phi: 0.0,
};

/// `2 log n` scaled, with `n` floored at 2 so the penalty stays positive.
pub fn default_beta(n: usize, scale: f64) -> f64 {
    2.0 * (n.max(2) as f64).ln() * scale
}

fn resolve_beta(beta: Option<f64>, scale: f64, n: usize) -> CliResult<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(CliError::Invalid(format!("--penalty-scale must be positive, got {scale}")));
    }
    match beta {
        Some(b) if b > 0.0 && !b.is_nan() => Ok(b),
        Some(b) => Err(CliError::Invalid(format!("--beta must be positive, got {b}"))),
        None => Ok(default_beta(n, scale)),
    }
}

/// Estimated parameters, or the i.i.d. fallback when the series is too short
/// or has no variation. The flag reports whether estimation succeeded.
pub fn estimate_or_fallback(y: &[f64], lags: usize, variant: ModelVariant) -> CliResult<(ModelParams, bool)> {
    if lags < 2 {
        return Err(CliError::Invalid(format!("--lags must be at least 2, got {lags}")));
    }
    if y.len() <= lags {
        return Ok((FALLBACK_PARAMS, false));
    }
    match estimation::estimate(y, lags, variant) {
        Ok(fit) => Ok((fit.params, true)),
        Err(Error::DegenerateData(_)) => Ok((FALLBACK_PARAMS, false)),
        Err(e) => Err(e.into()),
    }
}

fn resolve_params(
    y: &[f64],
    overrides: &ParamArgs,
    variant: ModelVariant,
    lags: usize,
) -> CliResult<ParamsReport> {
    let (base, estimated) = if overrides.is_complete() {
        (FALLBACK_PARAMS, false)
    } else {
        estimate_or_fallback(y, lags, variant)?
    };
    let params = overrides.apply(base);
    params
        .validate()
        .map_err(|e| CliError::Invalid(format!("invalid parameters: {e}")))?;
    if !variant.admits(&params) {
        return Err(CliError::Invalid(format!(
            "parameters {params:?} are not allowed by model {variant}"
        )));
    }
    Ok(ParamsReport {
        sigma_eta_sq: params.sigma_eta_sq,
        sigma_nu_sq: params.sigma_nu_sq,
        phi: params.phi,
        estimated: estimated && !overrides.is_complete(),
    })
}

/// Segments `y`; exposed separately from file handling for reuse.
pub fn detect_series(y: &[f64], args: &DetectArgs) -> CliResult<DetectReport> {
    let beta = resolve_beta(args.beta, args.penalty_scale, y.len())?;
    let params = resolve_params(y, &args.params, args.model, args.lags)?;
    let seg = solver::solve(y, &params.params(), &SolverConfig::new(beta).with_variant(args.model))?;
    Ok(DetectReport {
        schema_version: SCHEMA_VERSION,
        n: y.len(),
        params,
        beta,
        changepoints: seg.changepoints,
        cost: seg.cost,
        signal: args.emit_signal.then_some(seg.signal),
    })
}

pub fn run_detect(args: &DetectArgs) -> CliResult<DetectReport> {
    detect_series(&read_series(&args.input)?, args)
}

// ---------------------------------------------------------------- estimate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub n: usize,
    pub lags: usize,
    pub model: ModelVariant,
    pub params: ParamsReport,
    pub residual: f64,
    pub phi_grid_step: f64,
    pub lag_variances: Vec<f64>,
    pub suggested_model: ModelVariant,
}

pub fn run_estimate(args: &EstimateArgs) -> CliResult<EstimateReport> {
    let y = read_series(&args.input)?;
    let profile = LagVarianceProfile::from_series(&y, args.lags)?;
    let fit = estimation::fit_parameters(&profile, args.model, &PhiGrid::default())?;
    Ok(EstimateReport {
        schema_version: SCHEMA_VERSION,
        n: y.len(),
        lags: args.lags,
        model: args.model,
        params: ParamsReport {
            sigma_eta_sq: fit.params.sigma_eta_sq,
            sigma_nu_sq: fit.params.sigma_nu_sq,
            phi: fit.params.phi,
            estimated: true,
        },
        residual: fit.residual,
        phi_grid_step: fit.phi_grid_step,
        lag_variances: profile.variances().to_vec(),
        suggested_model: fit.suggested_variant(),
    })
}

// ---------------------------------------------------------------- benchmark

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkMode {
    TrueParams,
    EstimatedParams,
}

impl BenchmarkMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TrueParams => "true_params",
            Self::EstimatedParams => "estimated_params",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: u64,
    pub seed: u64,
    pub mode: BenchmarkMode,
    pub params: ParamsReport,
    pub detected: Vec<usize>,
    pub score: EvalReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

impl Spread {
    /// Quartiles by linear interpolation between order statistics.
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            if v.is_empty() {
                return f64::NAN;
            }
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
        Self { median, q1, q3, iqr: q3 - q1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: BenchmarkMode,
    pub replicates: usize,
    pub f1: Spread,
    pub precision: Spread,
    pub recall: Spread,
    pub zero_detection_fraction: f64,
    pub mean_detections: f64,
}

impl ModeSummary {
    fn of(mode: BenchmarkMode, results: &[&ReplicateResult]) -> Self {
        let pick = |f: fn(&EvalReport) -> f64| Spread::of(&results.iter().map(|r| f(&r.score)).collect::<Vec<_>>());
        let n = results.len().max(1) as f64;
        Self {
            mode,
            replicates: results.len(),
            f1: pick(|s| s.f1),
            precision: pick(|s| s.precision),
            recall: pick(|s| s.recall),
            zero_detection_fraction: results.iter().filter(|r| r.detected.is_empty()).count() as f64 / n,
            mean_detections: results.iter().map(|r| r.detected.len() as f64).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub spec: ScenarioSpec,
    pub replicates: u64,
    pub beta: f64,
    pub model: ModelVariant,
    pub tolerance: usize,
    pub summary: Vec<ModeSummary>,
    pub results: Vec<ReplicateResult>,
}

/// Model parameters implied by a scenario, when the scenario lies inside the
/// model family.
pub fn true_params(spec: &ScenarioSpec) -> Option<ModelParams> {
    let eta_sq = match spec.drift {
        DriftSpec::None => 0.0,
        DriftSpec::RandomWalk { sigma_eta } => sigma_eta * sigma_eta,
        DriftSpec::Sinusoidal { .. } => return None,
    };
    let (nu, phi) = match spec.noise {
        NoiseSpec::Ar1 { phi, sigma_nu } => (sigma_nu, phi),
        NoiseSpec::Iid { sigma } => (sigma, 0.0),
        NoiseSpec::Ar2 { .. } => return None,
    };
    let params = ModelParams::new(eta_sq, nu * nu, phi).ok()?;
    Some(params)
}

fn benchmark_replicate(
    spec: &ScenarioSpec,
    index: u64,
    args: &BenchmarkArgs,
    beta: f64,
    truth: Option<ModelParams>,
) -> CliResult<Vec<ReplicateResult>> {
    let rep = spec.replicate(index);
    let series = simulate::generate(&rep)?;
    let mut out = Vec::with_capacity(2);
    let (est, estimated) = estimate_or_fallback(&series.y, args.lags, args.model)?;
    let modes = truth
        .map(|p| (BenchmarkMode::TrueParams, args.model.restrict(p), false))
        .into_iter()
        .chain(std::iter::once((BenchmarkMode::EstimatedParams, est, estimated)));
    for (mode, params, estimated) in modes {
        let seg = solver::solve(&series.y, &params, &SolverConfig::new(beta).with_variant(args.model))?;
        let score = match_changepoints(&seg.changepoints, &series.changepoints_true, DEFAULT_TOLERANCE)?;
        out.push(ReplicateResult {
            replicate: index,
            seed: rep.seed,
            mode,
            params: ParamsReport {
                sigma_eta_sq: params.sigma_eta_sq,
                sigma_nu_sq: params.sigma_nu_sq,
                phi: params.phi,
                estimated,
            },
            detected: seg.changepoints,
            score,
        });
    }
    Ok(out)
}

/// Runs a scenario benchmark for the spec at `spec`.
pub fn benchmark_spec(spec: &ScenarioSpec, args: &BenchmarkArgs) -> CliResult<BenchmarkReport> {
    let spec = ScenarioSpec {
        seed: args.seed.unwrap_or(spec.seed),
        ..*spec
    };
    spec.validate().map_err(|e| CliError::Invalid(format!("invalid scenario: {e}")))?;
    if args.lags < 2 {
        return Err(CliError::Invalid(format!("--lags must be at least 2, got {}", args.lags)));
    }
    let beta = resolve_beta(args.beta, args.penalty_scale, spec.n)?;
    let truth = true_params(&spec);
    let per_rep: Vec<Vec<ReplicateResult>> = (0..args.replicates)
        .into_par_iter()
        .map(|i| benchmark_replicate(&spec, i, args, beta, truth))
        .collect::<CliResult<_>>()?;
    let results: Vec<ReplicateResult> = per_rep.into_iter().flatten().collect();
    let summary = [BenchmarkMode::TrueParams, BenchmarkMode::EstimatedParams]
        .into_iter()
        .filter_map(|mode| {
            let subset: Vec<&ReplicateResult> = results.iter().filter(|r| r.mode == mode).collect();
            (!subset.is_empty()).then(|| ModeSummary::of(mode, &subset))
        })
        .collect();
    Ok(BenchmarkReport {
        schema_version: SCHEMA_VERSION,
        spec,
        replicates: args.replicates,
        beta,
        model: args.model,
        tolerance: DEFAULT_TOLERANCE,
        summary,
        results,
    })
}

pub fn run_benchmark(args: &BenchmarkArgs) -> CliResult<BenchmarkReport> {
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::Unreadable {
        path: args.input.display().to_string(),
        msg: e.to_string(),
    })?;
    let spec: ScenarioSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("invalid scenario spec: {e}")))?;
    benchmark_spec(&spec, args)
}

/// Per-replicate rows.
pub fn results_csv(report: &BenchmarkReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Other(e.to_string());
    w.write_record([
        "replicate", "seed", "mode", "sigma_eta_sq", "sigma_nu_sq", "phi", "detected", "true_positives",
        "false_positives", "false_negatives", "precision", "recall", "f1",
    ])
    .map_err(to_err)?;
    for r in &report.results {
        w.write_record([
            r.replicate.to_string(),
            r.seed.to_string(),
            r.mode.as_str().to_string(),
            r.params.sigma_eta_sq.to_string(),
            r.params.sigma_nu_sq.to_string(),
            r.params.phi.to_string(),
            r.detected.len().to_string(),
            r.score.true_positives.to_string(),
            r.score.false_positives.to_string(),
            r.score.false_negatives.to_string(),
            r.score.precision.to_string(),
            r.score.recall.to_string(),
            r.score.f1.to_string(),
        ])
        .map_err(to_err)?;
    }
    csv_string(w)
}

/// One row per mode and metric.
pub fn summary_csv(report: &BenchmarkReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Other(e.to_string());
    w.write_record(["mode", "metric", "median", "q1", "q3", "iqr"]).map_err(to_err)?;
    for s in &report.summary {
        for (name, spread) in [("f1", s.f1), ("precision", s.precision), ("recall", s.recall)] {
            w.write_record([
                s.mode.as_str().to_string(),
                name.to_string(),
                spread.median.to_string(),
                spread.q1.to_string(),
                spread.q3.to_string(),
                spread.iqr.to_string(),
            ])
            .map_err(to_err)?;
        }
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
}

/// `<stem>.csv` and `<stem>_summary.csv` beside the JSON path.
pub fn csv_paths(json_path: &Path) -> (PathBuf, PathBuf) {
    let stem = json_path.file_stem().and_then(|s| s.to_str()).unwrap_or("benchmark");
    (
        json_path.with_file_name(format!("{stem}.csv")),
        json_path.with_file_name(format!("{stem}_summary.csv")),
    )
}

fn write_benchmark(path: &Path, report: &BenchmarkReport) -> CliResult<()> {
    let (results, summary) = csv_paths(path);
    write_file(path, &to_json(report)?)?;
    write_file(&results, &results_csv(report)?)?;
    write_file(&summary, &summary_csv(report)?)
}

// ---------------------------------------------------------------- oracle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub n: usize,
    pub params: ParamsReport,
    pub beta: f64,
    pub exhaustive_changepoints: Vec<usize>,
    pub exhaustive_cost: f64,
    pub solver_changepoints: Vec<usize>,
    pub solver_cost: f64,
}

pub fn run_oracle(args: &OracleArgs) -> CliResult<OracleReport> {
    let y = read_series(&args.input)?;
    if y.len() > ORACLE_MAX_N {
        return Err(CliError::Invalid(format!(
            "oracle enumerates all segmentations; n = {} exceeds {ORACLE_MAX_N}",
            y.len()
        )));
    }
    if !args.params.is_complete() && !args.params.is_empty() {
        return Err(CliError::Invalid("oracle needs all three parameters or none".into()));
    }
    let beta = resolve_beta(args.beta, args.penalty_scale, y.len())?;
    let params = resolve_params(&y, &args.params, ModelVariant::RwAr, DEFAULT_MAX_LAG)?;
    let best = oracle::exhaustive_segment(&y, &params.params(), beta, y.len())?;
    let seg = solver::solve(&y, &params.params(), &SolverConfig::new(beta))?;
    Ok(OracleReport {
        schema_version: SCHEMA_VERSION,
        n: y.len(),
        params,
        beta,
        exhaustive_changepoints: best.changepoints,
        exhaustive_cost: best.cost,
        solver_changepoints: seg.changepoints,
        solver_cost: seg.cost,
    })
}
