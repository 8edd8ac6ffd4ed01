//! Command implementations behind the `whataboutism` binary: configuration
//! loading, report writing, and parameter sweeps.
//!
//! Exit codes: 0 success, 2 validation error, 3 statistical-check failure,
//! 4 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    enumerate_pspe, level_records, solve_benchmark, stable_abstain, stable_pspe,
    whataboutism_frequency, whataboutism_stats, AnalyticError, BenchmarkSolution,
    EquilibriumProfile, LevelRecord, WhataboutismStats,
};
use crate::dynamics::{check_stability, iterate, StabilityReport, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::model::{derive, Camp, DerivedQuantities, ModelError, ModelParams, StateId};
use crate::simulate::{
    estimate_alpha, estimate_marginal_payoff, estimate_rebuttal_failure,
    estimate_whataboutism_frequency, run_episodes, write_episodes_csv, EstimateReport, SimConfig,
    SimError,
};

/// `|z|` above this fails `simulate`.
pub const Z_FAIL: f64 = 4.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file not found: {0}")]
    ConfigNotFound(PathBuf),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("--seed is required for reproducible simulation")]
    SeedMissing,
    #[error("statistical check failed: {0}")]
    StatisticalCheck(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::SeedMissing => 2,
            CliError::StatisticalCheck(_) => 3,
            CliError::ConfigNotFound(_) | CliError::Io { .. } => 4,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::TooFewEpisodes { .. } => CliError::Validation(e.to_string()),
            other => CliError::StatisticalCheck(other.to_string()),
        }
    }
}

/// Reals in CSV output carry 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "whataboutism",
    version,
    about = "Equilibria and Monte Carlo checks for the whataboutism game"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Benchmark solution, stable PSPE and whataboutism statistics.
    Solve(CommonArgs),
    /// Every PSPE with its stability verdict.
    Enumerate(CommonArgs),
    /// Stability reports and self-map iteration traces.
    Stability(CommonArgs),
    /// Monte Carlo verification of the closed forms.
    Simulate(SimulateArgs),
    /// Comparative statics over a parameter grid (config is a sweep file).
    Sweep(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub episodes: u64,
    /// Profile JSON (a profile or a `solve` report); defaults to the stable PSPE.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Restrict to one state, written `camp,m`.
    #[arg(long)]
    pub state: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write per-episode CSV for the alpha estimator's states.
    #[arg(long)]
    pub dump_episodes: bool,
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(&a.config, &a.out, a.format).map(|r| {
            println!("solved n={} (M={})", r.params.n, r.derived.big_m);
        }),
        Command::Enumerate(a) => cmd_enumerate(&a.config, &a.out, a.format).map(|r| {
            println!(
                "{} PSPE, stable mstar={}",
                r.profiles.len(),
                r.profiles
                    .iter()
                    .find(|p| p.stable)
                    .map_or(0, |p| p.profile.mstar)
            );
        }),
        Command::Stability(a) => cmd_stability(&a.config, &a.out, a.format).map(|r| {
            println!("{} profiles checked", r.reports.len());
        }),
        Command::Simulate(a) => {
            let report = cmd_simulate(a)?;
            for e in &report.estimates {
                println!(
                    "{:<24} m={} estimate={:.6} analytic={:.6} z={}",
                    e.quantity,
                    e.m,
                    e.estimate,
                    e.analytic,
                    e.z_score.map_or("undefined".into(), |z| format!("{z:.3}"))
                );
            }
            if report.passed {
                Ok(())
            } else {
                Err(CliError::StatisticalCheck(format!(
                    "max |z| = {:?} exceeds {}",
                    report.max_abs_z, Z_FAIL
                )))
            }
        }
        Command::Sweep(a) => {
            let report = cmd_sweep(&a.config, &a.out, a.format)?;
            println!(
                "{} rows, {} skipped, {} violations",
                report.rows,
                report.skipped.len(),
                report.violations.len()
            );
            if report.violations.is_empty() {
                Ok(())
            } else {
                Err(CliError::StatisticalCheck(format!(
                    "{} monotonicity violations",
                    report.violations.len()
                )))
            }
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::ConfigNotFound(path.to_path_buf()),
        _ => CliError::io(path, e),
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_params(path: &Path) -> Result<ModelParams, CliError> {
    let raw: ModelParams = read_json(path)?;
    Ok(raw.validate()?)
}

/// Loads a profile file: either a bare profile or a `solve` report, whose
/// `stable_profile` is used.
pub fn load_profile(path: &Path, params: &ModelParams) -> Result<EquilibriumProfile, CliError> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(inner) = value.get_mut("stable_profile") {
        value = inner.take();
    }
    let profile: EquilibriumProfile = serde_json::from_value(value)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    profile.check_against(params)?;
    Ok(profile)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::io(path, io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io(path, io::Error::other(e.to_string())))?;
    write_file(path, &bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub params: ModelParams,
    pub derived: DerivedQuantities,
    pub benchmark: BenchmarkSolution,
    pub stable_profile: EquilibriumProfile,
    pub whataboutism: WhataboutismStats,
    pub levels: Vec<LevelRecord>,
}

pub fn solve(params: &ModelParams) -> SolveReport {
    let stable = stable_pspe(params);
    SolveReport {
        params: params.clone(),
        derived: derive(params),
        benchmark: solve_benchmark(params),
        whataboutism: whataboutism_stats(params, &stable),
        stable_profile: stable,
        levels: level_records(params),
    }
}

pub const LEVEL_CSV_HEADER: [&str; 9] = [
    "m",
    "c",
    "theta",
    "x_benchmark",
    "x_stable",
    "cutoff_stable",
    "alpha",
    "mu",
    "whataboutism_frequency",
];

pub fn cmd_solve(config: &Path, out: &Path, format: Format) -> Result<SolveReport, CliError> {
    let params = load_params(config)?;
    let report = solve(&params);
    if format.json() {
        write_json(&out.join("solve.json"), &report)?;
    }
    if format.csv() {
        let rows: Vec<Vec<String>> = report
            .levels
            .iter()
            .map(|r| {
                let mut row = vec![r.m.to_string()];
                row.extend(
                    [
                        r.c,
                        r.theta,
                        r.x_benchmark,
                        r.x_stable,
                        r.cutoff_stable,
                        r.alpha,
                        r.mu,
                        r.whataboutism_frequency,
                    ]
                    .map(fmt_real),
                );
                row
            })
            .collect();
        write_csv(&out.join("solve.csv"), &LEVEL_CSV_HEADER, &rows)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileVerdict {
    pub profile: EquilibriumProfile,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub params: ModelParams,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub profiles: Vec<ProfileVerdict>,
}

pub fn cmd_enumerate(
    config: &Path,
    out: &Path,
    format: Format,
) -> Result<EnumerateReport, CliError> {
    let params = load_params(config)?;
    let family = enumerate_pspe(&params);
    let profiles: Vec<ProfileVerdict> = family
        .profiles
        .into_iter()
        .map(|profile| ProfileVerdict {
            stable: check_stability(&params, &profile).stable,
            profile,
        })
        .collect();
    let report = EnumerateReport {
        big_m: derive(&params).big_m,
        params,
        profiles,
    };
    if format.json() {
        write_json(&out.join("enumerate.json"), &report)?;
        for v in &report.profiles {
            write_json(
                &out.join(format!("profile_mstar_{}.json", v.profile.mstar)),
                &v.profile,
            )?;
        }
    }
    if format.csv() {
        let rows: Vec<Vec<String>> = report
            .profiles
            .iter()
            .flat_map(|v| {
                (1..=report.params.n).map(move |m| {
                    vec![
                        v.profile.mstar.to_string(),
                        m.to_string(),
                        fmt_real(v.profile.cutoff_at(m)),
                        fmt_real(v.profile.abstain_at(m)),
                        v.stable.to_string(),
                    ]
                })
            })
            .collect();
        write_csv(
            &out.join("enumerate.csv"),
            &["mstar", "m", "cutoff", "abstain", "stable"],
            &rows,
        )?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub m: usize,
    pub x0: f64,
    pub steps: usize,
    pub converged: bool,
    pub limit: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityFileReport {
    pub params: ModelParams,
    pub reports: Vec<StabilityReport>,
    pub traces: Vec<TraceSummary>,
}

/// Start of the iteration traces written by `stability`.
pub const TRACE_START: f64 = 0.5;

pub fn cmd_stability(
    config: &Path,
    out: &Path,
    format: Format,
) -> Result<StabilityFileReport, CliError> {
    let params = load_params(config)?;
    let reports = enumerate_pspe(&params)
        .profiles
        .iter()
        .map(|p| check_stability(&params, p))
        .collect();
    let traces: Vec<_> = (1..=params.n)
        .map(|m| {
            (
                m,
                iterate(&params, m, TRACE_START, DEFAULT_TOL, DEFAULT_MAX_ITER),
            )
        })
        .collect();
    let report = StabilityFileReport {
        reports,
        traces: traces
            .iter()
            .map(|(m, t)| TraceSummary {
                m: *m,
                x0: TRACE_START,
                steps: t.iterates.len() - 1,
                converged: t.converged,
                limit: t.limit,
                residual: t.residual,
            })
            .collect(),
        params,
    };
    if format.json() {
        write_json(&out.join("stability.json"), &report)?;
    }
    if format.csv() {
        for (m, t) in &traces {
            let path = out.join(format!("trace_m{m}.csv"));
            let mut buf = Vec::new();
            t.write_csv(&mut buf)
                .map_err(|e| CliError::io(&path, io::Error::other(e)))?;
            write_file(&path, &buf)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub seed: u64,
    pub n_episodes: u64,
    pub mstar: usize,
    pub is_pspe: bool,
    pub estimates: Vec<EstimateReport>,
    pub max_abs_z: Option<f64>,
    pub passed: bool,
}

fn parse_state(s: &str, params: &ModelParams) -> Result<StateId, CliError> {
    let bad = || CliError::Validation(format!("--state expects `camp,m`, got `{s}`"));
    let (camp, m) = s.split_once(',').ok_or_else(bad)?;
    let camp: u8 = camp.trim().parse().map_err(|_| bad())?;
    let camp = Camp::try_from(camp).map_err(CliError::Validation)?;
    let m: usize = m.trim().parse().map_err(|_| bad())?;
    if !(1..=params.n).contains(&m) {
        return Err(CliError::Validation(format!(
            "--state level {m} outside 1..={}",
            params.n
        )));
    }
    Ok(StateId::new(camp, m))
}

/// Runs every estimator on the chosen profile and states. Does not fail on
/// large z-scores; check `passed`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateReport, CliError> {
    let seed = args.seed.ok_or(CliError::SeedMissing)?;
    let params = load_params(&args.common.config)?;
    let mut cfg = SimConfig::new(args.episodes, seed)?;
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(CliError::Validation("--workers must be positive".into()));
        }
        cfg = cfg.with_workers(w);
    }
    let profile = match &args.profile {
        Some(path) => load_profile(path, &params)?,
        None => stable_pspe(&params),
    };
    let states: Vec<StateId> = match &args.state {
        Some(s) => vec![parse_state(s, &params)?],
        None => params.states().collect(),
    };
    let mut levels: Vec<usize> = states.iter().map(|s| s.m).collect();
    levels.sort_unstable();
    levels.dedup();

    let mut estimates = Vec::new();
    for &s in &states {
        estimates.push(estimate_alpha(&params, &profile, s, &cfg)?);
        estimates.push(estimate_rebuttal_failure(&params, &profile, s, &cfg)?);
        if s.m >= profile.mstar {
            estimates.push(estimate_marginal_payoff(&params, &profile, s, &cfg)?);
        }
    }
    for &m in &levels {
        estimates.push(estimate_whataboutism_frequency(&params, &profile, m, &cfg)?);
    }
    let max_abs_z = estimates
        .iter()
        .map(|e| e.z_score.map(f64::abs))
        .try_fold(0.0_f64, |acc, z| z.map(|z| acc.max(z)));
    let passed = estimates.iter().all(|e| e.passes(Z_FAIL));
    let report = SimulateReport {
        seed,
        n_episodes: cfg.n_episodes,
        mstar: profile.mstar,
        is_pspe: profile.is_pspe,
        estimates,
        max_abs_z,
        passed,
    };

    let out = &args.common.out;
    if args.common.format.json() {
        write_json(&out.join("simulate.json"), &report)?;
    }
    if args.common.format.csv() {
        let rows: Vec<Vec<String>> = report
            .estimates
            .iter()
            .map(|e| {
                vec![
                    e.quantity.clone(),
                    e.state.map_or(String::new(), |s| s.camp.to_string()),
                    e.m.to_string(),
                    e.n_episodes.to_string(),
                    fmt_real(e.estimate),
                    fmt_real(e.std_error),
                    fmt_real(e.analytic),
                    e.z_score.map_or(String::new(), fmt_real),
                ]
            })
            .collect();
        write_csv(
            &out.join("simulate.csv"),
            &[
                "quantity",
                "camp",
                "m",
                "n_episodes",
                "estimate",
                "std_error",
                "analytic",
                "z_score",
            ],
            &rows,
        )?;
    }
    if args.dump_episodes {
        for &s in &states {
            let episodes = run_episodes(&params, &profile, s, &cfg)?;
            let path = out.join(format!("episodes_c{}_m{}.csv", s.camp, s.m));
            let mut buf = Vec::new();
            write_episodes_csv(&episodes, &mut buf)
                .map_err(|e| CliError::io(&path, io::Error::other(e)))?;
            write_file(&path, &buf)?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Lambda,
    KPolarization,
    GScalar,
    BScalar,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::Lambda => "lambda",
            SweepAxis::KPolarization => "k_polarization",
            SweepAxis::GScalar => "g_scalar",
            SweepAxis::BScalar => "b_scalar",
        }
    }

    /// Parameters at one grid value. `g_scalar` and `b_scalar` scale only
    /// `g` or only `b`; `k_polarization` scales both.
    pub fn apply(self, base: &ModelParams, value: f64) -> Result<ModelParams, ModelError> {
        let mut p = base.clone();
        match self {
            SweepAxis::Lambda => {
                p.lambda = value;
                p.cbar = None;
            }
            SweepAxis::KPolarization => return base.polarized(value),
            SweepAxis::GScalar => p.g.iter_mut().for_each(|g| *g *= value),
            SweepAxis::BScalar => {
                p.b.iter_mut().for_each(|b| *b *= value);
                p.cbar = None;
            }
        }
        p.validate()
    }

    /// Expected direction of the stable abstention fraction as the axis
    /// value increases; whataboutism frequency moves the opposite way.
    pub fn abstain_direction(self) -> f64 {
        match self {
            SweepAxis::Lambda | SweepAxis::BScalar => 1.0,
            SweepAxis::KPolarization | SweepAxis::GScalar => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: ModelParams,
    /// Quantities to emit; empty means all.
    #[serde(default)]
    pub outputs: Vec<String>,
}

pub const SWEEP_QUANTITIES: [&str; 6] = [
    "abstain",
    "cutoff",
    "whataboutism_frequency",
    "theta",
    "alpha",
    "mu",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub m: usize,
    pub quantity: &'static str,
    pub benchmark: Option<f64>,
    pub stable: f64,
}

impl SweepRow {
    /// `stable / benchmark`; for `abstain` this is the whataboutism
    /// discount `theta` (or 0 under breakdown).
    pub fn multiplier(&self) -> Option<f64> {
        self.benchmark
            .filter(|b| *b != 0.0)
            .map(|b| self.stable / b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub axis_value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub m: usize,
    pub quantity: String,
    pub from_value: f64,
    pub to_value: f64,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedPoint>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub axis: SweepAxis,
    pub rows: usize,
    pub skipped: Vec<SkippedPoint>,
    pub violations: Vec<Violation>,
}

fn point_rows(params: &ModelParams, value: f64) -> Vec<SweepRow> {
    let bench = solve_benchmark(params);
    let records = level_records(params);
    records
        .iter()
        .flat_map(|r| {
            let m = r.m;
            let row = |quantity, benchmark, stable| SweepRow {
                axis_value: value,
                m,
                quantity,
                benchmark,
                stable,
            };
            [
                row("abstain", Some(r.x_benchmark), r.x_stable),
                row("cutoff", Some(bench.cutoff[m - 1]), r.cutoff_stable),
                row("whataboutism_frequency", None, r.whataboutism_frequency),
                row("theta", None, r.theta),
                row("alpha", None, r.alpha),
                row("mu", None, r.mu),
            ]
        })
        .collect()
}

/// Evaluates the sweep and checks the comparative-statics directions
/// between consecutive valid grid values. A move against the expected
/// direction is a violation, and so is a flat step at a level where
/// `theta > 0` at both points.
pub fn run_sweep(spec: &SweepSpec) -> SweepOutcome {
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);
    let points: Vec<(f64, Result<ModelParams, ModelError>)> = values
        .par_iter()
        .map(|&v| (v, spec.axis.apply(&spec.base, v)))
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut valid: Vec<(f64, ModelParams)> = Vec::new();
    for (v, p) in points {
        match p {
            Ok(p) => valid.push((v, p)),
            Err(e) => skipped.push(SkippedPoint {
                axis_value: v,
                reason: e.to_string(),
            }),
        }
    }
    let per_point: Vec<Vec<SweepRow>> = valid.par_iter().map(|(v, p)| point_rows(p, *v)).collect();
    for r in per_point.iter().flatten() {
        if spec.outputs.is_empty() || spec.outputs.iter().any(|q| q == r.quantity) {
            rows.push(r.clone());
        }
    }
    rows.sort_by(|a, b| a.axis_value.total_cmp(&b.axis_value).then(a.m.cmp(&b.m)));

    let mut violations = Vec::new();
    let dir = spec.axis.abstain_direction();
    for w in valid.windows(2) {
        let ((v0, p0), (v1, p1)) = (&w[0], &w[1]);
        for m in 1..=spec.base.n {
            let interior = p0.theta(m) > 0.0 && p1.theta(m) > 0.0;
            let checks = [
                ("abstain", dir, stable_abstain(p0, m), stable_abstain(p1, m)),
                (
                    "whataboutism_frequency",
                    -dir,
                    whataboutism_frequency(p0, m),
                    whataboutism_frequency(p1, m),
                ),
            ];
            for (quantity, direction, before, after) in checks {
                let change = (after - before) * direction;
                if change < 0.0 || (interior && change == 0.0) {
                    violations.push(Violation {
                        m,
                        quantity: quantity.into(),
                        from_value: *v0,
                        to_value: *v1,
                        before,
                        after,
                    });
                }
            }
        }
    }
    SweepOutcome {
        axis: spec.axis,
        rows,
        skipped,
        violations,
    }
}

pub fn cmd_sweep(config: &Path, out: &Path, format: Format) -> Result<SweepSummary, CliError> {
    let spec: SweepSpec = read_json(config)?;
    let base = spec.base.clone().validate()?;
    if spec.values.is_empty() {
        return Err(CliError::Validation("sweep `values` is empty".into()));
    }
    if let Some(q) = spec
        .outputs
        .iter()
        .find(|q| !SWEEP_QUANTITIES.contains(&q.as_str()))
    {
        return Err(CliError::Validation(format!("unknown sweep output `{q}`")));
    }
    let outcome = run_sweep(&SweepSpec { base, ..spec });
    let summary = SweepSummary {
        axis: outcome.axis,
        rows: outcome.rows.len(),
        skipped: outcome.skipped.clone(),
        violations: outcome.violations.clone(),
    };
    if format.csv() {
        let axis = outcome.axis.name();
        let rows: Vec<Vec<String>> = outcome
            .rows
            .iter()
            .map(|r| {
                vec![
                    axis.to_string(),
                    fmt_real(r.axis_value),
                    r.m.to_string(),
                    r.quantity.to_string(),
                    r.benchmark.map_or(String::new(), fmt_real),
                    fmt_real(r.stable),
                    r.multiplier().map_or(String::new(), fmt_real),
                ]
            })
            .collect();
        write_csv(
            &out.join("sweep.csv"),
            &[
                "axis",
                "axis_value",
                "m",
                "quantity",
                "benchmark",
                "stable",
                "multiplier",
            ],
            &rows,
        )?;
    }
    if format.json() {
        write_json(&out.join("sweep.json"), &summary)?;
    }
    Ok(summary)
}
