//! Command-line front end: JSON run configuration, dispatch and artifacts.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::assembly::assemble_membrane;
use crate::asymptotics::{
    sweep_eigen_d, sweep_lambda1, sweep_logistic_d, sweep_theta_over_lambda, trace_h, AsymptoticsError,
    Lambda1Options, HCURVE_COLUMNS, SWEEP_COLUMNS,
};
use crate::checks::{run_suite, SUITES};
use crate::eigen::{principal_pair_with, EigenError, EigenOptions};
use crate::expr::Expr;
use crate::geometry::{build_geometry, Geometry, GeometrySpec, Side};
use crate::logistic::{
    approximate_large_solution, solve_logistic_membrane_with, LargeSolutionOptions, LogisticError,
    LogisticOptions, LogisticStatus, MembraneLogistic,
};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const SOLVER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Logistic(#[from] LogisticError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing output: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            _ => exit::SOLVER,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Numerical tolerances; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub eigen_rayleigh: f64,
    pub eigen_residual: f64,
    pub eigen_max_iterations: usize,
    pub step_tol: f64,
    pub monotone_sweeps: usize,
    pub max_iterations: usize,
    pub newton: bool,
    /// Bisection tolerance on the curve `H`.
    pub h_tol: f64,
    /// Blow-up fit window in multiples of the mesh width.
    pub fit_window: (f64, f64),
    pub max_fit_residual: f64,
    /// Distance from the membrane defining the interior compact.
    pub interior: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let e = EigenOptions::<f64>::for_precision();
        let l = LogisticOptions::<f64>::default();
        let large = LargeSolutionOptions::<f64>::default();
        Tolerances {
            eigen_rayleigh: e.rayleigh_tol,
            eigen_residual: e.residual_tol,
            eigen_max_iterations: e.max_iterations,
            step_tol: l.step_tol,
            monotone_sweeps: l.monotone_sweeps,
            max_iterations: l.max_iterations,
            newton: l.newton,
            h_tol: 1e-12,
            fit_window: large.window,
            max_fit_residual: large.max_fit_residual,
            interior: large.interior,
        }
    }
}

impl Tolerances {
    pub fn eigen(&self) -> EigenOptions<f64> {
        EigenOptions {
            rayleigh_tol: self.eigen_rayleigh,
            residual_tol: self.eigen_residual,
            max_iterations: self.eigen_max_iterations,
            ..EigenOptions::for_precision()
        }
    }

    pub fn logistic(&self) -> LogisticOptions<f64> {
        LogisticOptions {
            step_tol: self.step_tol,
            monotone_sweeps: self.monotone_sweeps,
            max_iterations: self.max_iterations,
            newton: self.newton,
            eigen: self.eigen(),
            ..LogisticOptions::default()
        }
    }

    pub fn large(&self) -> LargeSolutionOptions<f64> {
        LargeSolutionOptions {
            window: self.fit_window,
            interior: self.interior,
            max_fit_residual: self.max_fit_residual,
            logistic: self.logistic(),
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("eigen_rayleigh", self.eigen_rayleigh),
            ("eigen_residual", self.eigen_residual),
            ("step_tol", self.step_tol),
            ("h_tol", self.h_tol),
            ("max_fit_residual", self.max_fit_residual),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("tolerances.{name} must be positive")));
            }
        }
        if !(self.interior >= 0.0) {
            return Err(config_err("tolerances.interior must be nonnegative"));
        }
        let (lo, hi) = self.fit_window;
        if !(lo > 0.0 && hi > lo) {
            return Err(config_err("tolerances.fit_window must satisfy 0 < lo < hi"));
        }
        if self.monotone_sweeps == 0 || self.max_iterations == 0 || self.eigen_max_iterations == 0 {
            return Err(config_err("iteration limits must be positive"));
        }
        Ok(())
    }
}

/// One JSON document describing a run. Keys not needed by the chosen
/// subcommand are allowed but unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub d: Option<f64>,
    pub d_list: Option<Vec<f64>>,
    pub c1: Option<Expr>,
    pub c2: Option<Expr>,
    pub beta1: Option<Expr>,
    pub beta2: Option<Expr>,
    pub alpha1: Option<Expr>,
    pub alpha2: Option<Expr>,
    /// Common growth rate `λ` for the equal-rates sweep.
    pub lambda_list: Option<Vec<f64>>,
    pub lambda1_list: Option<Vec<f64>>,
    pub lambda2: Option<f64>,
    pub lambda2_list: Option<Vec<f64>>,
    pub m_list: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn need<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| config_err(format!("missing key `{key}`")))
}

fn positive(value: &Option<f64>, key: &str) -> Result<f64, CliError> {
    let v = *need(value, key)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(format!("`{key}` must be positive and finite")))
    }
}

fn list<'a>(value: &'a Option<Vec<f64>>, key: &str) -> Result<&'a [f64], CliError> {
    let v = need(value, key)?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(format!("`{key}` must be a nonempty list of finite numbers")));
    }
    Ok(v)
}

fn positive_list<'a>(value: &'a Option<Vec<f64>>, key: &str) -> Result<&'a [f64], CliError> {
    let v = list(value, key)?;
    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(config_err(format!("`{key}` entries must be positive")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }

    fn geometry(&self) -> Result<Geometry<f64>, CliError> {
        build_geometry(&self.geometry).map_err(|e| config_err(e.to_string()))
    }

    fn gammas(&self) -> Result<(f64, f64), CliError> {
        Ok((positive(&self.gamma1, "gamma1")?, positive(&self.gamma2, "gamma2")?))
    }

    fn logistic_problem(&self, g: &Geometry<f64>, d: f64) -> Result<MembraneLogistic<f64>, CliError> {
        let (gamma1, gamma2) = self.gammas()?;
        let p = MembraneLogistic {
            d,
            beta1: need(&self.beta1, "beta1")?.sample(g, Side::One),
            beta2: need(&self.beta2, "beta2")?.sample(g, Side::Two),
            alpha1: need(&self.alpha1, "alpha1")?.sample(g, Side::One),
            alpha2: need(&self.alpha2, "alpha2")?.sample(g, Side::Two),
            gamma1,
            gamma2,
        };
        if !(p.alpha1.lower() > 0.0 && p.alpha2.lower() > 0.0) {
            return Err(config_err("alpha1 and alpha2 must be positive at every node"));
        }
        Ok(p)
    }
}

#[derive(Debug, Parser)]
#[command(name = "membrana", version, about = "Membrane logistic problems: eigenvalues, steady states, limits and checks")]
pub struct Cli {
    /// Print the CSV output schema as JSON and exit.
    #[arg(long)]
    pub schema: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, clap::Args)]
pub struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config's `output`, default `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal eigenvalue and eigenfunction of the membrane problem.
    Eig(ConfigArgs),
    /// Positive steady state of the membrane logistic problem.
    Logistic(ConfigArgs),
    /// Eigenvalue and/or logistic sweep over the diffusion rate.
    SweepD(ConfigArgs),
    /// Equal-rates sweep over λ and/or sweep over λ1 at fixed λ2.
    SweepLambda(ConfigArgs),
    /// Trace the existence curve λ1 = H(λ2).
    CurveH(ConfigArgs),
    /// Approximate the side-2 large solution by Robin data m → ∞.
    Large(ConfigArgs),
    /// Run verification suites.
    Check {
        /// One of: bounds, mms, picone, uniqueness, all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write `checks.json` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Documented CSV outputs: file name (or pattern) and its columns.
pub fn schema() -> Value {
    let field = ["coordinate", "side", "value"];
    json!({
        "eigenfunction.csv": field,
        "solution.csv": field,
        "sweep_eigen_d.csv": SWEEP_COLUMNS,
        "sweep_logistic_d.csv": SWEEP_COLUMNS,
        "sweep_theta_over_lambda.csv": SWEEP_COLUMNS,
        "sweep_lambda1_growth.csv": SWEEP_COLUMNS,
        "sweep_lambda1_large.csv": SWEEP_COLUMNS,
        "sweep_lambda1_decay.csv": SWEEP_COLUMNS,
        "sweep_lambda1_w2.csv": SWEEP_COLUMNS,
        "hcurve.csv": HCURVE_COLUMNS,
        "large_profile.csv": LARGE_COLUMNS,
        "notes": {
            "side": "1 for the inner/left subdomain, 2 for the outer/right one",
            "value_or_summary": "sweep value at param; for field-valued rows the sup-norm distance",
            "deviation": "|value - target| or the field distance, as described in each JSON sidecar",
            "distance": "distance to the membrane",
            "numbers": "'.' decimal, scientific notation in sweep and curve files"
        }
    })
}

pub const LARGE_COLUMNS: [&str; 4] = ["m", "coordinate", "distance", "value"];

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => exit::OK,
                _ => exit::CONFIG,
            };
        }
    };
    match execute(&cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, printing a human summary to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    if cli.schema {
        writeln!(out, "{}", serde_json::to_string_pretty(&schema())?)?;
        return Ok(exit::OK);
    }
    let Some(command) = &cli.command else {
        return Err(config_err("no subcommand given (see --help)"));
    };
    if let Command::Check { suite, seed, out: dir } = command {
        return check(suite, *seed, dir.as_deref(), out);
    }
    let args = match command {
        Command::Eig(a)
        | Command::Logistic(a)
        | Command::SweepD(a)
        | Command::SweepLambda(a)
        | Command::CurveH(a)
        | Command::Large(a) => a,
        Command::Check { .. } => unreachable!("handled above"),
    };
    let cfg = RunConfig::from_path(&args.config)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let g = cfg.geometry()?;
    match command {
        Command::Eig(_) => eig(&cfg, &g, &dir, out),
        Command::Logistic(_) => logistic(&cfg, &g, &dir, out),
        Command::SweepD(_) => sweep_d(&cfg, &g, &dir, out),
        Command::SweepLambda(_) => sweep_lambda(&cfg, &g, &dir, out),
        Command::CurveH(_) => curve_h(&cfg, &g, &dir, out),
        Command::Large(_) => large(&cfg, &g, &dir, out),
        Command::Check { .. } => unreachable!("handled above"),
    }?;
    Ok(exit::OK)
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn eig(cfg: &RunConfig, g: &Geometry<f64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let d = positive(&cfg.d, "d")?;
    let (gamma1, gamma2) = cfg.gammas()?;
    let c1 = need(&cfg.c1, "c1")?.sample(g, Side::One);
    let c2 = need(&cfg.c2, "c2")?.sample(g, Side::Two);
    let op = assemble_membrane(d, &c1, &c2, gamma1, gamma2, g).map_err(EigenError::from)?;
    let pair = principal_pair_with(&op, c1.lower().min(c2.lower()), &cfg.tolerances.eigen())?;
    std::fs::create_dir_all(dir)?;
    let phi = pair.pair().expect("membrane layout");
    phi.write_csv(g, File::create(dir.join("eigenfunction.csv"))?)?;
    write_json(
        &dir.join("eig.json"),
        &json!({"lambda1": pair.value, "iterations": pair.iterations, "residual": pair.residual}),
    )?;
    writeln!(out, "lambda1 = {:e}", pair.value)?;
    Ok(())
}

fn logistic(cfg: &RunConfig, g: &Geometry<f64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let p = cfg.logistic_problem(g, positive(&cfg.d, "d")?)?;
    let r = solve_logistic_membrane_with(&p, g, &cfg.tolerances.logistic())?;
    std::fs::create_dir_all(dir)?;
    let status = match &r.status {
        LogisticStatus::Positive(u) => {
            u.write_csv(g, File::create(dir.join("solution.csv"))?)?;
            writeln!(out, "positive solution, max = {:e}", u.extrema().1)?;
            json!({"kind": "positive", "max": u.extrema().1, "min": u.extrema().0})
        }
        LogisticStatus::NoPositiveSolution(l) => {
            writeln!(out, "no positive solution, lambda1 = {l:e}")?;
            json!({"kind": "no_positive_solution", "lambda1": l})
        }
    };
    write_json(
        &dir.join("logistic.json"),
        &json!({"status": status, "gate": r.gate, "iterations": r.iterations, "residual": r.residual}),
    )?;
    Ok(())
}

fn sweep_d(cfg: &RunConfig, g: &Geometry<f64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let d_list = positive_list(&cfg.d_list, "d_list")?;
    let eigen = cfg.c1.is_some() || cfg.c2.is_some();
    let logistic = cfg.beta1.is_some() || cfg.beta2.is_some();
    if !eigen && !logistic {
        return Err(config_err("sweep-d needs c1/c2 (eigenvalue sweep) or beta/alpha (logistic sweep)"));
    }
    if eigen {
        let (gamma1, gamma2) = cfg.gammas()?;
        let c1 = need(&cfg.c1, "c1")?.sample(g, Side::One);
        let c2 = need(&cfg.c2, "c2")?.sample(g, Side::Two);
        let t = sweep_eigen_d(d_list, &c1, &c2, gamma1, gamma2, g)?;
        t.write(dir)?;
        writeln!(out, "{}: {} rows", t.name, t.rows.len())?;
    }
    if logistic {
        let p = cfg.logistic_problem(g, d_list[0])?;
        let s = sweep_logistic_d(d_list, &p, g, &cfg.tolerances.logistic())?;
        s.table.write(dir)?;
        writeln!(out, "{}: {} rows", s.table.name, s.table.rows.len())?;
        if let Some(d) = s.nonexistence_from {
            writeln!(out, "no positive solution from d = {d:e}")?;
        }
    }
    Ok(())
}

fn sweep_lambda(cfg: &RunConfig, g: &Geometry<f64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    if cfg.lambda_list.is_none() && cfg.lambda1_list.is_none() {
        return Err(config_err("sweep-lambda needs lambda_list and/or lambda1_list"));
    }
    let (gamma1, gamma2) = cfg.gammas()?;
    let alpha1 = need(&cfg.alpha1, "alpha1")?.sample(g, Side::One);
    let alpha2 = need(&cfg.alpha2, "alpha2")?.sample(g, Side::Two);
    let tol = &cfg.tolerances;
    if cfg.lambda_list.is_some() {
        let lambdas = positive_list(&cfg.lambda_list, "lambda_list")?;
        let t = sweep_theta_over_lambda(lambdas, &alpha1, &alpha2, gamma1, gamma2, g, tol.interior, &tol.logistic())?;
        t.write(dir)?;
        writeln!(out, "{}: {} rows", t.name, t.rows.len())?;
    }
    if cfg.lambda1_list.is_some() {
        let l1 = list(&cfg.lambda1_list, "lambda1_list")?;
        let l2 = *need(&cfg.lambda2, "lambda2")?;
        let m_list = cfg.m_list.as_deref().unwrap_or(&[]);
        let opts = Lambda1Options {
            logistic: tol.logistic(),
            large: tol.large(),
        };
        let s = sweep_lambda1(l2, l1, &alpha1, &alpha2, gamma1, gamma2, g, m_list, &opts)?;
        for t in s.tables() {
            t.write(dir)?;
            writeln!(out, "{}: {} rows", t.name, t.rows.len())?;
        }
    }
    Ok(())
}

fn curve_h(cfg: &RunConfig, g: &Geometry<f64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (gamma1, gamma2) = cfg.gammas()?;
    let l2 = list(&cfg.lambda2_list, "lambda2_list")?;
    let curve = trace_h(l2, gamma1, gamma2, g, cfg.tolerances.h_tol)?;
    curve.write(dir)?;
    writeln!(
        out,
        "hcurve: {} samples, sigma1 = {:e}, sigma2 = {:e}",
        curve.samples.len(),
        curve.sigma1,
        curve.sigma2
    )?;
    Ok(())
}

fn large(cfg: &RunConfig, g: &Geometry<f64>, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let l2 = *need(&cfg.lambda2, "lambda2")?;
    let gamma2 = positive(&cfg.gamma2, "gamma2")?;
    let alpha2 = need(&cfg.alpha2, "alpha2")?.sample(g, Side::Two);
    let m_list = positive_list(&cfg.m_list, "m_list")?;
    let ls = approximate_large_solution(l2, &alpha2, gamma2, g, m_list, &cfg.tolerances.large())?;
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_writer(File::create(dir.join("large_profile.csv"))?);
    w.write_record(LARGE_COLUMNS)?;
    for (m, v) in ls.m_values.iter().zip(&ls.fields) {
        for (x, value) in g.mesh(Side::Two).iter().zip(v.values()) {
            let delta = g.distance_to_interface(*x);
            w.write_record([m, x, &delta, value].map(|v| format!("{v:e}")))?;
        }
    }
    w.flush()?;
    write_json(
        &dir.join("large.json"),
        &json!({
            "columns": LARGE_COLUMNS,
            "lambda2": l2,
            "gamma2": gamma2,
            "m_values": ls.m_values,
            "blowup_exponent": ls.fit.exponent,
            "blowup_prefactor": ls.fit.prefactor,
            "fit_residual": ls.fit.residual,
            "fit_points": ls.fit.points,
            "min_increments": ls.min_increments,
            "interior_increments": ls.interior_increments,
        }),
    )?;
    writeln!(out, "blow-up exponent = {:.4}", ls.fit.exponent)?;
    Ok(())
}

fn check(suite: &str, seed: u64, dir: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
    let reports = run_suite(suite, seed)
        .ok_or_else(|| config_err(format!("unknown suite `{suite}` (expected one of {SUITES:?})")))?;
    for r in &reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{verdict} {} ({} instances, worst {:e}, tolerance {:e})",
            r.name, r.instances, r.worst_violation, r.tolerance
        )?;
    }
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("checks.json"), &serde_json::to_value(&reports)?)?;
    }
    Ok(if reports.iter().all(|r| r.passed) {
        exit::OK
    } else {
        exit::CHECK_FAILED
    })
}
