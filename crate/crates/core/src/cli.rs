//! The `bernstein` command-line front end.
//!
//! Exit codes: 0 success, 1 bad input, 2 precondition violated, 3 numerical
//! failure (quadrature budget exhausted or overflow), 4 a verified bound
//! failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::criteria::{
    debranges_sum, singular_profile, subproduct_sums, CriteriaError, CriterionReport, Selector,
};
use crate::entire::{
    interval_checks, maximal_shifts, perturb, perturbation_plan, random_shifts, separation_check,
    EntireError, EntireProduct, Perturbation, ZeroSpec, DEFAULT_CIRCLE_SAMPLES,
};
use crate::numerics::{integrate_bump, NumericsError};
use crate::smoothing::{
    beta, bump, kappa, moment_abs_t, moment_t_squared, omega_rho, smooth_weight_full,
    sup_smoothing, verify_smooth_majorant, SmoothingConfig, SmoothingError, Width,
};
use crate::weights::{eval_weight, step_weight, Weight, WeightError};

/// Identity of the generator behind `--seed`, recorded in every report.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3) via SeedableRng::seed_from_u64";

pub const CSV_SCHEMA_LINE: &str = "# schema=1";

#[derive(Debug, Parser)]
#[command(
    name = "bernstein",
    version,
    about = "Smooth majorants of weights, zero perturbation of entire functions and criterion sums"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate w, beta, the window sups and the smooth majorant W with W' over a grid (CSV).
    Smooth(SmoothArgs),
    /// Print the bump normalisation constant and its moment identities.
    Kappa(KappaArgs),
    /// Build the zero-perturbation plan, apply shifts and verify the derivative bound (JSON).
    Perturb(PerturbArgs),
    /// Criterion sums over the zeros of a product (CSV, optional JSON summary).
    Criterion(CriterionArgs),
    /// Verify the sandwich and derivative bounds of the smooth majorant (JSON).
    Verify(VerifyArgs),
    /// Emit the piecewise-constant step majorant (CSV).
    Stepweight(StepweightArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WidthChoice {
    /// `phi_eps`, the width the derivative bound is proved for.
    Phi,
    /// `exp(-x^2 - eps^2/4) / 4`.
    Gauss,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    /// Weight description (JSON).
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long)]
    pub eps: f64,
    /// Window factor of the extra `omega_rho` column.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Grid as LO:HI:N.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = WidthChoice::Phi)]
    pub width: WidthChoice,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    /// Quadrature tolerance; by default the cached high-accuracy value is used.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Zero set description (JSON).
    #[arg(long)]
    pub zeros: PathBuf,
    #[arg(long)]
    pub delta: f64,
    /// JSON array with one shift per zero (increasing zero order). Without
    /// it, random admissible shift vectors are drawn.
    #[arg(long)]
    pub shifts: Option<PathBuf>,
    /// Number of random shift vectors.
    #[arg(long, default_value_t = 100)]
    pub random: usize,
    /// Also run every zero moved by its full admissible radius.
    #[arg(long)]
    pub maximal: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CIRCLE_SAMPLES)]
    pub circle_samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long)]
    pub zeros: PathBuf,
    /// Shift exponent of a single sum.
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    /// Run the profile k = 0..=K_MAX instead (discrete weights only).
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Sub-product selectors (all, every_other, positive, negative, indices:i,j,..).
    #[arg(long = "select")]
    pub select: Vec<String>,
    /// CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value = "-8:8:201", allow_hyphen_values = true)]
    pub grid: String,
    /// Difference step relative to the kernel width.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StepweightArgs {
    #[arg(long)]
    pub weight: PathBuf,
    /// Segments n in [-N, N].
    #[arg(long, default_value_t = 10)]
    pub n_range: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    Input(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Precondition(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<WeightError> for CliError {
    fn from(e: WeightError) -> Self {
        match e {
            WeightError::Numerics(n) => n.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<SmoothingError> for CliError {
    fn from(e: SmoothingError) -> Self {
        match e {
            SmoothingError::Numerics(n) => n.into(),
            SmoothingError::Weight(w) => w.into(),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

impl From<EntireError> for CliError {
    fn from(e: EntireError) -> Self {
        match e {
            EntireError::InvalidZeros(_) | EntireError::NotAZero(_) | EntireError::InvalidA0(_) => {
                CliError::Input(e.to_string())
            }
            EntireError::Growth(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<CriteriaError> for CliError {
    fn from(e: CriteriaError) -> Self {
        match e {
            CriteriaError::Weight(w) => w.into(),
            CriteriaError::Entire(z) => z.into(),
            CriteriaError::UnknownSelector(_) | CriteriaError::SelectorIndex { .. } => {
                CliError::Input(e.to_string())
            }
            other => CliError::Precondition(other.to_string()),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 4,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. `Ok(false)` means some verified bound failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Smooth(a) => cmd_smooth(a),
        Command::Kappa(a) => cmd_kappa(a),
        Command::Perturb(a) => cmd_perturb(a),
        Command::Criterion(a) => cmd_criterion(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stepweight(a) => cmd_stepweight(a),
    }
}

/// `LO:HI:N` to `N` equally spaced points, the last one exactly `HI`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::Input(format!(
            "grid must be LO:HI:N with LO < HI and N >= 2, got `{spec}`"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) {
        return Err(bad());
    }
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_weight(path: &Path) -> Result<Weight, CliError> {
    Ok(Weight::from_json(&read(path)?)?)
}

fn load_product(path: &Path) -> Result<EntireProduct, CliError> {
    let spec = ZeroSpec::from_json(&read(path)?)?;
    Ok(EntireProduct::new(spec.build()?, spec.a0())?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

fn metadata(command: &str, seed: Option<u64>) -> serde_json::Value {
    let mut m = json!({
        "tool": "bernstein",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
    });
    if let Some(s) = seed {
        m["seed"] = json!(s);
        m["rng"] = json!(RNG_NAME);
    }
    m
}

fn cmd_smooth(a: &SmoothArgs) -> Result<bool, CliError> {
    let w = load_weight(&a.weight)?;
    let grid = parse_grid(&a.grid)?;
    let width = match a.width {
        WidthChoice::Phi => Width::Phi,
        WidthChoice::Gauss => Width::Default,
    };
    let cfg = SmoothingConfig::new(a.eps, a.rho, width)?;
    let rows = grid
        .par_iter()
        .map(|&x| -> Result<[f64; 9], CliError> {
            let p = smooth_weight_full(&w, &cfg, x)?;
            Ok([
                x,
                eval_weight(&w, x)?,
                beta(&w, a.eps, x)?,
                omega_rho(&w, a.eps, 0.5, x)?,
                sup_smoothing(&w, a.eps, x)?,
                omega_rho(&w, a.eps, a.rho, x)?,
                p.value,
                p.derivative,
                p.width.value,
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv =
        format!("{CSV_SCHEMA_LINE}\nx,w,beta,omega_half,omega_one,omega_rho,W,W_prime,width\n");
    for r in &rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(csv, "{}", cells.join(","));
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(true)
}

fn cmd_kappa(a: &KappaArgs) -> Result<bool, CliError> {
    let k = match a.tol {
        Some(tol) => integrate_bump(bump, -1.0, 1.0, tol)?.value,
        None => kappa()?,
    };
    let e = std::f64::consts::E;
    let m1 = moment_abs_t()?;
    let m2 = moment_t_squared()?;
    let tabulated = (2.73100 - 1.52410) / e;
    let (lo, hi) = (1.2 / e, 1.21 / e);
    let in_bracket = lo < k && k < hi;
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut s = String::new();
    let _ = writeln!(s, "kappa = {k:.17}");
    let _ = writeln!(
        s,
        "tabulated Bessel value (2.73100 - 1.52410)/e = {tabulated:.17}"
    );
    let _ = writeln!(
        s,
        "int 2|t| psi(t)/(t^2-1)^2 dt = {m1:.17} (2/e = {:.17})",
        2.0 / e
    );
    let _ = writeln!(
        s,
        "int t^2 psi(t)/(t^2-1)^2 dt = {m2:.17} (kappa/2 = {:.17})",
        k / 2.0
    );
    let _ = writeln!(s, "kappa in (1.2/e, 1.21/e): {}", verdict(in_bracket));
    print!("{s}");
    Ok(in_bracket)
}

#[derive(Debug, Serialize)]
struct PlanSummary {
    delta: f64,
    delta_eff: f64,
    eps: f64,
    translation: f64,
    c_eps: f64,
    c_eps_note: &'static str,
    theta: f64,
    theta_largest_term: f64,
    theta_tail_indicator: f64,
    rho_delta: f64,
    c_delta: f64,
    deltas: Vec<f64>,
    shift_limits: Vec<f64>,
    circle_samples: usize,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    label: String,
    pass: bool,
    conclusion_max_violation: f64,
    containment_max_violation: f64,
}

fn summarise(label: String, p: &Perturbation) -> RunSummary {
    RunSummary {
        label,
        pass: p.pass(),
        conclusion_max_violation: p.conclusion.max_violation,
        containment_max_violation: p
            .intervals
            .containment
            .as_ref()
            .map_or(f64::NEG_INFINITY, |c| c.max_violation),
    }
}

fn cmd_perturb(a: &PerturbArgs) -> Result<bool, CliError> {
    let b = load_product(&a.zeros)?;
    let plan = perturbation_plan(&b, a.delta, a.circle_samples)?;

    let mut vectors: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(path) = &a.shifts {
        let s: Vec<f64> = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        vectors.push(("file".to_string(), s));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        for i in 0..a.random {
            vectors.push((format!("random-{i}"), random_shifts(&plan, &mut rng)));
        }
    }
    if a.maximal {
        vectors.push(("maximal".to_string(), maximal_shifts(&plan, 1.0)));
    }

    let results = vectors
        .par_iter()
        .map(|(label, s)| perturb(&plan, s).map(|p| (label.clone(), p)))
        .collect::<Result<Vec<_>, _>>()?;
    let separation = separation_check(&b, a.delta)?;
    let intervals = interval_checks(&plan, None)?;

    let runs: Vec<RunSummary> = results
        .iter()
        .map(|(l, p)| summarise(l.clone(), p))
        .collect();
    let failures: Vec<&Perturbation> = results
        .iter()
        .filter(|(_, p)| !p.pass())
        .map(|(_, p)| p)
        .collect();
    let pass = failures.is_empty() && separation.pass && intervals.pass();

    let summary = PlanSummary {
        delta: plan.delta,
        delta_eff: plan.delta_eff,
        eps: plan.eps,
        translation: plan.translation,
        c_eps: plan.c_eps,
        c_eps_note: plan.growth.note,
        theta: plan.theta.value,
        theta_largest_term: plan.theta.largest_term,
        theta_tail_indicator: plan.theta.tail_indicator,
        rho_delta: plan.rho_delta,
        c_delta: plan.c_delta,
        deltas: plan.deltas.clone(),
        shift_limits: plan.shift_limits.clone(),
        circle_samples: plan.growth.circle_samples,
    };
    let seed = a.shifts.is_none().then_some(a.seed);
    let report = json!({
        "metadata": metadata("perturb", seed),
        "zeros": b.zeros(),
        "zeros_note": b.zero_set().note(),
        "a0": b.a0(),
        "plan": summary,
        "separation": separation,
        "intervals": intervals,
        "runs": runs,
        "failures": failures,
        "pass": pass,
    });
    emit_json(a.out.as_deref(), &report)?;
    Ok(pass)
}

fn profile_csv(reports: &[(String, &CriterionReport)]) -> String {
    let mut out = format!("{CSV_SCHEMA_LINE}\nreport,k,lambda,term,partial_sum\n");
    for (name, r) in reports {
        for ((l, t), s) in r.lambdas.iter().zip(&r.terms).zip(&r.partial_sums) {
            let _ = writeln!(out, "{name},{},{l:.16e},{t:.16e},{s:.16e}", r.k);
        }
    }
    out
}

fn cmd_criterion(a: &CriterionArgs) -> Result<bool, CliError> {
    let w = load_weight(&a.weight)?;
    let e = load_product(&a.zeros)?;
    let meta = metadata("criterion", None);
    let (csv, summary) = if !a.select.is_empty() {
        let selectors = a
            .select
            .iter()
            .map(|s| s.parse::<Selector>())
            .collect::<Result<Vec<_>, _>>()?;
        let reps = subproduct_sums(&w, &e, &selectors)?;
        let named: Vec<(String, &CriterionReport)> = reps
            .iter()
            .map(|r| (r.selector.clone(), &r.report))
            .collect();
        (
            profile_csv(&named),
            json!({ "metadata": meta, "subproducts": reps }),
        )
    } else if let Some(k_max) = a.k_max {
        let p = singular_profile(&w, &e, k_max)?;
        let named: Vec<(String, &CriterionReport)> = p
            .reports
            .iter()
            .map(|r| (format!("k={}", r.k), r))
            .collect();
        (
            profile_csv(&named),
            json!({ "metadata": meta, "profile": p }),
        )
    } else {
        let r = debranges_sum(&w, &e, a.k)?;
        (r.to_csv(), json!({ "metadata": meta, "report": r }))
    };
    emit(a.out.as_deref(), &csv)?;
    if let Some(path) = &a.json {
        emit_json(Some(path), &summary)?;
    }
    Ok(true)
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let w = load_weight(&a.weight)?;
    let grid = parse_grid(&a.grid)?;
    let r = verify_smooth_majorant(&w, a.eps, &grid, a.h)?;
    let report = json!({
        "metadata": metadata("verify", None),
        "weight": w.name(),
        "width": "phi_eps",
        "report": r,
        "pass": r.pass,
    });
    emit_json(a.out.as_deref(), &report)?;
    Ok(r.pass)
}

fn cmd_stepweight(a: &StepweightArgs) -> Result<bool, CliError> {
    let w = load_weight(&a.weight)?;
    let steps = step_weight(&w, a.n_range)?;
    let mut csv = format!("{CSV_SCHEMA_LINE}\nn,lo,hi,value\n");
    for s in &steps.steps {
        let _ = writeln!(csv, "{},{:.16e},{:.16e},{:.16e}", s.n, s.lo, s.hi, s.value);
    }
    emit(a.out.as_deref(), &csv)?;
    Ok(true)
}
