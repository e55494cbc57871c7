//! The `switchrisk` command-line front end.
//!
//! Exit codes: 0 on success, 2 on usage errors (unknown or missing flags,
//! inconsistent flag combinations), 1 on runtime errors. Reports are JSON on
//! stdout or in `--out`; grids and tables can be emitted as TSV instead.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    self, grid_tsv, risk_bound_general, risk_bound_lp, BoundReport, RiskFormula,
};
use crate::capacity::{self, CapacityKind, CapacityReport, ComponentClassSpec};
use crate::data::{clip, rescale_dataset, Dataset, LossParams, ScaleInfo};
use crate::error::Error;
use crate::experiments::{
    generate_synthetic, model_risk, rate_study_formula, select_modes_srm, validate_coverage,
    CoverageConfig, ModelKind, RateConfig, SyntheticSpec,
};
use crate::learn::{fit_pws, fit_switching_exact, fit_switching_kernel, fit_switching_linear, FitOptions};
use crate::models::{Kernel, Model, ModelJson};
use crate::HALF_RANGE;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "SWITCHRISK_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "switchrisk", version, about = "Fit and certify switching and PWS regression models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a switching or PWS model to a CSV sample.
    Fit(FitArgs),
    /// Evaluate a risk bound.
    Bound(BoundArgs),
    /// Evaluate a capacity measure.
    Capacity(CapacityArgs),
    /// Select the number of modes by structural risk minimization.
    Srm(SrmArgs),
    /// Monte Carlo coverage check of a bound on synthetic data.
    Validate(ValidateArgs),
    /// Fit the decay rate of a bound's control term in n.
    Rate(RateArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit TSV instead of JSON.
    #[arg(long, conflicts_with = "json")]
    tsv: bool,
    /// Emit JSON (the default).
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitKind {
    Switching,
    Pws,
    Kernel,
    Exact,
}

#[derive(Debug, Args)]
struct FitOptArgs {
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    ridge: Option<f64>,
    /// Cap on every component norm.
    #[arg(long)]
    norm_cap: Option<f64>,
}

impl FitOptArgs {
    fn options(&self, seed: u64) -> FitOptions {
        let d = FitOptions::default();
        FitOptions {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            seed,
            norm_cap: self.norm_cap,
            ridge: self.ridge.unwrap_or(d.ridge),
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV sample with header x1,...,xd,y.
    #[arg(long)]
    data: PathBuf,
    /// Number of modes.
    #[arg(long = "C")]
    modes: usize,
    #[arg(long, value_enum, default_value = "switching")]
    model: FitKind,
    /// Kernel for `--model kernel`: gaussian:<bw>, poly:<deg>[:<offset>] or linear.
    #[arg(long)]
    kernel: Option<String>,
    /// Append a constant feature to every input.
    #[arg(long)]
    bias: bool,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    fit: FitOptArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Formula parameters shared by `bound`, `srm`, `validate` and `rate`.
#[derive(Debug, Args, Default)]
struct FormulaArgs {
    /// Loss exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Input dimension (classifier dimension for PWS bounds).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "Rx")]
    r_x: Option<f64>,
    #[arg(long = "Rw")]
    r_w: Option<f64>,
    #[arg(long = "RH")]
    r_h: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Formula id, e.g. switching-linear, pws-kernel, general, lp.
    formula: String,
    /// Empirical risk.
    #[arg(long, conflicts_with = "emp_from_model")]
    emp: Option<f64>,
    /// Compute the empirical risk of a saved model on `--data`.
    #[arg(long, requires = "data")]
    emp_from_model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Rademacher complexity, for the `general` and `lp` formulas.
    #[arg(long)]
    rad: Option<f64>,
    #[arg(long = "C")]
    modes: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Emit the control term over these sample sizes as TSV.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    params: FormulaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    /// rad-linear, rad-mc, fat-linear, growth-linear, growth-natarajan,
    /// entropy-linear, entropy-kernel, or rad-<bound formula id>.
    kind: String,
    #[arg(long = "C")]
    modes: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Natarajan dimension of the classifier class.
    #[arg(long = "dG")]
    d_g: Option<usize>,
    /// Sample for `rad-mc`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Kernel for `rad-mc` with `--RH`.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, default_value_t = 20_000)]
    draws: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Emit the value over these sample sizes as TSV.
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    params: FormulaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SrmArgs {
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Synthetic spec (JSON); its seed is replaced by `--seed`.
    #[arg(long)]
    synthetic: Option<PathBuf>,
    #[arg(long = "C-max")]
    c_max: usize,
    #[arg(long)]
    formula: String,
    #[arg(long)]
    delta: f64,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    fit: FitOptArgs,
    #[command(flatten)]
    params: FormulaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Switching,
    Pws,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Switching => ModelKind::Switching,
            ModelArg::Pws => ModelKind::Pws,
        }
    }
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Coverage configuration (JSON); its seed is replaced by `--seed`.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    test_n: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct RateArgs {
    formula: String,
    #[arg(long = "C")]
    modes: usize,
    /// Sample sizes: a comma list, or `2^a..2^b` for all powers of two in between.
    #[arg(long, default_value = "2^10..2^24")]
    grid: String,
    #[command(flatten)]
    params: FormulaArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("{what} requires {flag}")))
}

/// Builds the global worker pool from [`WORKERS_ENV`], if set.
pub fn init_workers() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err(format!("{WORKERS_ENV} must be a positive integer, got 0"));
    }
    // a pool built earlier in this process wins
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::Bound(a) => cmd_bound(a, stdout),
        Command::Capacity(a) => cmd_capacity(a, stdout),
        Command::Srm(a) => cmd_srm(a, stdout),
        Command::Validate(a) => cmd_validate(a, stdout),
        Command::Rate(a) => cmd_rate(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            2
        }
        Err(CliError::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from)?,
        None => stdout.write_all(text.as_bytes()).map_err(Error::from)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: &OutputArgs, value: &T, stdout: &mut dyn Write) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    emit(output, &text, stdout)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

fn parse_grid(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || usage(format!("cannot parse grid {spec:?}"));
    let value = |s: &str| -> CliResult<usize> {
        let s = s.trim();
        match s.strip_prefix("2^") {
            Some(e) => {
                let e: u32 = e.parse().map_err(|_| bad())?;
                1usize.checked_shl(e).filter(|_| e < 63).ok_or_else(bad)
            }
            None => s.parse().map_err(|_| bad()),
        }
    };
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (value(a)?, value(b)?);
        if !(a.is_power_of_two() && b.is_power_of_two() && a <= b) {
            return Err(bad());
        }
        let mut out = vec![a];
        while *out.last().unwrap() < b {
            out.push(out.last().unwrap() * 2);
        }
        return Ok(out);
    }
    spec.split(',').map(value).collect()
}

/// Loads a CSV sample and rescales its targets onto `[-1/2, 1/2]`.
fn load_rescaled(path: &Path, bias: bool) -> CliResult<Dataset> {
    let raw = Dataset::from_csv_path(path)?;
    let data = rescale_dataset(&raw)?;
    Ok(if bias { data.with_bias_feature() } else { data })
}

/// A CSV sample mapped with the target scaling recorded in a model.
fn load_with_scale(path: &Path, scale: ScaleInfo, bias: bool) -> CliResult<Dataset> {
    let raw = Dataset::from_csv_path(path)?;
    let ys = raw
        .ys()
        .iter()
        .map(|&y| clip(scale.from_raw(y), HALF_RANGE))
        .collect::<crate::Result<Vec<f64>>>()?;
    let data = Dataset::with_half_range(raw.xs().to_vec(), ys, HALF_RANGE)?;
    Ok(if bias { data.with_bias_feature() } else { data })
}

fn formula_from(id: &str, a: &FormulaArgs) -> CliResult<RiskFormula> {
    let base = id.strip_suffix("/direct-sum").unwrap_or(id);
    let p = || need(a.p, "--p", base);
    let d = || need(a.d, "--d", base);
    let r_x = || need(a.r_x, "--Rx", base);
    let r_w = || need(a.r_w, "--Rw", base);
    let r_h = || need(a.r_h, "--RH", base);
    let alpha = || need(a.alpha, "--alpha", base);
    let beta = || need(a.beta, "--beta", base);
    Ok(match base {
        "switching-linear" => RiskFormula::SwitchingLinear { p: p()?, r_x: r_x()?, r_w: r_w()? },
        "switching-kernel-rad" => RiskFormula::SwitchingKernelRad { p: p()?, r_x: r_x()?, r_h: r_h()? },
        "switching-linear-chained" => RiskFormula::SwitchingLinearChained {
            p: p()?,
            d: d()?,
            r_x: r_x()?,
            r_w: r_w()?,
        },
        "switching-kernel" => RiskFormula::SwitchingKernel { p: p()?, r_x: r_x()?, r_h: r_h()? },
        "switching-fatpoly" => RiskFormula::SwitchingFatpoly { p: p()?, alpha: alpha()?, beta: beta()? },
        "pws-general" => RiskFormula::PwsGeneral {
            p: p()?,
            d: d()?,
            alpha: alpha()?,
            beta: beta()?,
        },
        "pws-kernel" => RiskFormula::PwsKernel { p: p()?, d: d()?, r_x: r_x()?, r_h: r_h()? },
        "pwa" => RiskFormula::Pwa { p: p()?, d: d()?, r_x: r_x()?, r_w: r_w()? },
        "pwa-relaxed" => RiskFormula::PwaRelaxed { p: p()?, d: d()?, r_x: r_x()?, r_w: r_w()? },
        "trivial" => RiskFormula::Trivial,
        "empirical" => RiskFormula::Empirical,
        other => return Err(usage(format!("unknown formula id {other:?}"))),
    })
}

/// Output of `fit`: the model plus fit diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelJson,
    /// Clipped empirical risk (squared loss) on the rescaled targets.
    pub objective: f64,
    /// The same risk in raw target units.
    pub objective_raw_units: f64,
    pub raw_objective: f64,
    pub history: Vec<f64>,
    pub assignments: Vec<usize>,
    pub iterations: usize,
    pub restarts_used: usize,
    pub projected: bool,
    pub monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switching_objective: Option<f64>,
    pub n: usize,
    pub seed: u64,
    pub options: FitOptions,
}

fn cmd_fit(a: FitArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if a.kernel.is_some() && !matches!(a.model, FitKind::Kernel) {
        return Err(usage("--kernel only applies to --model kernel"));
    }
    let kernel = match a.model {
        FitKind::Kernel => Some(Kernel::parse(&need(a.kernel.clone(), "--kernel", "--model kernel")?)
            .map_err(|e| usage(e.to_string()))?),
        _ => None,
    };
    let opts = a.fit.options(a.seed);
    let data = load_rescaled(&a.data, a.bias)?;
    let fit = match a.model {
        FitKind::Switching => fit_switching_linear(&data, a.modes, &opts)?,
        FitKind::Pws => fit_pws(&data, a.modes, &opts)?,
        FitKind::Kernel => fit_switching_kernel(&data, a.modes, kernel.unwrap(), &opts)?,
        FitKind::Exact => fit_switching_exact(&data, a.modes)?,
    };
    let scale = data.scale();
    let report = FitReport {
        model: fit.model.to_json(scale, a.bias),
        objective: fit.objective,
        objective_raw_units: scale.lp_to_raw(fit.objective, 2.0),
        raw_objective: fit.raw_objective,
        history: fit.history,
        assignments: fit.assignments,
        iterations: fit.iterations,
        restarts_used: fit.restarts_used,
        projected: fit.projected,
        monotone: fit.monotone,
        switching_objective: fit.switching_objective,
        n: data.len(),
        seed: a.seed,
        options: opts,
    };
    if a.output.tsv {
        let mut text = String::from("iteration\tobjective\n");
        for (i, v) in report.history.iter().enumerate() {
            text.push_str(&format!("{i}\t{v}\n"));
        }
        return emit(&a.output, &text, stdout);
    }
    emit_json(&a.output, &report, stdout)
}

/// Reads a model file: either a `fit` report or a bare model.
fn read_model(path: &Path) -> CliResult<ModelJson> {
    let value: serde_json::Value = read_json(path)?;
    let j = match value.get("model") {
        Some(m) => serde_json::from_value(m.clone()),
        None => serde_json::from_value(value),
    };
    Ok(j.map_err(Error::from)?)
}

fn cmd_bound(a: BoundArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let base = a.formula.strip_suffix("/direct-sum").unwrap_or(&a.formula).to_string();
    let generic = matches!(base.as_str(), "general" | "lp");
    let formula = if generic { None } else { Some(formula_from(&base, &a.params)?) };
    if generic && a.rad.is_none() {
        return Err(usage(format!("{base} requires --rad")));
    }
    if !generic && a.rad.is_some() {
        return Err(usage("--rad only applies to the general and lp formulas"));
    }
    let loss_p = match (&formula, a.params.p) {
        (Some(RiskFormula::Trivial | RiskFormula::Empirical) | None, p) => p.unwrap_or(2.0),
        (Some(f), _) => f.p(),
    };

    if let Some(grid) = &a.grid {
        let ns = parse_grid(grid)?;
        let text = match &formula {
            Some(f) => {
                let modes = need(a.modes, "--C", "a grid")?;
                grid_tsv(&ns, |n| Ok(f.evaluate(0.0, modes, n, 0.5)?.control_term))?
            }
            None => return Err(usage("--grid needs a named formula")),
        };
        return emit(&a.output, &text, stdout);
    }

    let delta = need(a.delta, "--delta", "bound")?;
    let (emp, n, scale) = match (&a.emp_from_model, a.emp) {
        (Some(path), None) => {
            let j = read_model(path)?;
            let model = Model::from_json(&j)?;
            let data = load_with_scale(a.data.as_ref().unwrap(), j.scale, j.bias_feature)?;
            let emp = model_risk(&model, &data, LossParams::new(loss_p)?)?;
            if a.n.is_some_and(|n| n != data.len()) {
                return Err(usage("--n disagrees with the size of --data"));
            }
            (emp, data.len(), Some(j.scale))
        }
        (None, Some(emp)) => (emp, need(a.n, "--n", "bound")?, None),
        _ => return Err(usage("bound requires --emp or --emp-from-model")),
    };
    let mut report: BoundReport = match (&formula, base.as_str()) {
        (Some(f), _) => f.evaluate(emp, need(a.modes, "--C", &base)?, n, delta)?,
        (None, "general") => risk_bound_general(emp, a.rad.unwrap(), delta, n)?,
        (None, _) => risk_bound_lp(emp, a.rad.unwrap(), need(a.params.p, "--p", "lp")?, delta, n)?,
    };
    if let Some(s) = scale {
        report = report.with_scale(s);
    }
    if a.output.tsv {
        let text = format!(
            "formula_id\tempirical_risk\tcontrol_term\tconfidence_term\traw_total\tclamped_total\n{}\t{}\t{}\t{}\t{}\t{}\n",
            report.formula_id,
            report.empirical_risk,
            report.control_term,
            report.confidence_term,
            report.raw_total,
            report.clamped_total
        );
        return emit(&a.output, &text, stdout);
    }
    emit_json(&a.output, &report, stdout)
}

fn capacity_at(a: &CapacityArgs, n: Option<usize>) -> CliResult<CapacityReport> {
    let k = a.kind.as_str();
    let q = &a.params;
    let n_ = || need(n, "--n", k);
    let modes = || need(a.modes, "--C", k);
    let d = || need(q.d, "--d", k);
    let p = || need(q.p, "--p", k);
    let r_x = || need(q.r_x, "--Rx", k);
    let r_w = || need(q.r_w, "--Rw", k);
    let r_h = || need(q.r_h, "--RH", k);
    let alpha = || need(q.alpha, "--alpha", k);
    let beta = || need(q.beta, "--beta", k);
    let eps = || need(a.eps, "--eps", k);
    let rad = |v: f64, n: usize| Ok(CapacityReport::new(CapacityKind::Rademacher, v, k).with_n(n));
    match k {
        "rad-linear" => {
            let n = n_()?;
            rad(capacity::rademacher_linear_bound(r_x()?, r_w()?, n)?, n)
        }
        "rad-mc" => {
            let seed = need(a.seed, "--seed", k)?;
            let path = need(a.data.as_ref(), "--data", k)?;
            let xs = Dataset::from_csv_path(path)?.xs().to_vec();
            let spec = match (q.r_w, q.r_h) {
                (Some(r_w), None) => ComponentClassSpec::Linear {
                    d: xs[0].len(),
                    r_x: r_x().unwrap_or(1.0),
                    r_w,
                },
                (None, Some(r_h)) => ComponentClassSpec::Kernel {
                    kernel: Kernel::parse(&need(a.kernel.clone(), "--kernel", "rad-mc with --RH")?)
                        .map_err(|e| usage(e.to_string()))?,
                    r_x: r_x().unwrap_or(1.0),
                    r_h,
                },
                _ => return Err(usage("rad-mc requires exactly one of --Rw and --RH")),
            };
            let est = capacity::rademacher_mc(&spec, &xs, a.draws, seed)?;
            let mut r = CapacityReport::new(CapacityKind::Rademacher, est.mean, k).with_n(xs.len());
            r.stderr = Some(est.stderr);
            Ok(r)
        }
        "fat-linear" => {
            let e = eps()?;
            let v = capacity::fat_shattering_linear(r_x()?, r_w()?, e)?;
            Ok(CapacityReport::new(CapacityKind::Fat, v as f64, k).at_scale(e))
        }
        "growth-linear" => {
            let n = n_()?;
            let v = capacity::growth_linear_classifiers(modes()?, d()?, n)?;
            Ok(CapacityReport::new(CapacityKind::Growth, v, k).with_n(n))
        }
        "growth-natarajan" => {
            let n = n_()?;
            let v = capacity::growth_natarajan(n, modes()?, need(a.d_g, "--dG", k)?)?;
            Ok(CapacityReport::new(CapacityKind::Growth, v, k).with_n(n))
        }
        "entropy-linear" => {
            let e = eps()?;
            let v = capacity::entropy_inf_linear_finite_d(e, d()?, r_x()?, r_w()?)?;
            Ok(CapacityReport::new(CapacityKind::Entropy, v, k).at_scale(e))
        }
        "entropy-kernel" => {
            let (e, n) = (eps()?, n_()?);
            let v = capacity::entropy_inf_kernel(e, r_x()?, r_h()?, n)?;
            Ok(CapacityReport::new(CapacityKind::Entropy, v, k).at_scale(e).with_n(n))
        }
        "rad-pws-general" => {
            let n = n_()?;
            rad(bounds::rad_bound_pws_general(modes()?, d()?, alpha()?, beta()?, n)?, n)
        }
        "rad-pws-kernel" => {
            let n = n_()?;
            rad(bounds::rad_bound_pws_kernel(modes()?, d()?, r_x()?, r_h()?, n)?, n)
        }
        "rad-pwa" => {
            let n = n_()?;
            rad(bounds::rad_bound_pwa(modes()?, d()?, r_x()?, r_w()?, n)?, n)
        }
        "rad-pwa-relaxed" => {
            let n = n_()?;
            rad(bounds::rad_bound_pwa_relaxed(modes()?, d()?, r_x()?, r_w()?, n)?, n)
        }
        "rad-switching-fatpoly" => {
            let n = n_()?;
            rad(bounds::rad_bound_switching_fatpoly(modes()?, p()?, alpha()?, beta()?, n)?, n)
        }
        "rad-switching-kernel" => {
            let n = n_()?;
            rad(bounds::rad_bound_switching_kernel(modes()?, p()?, r_x()?, r_h()?, n)?, n)
        }
        "rad-switching-linear-chained" => {
            let n = n_()?;
            rad(bounds::rad_bound_switching_linear_chained(modes()?, d()?, p()?, r_x()?, r_w()?, n)?, n)
        }
        other => Err(usage(format!("unknown capacity kind {other:?}"))),
    }
}

fn cmd_capacity(a: CapacityArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if let Some(grid) = &a.grid {
        let ns = parse_grid(grid)?;
        let mut text = String::from("n\tvalue\n");
        for n in ns {
            text.push_str(&format!("{n}\t{}\n", capacity_at(&a, Some(n))?.value));
        }
        return emit(&a.output, &text, stdout);
    }
    let report = capacity_at(&a, a.n)?;
    if a.output.tsv {
        return emit(&a.output, &format!("formula_id\tvalue\n{}\t{}\n", report.formula_id, report.value), stdout);
    }
    emit_json(&a.output, &report, stdout)
}

fn cmd_srm(a: SrmArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let formula = formula_from(&a.formula, &a.params)?;
    let opts = a.fit.options(a.seed);
    let data = match (&a.data, &a.synthetic) {
        (Some(path), None) => load_rescaled(path, false)?,
        (None, Some(path)) => {
            let spec: SyntheticSpec = read_json(path)?;
            generate_synthetic(&spec.with_seed(a.seed))?.data
        }
        _ => return Err(usage("srm requires exactly one of --data and --synthetic")),
    };
    let kind = a.model.map_or_else(|| ModelKind::for_formula(&formula), ModelKind::from);
    let report = select_modes_srm(&data, a.c_max, &formula, a.delta, kind, &opts)?;
    if a.output.tsv {
        return emit(&a.output, &report.to_tsv(), stdout);
    }
    emit_json(&a.output, &report, stdout)
}

fn cmd_validate(a: ValidateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut cfg: CoverageConfig = read_json(&a.config)?;
    cfg.spec.seed = a.seed;
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(m) = a.test_n {
        cfg.test_n = m;
    }
    let report = validate_coverage(&cfg)?;
    if a.output.tsv {
        let text = format!(
            "formula_id\ttrials\tviolations\tcoverage\tmean_bound\tmean_true_risk\n{}\t{}\t{}\t{}\t{}\t{}\n",
            report.formula_id, report.trials, report.violations, report.coverage, report.mean_bound, report.mean_true_risk
        );
        return emit(&a.output, &text, stdout);
    }
    emit_json(&a.output, &report, stdout)
}

fn cmd_rate(a: RateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = RateConfig {
        formula: formula_from(&a.formula, &a.params)?,
        modes: a.modes,
        n_grid: parse_grid(&a.grid)?,
    };
    let report = rate_study_formula(&cfg)?;
    if a.output.tsv {
        return emit(&a.output, &report.to_tsv(), stdout);
    }
    emit_json(&a.output, &report, stdout)
}
