//! Command-line front end behind the `slt` binary.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 argument error, 3 singular input,
//! 4 quadrature non-convergence, 5 statistical validation failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{bound_breakdown, fit_rate, theoretical_bound, RateFit};
use crate::error::Error;
use crate::fock::{total_diff_norm_sq, total_norm_sq, SeriesResult};
use crate::kernels::{kernel_f2, kernel_f2n, mean_l_eps, KernelPoint, ModelParams, MultiIndex};
use crate::mc::mc_moments;
use crate::quadrature::QuadratureConfig;

pub const NORMS_HEADER: &str = "T,eps,n,kind,value,quad_err,converged";
/// `n` column of the resummed-remainder rows in `norms.csv`.
pub const REMAINDER_ROW: i64 = -2;
/// `n` column of the total rows in `norms.csv`.
pub const TOTAL_ROW: i64 = -1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("quadrature did not converge: {0}")]
    NotConverged(String),
    #[error("statistical validation failed: {0}")]
    ValidationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(Error::Domain(_)) => 2,
            CliError::Compute(Error::SingularInput(_) | Error::PropagatedSingularity { .. }) => 3,
            CliError::Compute(Error::NotConverged { .. }) | CliError::NotConverged(_) => 4,
            CliError::ValidationFailed(_) => 5,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// Comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(FloatList)
    }
}

#[derive(Debug, Parser)]
#[command(name = "slt", version, about = "Self-intersection local time of planar Brownian motion: chaos norms, rates, bounds, Monte Carlo checks")]
pub struct Cli {
    #[command(flatten)]
    pub globals: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Time horizon T
    #[arg(long = "T", global = true)]
    pub horizon: Option<f64>,
    /// Mollifier width for kernel, validate and bound
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Comma-separated, strictly decreasing eps values for norms and rate
    #[arg(long, global = true)]
    pub eps_grid: Option<FloatList>,
    /// Last chaos level integrated explicitly
    #[arg(long, global = true)]
    pub n_max: Option<u32>,
    /// Target rate in (0, 1) of the convergence bound
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Cell budget per adaptive integral
    #[arg(long, global = true)]
    pub max_cells: Option<usize>,
    /// Time step of the sampled paths
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub n_paths: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; falls back to SLT_THREADS
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat key=value file; command-line flags win
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write a log-log table for plotting
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate a chaos kernel at the given times
    Kernel(KernelArgs),
    /// Per-level and total norms over the eps grid, written to norms.csv
    Norms,
    /// Fit the convergence rate over the eps grid, written to rate.json
    Rate(RateArgs),
    /// Monte Carlo mean and variance against the closed form and the chaos series
    Validate,
    /// Print the explicit convergence bound and its pieces
    Bound,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 0)]
    pub n1: u32,
    #[arg(long, default_value_t = 0)]
    pub n2: u32,
    /// Level-one logarithmic kernel (two times)
    #[arg(long)]
    pub level_one: bool,
    /// Comma-separated times
    #[arg(long)]
    pub times: FloatList,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    /// Fit exact data eps^ALPHA instead of computed norms
    #[arg(long, value_name = "ALPHA")]
    pub synthetic: Option<f64>,
}

/// Fully resolved settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub horizon: f64,
    pub eps: f64,
    pub eps_grid: Vec<f64>,
    pub n_max: u32,
    pub alpha: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub plot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let quad = QuadratureConfig::default();
        Self {
            horizon: 1.0,
            eps: 0.5,
            eps_grid: (4..=10).map(|k| 2f64.powi(-k)).collect(),
            n_max: 25,
            alpha: 0.9,
            rel_tol: quad.rel_tol,
            abs_tol: quad.abs_tol,
            max_cells: quad.max_cells,
            dt: 1e-3,
            n_paths: 10_000,
            seed: 7,
            out_dir: PathBuf::from("."),
            threads: None,
            plot: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e| CliError::Usage(format!("config key {key}: cannot parse {raw:?}: {e}")))
}

/// Parse a flat `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<GlobalArgs, CliError> {
    let mut out = GlobalArgs::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let raw = raw.trim();
        match key.as_str() {
            "T" => out.horizon = Some(parse_value(&key, raw)?),
            "eps" => out.eps = Some(parse_value(&key, raw)?),
            "eps-grid" => out.eps_grid = Some(parse_value(&key, raw)?),
            "n-max" => out.n_max = Some(parse_value(&key, raw)?),
            "alpha" => out.alpha = Some(parse_value(&key, raw)?),
            "rel-tol" => out.rel_tol = Some(parse_value(&key, raw)?),
            "abs-tol" => out.abs_tol = Some(parse_value(&key, raw)?),
            "max-cells" => out.max_cells = Some(parse_value(&key, raw)?),
            "dt" => out.dt = Some(parse_value(&key, raw)?),
            "n-paths" => out.n_paths = Some(parse_value(&key, raw)?),
            "seed" => out.seed = Some(parse_value(&key, raw)?),
            "out-dir" => out.out_dir = Some(PathBuf::from(raw)),
            "threads" => out.threads = Some(parse_value(&key, raw)?),
            "plot" => out.plot = parse_value(&key, raw)?,
            other => return Err(CliError::Usage(format!("config line {}: unknown key {other:?}", lineno + 1))),
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Flags, then the config file, then defaults; `threads` finally falls back to `SLT_THREADS`.
    pub fn resolve(flags: &GlobalArgs, file: Option<&GlobalArgs>, env_threads: Option<&str>) -> Result<Self, CliError> {
        let empty = GlobalArgs::default();
        let file = file.unwrap_or(&empty);
        let d = RunConfig::default();
        let threads = match flags.threads.or(file.threads) {
            Some(t) => Some(t),
            None => match env_threads.map(str::trim).filter(|s| !s.is_empty()) {
                Some(raw) => Some(parse_value::<usize>("SLT_THREADS", raw)?),
                None => None,
            },
        };
        let cfg = RunConfig {
            horizon: flags.horizon.or(file.horizon).unwrap_or(d.horizon),
            eps: flags.eps.or(file.eps).unwrap_or(d.eps),
            eps_grid: flags
                .eps_grid
                .clone()
                .or_else(|| file.eps_grid.clone())
                .map(|l| l.0)
                .unwrap_or(d.eps_grid),
            n_max: flags.n_max.or(file.n_max).unwrap_or(d.n_max),
            alpha: flags.alpha.or(file.alpha).unwrap_or(d.alpha),
            rel_tol: flags.rel_tol.or(file.rel_tol).unwrap_or(d.rel_tol),
            abs_tol: flags.abs_tol.or(file.abs_tol).unwrap_or(d.abs_tol),
            max_cells: flags.max_cells.or(file.max_cells).unwrap_or(d.max_cells),
            dt: flags.dt.or(file.dt).unwrap_or(d.dt),
            n_paths: flags.n_paths.or(file.n_paths).unwrap_or(d.n_paths),
            seed: flags.seed.or(file.seed).unwrap_or(d.seed),
            out_dir: flags.out_dir.clone().or_else(|| file.out_dir.clone()).unwrap_or(d.out_dir),
            threads,
            plot: flags.plot || file.plot,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Usage(msg));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("--T must be > 0, got {}", self.horizon));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return bad(format!("--eps must be >= 0, got {}", self.eps));
        }
        if self.eps_grid.is_empty() {
            return bad("--eps-grid must not be empty".into());
        }
        if self.eps_grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return bad(format!("--eps-grid values must be finite and >= 0, got {:?}", self.eps_grid));
        }
        if self.eps_grid.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("--eps-grid must be strictly decreasing, got {:?}", self.eps_grid));
        }
        if self.n_max < 2 {
            return bad(format!("--n-max must be >= 2, got {}", self.n_max));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("--alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return bad(format!("--dt must satisfy 0 < dt <= T, got {}", self.dt));
        }
        if self.n_paths < 2 {
            return bad(format!("--n-paths must be >= 2, got {}", self.n_paths));
        }
        if self.threads == Some(0) {
            return bad("--threads must be >= 1".into());
        }
        self.quadrature().validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_cells: self.max_cells,
            ..QuadratureConfig::default()
        }
    }

    fn params(&self, eps: f64) -> Result<ModelParams, CliError> {
        Ok(ModelParams::new(self.horizon, eps)?)
    }

    fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir).map_err(io_err(format!("creating {}", self.out_dir.display())))?;
        Ok(self.out_dir.join(name))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(format!("writing {}", path.display())))
}

/// `-0.0` prints as `0`.
fn clean(x: f64) -> f64 {
    x + 0.0
}

pub fn cmd_kernel(args: &KernelArgs, cfg: &RunConfig) -> Result<f64, CliError> {
    let params = cfg.params(cfg.eps)?;
    let times = &args.times.0;
    let level = args.n1 + args.n2;
    let value = if args.level_one || level == 1 {
        if args.level_one && level > 1 {
            return Err(CliError::Usage("--level-one conflicts with --n1/--n2 above level one".into()));
        }
        let [a, b] = times[..] else {
            return Err(CliError::Usage(format!("level-one kernel takes 2 times, got {}", times.len())));
        };
        kernel_f2([a, b], &params)?
    } else if level == 0 {
        return Err(CliError::Usage("give --level-one or --n1/--n2 with n1 + n2 >= 1".into()));
    } else {
        let point = KernelPoint::new(times.clone())?;
        kernel_f2n(MultiIndex::new(args.n1, args.n2), &point, &params)?
    };
    Ok(clean(value))
}

/// Both series at one `ε`.
#[derive(Debug, Clone)]
pub struct NormsAtEps {
    pub eps: f64,
    pub norm: SeriesResult,
    pub diff: SeriesResult,
}

pub fn compute_norms(cfg: &RunConfig) -> Result<Vec<NormsAtEps>, CliError> {
    let quad = cfg.quadrature();
    cfg.eps_grid
        .iter()
        .map(|&eps| {
            let params = cfg.params(eps)?;
            Ok(NormsAtEps {
                eps,
                norm: total_norm_sq(&params, cfg.n_max, &quad)?,
                diff: total_diff_norm_sq(&params, cfg.n_max, &quad)?,
            })
        })
        .collect()
}

pub fn norms_csv(cfg: &RunConfig, rows: &[NormsAtEps]) -> String {
    let mut out = String::new();
    out.push_str(NORMS_HEADER);
    out.push('\n');
    for r in rows {
        for (kind, series) in [("norm", &r.norm), ("diff", &r.diff)] {
            let mut line = |n: i64, value: f64, err: f64, converged: bool| {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{n},{kind},{:.16e},{:.16e},{converged}",
                    cfg.horizon,
                    r.eps,
                    clean(value),
                    err
                );
            };
            for level in &series.levels {
                line(level.n as i64, level.value, level.quad.abs_error_estimate, level.quad.converged);
            }
            let rem = &series.remainder;
            line(REMAINDER_ROW, rem.value, rem.abs_error_estimate, rem.converged);
            line(TOTAL_ROW, series.total, series.abs_error_estimate(), series.converged());
        }
    }
    out
}

fn check_converged<'a>(series: impl IntoIterator<Item = (f64, &'a SeriesResult)>) -> Result<(), CliError> {
    let failed: Vec<String> = series
        .into_iter()
        .filter(|(_, s)| !s.converged())
        .map(|(eps, _)| format!("eps = {eps}"))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!("{} (raise --max-cells or --rel-tol)", failed.join(", "))))
    }
}

pub fn cmd_norms(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let rows = compute_norms(cfg)?;
    let path = cfg.output("norms.csv")?;
    write_file(&path, &norms_csv(cfg, &rows))?;
    for r in &rows {
        println!("eps = {:e}: norm total {:e}, diff total {:e}", r.eps, r.norm.total, r.diff.total);
    }
    check_converged(rows.iter().flat_map(|r| [(r.eps, &r.norm), (r.eps, &r.diff)]))?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatePoint {
    pub eps: f64,
    pub value: f64,
    pub partial_sum: Option<f64>,
    pub remainder: Option<f64>,
    pub bound: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub alpha: f64,
    pub n_max: u32,
    pub synthetic: Option<f64>,
    pub alpha_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
    pub points: Vec<RatePoint>,
    pub varadhan_regime_exceeded: bool,
    pub bound_check: Vec<bool>,
}

pub fn compute_rate(cfg: &RunConfig, synthetic: Option<f64>) -> Result<RateReport, CliError> {
    if cfg.eps_grid.len() < 3 {
        return Err(CliError::Usage(format!("rate needs >= 3 eps values, got {}", cfg.eps_grid.len())));
    }
    if cfg.eps_grid.iter().any(|&e| e <= 0.0) {
        return Err(CliError::Usage("rate needs eps > 0 on the whole grid".into()));
    }
    if let Some(a) = synthetic {
        if !a.is_finite() {
            return Err(CliError::Usage(format!("--synthetic exponent must be finite, got {a}")));
        }
    }
    let quad = cfg.quadrature();
    let mut points = Vec::with_capacity(cfg.eps_grid.len());
    for &eps in &cfg.eps_grid {
        let params = cfg.params(eps)?;
        let bound = theoretical_bound(&params, cfg.alpha)?;
        let point = match synthetic {
            Some(a) => RatePoint {
                eps,
                value: eps.powf(a),
                partial_sum: None,
                remainder: None,
                bound,
                converged: true,
            },
            None => {
                let s = total_diff_norm_sq(&params, cfg.n_max, &quad)?;
                RatePoint {
                    eps,
                    value: s.total,
                    partial_sum: Some(s.partial_sum),
                    remainder: Some(s.remainder.value),
                    bound,
                    converged: s.converged(),
                }
            }
        };
        points.push(point);
    }
    let fit: RateFit = fit_rate(&points.iter().map(|p| (p.eps, p.value)).collect::<Vec<_>>())?;
    Ok(RateReport {
        horizon: cfg.horizon,
        alpha: cfg.alpha,
        n_max: cfg.n_max,
        synthetic,
        alpha_hat: fit.alpha_hat,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points_used: fit.points_used,
        varadhan_regime_exceeded: fit.alpha_hat > 0.5,
        bound_check: points.iter().map(|p| p.bound >= p.value).collect(),
        points,
    })
}

/// `log10_eps,log10_value,fit_line` rows.
pub fn rate_plot_csv(report: &RateReport) -> String {
    let mut out = String::from("log10_eps,log10_value,fit_line\n");
    for p in &report.points {
        let fit = (report.intercept + report.alpha_hat * p.eps.ln()) / std::f64::consts::LN_10;
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", p.eps.log10(), p.value.log10(), fit);
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn cmd_rate(args: &RateArgs, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let report = compute_rate(cfg, args.synthetic)?;
    let path = cfg.output("rate.json")?;
    write_file(&path, &to_json(&report))?;
    if cfg.plot {
        write_file(&cfg.output("rate_plot.csv")?, &rate_plot_csv(&report))?;
    }
    println!(
        "alpha_hat = {} (r^2 = {}), exceeds 0.5: {}, bound holds: {}",
        report.alpha_hat,
        report.r_squared,
        report.varadhan_regime_exceeded,
        report.bound_check.iter().all(|&b| b)
    );
    let unconverged: Vec<String> = report
        .points
        .iter()
        .filter(|p| !p.converged)
        .map(|p| format!("eps = {}", p.eps))
        .collect();
    if !unconverged.is_empty() {
        return Err(CliError::NotConverged(unconverged.join(", ")));
    }
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub eps: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub n_max: u32,
    pub mc_mean: f64,
    pub mc_mean_std_error: f64,
    pub mean_closed_form: f64,
    pub z_mean: f64,
    pub mc_variance: f64,
    pub mc_variance_std_error: f64,
    pub chaos_variance: f64,
    pub chaos_variance_error: f64,
    pub z_variance: f64,
    pub passed: bool,
}

pub fn compute_validate(cfg: &RunConfig) -> Result<ValidateReport, CliError> {
    if cfg.n_paths < 100 {
        return Err(CliError::Usage(format!("validate needs --n-paths >= 100, got {}", cfg.n_paths)));
    }
    if cfg.eps <= 0.0 {
        return Err(CliError::Usage("validate needs --eps > 0".into()));
    }
    let params = cfg.params(cfg.eps)?;
    let chaos = total_norm_sq(&params, cfg.n_max, &cfg.quadrature())?;
    check_converged([(cfg.eps, &chaos)])?;
    let mc = mc_moments(cfg.horizon, cfg.eps, cfg.dt, cfg.n_paths, cfg.seed)?;
    let exact_mean = mean_l_eps(cfg.horizon, cfg.eps)?;
    let z_mean = (mc.mean - exact_mean) / mc.std_error_mean;
    let chaos_err = chaos.abs_error_estimate();
    let z_variance = (mc.variance - chaos.total) / mc.std_error_variance.hypot(chaos_err);
    Ok(ValidateReport {
        horizon: cfg.horizon,
        eps: cfg.eps,
        dt: cfg.dt,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        n_max: cfg.n_max,
        mc_mean: mc.mean,
        mc_mean_std_error: mc.std_error_mean,
        mean_closed_form: exact_mean,
        z_mean,
        mc_variance: mc.variance,
        mc_variance_std_error: mc.std_error_variance,
        chaos_variance: chaos.total,
        chaos_variance_error: chaos_err,
        z_variance,
        passed: z_mean.abs() <= 3.0 && z_variance.abs() <= 3.0,
    })
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let report = compute_validate(cfg)?;
    let path = cfg.output("validate.json")?;
    write_file(&path, &to_json(&report))?;
    println!("z_mean = {}, z_variance = {}", report.z_mean, report.z_variance);
    if !report.passed {
        return Err(CliError::ValidationFailed(format!(
            "z_mean = {}, z_variance = {}",
            report.z_mean, report.z_variance
        )));
    }
    Ok(path)
}

pub fn cmd_bound(cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.eps <= 0.0 {
        return Err(CliError::Usage("bound needs --eps > 0".into()));
    }
    let b = bound_breakdown(&cfg.params(cfg.eps)?, cfg.alpha)?;
    let mut out = String::new();
    let _ = writeln!(out, "T = {}", cfg.horizon);
    let _ = writeln!(out, "eps = {}", cfg.eps);
    let _ = writeln!(out, "alpha = {}", b.hoelder.alpha);
    let _ = writeln!(out, "p = {}", b.hoelder.p);
    let _ = writeln!(out, "q = {}", b.hoelder.q);
    let _ = writeln!(out, "bound_series = {}", b.series);
    let _ = writeln!(out, "level_one_term = {}", b.level_one);
    let _ = writeln!(out, "higher_levels_term = {}", b.higher_levels);
    let _ = writeln!(out, "theoretical_bound = {}", b.total);
    Ok(out)
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Kernel(args) => println!("{}", cmd_kernel(args, cfg)?),
        Command::Norms => {
            cmd_norms(cfg)?;
        }
        Command::Rate(args) => {
            cmd_rate(args, cfg)?;
        }
        Command::Validate => {
            cmd_validate(cfg)?;
        }
        Command::Bound => print!("{}", cmd_bound(cfg)?),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.globals.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
            Some(parse_config_file(&text)?)
        }
        None => None,
    };
    let env_threads = std::env::var("SLT_THREADS").ok();
    let cfg = RunConfig::resolve(&cli.globals, file.as_ref(), env_threads.as_deref())?;
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(&cli.command, &cfg)),
        None => dispatch(&cli.command, &cfg),
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                    eprintln!("slt: {}", first.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("slt: {e}");
            e.exit_code()
        }
    }
}

/// Values of a CSV emitted by [`norms_csv`], keyed by `(eps bits, kind, n)`.
pub fn parse_norms_csv(text: &str) -> Result<BTreeMap<(u64, String, i64), f64>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(NORMS_HEADER) {
        return Err("unexpected header".into());
    }
    let mut out = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("bad row {line:?}"));
        }
        let eps: f64 = f[1].parse().map_err(|e| format!("{e}"))?;
        let n: i64 = f[2].parse().map_err(|e| format!("{e}"))?;
        let value: f64 = f[4].parse().map_err(|e| format!("{e}"))?;
        f[5].parse::<f64>().map_err(|e| format!("{e}"))?;
        f[6].parse::<bool>().map_err(|e| format!("{e}"))?;
        out.insert((eps.to_bits(), f[3].to_string(), n), value);
    }
    Ok(out)
}
