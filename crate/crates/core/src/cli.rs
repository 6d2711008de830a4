//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or numerical errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::cv::{self, CvConfig, CvScheme, EstimatorSpec, TargetSpec};
use crate::error::Error;
use crate::estimators::{fit, sample_cov, EstimatorKind, Target};
use crate::ggm;
use crate::io::{format_value, matrix_to_string, read_matrix_file, read_sym_matrix_file};
use crate::matrix::{inv_pd, SymMatrix};
use crate::moments::{bias_approx_type_ii, mc_moments};
use crate::simulation::{self, Loss, PopulationSpec, RiskConfig, Topology};

const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "ridgeprec", version, about = "Ridge estimation of precision matrices")]
struct Cli {
    /// Random seed (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 = automatic
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON file with default values for any flag; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a precision matrix
    Estimate(EstimateArgs),
    /// Cross-validate the penalty over a grid
    Cv(CvArgs),
    /// Select graph edges by local false discovery rates
    Ggm(GgmArgs),
    /// Median-loss risk curves on simulated data
    Simulate(SimulateArgs),
    /// Bias approximation of the type II covariance estimate
    Moments(MomentsArgs),
}

macro_rules! merge_fields {
    ($a:expr, $b:expr; $($f:ident),*) => {
        $( if $a.$f.is_none() { $a.$f = $b.$f.take(); } )*
    };
}

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct EstimateArgs {
    /// Data matrix CSV, one observation per row
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sample covariance CSV
    #[arg(long)]
    cov: Option<PathBuf>,
    /// Input files have a header line
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    header: Option<bool>,
    /// Subtract column means before forming the covariance
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    center: Option<bool>,
    /// archetype-1, archetype-2, alt-1 or alt-2 (default alt-2)
    #[arg(long)]
    estimator: Option<String>,
    /// zero, identity, scalar:PSI, ddiag or file:PATH (default identity)
    #[arg(long)]
    target: Option<String>,
    /// Penalty on the estimator's own scale
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Pick the penalty by approximate leave-one-out over the default grid
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    auto_lambda: Option<bool>,
    /// Write the precision matrix here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the covariance estimate here
    #[arg(long)]
    sigma_out: Option<PathBuf>,
}

impl EstimateArgs {
    fn merge(&mut self, mut o: Self) {
        merge_fields!(self, o; data, cov, header, center, estimator, target, lambda, auto_lambda, output, sigma_out);
    }
}

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct CvArgs {
    /// Data matrix CSV, one observation per row
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    header: Option<bool>,
    /// kfold, loocv or aloocv (default aloocv)
    #[arg(long)]
    scheme: Option<String>,
    /// Number of folds for kfold (default 5)
    #[arg(long)]
    k: Option<usize>,
    /// Smallest grid penalty
    #[arg(long, allow_negative_numbers = true)]
    grid_min: Option<f64>,
    /// Largest grid penalty
    #[arg(long, allow_negative_numbers = true)]
    grid_max: Option<f64>,
    /// Number of grid points (default 50)
    #[arg(long)]
    grid_n: Option<usize>,
    /// Seed of the fold shuffle (default: --seed)
    #[arg(long)]
    fold_seed: Option<u64>,
    /// archetype-1, archetype-2, alt-1 or alt-2 (default alt-2)
    #[arg(long)]
    estimator: Option<String>,
    /// zero, identity, scalar:PSI, ddiag or file:PATH (default identity)
    #[arg(long)]
    target: Option<String>,
}

impl CvArgs {
    fn merge(&mut self, mut o: Self) {
        merge_fields!(self, o; data, header, scheme, k, grid_min, grid_max, grid_n, fold_seed, estimator, target);
    }
}

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct GgmArgs {
    /// Data matrix CSV, one observation per row
    #[arg(long)]
    data: Option<PathBuf>,
    /// Precision matrix CSV
    #[arg(long)]
    omega: Option<PathBuf>,
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    header: Option<bool>,
    /// archetype-1, archetype-2, alt-1 or alt-2 (default alt-1)
    #[arg(long)]
    estimator: Option<String>,
    /// zero, identity, scalar:PSI, ddiag or file:PATH (default ddiag)
    #[arg(long)]
    target: Option<String>,
    /// Penalty on the estimator's own scale
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Pick the penalty by approximate leave-one-out over the default grid
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    auto_lambda: Option<bool>,
    /// Selection threshold on 1 - lFDR (default 0.99)
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    /// Write the sparsified precision matrix here
    #[arg(long)]
    sparse_out: Option<PathBuf>,
    /// Write the fit report here (default: standard error)
    #[arg(long)]
    report_out: Option<PathBuf>,
}

impl GgmArgs {
    fn merge(&mut self, mut o: Self) {
        merge_fields!(self, o; data, omega, header, estimator, target, lambda, auto_lambda, threshold, sparse_out, report_out);
    }
}

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SimulateArgs {
    /// random, chain, star or clique (default star)
    #[arg(long)]
    topology: Option<String>,
    /// Dimension (default 25)
    #[arg(long)]
    p: Option<usize>,
    /// Comma-separated sample sizes (default 5,10,25)
    #[arg(long)]
    n: Option<String>,
    /// Replicates per sample size (default 100)
    #[arg(long)]
    reps: Option<usize>,
    /// frobenius or quadratic (default quadratic)
    #[arg(long)]
    loss: Option<String>,
    /// Comma-separated estimator names (default all four)
    #[arg(long)]
    estimators: Option<String>,
    /// zero, identity, scalar:PSI, ddiag, truth or file:PATH (default ddiag)
    #[arg(long)]
    target: Option<String>,
    /// Smallest alternative-scale penalty
    #[arg(long, allow_negative_numbers = true)]
    grid_min: Option<f64>,
    /// Largest alternative-scale penalty
    #[arg(long, allow_negative_numbers = true)]
    grid_max: Option<f64>,
    /// Number of grid points (default 50)
    #[arg(long)]
    grid_n: Option<usize>,
}

impl SimulateArgs {
    fn merge(&mut self, mut o: Self) {
        merge_fields!(self, o; topology, p, n, reps, loss, estimators, target, grid_min, grid_max, grid_n);
    }
}

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct MomentsArgs {
    /// Population covariance CSV
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[arg(long, default_missing_value = "true", num_args = 0..=1)]
    header: Option<bool>,
    /// Sample size
    #[arg(long)]
    n: Option<usize>,
    /// Alternative-scale penalty
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Monte-Carlo replicates; omitted means no simulation
    #[arg(long)]
    mc_reps: Option<usize>,
    /// Target of the simulated estimator (default zero)
    #[arg(long)]
    target: Option<String>,
}

impl MomentsArgs {
    fn merge(&mut self, mut o: Self) {
        merge_fields!(self, o; sigma, header, n, lambda, mc_reps, target);
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Output of one run before it is written out.
struct Output {
    stdout: String,
    stderr: String,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(out) => {
            eprint!("{}", out.stderr);
            print!("{}", out.stdout);
            0
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load_config(path: &Path) -> CliResult<serde_json::Map<String, serde_json::Value>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(serde_json::Value::Object(m)) => Ok(m),
        Ok(_) => usage("config must be a JSON object"),
        Err(e) => usage(format!("invalid config JSON: {e}")),
    }
}

fn from_config<T: for<'de> Deserialize<'de> + Default>(map: serde_json::Map<String, serde_json::Value>) -> CliResult<T> {
    serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

fn execute(mut cli: Cli) -> CliResult<Output> {
    let mut file = match &cli.config {
        Some(p) => load_config(p)?,
        None => serde_json::Map::new(),
    };
    let take_u64 = |file: &mut serde_json::Map<String, serde_json::Value>, key: &str| -> CliResult<Option<u64>> {
        match file.remove(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("config key {key} must be a non-negative integer"))),
        }
    };
    if cli.seed.is_none() {
        cli.seed = take_u64(&mut file, "seed")?;
    } else {
        file.remove("seed");
    }
    let file_threads = take_u64(&mut file, "threads")?;
    let threads = cli.threads.or(file_threads.map(|t| t as usize)).unwrap_or(0);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let name = match &cli.command {
        Command::Estimate(_) => "estimate",
        Command::Cv(_) => "cv",
        Command::Ggm(_) => "ggm",
        Command::Simulate(_) => "simulate",
        Command::Moments(_) => "moments",
    };
    let header = format!(
        "# ridgeprec {} subcommand={} seed={} threads={}\n",
        env!("CARGO_PKG_VERSION"),
        name,
        seed,
        threads
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    let mut out = pool.install(|| -> CliResult<Output> {
        match cli.command {
            Command::Estimate(mut a) => {
                a.merge(from_config(file)?);
                cmd_estimate(a)
            }
            Command::Cv(mut a) => {
                a.merge(from_config(file)?);
                cmd_cv(a, seed)
            }
            Command::Ggm(mut a) => {
                a.merge(from_config(file)?);
                cmd_ggm(a)
            }
            Command::Simulate(mut a) => {
                a.merge(from_config(file)?);
                cmd_simulate(a, seed)
            }
            Command::Moments(mut a) => {
                a.merge(from_config(file)?);
                cmd_moments(a, seed)
            }
        }
    })?;
    out.stderr.insert_str(0, &header);
    Ok(out)
}

fn parse_kind(s: Option<&str>, default: EstimatorKind) -> CliResult<EstimatorKind> {
    match s {
        None => Ok(default),
        Some(s) => s.parse().map_err(|e: Error| CliError::Usage(e.to_string())),
    }
}

fn parse_target(s: Option<&str>, default: &str) -> CliResult<TargetSpec> {
    let code = s.unwrap_or(default);
    match TargetSpec::parse_code(code) {
        Ok(t) => Ok(t),
        Err(Error::Io(e)) => Err(CliError::Data(Error::Io(e))),
        Err(e @ Error::InvalidMatrix(_)) | Err(e @ Error::Parse(_)) | Err(e @ Error::EmptyData) => {
            Err(CliError::Data(e))
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}

fn check_lambda(lambda: f64) -> CliResult<f64> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(lambda)
    } else {
        usage("lambda must be positive")
    }
}

enum Penalty {
    Fixed(f64),
    Auto,
}

fn penalty_choice(lambda: Option<f64>, auto: Option<bool>) -> CliResult<Penalty> {
    match (lambda, auto.unwrap_or(false)) {
        (Some(_), true) => usage("give either --lambda or --auto-lambda, not both"),
        (Some(l), false) => Ok(Penalty::Fixed(check_lambda(l)?)),
        (None, true) => Ok(Penalty::Auto),
        (None, false) => usage("one of --lambda or --auto-lambda is required"),
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Data(Error::Io(e)))
}

fn auto_lambda(y: &DMatrix<f64>, spec: &EstimatorSpec) -> CliResult<f64> {
    let config = CvConfig::new(CvScheme::ApproxLoocv, spec.clone());
    Ok(cv::select_lambda(y, &config)?.lambda_star)
}

fn cmd_estimate(a: EstimateArgs) -> CliResult<Output> {
    let kind = parse_kind(a.estimator.as_deref(), EstimatorKind::AltII)?;
    let spec = EstimatorSpec::new(kind, parse_target(a.target.as_deref(), "identity")?);
    let penalty = penalty_choice(a.lambda, a.auto_lambda)?;
    let header = a.header.unwrap_or(false);
    let center = a.center.unwrap_or(false);
    let (s, y) = match (&a.data, &a.cov) {
        (Some(d), None) => {
            let y = read_matrix_file(d, header)?;
            (sample_cov(&y, center)?, Some(y))
        }
        (None, Some(c)) => (read_sym_matrix_file(c, header)?, None),
        _ => return usage("exactly one of --data or --cov is required"),
    };
    let lambda = match penalty {
        Penalty::Fixed(l) => l,
        Penalty::Auto => match &y {
            Some(y) if !center => auto_lambda(y, &spec)?,
            Some(_) => return usage("--auto-lambda works on uncentered data; drop --center"),
            None => return usage("--auto-lambda needs --data"),
        },
    };
    let est = spec.resolve(&s).and_then(|r| fit(r.kind, &s, &r.target, lambda))?;
    let mut stderr = format!("# estimator={} lambda={}\n", kind, format_value(lambda));
    if let Some(p) = &a.sigma_out {
        write_file(p, &matrix_to_string(est.sigma.as_matrix()))?;
        let _ = writeln!(stderr, "# covariance written to {}", p.display());
    }
    let text = matrix_to_string(est.omega.as_matrix());
    let stdout = match &a.output {
        Some(p) => {
            write_file(p, &text)?;
            String::new()
        }
        None => text,
    };
    Ok(Output { stdout, stderr })
}

fn cmd_cv(a: CvArgs, seed: u64) -> CliResult<Output> {
    let kind = parse_kind(a.estimator.as_deref(), EstimatorKind::AltII)?;
    let spec = EstimatorSpec::new(kind, parse_target(a.target.as_deref(), "identity")?);
    let scheme = match a.scheme.as_deref().unwrap_or("aloocv") {
        "kfold" => {
            let k = a.k.unwrap_or(5);
            if k < 2 {
                return usage("--k must be at least 2");
            }
            CvScheme::KFold(k)
        }
        "loocv" => CvScheme::Loocv,
        "aloocv" => CvScheme::ApproxLoocv,
        other => return usage(format!("unknown scheme {other:?} (expected kfold, loocv or aloocv)")),
    };
    let Some(data) = &a.data else {
        return usage("--data is required");
    };
    let y = read_matrix_file(data, a.header.unwrap_or(false))?;
    let npts = a.grid_n.unwrap_or(cv::DEFAULT_GRID_POINTS);
    if npts == 0 {
        return usage("--grid-n must be positive");
    }
    let grid = match (a.grid_min, a.grid_max) {
        (None, None) => cv::default_grid_for(kind, &sample_cov(&y, false)?, npts)?,
        (Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi >= lo) {
                return usage("grid bounds must satisfy 0 < grid-min <= grid-max");
            }
            cv::log_grid(lo, hi, npts).map_err(|e| CliError::Usage(e.to_string()))?
        }
        _ => return usage("give both --grid-min and --grid-max or neither"),
    };
    let mut config = CvConfig::new(scheme, spec);
    config.grid = Some(grid);
    config.fold_seed = a.fold_seed.unwrap_or(seed);
    let res = cv::select_lambda(&y, &config)?;
    let mut stdout = String::from("lambda,score\n");
    for (l, s) in res.grid.iter().zip(&res.scores) {
        let _ = writeln!(stdout, "{},{}", format_value(*l), format_value(*s));
    }
    let _ = writeln!(stdout, "lambda_star,{}", format_value(res.lambda_star));
    let stderr = format!("# scheme={} estimator={} fold_seed={}\n", scheme.name(), kind, config.fold_seed);
    Ok(Output { stdout, stderr })
}

fn cmd_ggm(a: GgmArgs) -> CliResult<Output> {
    let kind = parse_kind(a.estimator.as_deref(), EstimatorKind::AltI)?;
    let threshold = a.threshold.unwrap_or(ggm::DEFAULT_THRESHOLD);
    if !(threshold > 0.0 && threshold <= 1.0) {
        return usage("threshold must lie in (0, 1]");
    }
    let header = a.header.unwrap_or(false);
    let mut report = String::new();
    let omega = match (&a.data, &a.omega) {
        (Some(d), None) => {
            let spec = EstimatorSpec::new(kind, parse_target(a.target.as_deref(), "ddiag")?);
            let penalty = penalty_choice(a.lambda, a.auto_lambda)?;
            let y = read_matrix_file(d, header)?;
            let s = sample_cov(&y, false)?;
            let lambda = match penalty {
                Penalty::Fixed(l) => l,
                Penalty::Auto => auto_lambda(&y, &spec)?,
            };
            let r = spec.resolve(&s)?;
            let _ = writeln!(report, "lambda,{}", format_value(lambda));
            fit(r.kind, &s, &r.target, lambda)?.omega
        }
        (None, Some(o)) => {
            if a.lambda.is_some() || a.auto_lambda.unwrap_or(false) {
                return usage("--lambda and --auto-lambda apply only with --data");
            }
            read_sym_matrix_file(o, header)?
        }
        _ => return usage("exactly one of --data or --omega is required"),
    };
    let pc = ggm::to_partial_corr(&omega)?;
    let lfdr = ggm::fit_lfdr(&pc.off_diagonal())?;
    let probs = ggm::lfdr_per_edge(&pc, &lfdr);
    let selected = ggm::select_edges(&pc, &lfdr, threshold)?;
    let sparse = ggm::sparsify(&omega, &selected)?;
    let mut stdout = String::from("i,j,partial_corr,one_minus_lfdr,selected\n");
    for ((i, j), prob) in probs.iter() {
        let _ = writeln!(
            stdout,
            "{},{},{},{},{}",
            i + 1,
            j + 1,
            format_value(pc.get(i, j)),
            format_value(prob),
            u8::from(selected.contains(i, j))
        );
    }
    let _ = writeln!(report, "eta0,{}", format_value(lfdr.eta0));
    let _ = writeln!(report, "kappa,{}", format_value(lfdr.kappa));
    let _ = writeln!(report, "null_window,{}", format_value(lfdr.diagnostics.window));
    let _ = writeln!(report, "bandwidth,{}", format_value(lfdr.diagnostics.bandwidth));
    let _ = writeln!(report, "threshold,{}", format_value(threshold));
    let _ = writeln!(report, "selected_edges,{}", selected.len());
    let _ = writeln!(report, "min_eigenvalue,{}", format_value(sparse.min_eigenvalue));
    let mut stderr = String::new();
    if !sparse.is_pd() {
        let _ = writeln!(
            stderr,
            "warning: sparsified precision is not positive definite (smallest eigenvalue {})",
            format_value(sparse.min_eigenvalue)
        );
    }
    if let Some(p) = &a.sparse_out {
        write_file(p, &matrix_to_string(sparse.matrix.as_matrix()))?;
    }
    match &a.report_out {
        Some(p) => write_file(p, &report)?,
        None => stderr.push_str(&report),
    }
    Ok(Output { stdout, stderr })
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    let v: Option<Vec<T>> = s.split(',').map(|x| x.trim().parse().ok()).collect();
    match v {
        Some(v) if !v.is_empty() => Ok(v),
        _ => usage(format!("cannot parse {what} list {s:?}")),
    }
}

fn cmd_simulate(a: SimulateArgs, seed: u64) -> CliResult<Output> {
    let topology: Topology = a
        .topology
        .as_deref()
        .unwrap_or("star")
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let p = a.p.unwrap_or(25);
    let sizes: Vec<usize> = parse_list(a.n.as_deref().unwrap_or("5,10,25"), "sample size")?;
    if sizes.contains(&0) {
        return usage("sample sizes must be positive");
    }
    let reps = a.reps.unwrap_or(100);
    if reps == 0 {
        return usage("--reps must be positive");
    }
    let loss: Loss = a
        .loss
        .as_deref()
        .unwrap_or("quadratic")
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let kinds: Vec<EstimatorKind> = match &a.estimators {
        None => EstimatorKind::ALL.to_vec(),
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<Result<_, Error>>()
            .map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let spec = PopulationSpec { topology, p, seed };
    let omega = simulation::population_precision(&spec)?;
    let target = match a.target.as_deref().unwrap_or("ddiag") {
        "truth" => TargetSpec::Fixed(Target::Full(omega.clone())),
        code => parse_target(Some(code), "ddiag")?,
    };
    let npts = a.grid_n.unwrap_or(cv::DEFAULT_GRID_POINTS);
    if npts == 0 {
        return usage("--grid-n must be positive");
    }
    let grid = match (a.grid_min, a.grid_max) {
        (None, None) => cv::default_grid(&inv_pd(&omega)?, npts)?,
        (Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi >= lo) {
                return usage("grid bounds must satisfy 0 < grid-min <= grid-max");
            }
            cv::log_grid(lo, hi, npts).map_err(|e| CliError::Usage(e.to_string()))?
        }
        _ => return usage("give both --grid-min and --grid-max or neither"),
    };
    let config = RiskConfig {
        spec,
        sample_sizes: sizes,
        grid,
        estimators: kinds.iter().map(|&k| EstimatorSpec::new(k, target.clone())).collect(),
        reps,
        loss,
        base_seed: seed,
        keep_replicates: false,
    };
    let curve = simulation::risk_curve(&config)?;
    let mut stdout = String::from("estimator,target,n,lambda,median_loss\n");
    for r in &curve.rows {
        let _ = writeln!(
            stdout,
            "{},{},{},{},{}",
            r.estimator,
            r.target,
            r.n,
            format_value(r.lambda),
            format_value(r.median_loss)
        );
    }
    let stderr = format!("# topology={} p={} reps={} loss={}\n", config.spec.topology.name(), p, reps, loss);
    Ok(Output { stdout, stderr })
}

fn cmd_moments(a: MomentsArgs, seed: u64) -> CliResult<Output> {
    let Some(path) = &a.sigma else {
        return usage("--sigma is required");
    };
    let Some(n) = a.n else {
        return usage("--n is required");
    };
    if n == 0 {
        return usage("--n must be positive");
    }
    let Some(lambda) = a.lambda else {
        return usage("--lambda is required");
    };
    let lambda = check_lambda(lambda)?;
    let target = parse_target(a.target.as_deref(), "zero")?;
    let sigma: SymMatrix = read_sym_matrix_file(path, a.header.unwrap_or(false))?;
    let approx = bias_approx_type_ii(&sigma, n, lambda)?;
    let mut stdout = String::from("# approximation\n");
    stdout.push_str(&matrix_to_string(approx.expected_sigma.as_matrix()));
    if let Some(reps) = a.mc_reps {
        if reps == 0 {
            return usage("--mc-reps must be positive");
        }
        let t = target.resolve(&sigma)?;
        let mc = mc_moments(&sigma, n, lambda, &t, reps, seed)?;
        stdout.push_str("# monte-carlo mean\n");
        stdout.push_str(&matrix_to_string(mc.mean.as_matrix()));
        stdout.push_str("# monte-carlo standard error\n");
        stdout.push_str(&matrix_to_string(mc.std_error.as_matrix()));
    }
    Ok(Output {
        stdout,
        stderr: format!("# n={} lambda={}\n", n, format_value(lambda)),
    })
}
