//! Penalty selection by cross-validated negative log-likelihood.

use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{self, default_diagonal_target, sample_cov, EstimatorKind, RidgeEstimate, Target};
use crate::matrix::{log_det_pd, SymMatrix};
use crate::rng::stream_rng;

/// Number of points in the default grid.
pub const DEFAULT_GRID_POINTS: usize = 50;

/// How a target is obtained for a given sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Zero,
    Identity,
    Scalar(f64),
    /// `1/diag(S)` of the data at hand.
    DefaultDiagonal,
    Fixed(Target),
}

impl TargetSpec {
    pub fn resolve(&self, s: &SymMatrix) -> Result<Target> {
        let t = match self {
            TargetSpec::Zero => Target::Zero,
            TargetSpec::Identity => Target::identity(),
            TargetSpec::Scalar(v) => Target::Scalar(*v),
            TargetSpec::DefaultDiagonal => default_diagonal_target(s)?,
            TargetSpec::Fixed(t) => t.clone(),
        };
        t.validate(s.order())?;
        Ok(t)
    }

    /// Parses `zero`, `identity`, `scalar:ψ`, `ddiag` or `file:PATH`.
    pub fn parse_code(code: &str) -> Result<Self> {
        match code {
            "zero" => Ok(TargetSpec::Zero),
            "identity" => Ok(TargetSpec::Identity),
            "ddiag" => Ok(TargetSpec::DefaultDiagonal),
            _ => {
                if let Some(v) = code.strip_prefix("scalar:") {
                    let psi: f64 = v
                        .parse()
                        .map_err(|_| Error::InvalidTarget(format!("cannot parse scalar target {v:?}")))?;
                    if !(psi.is_finite() && psi >= 0.0) {
                        return Err(Error::InvalidTarget(format!("scalar target must be >= 0, got {psi}")));
                    }
                    Ok(TargetSpec::Scalar(psi))
                } else if let Some(path) = code.strip_prefix("file:") {
                    let t = crate::io::read_sym_matrix_file(Path::new(path), false)?;
                    Ok(TargetSpec::Fixed(Target::Full(t)))
                } else {
                    Err(Error::InvalidTarget(format!(
                        "unknown target {code:?} (expected zero, identity, scalar:PSI, ddiag or file:PATH)"
                    )))
                }
            }
        }
    }

    pub fn code(&self) -> String {
        match self {
            TargetSpec::Zero => "zero".into(),
            TargetSpec::Identity => "identity".into(),
            TargetSpec::Scalar(v) => format!("scalar:{v}"),
            TargetSpec::DefaultDiagonal => "ddiag".into(),
            TargetSpec::Fixed(t) => t.label(),
        }
    }
}

/// Estimator kind together with its target rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub target: TargetSpec,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind, target: TargetSpec) -> Self {
        Self { kind, target }
    }

    /// Target fixed from `s`. Type II estimators always resolve to the zero target.
    pub fn resolve(&self, s: &SymMatrix) -> Result<ResolvedEstimator> {
        let target = if self.kind.uses_target() {
            self.target.resolve(s)?
        } else {
            Target::Zero
        };
        Ok(ResolvedEstimator {
            kind: self.kind,
            target,
        })
    }
}

/// Produces a fit for a covariance matrix and a penalty.
pub trait Fitter: Sync {
    fn fit(&self, s: &SymMatrix, lambda: f64) -> Result<RidgeEstimate>;
}

/// An estimator with a fixed target, penalty on its own scale.
#[derive(Debug, Clone)]
pub struct ResolvedEstimator {
    pub kind: EstimatorKind,
    pub target: Target,
}

impl Fitter for ResolvedEstimator {
    fn fit(&self, s: &SymMatrix, lambda: f64) -> Result<RidgeEstimate> {
        estimators::fit(self.kind, s, &self.target, lambda)
    }
}

/// Wraps a fitter and counts its calls.
#[derive(Debug)]
pub struct CountingFitter<F> {
    inner: F,
    count: AtomicUsize,
}

impl<F: Fitter> CountingFitter<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::SeqCst);
    }
}

impl<F: Fitter> Fitter for CountingFitter<F> {
    fn fit(&self, s: &SymMatrix, lambda: f64) -> Result<RidgeEstimate> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.inner.fit(s, lambda)
    }
}

/// Cross-validation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvScheme {
    KFold(usize),
    Loocv,
    ApproxLoocv,
}

impl CvScheme {
    pub fn name(self) -> &'static str {
        match self {
            CvScheme::KFold(_) => "kfold",
            CvScheme::Loocv => "loocv",
            CvScheme::ApproxLoocv => "aloocv",
        }
    }
}

impl FromStr for CvScheme {
    type Err = Error;

    /// Parses the scheme name; k-fold defaults to 5 folds.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kfold" => Ok(CvScheme::KFold(5)),
            "loocv" => Ok(CvScheme::Loocv),
            "aloocv" => Ok(CvScheme::ApproxLoocv),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme {other:?} (expected kfold, loocv or aloocv)"
            ))),
        }
    }
}

/// Cross-validation settings.
#[derive(Debug, Clone)]
pub struct CvConfig {
    pub scheme: CvScheme,
    /// Penalties on the estimator's own scale; `None` selects [`default_grid_for`].
    pub grid: Option<Vec<f64>>,
    pub fold_seed: u64,
    pub estimator: EstimatorSpec,
}

impl CvConfig {
    pub fn new(scheme: CvScheme, estimator: EstimatorSpec) -> Self {
        Self {
            scheme,
            grid: None,
            fold_seed: 0,
            estimator,
        }
    }
}

/// Scores over the grid and the selected penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub grid: Vec<f64>,
    pub scores: Vec<f64>,
    pub lambda_star: f64,
    pub scheme: CvScheme,
}

/// `n` log-spaced points on `[min, max]`.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid needs 0 < min <= max and at least one point, got [{min}, {max}] with {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    if min == max {
        return Err(Error::InvalidParameter("grid with several points needs min < max".into()));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else if i == 0 {
                min
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// `n` log-spaced points on `[1e-4·g, 1e4·g]`, `g = tr(S)/p`, on the alternative scale.
pub fn default_grid(s: &SymMatrix, n: usize) -> Result<Vec<f64>> {
    let g = s.trace() / s.order() as f64;
    if !(g > 0.0) {
        return Err(Error::InvalidParameter("default grid needs tr(S) > 0".into()));
    }
    log_grid(1e-4 * g, 1e4 * g, n)
}

/// [`default_grid`] translated to the native penalty scale of `kind`.
pub fn default_grid_for(kind: EstimatorKind, s: &SymMatrix, n: usize) -> Result<Vec<f64>> {
    Ok(default_grid(s, n)?
        .into_iter()
        .map(|l| estimators::native_penalty(kind, l))
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid is empty".into()));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidPenalty("grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Splits `0..n` into `k` near-equal folds from a seeded shuffle.
///
/// Members are sorted within each fold and folds are ordered by their
/// smallest member.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidFolds(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidFolds(format!("{k} folds for {n} observations")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, 0));
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in idx.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds.sort_by_key(|f| f[0]);
    Ok(folds)
}

fn select_rows(y: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), y.ncols(), |i, j| y[(rows[i], j)])
}

/// Per-fold held-in and held-out covariances, fixed before any fit.
#[derive(Debug, Clone)]
pub struct FoldData {
    pub s_in: SymMatrix,
    pub s_out: SymMatrix,
    pub n_out: usize,
}

pub fn prepare_folds(y: &DMatrix<f64>, folds: &[Vec<usize>]) -> Result<Vec<FoldData>> {
    let n = y.nrows();
    folds
        .iter()
        .map(|out| {
            let mut held = vec![true; n];
            for &i in out {
                held[i] = false;
            }
            let ins: Vec<usize> = (0..n).filter(|&i| held[i]).collect();
            if ins.is_empty() {
                return Err(Error::InvalidFolds("a fold leaves no held-in rows".into()));
            }
            Ok(FoldData {
                s_in: sample_cov(&select_rows(y, &ins), false)?,
                s_out: sample_cov(&select_rows(y, out), false)?,
                n_out: out.len(),
            })
        })
        .collect()
}

/// `Σₖ nₖ{−ln|Ω₋ₖ| + tr(Ω₋ₖSₖ)}` over prepared folds.
pub fn cv_score_folds(folds: &[FoldData], lambda: f64, fitter: &dyn Fitter) -> Result<f64> {
    let mut total = 0.0;
    for f in folds {
        let est = fitter.fit(&f.s_in, lambda)?;
        let ld = log_det_pd(&est.omega)?;
        total += f.n_out as f64 * (-ld + estimators::trace_product(&est.omega, &f.s_out));
    }
    Ok(total)
}

fn resolve_for(y: &DMatrix<f64>, config: &CvConfig) -> Result<ResolvedEstimator> {
    let s = sample_cov(y, false)?;
    config.estimator.resolve(&s)
}

/// K-fold cross-validation score at `lambda`.
pub fn kfold_cv_score(y: &DMatrix<f64>, k: usize, lambda: f64, config: &CvConfig) -> Result<f64> {
    let folds = fold_assignment(y.nrows(), k, config.fold_seed)?;
    let data = prepare_folds(y, &folds)?;
    cv_score_folds(&data, lambda, &resolve_for(y, config)?)
}

fn loo_folds(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 {
        return Err(Error::InvalidFolds(format!("leave-one-out needs n >= 2, got {n}")));
    }
    Ok((0..n).map(|i| vec![i]).collect())
}

/// Leave-one-out cross-validation score at `lambda` (n fits).
pub fn exact_loocv(y: &DMatrix<f64>, lambda: f64, config: &CvConfig) -> Result<f64> {
    let data = prepare_folds(y, &loo_folds(y.nrows())?)?;
    cv_score_folds(&data, lambda, &resolve_for(y, config)?)
}

/// Approximate leave-one-out score from a single full-data fit:
/// `½[tr(SΩ) − ln|Ω|] + (1/(2n(n−1)))Σᵢγᵢ` with
/// `γᵢ = Σ_{jk}[(Ω⁻¹ − YᵢYᵢᵀ) ∘ (Ω(S − YᵢYᵢᵀ)Ω)]_{jk}`.
pub fn approx_loocv_with(y: &DMatrix<f64>, s: &SymMatrix, lambda: f64, fitter: &dyn Fitter) -> Result<f64> {
    let n = y.nrows();
    if n < 2 {
        return Err(Error::InvalidFolds(format!("leave-one-out needs n >= 2, got {n}")));
    }
    let est = fitter.fit(s, lambda)?;
    let omega = est.omega.as_matrix();
    let sigma = est.sigma.as_matrix();
    let a = omega * s.as_matrix() * omega;
    let sigma_a = sigma.component_mul(&a).sum();
    let mut gamma = 0.0;
    for i in 0..n {
        let yi = y.row(i).transpose();
        let u = omega * &yi;
        let usu = (u.transpose() * sigma * &u)[(0, 0)];
        let yay = (yi.transpose() * &a * &yi)[(0, 0)];
        let yu = yi.dot(&u);
        gamma += sigma_a - usu - yay + yu * yu;
    }
    let ll = log_det_pd(&est.omega)? - estimators::trace_product(s, &est.omega);
    Ok(-0.5 * ll + gamma / (2.0 * n as f64 * (n - 1) as f64))
}

/// Approximate leave-one-out score at `lambda`.
pub fn approx_loocv(y: &DMatrix<f64>, lambda: f64, config: &CvConfig) -> Result<f64> {
    let s = sample_cov(y, false)?;
    let fitter = config.estimator.resolve(&s)?;
    approx_loocv_with(y, &s, lambda, &fitter)
}

/// Grid argmin, ties going to the larger penalty.
pub fn grid_argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate() {
        if v <= scores[best] {
            best = i;
        }
    }
    best
}

/// Evaluates the configured score over the grid with a given fitter.
pub fn select_lambda_with(y: &DMatrix<f64>, config: &CvConfig, fitter: &dyn Fitter) -> Result<CvResult> {
    let n = y.nrows();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let s = sample_cov(y, false)?;
    let grid = match &config.grid {
        Some(g) => g.clone(),
        None => default_grid_for(config.estimator.kind, &s, DEFAULT_GRID_POINTS)?,
    };
    check_grid(&grid)?;
    let scores: Vec<f64> = match config.scheme {
        CvScheme::ApproxLoocv => {
            if n < 2 {
                return Err(Error::InvalidFolds(format!("leave-one-out needs n >= 2, got {n}")));
            }
            grid.par_iter()
                .map(|&l| approx_loocv_with(y, &s, l, fitter))
                .collect::<Result<Vec<f64>>>()?
        }
        CvScheme::KFold(_) | CvScheme::Loocv => {
            let folds = match config.scheme {
                CvScheme::KFold(k) => fold_assignment(n, k, config.fold_seed)?,
                _ => loo_folds(n)?,
            };
            let data = prepare_folds(y, &folds)?;
            grid.par_iter()
                .map(|&l| cv_score_folds(&data, l, fitter))
                .collect::<Result<Vec<f64>>>()?
        }
    };
    if let Some(i) = scores.iter().position(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit(format!("non-finite score at lambda {}", grid[i])));
    }
    let lambda_star = grid[grid_argmin(&scores)];
    Ok(CvResult {
        grid,
        scores,
        lambda_star,
        scheme: config.scheme,
    })
}

/// Evaluates the configured score over the grid and picks its minimizer.
pub fn select_lambda(y: &DMatrix<f64>, config: &CvConfig) -> Result<CvResult> {
    let fitter = resolve_for(y, config)?;
    select_lambda_with(y, config, &fitter)
}
