//! Population precision matrices, Gaussian sampling, losses and risk curves.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cv::EstimatorSpec;
use crate::error::{Error, Result};
use crate::estimators::{fit_common_scale, sample_cov, EstimatorKind, Target};
use crate::matrix::{inv_pd, is_pd, SymMatrix};
use crate::rng::{stream_index, stream_rng};

/// Graph structure of a population precision matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    /// `(1/n0)YᵀY` for standard normal `Y` with `n0` rows.
    Random { n0: usize },
    /// Unit diagonal, 0.25 on the first off-diagonal band.
    Chain,
    /// Unit diagonal, `Ω₁,ⱼ = 1/j` for `j ≥ 2`.
    Star,
    /// Equal diagonal blocks with constant off-diagonal value.
    Clique { blocks: usize, offdiag: f64 },
}

impl Topology {
    pub fn random() -> Self {
        Topology::Random { n0: 10_000 }
    }

    pub fn clique() -> Self {
        Topology::Clique {
            blocks: 5,
            offdiag: 0.25,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Random { .. } => "random",
            Topology::Chain => "chain",
            Topology::Star => "star",
            Topology::Clique { .. } => "clique",
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Topology::random()),
            "chain" => Ok(Topology::Chain),
            "star" => Ok(Topology::Star),
            "clique" => Ok(Topology::clique()),
            other => Err(Error::InvalidParameter(format!(
                "unknown topology {other:?} (expected random, chain, star or clique)"
            ))),
        }
    }
}

/// A population precision matrix recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpec {
    pub topology: Topology,
    pub p: usize,
    pub seed: u64,
}

/// Builds the population precision matrix for `spec`.
pub fn population_precision(spec: &PopulationSpec) -> Result<SymMatrix> {
    let p = spec.p;
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be at least 2, got {p}")));
    }
    let omega = match &spec.topology {
        Topology::Random { n0 } => {
            if *n0 == 0 {
                return Err(Error::InvalidParameter("n0 must be positive".into()));
            }
            let mut rng = stream_rng(spec.seed, u64::MAX);
            let y = DMatrix::from_fn(*n0, p, |_, _| rng.sample::<f64, _>(StandardNormal));
            SymMatrix::from_dmatrix(y.tr_mul(&y) / *n0 as f64)?
        }
        Topology::Chain => SymMatrix::from_upper_fn(p, |i, j| match j - i {
            0 => 1.0,
            1 => 0.25,
            _ => 0.0,
        })?,
        Topology::Star => SymMatrix::from_upper_fn(p, |i, j| {
            if i == j {
                1.0
            } else if i == 0 {
                1.0 / (j + 1) as f64
            } else {
                0.0
            }
        })?,
        Topology::Clique { blocks, offdiag } => {
            if *blocks == 0 || p % blocks != 0 {
                return Err(Error::InvalidParameter(format!(
                    "p = {p} is not divisible into {blocks} blocks"
                )));
            }
            let size = p / blocks;
            SymMatrix::from_upper_fn(p, |i, j| {
                if i == j {
                    1.0
                } else if i / size == j / size {
                    *offdiag
                } else {
                    0.0
                }
            })?
        }
    };
    if !is_pd(&omega, 0.0) {
        return Err(Error::ConstructionFailed(format!(
            "{} precision matrix is not positive definite",
            spec.topology.name()
        )));
    }
    Ok(omega)
}

/// Lower Cholesky factor of a p.d. matrix.
pub fn cholesky_factor(sigma: &SymMatrix) -> Result<DMatrix<f64>> {
    match nalgebra::Cholesky::new(sigma.as_matrix().clone()) {
        Some(c) => Ok(c.l()),
        None => Err(Error::NotPositiveDefinite {
            min_eigenvalue: crate::matrix::min_eigenvalue(sigma)?,
        }),
    }
}

/// `n` rows `(Lz)ᵀ` with `z` standard normal.
pub fn sample_mvn_with<R: Rng + ?Sized>(chol: &DMatrix<f64>, n: usize, rng: &mut R) -> DMatrix<f64> {
    let p = chol.nrows();
    let z = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    z * chol.transpose()
}

/// `n` draws from `N(0, Σ)` as an `n×p` matrix.
pub fn sample_mvn(sigma: &SymMatrix, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let chol = cholesky_factor(sigma)?;
    Ok(sample_mvn_with(&chol, n, &mut stream_rng(seed, 0)))
}

/// Loss function comparing an estimate to the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `‖Ω̂ − Ω‖²_F`
    Frobenius,
    /// `‖Ω̂Ω⁻¹ − I‖²_F`
    Quadratic,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::Frobenius => "frobenius",
            Loss::Quadratic => "quadratic",
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frobenius" => Ok(Loss::Frobenius),
            "quadratic" => Ok(Loss::Quadratic),
            other => Err(Error::InvalidParameter(format!(
                "unknown loss {other:?} (expected frobenius or quadratic)"
            ))),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `‖Ω̂ − Ω‖²_F`.
pub fn loss_frobenius(omega_hat: &SymMatrix, omega: &SymMatrix) -> f64 {
    let d = omega_hat.sub(omega).frobenius_norm();
    d * d
}

/// `‖Ω̂Ω⁻¹ − I‖²_F`.
pub fn loss_quadratic(omega_hat: &SymMatrix, omega: &SymMatrix) -> Result<f64> {
    let sigma = inv_pd(omega)?;
    Ok(quadratic_with_inverse(omega_hat, &sigma))
}

fn quadratic_with_inverse(omega_hat: &SymMatrix, sigma: &SymMatrix) -> f64 {
    let p = sigma.order();
    let m = omega_hat.mul(sigma) - DMatrix::<f64>::identity(p, p);
    m.norm_squared()
}

/// Risk simulation settings.
#[derive(Debug, Clone)]
pub struct RiskConfig {
    pub spec: PopulationSpec,
    pub sample_sizes: Vec<usize>,
    /// Penalties on the alternative scale; archetypes are mapped.
    pub grid: Vec<f64>,
    pub estimators: Vec<EstimatorSpec>,
    pub reps: usize,
    pub loss: Loss,
    pub base_seed: u64,
    pub keep_replicates: bool,
}

/// Median loss of one estimator at one `(n, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub estimator: EstimatorKind,
    pub target: String,
    pub n: usize,
    pub lambda: f64,
    pub median_loss: f64,
    pub losses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskCurve {
    pub rows: Vec<RiskRow>,
}

impl RiskCurve {
    /// Medians for one estimator and target label at sample size `n`, in grid order.
    pub fn medians(&self, estimator: EstimatorKind, target: &str, n: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.estimator == estimator && r.target == target && r.n == n)
            .map(|r| r.median_loss)
            .collect()
    }
}

/// Median of a slice; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        f64::NAN
    } else if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Median losses over replicates for every estimator, sample size and penalty.
pub fn risk_curve(config: &RiskConfig) -> Result<RiskCurve> {
    if config.reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    if config.grid.is_empty() || config.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidPenalty("grid values must be positive".into()));
    }
    if config.sample_sizes.iter().any(|&n| n == 0) {
        return Err(Error::InvalidParameter("sample sizes must be positive".into()));
    }
    let omega = population_precision(&config.spec)?;
    let sigma = inv_pd(&omega)?;
    let chol = cholesky_factor(&sigma)?;
    let ne = config.estimators.len();
    let ng = config.grid.len();
    let mut rows = Vec::new();
    for (ni, &n) in config.sample_sizes.iter().enumerate() {
        // losses[rep][estimator * ng + grid]
        let losses: Vec<Vec<f64>> = (0..config.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream_rng(config.base_seed, stream_index(ni as u64, rep as u64));
                let y = sample_mvn_with(&chol, n, &mut rng);
                let s = sample_cov(&y, false)?;
                let mut out = Vec::with_capacity(ne * ng);
                for e in &config.estimators {
                    let resolved = e.resolve(&s)?;
                    for &la in &config.grid {
                        let est = fit_common_scale(resolved.kind, &s, &resolved.target, la)?;
                        out.push(match config.loss {
                            Loss::Frobenius => loss_frobenius(&est.omega, &omega),
                            Loss::Quadratic => quadratic_with_inverse(&est.omega, &sigma),
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        for (ei, e) in config.estimators.iter().enumerate() {
            let label = if e.kind.uses_target() { e.target.code() } else { "zero".into() };
            for (gi, &la) in config.grid.iter().enumerate() {
                let col: Vec<f64> = losses.iter().map(|r| r[ei * ng + gi]).collect();
                let med = median(&col);
                if !med.is_finite() {
                    return Err(Error::DegenerateFit(format!("non-finite median loss at lambda {la}")));
                }
                rows.push(RiskRow {
                    estimator: e.kind,
                    target: label.clone(),
                    n,
                    lambda: la,
                    median_loss: med,
                    losses: config.keep_replicates.then_some(col),
                });
            }
        }
    }
    Ok(RiskCurve { rows })
}

/// The 5×5 matrix whose inverse has unit diagonal and off-diagonal entries
/// `((i·j + 1) mod 21)/25` (1-based indices).
pub fn figure1_inverse() -> SymMatrix {
    SymMatrix::from_upper_fn(5, |i, j| {
        if i == j {
            1.0
        } else {
            (((i + 1) * (j + 1) + 1) % 21) as f64 / 25.0
        }
    })
    .expect("fixed finite entries")
}

/// The covariance matrix of the coefficient-path illustration.
pub fn figure1_matrix() -> Result<SymMatrix> {
    let inv = figure1_inverse();
    if !is_pd(&inv, 0.0) {
        return Err(Error::ConstructionFailed("figure matrix inverse is not positive definite".into()));
    }
    inv_pd(&inv).map_err(|e| Error::ConstructionFailed(e.to_string()))
}

/// Off-diagonal entries of fitted precision matrices along a penalty grid.
#[derive(Debug, Clone)]
pub struct CoefficientPaths {
    /// Alternative-scale penalties.
    pub grid: Vec<f64>,
    /// Upper-triangle index pairs, row-major.
    pub pairs: Vec<(usize, usize)>,
    /// `paths[k][g][e]`: estimator `k`, grid point `g`, pair `e`.
    pub paths: Vec<(EstimatorKind, Vec<Vec<f64>>)>,
}

impl CoefficientPaths {
    /// Path of one pair for one estimator across the grid.
    pub fn path(&self, kind: EstimatorKind, pair: usize) -> Option<Vec<f64>> {
        self.paths
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, v)| v.iter().map(|row| row[pair]).collect())
    }

    /// Rows `estimator,lambda,i,j,value` with 1-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,lambda,i,j,value\n");
        for (kind, v) in &self.paths {
            for (g, row) in v.iter().enumerate() {
                for (e, &(i, j)) in self.pairs.iter().enumerate() {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        kind,
                        crate::io::format_value(self.grid[g]),
                        i + 1,
                        j + 1,
                        crate::io::format_value(row[e])
                    ));
                }
            }
        }
        out
    }
}

/// Fits every estimator in `kinds` along the grid and records the
/// off-diagonal precision entries.
pub fn coefficient_paths(
    s: &SymMatrix,
    target: &Target,
    grid: &[f64],
    kinds: &[EstimatorKind],
) -> Result<CoefficientPaths> {
    let p = s.order();
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| ((i + 1)..p).map(move |j| (i, j))).collect();
    let mut paths = Vec::new();
    for &kind in kinds {
        let v = grid
            .iter()
            .map(|&la| {
                let est = fit_common_scale(kind, s, target, la)?;
                Ok(pairs.iter().map(|&(i, j)| est.omega.get(i, j)).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        paths.push((kind, v));
    }
    Ok(CoefficientPaths {
        grid: grid.to_vec(),
        pairs,
        paths,
    })
}
