//! Moments of the sample covariance and of the ridge covariance estimator.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{alt_ridge_i, sample_cov, Target};
use crate::matrix::{min_eigenvalue, SymMatrix};
use crate::rng::stream_rng;
use crate::simulation::sample_mvn_with;

/// Second-order approximation of the expected type II covariance estimate.
#[derive(Debug, Clone)]
pub struct MomentApprox {
    pub expected_sigma: SymMatrix,
    pub order: usize,
    pub lambda: f64,
    pub n: usize,
}

/// Monte-Carlo mean of the fitted covariance with entrywise standard errors.
#[derive(Debug, Clone)]
pub struct McMoments {
    pub mean: SymMatrix,
    pub std_error: SymMatrix,
    pub reps: usize,
}

/// `E[S] = Σ` and `E[S²] = ((n+1)/n)Σ² + (tr Σ/n)Σ` for `S` the divisor-`n`
/// scatter matrix of `n` zero-mean Gaussian draws.
pub fn wishart_moments(sigma: &SymMatrix, n: usize) -> Result<(SymMatrix, SymMatrix)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let min = min_eigenvalue(sigma)?;
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let nf = n as f64;
    let sq = SymMatrix::from_dmatrix(sigma.mul(sigma))?;
    let e2 = sq.scale((nf + 1.0) / nf).add(&sigma.scale(sigma.trace() / nf));
    Ok((sigma.clone(), e2))
}

/// `½Σ + √λ·I + (1/(8√λ))E[S²]`.
pub fn bias_approx_type_ii(sigma: &SymMatrix, n: usize, lambda: f64) -> Result<MomentApprox> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidPenalty(format!("penalty must be positive, got {lambda}")));
    }
    let (_, e2) = wishart_moments(sigma, n)?;
    let r = lambda.sqrt();
    let expected_sigma = sigma.scale(0.5).add_identity(r).add(&e2.scale(1.0 / (8.0 * r)));
    Ok(MomentApprox {
        expected_sigma,
        order: 2,
        lambda,
        n,
    })
}

/// Mean of the alternative-estimator covariance over `reps` seeded data sets.
///
/// Replicate `r` uses stream `r` of `seed`.
pub fn mc_moments(
    sigma: &SymMatrix,
    n: usize,
    lambda: f64,
    target: &Target,
    reps: usize,
    seed: u64,
) -> Result<McMoments> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let chol = crate::simulation::cholesky_factor(sigma)?;
    let fits: Vec<SymMatrix> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let y = sample_mvn_with(&chol, n, &mut rng);
            let s = sample_cov(&y, false)?;
            Ok(alt_ridge_i(&s, target, lambda)?.sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    let p = sigma.order();
    let mut mean = nalgebra::DMatrix::zeros(p, p);
    for f in &fits {
        mean += f.as_matrix();
    }
    mean /= reps as f64;
    let mut var = nalgebra::DMatrix::zeros(p, p);
    if reps > 1 {
        for f in &fits {
            let d = f.as_matrix() - &mean;
            var += d.component_mul(&d);
        }
        var /= (reps - 1) as f64;
    }
    let se = var.map(|v| (v / reps as f64).sqrt());
    Ok(McMoments {
        mean: SymMatrix::from_dmatrix(mean)?,
        std_error: SymMatrix::from_dmatrix(se)?,
        reps,
    })
}
