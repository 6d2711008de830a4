#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use ridgeprec::matrix::SymMatrix;
use ridgeprec::rng::stream_rng;

pub fn normal_data(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, 7);
    DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Wishart-type sample covariance with `n` draws from a random non-identity covariance.
pub fn random_cov(n: usize, p: usize, seed: u64) -> SymMatrix {
    let mut rng = stream_rng(seed, 11);
    let scales: Vec<f64> = (0..p).map(|_| rng.random_range(0.3..3.0)).collect();
    let mut y = normal_data(n, p, seed);
    for (j, s) in scales.iter().enumerate() {
        y.column_mut(j).scale_mut(*s);
    }
    let mix = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rng.random_range(-0.3..0.3) });
    let y = y * mix;
    SymMatrix::from_dmatrix(y.tr_mul(&y) / n as f64).unwrap()
}

/// `BBᵀ + I`.
pub fn random_pd(p: usize, seed: u64) -> SymMatrix {
    let b = normal_data(p, p, seed ^ 0xabcdef);
    SymMatrix::from_dmatrix(&b * b.transpose() + DMatrix::identity(p, p)).unwrap()
}

/// Moderate positive definite target with small off-diagonal entries.
pub fn random_target(p: usize, seed: u64) -> SymMatrix {
    let mut rng = stream_rng(seed, 13);
    let d: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..2.0)).collect();
    let off = 0.2 / p as f64;
    SymMatrix::from_upper_fn(p, |i, j| if i == j { d[i] } else { rng.random_range(-off..off) }).unwrap()
}

pub fn rel_err(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm()
}

pub fn random_orthogonal(p: usize, seed: u64) -> DMatrix<f64> {
    normal_data(p, p, seed).qr().q()
}

pub fn conj(q: &DMatrix<f64>, a: &SymMatrix) -> SymMatrix {
    SymMatrix::from_dmatrix(q * a.as_matrix() * q.transpose()).unwrap()
}

/// Maximizer of `ln ω − sω − (λ/2)(ω − t)²` by safeguarded Newton.
pub fn newton_scalar(s: f64, t: f64, lambda: f64) -> f64 {
    let mut w = 1.0 / (s + lambda.sqrt() + 1e-3);
    for _ in 0..200 {
        let g = 1.0 / w - s - lambda * (w - t);
        let h = -1.0 / (w * w) - lambda;
        let mut step = -g / h;
        while w + step <= 0.0 {
            step *= 0.5;
        }
        w += step;
        if step.abs() <= 1e-16 * w {
            break;
        }
    }
    w
}

/// Independent symmetric eigenvalue solver: unshifted QR iteration with
/// modified Gram-Schmidt. Returns eigenvalues sorted descending.
pub fn qr_iteration_eigenvalues(a: &SymMatrix, iters: usize) -> Vec<f64> {
    let p = a.order();
    let mut m = a.as_matrix().clone();
    for _ in 0..iters {
        let mut q = m.clone();
        let mut r = DMatrix::<f64>::zeros(p, p);
        for j in 0..p {
            for k in 0..j {
                let d = q.column(k).dot(&q.column(j));
                r[(k, j)] = d;
                let qk = q.column(k).into_owned();
                q.column_mut(j).axpy(-d, &qk, 1.0);
            }
            let nrm = q.column(j).norm();
            r[(j, j)] = nrm;
            q.column_mut(j).scale_mut(1.0 / nrm);
        }
        m = r * q;
    }
    let mut d: Vec<f64> = (0..p).map(|i| m[(i, i)]).collect();
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

pub struct GgmRun {
    pub sensitivity: f64,
    pub specificity: f64,
    pub jaccard: f64,
    pub pc: ridgeprec::ggm::PartialCorrMatrix,
    pub fit: ridgeprec::ggm::LfdrFit,
}

/// Chain-graph recovery: type I alternative with the default diagonal target,
/// penalty by approximate LOOCV, edges at `1 − lFDR ≥ threshold`.
pub fn chain_ggm_run(p: usize, n: usize, seed: u64, threshold: f64) -> GgmRun {
    use ridgeprec::cv::{select_lambda, CvConfig, CvScheme, EstimatorSpec, TargetSpec};
    use ridgeprec::estimators::{sample_cov, EstimatorKind};
    use ridgeprec::ggm::*;
    use ridgeprec::simulation::{population_precision, sample_mvn, PopulationSpec, Topology};

    let omega = population_precision(&PopulationSpec { topology: Topology::Chain, p, seed: 0 }).unwrap();
    let sigma = ridgeprec::matrix::inv_pd(&omega).unwrap();
    let y = sample_mvn(&sigma, n, seed).unwrap();
    let spec = EstimatorSpec::new(EstimatorKind::AltI, TargetSpec::DefaultDiagonal);
    let cv = select_lambda(&y, &CvConfig::new(CvScheme::ApproxLoocv, spec.clone())).unwrap();
    let s = sample_cov(&y, false).unwrap();
    let est = spec.resolve(&s).unwrap();
    let fit_est = ridgeprec::estimators::fit(est.kind, &s, &est.target, cv.lambda_star).unwrap();
    let pc = to_partial_corr(&fit_est.omega).unwrap();
    let fit = fit_lfdr(&pc.off_diagonal()).unwrap();
    let selected = select_edges(&pc, &fit, threshold).unwrap();
    let truth = support_of(&omega, 1e-12);
    let (sensitivity, specificity) = support_metrics(&selected, &truth, p).unwrap();
    let inter = selected.iter().filter(|((i, j), _)| truth.contains(*i, *j)).count();
    let union = selected.len() + truth.len() - inter;
    GgmRun {
        sensitivity,
        specificity,
        jaccard: inter as f64 / union as f64,
        pc,
        fit,
    }
}
