//! Ridge precision estimators.
//!
//! Four estimators are provided. The two archetypal ones are
//! `[(1−λ)S + λΓ]⁻¹` (type I) and `(S + λI)⁻¹` (type II). The two alternative
//! ones maximize the proper ridge-penalized log-likelihood
//! `ln|Ω| − tr(SΩ) − (λ/2)‖Ω − T‖²_F` and have the closed form
//! `{[λI + ¼(S − λT)²]^½ + ½(S − λT)}⁻¹` (type II is the `T = 0` case).
//!
//! [`Target`] always denotes a precision-side target. The archetypal type I
//! estimator shrinks its covariance toward `Γ = T⁻¹`.
//!
//! The alternative estimators are evaluated spectrally. `S − λT` is decomposed
//! once, each eigenvalue `m` maps to `σ = √(λ + m²/4) + m/2` (computed in a
//! cancellation-free form), and the precision has eigenvalues `1/σ`. The
//! covariance is then `S + λ(Ω − T)`, which is exact in the penalty identity
//! `S − λT = Σ − λΩ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{eig_sym, inv_pd, log_det_pd, sqrt_pd, EigenDecomposition, SymMatrix};

/// Precision-side shrinkage target.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Zero,
    /// `ψ·I` with `ψ ≥ 0`.
    Scalar(f64),
    /// Positive diagonal.
    Diagonal(Vec<f64>),
    /// Positive definite matrix.
    Full(SymMatrix),
}

impl Target {
    pub fn identity() -> Self {
        Target::Scalar(1.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Target::Zero) || matches!(self, Target::Scalar(v) if *v == 0.0)
    }

    /// `ψ` for `Zero` and scalar targets.
    pub fn scalar_value(&self) -> Option<f64> {
        match self {
            Target::Zero => Some(0.0),
            Target::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    /// Checks the target against order `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            Target::Zero => Ok(()),
            Target::Scalar(v) => {
                if v.is_finite() && *v >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidTarget(format!("scalar target must be >= 0, got {v}")))
                }
            }
            Target::Diagonal(d) => {
                if d.len() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: d.len(),
                    });
                }
                if d.iter().all(|v| v.is_finite() && *v > 0.0) {
                    Ok(())
                } else {
                    Err(Error::InvalidTarget("diagonal target entries must be > 0".into()))
                }
            }
            Target::Full(t) => {
                if t.order() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: t.order(),
                    });
                }
                let eig = eig_sym(t)?;
                if eig.min_value() <= crate::matrix::pd_tol(&eig.values) {
                    return Err(Error::InvalidTarget(format!(
                        "target is not positive definite (smallest eigenvalue {:e})",
                        eig.min_value()
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn to_matrix(&self, p: usize) -> SymMatrix {
        match self {
            Target::Zero => SymMatrix::zeros(p),
            Target::Scalar(v) => SymMatrix::identity(p).scale(*v),
            Target::Diagonal(d) => SymMatrix::from_diagonal(d),
            Target::Full(t) => t.clone(),
        }
    }

    /// `Γ = T⁻¹`, the covariance-side target of the archetypal type I estimator.
    pub fn covariance_side(&self, p: usize) -> Result<SymMatrix> {
        self.validate(p)?;
        match self {
            _ if self.is_zero() => Err(Error::InvalidTarget(
                "the archetypal type I estimator needs a positive definite target".into(),
            )),
            Target::Scalar(v) => Ok(SymMatrix::identity(p).scale(1.0 / v)),
            Target::Diagonal(d) => {
                let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
                Ok(SymMatrix::from_diagonal(&inv))
            }
            Target::Full(t) => inv_pd(t),
            Target::Zero => unreachable!(),
        }
    }

    /// Short label used in tabular output.
    pub fn label(&self) -> String {
        match self {
            Target::Zero => "zero".into(),
            Target::Scalar(v) if *v == 1.0 => "identity".into(),
            Target::Scalar(v) => format!("scalar:{v}"),
            Target::Diagonal(_) => "diagonal".into(),
            Target::Full(_) => "full".into(),
        }
    }
}

/// Estimator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    ArchetypeI,
    ArchetypeII,
    AltI,
    AltII,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::ArchetypeI,
        EstimatorKind::ArchetypeII,
        EstimatorKind::AltI,
        EstimatorKind::AltII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::ArchetypeI => "archetype-1",
            EstimatorKind::ArchetypeII => "archetype-2",
            EstimatorKind::AltI => "alt-1",
            EstimatorKind::AltII => "alt-2",
        }
    }

    /// Whether the estimator uses a target.
    pub fn uses_target(self) -> bool {
        matches!(self, EstimatorKind::ArchetypeI | EstimatorKind::AltI)
    }

    pub fn is_alternative(self) -> bool {
        matches!(self, EstimatorKind::AltI | EstimatorKind::AltII)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "archetype-1" => Ok(EstimatorKind::ArchetypeI),
            "archetype-2" => Ok(EstimatorKind::ArchetypeII),
            "alt-1" => Ok(EstimatorKind::AltI),
            "alt-2" => Ok(EstimatorKind::AltII),
            other => Err(Error::InvalidParameter(format!(
                "unknown estimator {other:?} (expected archetype-1, archetype-2, alt-1 or alt-2)"
            ))),
        }
    }
}

/// A fitted precision matrix together with its covariance counterpart.
#[derive(Debug, Clone)]
pub struct RidgeEstimate {
    pub omega: SymMatrix,
    pub sigma: SymMatrix,
    pub kind: EstimatorKind,
    /// Penalty on the estimator's own scale.
    pub lambda: f64,
    pub target: Target,
}

/// `(1/n)YᵀY`, optionally after subtracting column means.
pub fn sample_cov(y: &DMatrix<f64>, center: bool) -> Result<SymMatrix> {
    let n = y.nrows();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if y.ncols() == 0 {
        return Err(Error::InvalidMatrix("data has no columns".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidMatrix("non-finite data entry".into()));
    }
    let s = if center {
        let mut yc = y.clone();
        for mut col in yc.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        yc.tr_mul(&yc)
    } else {
        y.tr_mul(y)
    };
    SymMatrix::from_dmatrix(s / n as f64)
}

fn check_positive(lambda: f64, what: &str) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidPenalty(format!("{what} must be positive and finite, got {lambda}")))
    }
}

/// `[(1−λ)S + λΓ]⁻¹` with `Γ = T⁻¹` and `λ ∈ (0, 1]`.
pub fn archetype_i(s: &SymMatrix, target: &Target, lambda: f64) -> Result<RidgeEstimate> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidPenalty(format!(
            "archetypal type I penalty must lie in (0, 1], got {lambda}"
        )));
    }
    let gamma = target.covariance_side(s.order())?;
    let sigma = s.scale(1.0 - lambda).add(&gamma.scale(lambda));
    let omega = inv_pd(&sigma)?;
    Ok(RidgeEstimate {
        omega,
        sigma,
        kind: EstimatorKind::ArchetypeI,
        lambda,
        target: target.clone(),
    })
}

/// `(S + λI)⁻¹`.
pub fn archetype_ii(s: &SymMatrix, lambda: f64) -> Result<RidgeEstimate> {
    check_positive(lambda, "archetypal type II penalty")?;
    let sigma = s.add_identity(lambda);
    let omega = inv_pd(&sigma)?;
    Ok(RidgeEstimate {
        omega,
        sigma,
        kind: EstimatorKind::ArchetypeII,
        lambda,
        target: Target::Zero,
    })
}

/// Covariance-side eigenvalue `√(λ + m²/4) + m/2` of the alternative estimators,
/// where `m` is an eigenvalue of `S − λT`.
pub fn alt_covariance_eigenvalue(m: f64, lambda: f64) -> f64 {
    let r = lambda.sqrt().hypot(0.5 * m);
    if m >= 0.0 {
        r + 0.5 * m
    } else {
        lambda / (r - 0.5 * m)
    }
}

fn alt_fit(s: &SymMatrix, t: &SymMatrix, lambda: f64) -> Result<(SymMatrix, SymMatrix)> {
    let m = s.sub(&t.scale(lambda));
    let eig = eig_sym(&m)?;
    Ok(alt_from_eigen(s, t, &eig, lambda))
}

fn alt_from_eigen(
    s: &SymMatrix,
    t: &SymMatrix,
    eig: &EigenDecomposition,
    lambda: f64,
) -> (SymMatrix, SymMatrix) {
    let omega = eig.reconstruct_with(|m| 1.0 / alt_covariance_eigenvalue(m, lambda));
    let sigma = s.add(&omega.sub(t).scale(lambda));
    (omega, sigma)
}

/// Alternative type I ridge estimator with target `T`.
///
/// A zero target gives the type II estimator.
pub fn alt_ridge_i(s: &SymMatrix, target: &Target, lambda: f64) -> Result<RidgeEstimate> {
    check_positive(lambda, "penalty")?;
    target.validate(s.order())?;
    if target.is_zero() {
        return alt_ridge_ii(s, lambda);
    }
    let t = target.to_matrix(s.order());
    let (omega, sigma) = alt_fit(s, &t, lambda)?;
    Ok(RidgeEstimate {
        omega,
        sigma,
        kind: EstimatorKind::AltI,
        lambda,
        target: target.clone(),
    })
}

/// Alternative type II ridge estimator, `T = 0`.
pub fn alt_ridge_ii(s: &SymMatrix, lambda: f64) -> Result<RidgeEstimate> {
    check_positive(lambda, "penalty")?;
    let t = SymMatrix::zeros(s.order());
    let (omega, sigma) = alt_fit(s, &t, lambda)?;
    Ok(RidgeEstimate {
        omega,
        sigma,
        kind: EstimatorKind::AltII,
        lambda,
        target: Target::Zero,
    })
}

/// The alternative estimator through matrix functions only: the covariance
/// `[λI + ¼M²]^½ + ½M` with `M = S − λT`, and the precision
/// `(Σ − M)/λ` without any inversion.
///
/// Returns `(omega, sigma)`. Accurate for moderate `λ`; the spectral
/// evaluation in [`alt_ridge_i`] is preferred otherwise.
pub fn alt_ridge_inversion_free(
    s: &SymMatrix,
    target: &Target,
    lambda: f64,
) -> Result<(SymMatrix, SymMatrix)> {
    check_positive(lambda, "penalty")?;
    target.validate(s.order())?;
    let m = s.sub(&target.to_matrix(s.order()).scale(lambda));
    let m2 = SymMatrix::from_dmatrix(m.mul(&m))?;
    let root = sqrt_pd(&m2.scale(0.25).add_identity(lambda))?;
    let sigma = root.add(&m.scale(0.5));
    let omega = sigma.sub(&m).scale(1.0 / lambda);
    Ok((omega, sigma))
}

/// Fits `kind` with penalty `lambda` on that estimator's own scale.
///
/// The type II estimators ignore `target`.
pub fn fit(kind: EstimatorKind, s: &SymMatrix, target: &Target, lambda: f64) -> Result<RidgeEstimate> {
    match kind {
        EstimatorKind::ArchetypeI => archetype_i(s, target, lambda),
        EstimatorKind::ArchetypeII => archetype_ii(s, lambda),
        EstimatorKind::AltI => alt_ridge_i(s, target, lambda),
        EstimatorKind::AltII => alt_ridge_ii(s, lambda),
    }
}

/// Fits `kind` with the penalty given on the alternative scale `λa`,
/// translated through the eigenvalue-matching maps for the archetypes.
pub fn fit_common_scale(
    kind: EstimatorKind,
    s: &SymMatrix,
    target: &Target,
    lambda_a: f64,
) -> Result<RidgeEstimate> {
    check_positive(lambda_a, "penalty")?;
    fit(kind, s, target, native_penalty(kind, lambda_a))
}

/// Penalty of `kind` corresponding to alternative-scale `λa`.
pub fn native_penalty(kind: EstimatorKind, lambda_a: f64) -> f64 {
    match kind {
        EstimatorKind::ArchetypeI => penalty_scale_map_i(lambda_a),
        EstimatorKind::ArchetypeII => lambda_a.sqrt(),
        _ => lambda_a,
    }
}

/// Diagonal target `1/diag(S)`.
pub fn default_diagonal_target(s: &SymMatrix) -> Result<Target> {
    let d = s.diagonal();
    if let Some((j, v)) = d.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::InvalidTarget(format!(
            "diagonal entry {} of S is {v}, must be > 0",
            j + 1
        )));
    }
    Ok(Target::Diagonal(d.iter().map(|v| 1.0 / v).collect()))
}

/// Covariance-side shrunk eigenvalues for a scalar target `ψI`.
///
/// Precision eigenvalues are the reciprocals. `ψ` is ignored by the type II
/// estimators.
pub fn shrunk_eigenvalues(kind: EstimatorKind, d: &[f64], lambda: f64, psi: f64) -> Result<Vec<f64>> {
    if !(psi.is_finite() && psi >= 0.0) {
        return Err(Error::InvalidTarget(format!("scalar target must be >= 0, got {psi}")));
    }
    match kind {
        EstimatorKind::AltI => {
            check_positive(lambda, "penalty")?;
            Ok(d.iter().map(|&x| alt_covariance_eigenvalue(x - lambda * psi, lambda)).collect())
        }
        EstimatorKind::AltII => {
            check_positive(lambda, "penalty")?;
            Ok(d.iter().map(|&x| alt_covariance_eigenvalue(x, lambda)).collect())
        }
        EstimatorKind::ArchetypeI => {
            if !(lambda > 0.0 && lambda <= 1.0) {
                return Err(Error::InvalidPenalty(format!(
                    "archetypal type I penalty must lie in (0, 1], got {lambda}"
                )));
            }
            if psi == 0.0 {
                return Err(Error::InvalidTarget("archetypal type I needs ψ > 0".into()));
            }
            Ok(d.iter().map(|&x| (1.0 - lambda) * x + lambda / psi).collect())
        }
        EstimatorKind::ArchetypeII => {
            check_positive(lambda, "penalty")?;
            Ok(d.iter().map(|&x| x + lambda).collect())
        }
    }
}

/// `λI = 1 − 1/(λa + 1)`.
pub fn penalty_scale_map_i(lambda_a: f64) -> f64 {
    lambda_a / (lambda_a + 1.0)
}

/// `λI = λaψ²/(1 + λaψ²)`, the type I map for target `ψI`; reduces to
/// [`penalty_scale_map_i`] at `ψ = 1`.
pub fn penalty_scale_map_i_scaled(lambda_a: f64, psi: f64) -> f64 {
    let x = lambda_a * psi * psi;
    x / (x + 1.0)
}

/// `λa = λII²`.
pub fn penalty_scale_map_ii(lambda_ii: f64) -> f64 {
    lambda_ii * lambda_ii
}

/// `‖Ω⁻¹ − (S − λT) − λΩ‖_F`, zero exactly at the penalized-likelihood optimum.
pub fn stationarity_residual(omega: &SymMatrix, s: &SymMatrix, target: &Target, lambda: f64) -> Result<f64> {
    let p = s.order();
    let inv = inv_pd(omega)?;
    let t = target.to_matrix(p);
    let r = inv.sub(s).sub(&omega.sub(&t).scale(lambda));
    Ok(r.frobenius_norm())
}

/// `ln|Ω| − tr(SΩ)`.
pub fn loglik(omega: &SymMatrix, s: &SymMatrix) -> Result<f64> {
    let ld = log_det_pd(omega)?;
    Ok(ld - trace_product(s, omega))
}

/// `ln|Ω| − tr(SΩ) − (λ/2)‖Ω − T‖²_F`.
pub fn penalized_loglik(omega: &SymMatrix, s: &SymMatrix, target: &Target, lambda: f64) -> Result<f64> {
    let d = omega.sub(&target.to_matrix(s.order())).frobenius_norm();
    Ok(loglik(omega, s)? - 0.5 * lambda * d * d)
}

/// `tr(AB)` for symmetric `A`, `B`.
pub fn trace_product(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.as_matrix().component_mul(b.as_matrix()).sum()
}

/// Eigen-decomposition of `S`, reused across penalties for scalar targets.
#[derive(Debug, Clone)]
pub struct SpectralPath {
    s: SymMatrix,
    eig: EigenDecomposition,
}

impl SpectralPath {
    pub fn new(s: &SymMatrix) -> Result<Self> {
        Ok(Self {
            s: s.clone(),
            eig: eig_sym(s)?,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    /// Fits `kind` with target `ψI` (ψ = 0 meaning zero target).
    pub fn fit(&self, kind: EstimatorKind, psi: f64, lambda: f64) -> Result<RidgeEstimate> {
        let p = self.s.order();
        let target = if psi == 0.0 { Target::Zero } else { Target::Scalar(psi) };
        let kind = if kind == EstimatorKind::AltI && psi == 0.0 {
            EstimatorKind::AltII
        } else {
            kind
        };
        let psi_used = if kind.uses_target() { psi } else { 0.0 };
        let values = shrunk_eigenvalues(kind, &self.eig.values, lambda, psi_used)?;
        if let Some(&bad) = values.iter().find(|&&v| v <= 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: bad });
        }
        let omega = self.eig.reconstruct_with_values_recip(&values);
        let sigma = if kind.is_alternative() {
            let t = SymMatrix::identity(p).scale(psi_used);
            self.s.add(&omega.sub(&t).scale(lambda))
        } else {
            self.eig.reconstruct_values(&values)
        };
        Ok(RidgeEstimate {
            omega,
            sigma,
            kind,
            lambda,
            target: if kind.uses_target() { target } else { Target::Zero },
        })
    }
}

impl EigenDecomposition {
    fn reconstruct_with_values_recip(&self, values: &[f64]) -> SymMatrix {
        let inv: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
        self.reconstruct_values(&inv)
    }
}
