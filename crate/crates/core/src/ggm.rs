//! Gaussian graphical modelling on top of a precision estimate.
//!
//! Off-diagonal partial correlations are modelled as a two-group mixture
//! `f = η₀f₀ + (1−η₀)f_E` with the scaled beta null
//! `f₀(r; κ) = |r|·Beta(r²; ½, (κ−1)/2)`. An edge is kept when its posterior
//! non-null probability `1 − lFDR` reaches the threshold.
//!
//! Fit recipe:
//! 1. Start from the window `|r| ≤ c` with `c` the median of `|r|`.
//! 2. Estimate `κ` by maximum likelihood of the null truncated to the window.
//! 3. Move `c` halfway toward the central-75% point of the fitted null and repeat.
//! 4. `η₀ = min(1, P̂(|r| ≤ c) / F₀(c; κ))`.
//! 5. `f` is a Gaussian kernel density (Silverman bandwidth) reflected at ±1.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};

use crate::error::{Error, Result};
use crate::matrix::{eig_sym, pd_tol, SymMatrix};

/// Minimum number of values accepted by [`fit_lfdr`].
pub const MIN_LFDR_VALUES: usize = 10;
/// Default selection threshold on `1 − lFDR`.
pub const DEFAULT_THRESHOLD: f64 = 0.99;

const NULL_WINDOW_MASS: f64 = 0.75;
const MAX_WINDOW_ITER: usize = 500;
const KAPPA_MIN: f64 = 1.0001;
const KAPPA_MAX: f64 = 1e6;

/// Partial correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrMatrix {
    inner: SymMatrix,
}

impl PartialCorrMatrix {
    pub fn order(&self) -> usize {
        self.inner.order()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.inner
    }

    /// Upper-triangle entries in row-major order.
    pub fn off_diagonal(&self) -> Vec<f64> {
        let p = self.order();
        let mut v = Vec::with_capacity(p * (p - 1) / 2);
        for i in 0..p {
            for j in (i + 1)..p {
                v.push(self.get(i, j));
            }
        }
        v
    }
}

/// `P_jk = −ω_jk / √(ω_jj ω_kk)`, unit diagonal.
pub fn to_partial_corr(omega: &SymMatrix) -> Result<PartialCorrMatrix> {
    let eig = eig_sym(omega)?;
    if eig.min_value() <= pd_tol(&eig.values) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min_value(),
        });
    }
    let d: Vec<f64> = omega.diagonal().iter().map(|v| v.sqrt()).collect();
    let inner = SymMatrix::from_upper_fn(omega.order(), |i, j| {
        if i == j {
            1.0
        } else {
            (-omega.get(i, j) / (d[i] * d[j])).clamp(-1.0, 1.0)
        }
    })?;
    Ok(PartialCorrMatrix { inner })
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("kappa must exceed 1, got {kappa}")))
    }
}

fn ln_null_density(r: f64, kappa: f64) -> f64 {
    0.5 * (kappa - 3.0) * (-r * r).ln_1p() - ln_beta(0.5, 0.5 * (kappa - 1.0))
}

/// Null density `f₀(r; κ) = (1 − r²)^((κ−3)/2) / B(½, (κ−1)/2)` on `[−1, 1]`.
pub fn null_density(r: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("r must lie in [-1, 1], got {r}")));
    }
    if r.abs() == 1.0 {
        return Ok(match kappa {
            k if k > 3.0 => 0.0,
            k if k == 3.0 => (-ln_beta(0.5, 1.0)).exp(),
            _ => f64::INFINITY,
        });
    }
    Ok(ln_null_density(r, kappa).exp())
}

/// `P(|R| ≤ c)` under the null.
pub fn null_cdf_abs(c: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let c = c.clamp(0.0, 1.0);
    Ok(beta_reg(0.5, 0.5 * (kappa - 1.0), c * c))
}

/// `c` with `P(|R| ≤ c) = q` under the null.
pub fn null_quantile_abs(q: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("probability must lie in [0, 1], got {q}")));
    }
    Ok(inv_beta_reg(0.5, 0.5 * (kappa - 1.0), q).sqrt())
}

/// Gaussian kernel density reflected at ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    pub values: Vec<f64>,
    pub bandwidth: f64,
}

impl Kde {
    /// Silverman's rule `0.9·min(sd, IQR/1.34)·N^(−1/5)`.
    pub fn silverman(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        let iqr = quantile(values, 0.75) - quantile(values, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        if !(spread > 0.0) {
            return Err(Error::DegenerateFit("values have no spread".into()));
        }
        Ok(Self {
            values: values.to_vec(),
            bandwidth: 0.9 * spread * (n as f64).powf(-0.2),
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        let h = self.bandwidth;
        let k = |u: f64| (-0.5 * u * u).exp() / (2.0 * PI).sqrt();
        let total: f64 = self
            .values
            .iter()
            .map(|&v| k((x - v) / h) + k((x - (2.0 - v)) / h) + k((x - (-2.0 - v)) / h))
            .sum();
        total / (self.values.len() as f64 * h)
    }
}

/// Linear-interpolation quantile (type 7).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// How the mixture was fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct LfdrDiagnostics {
    pub method: &'static str,
    /// Final null window `|r| ≤ window`.
    pub window: f64,
    pub iterations: usize,
    pub converged: bool,
    pub bandwidth: f64,
    pub n_values: usize,
}

/// Fitted two-group mixture of partial correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct LfdrFit {
    pub eta0: f64,
    pub kappa: f64,
    pub kde: Kde,
    pub diagnostics: LfdrDiagnostics,
}

impl LfdrFit {
    /// Fitted mixture density `f`.
    pub fn density(&self, r: f64) -> f64 {
        self.kde.density(r)
    }

    /// `min(1, η₀f₀(r)/f(r))`; identically 1 when `η₀ = 1`.
    pub fn lfdr(&self, r: f64) -> f64 {
        if self.eta0 >= 1.0 {
            return 1.0;
        }
        if self.eta0 <= 0.0 {
            return 0.0;
        }
        let f0 = null_density(r.clamp(-1.0, 1.0), self.kappa).unwrap_or(f64::INFINITY);
        let f = self.density(r);
        if !(f > 0.0) {
            return 1.0;
        }
        (self.eta0 * f0 / f).clamp(0.0, 1.0)
    }
}

/// Truncated null log-likelihood over `|r| ≤ c`, maximized in `ln κ`.
fn fit_kappa(abs_in: &[f64], c: f64) -> f64 {
    let m = abs_in.len() as f64;
    let nll = |lk: f64| {
        let k = lk.exp();
        let ll: f64 = abs_in.iter().map(|&r| ln_null_density(r, k)).sum();
        let mass = beta_reg(0.5, 0.5 * (k - 1.0), c * c);
        -(ll - m * mass.ln())
    };
    golden_section(nll, KAPPA_MIN.ln(), KAPPA_MAX.ln(), 1e-10).exp()
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Fits the two-group mixture to off-diagonal partial correlations.
pub fn fit_lfdr(values: &[f64]) -> Result<LfdrFit> {
    let n = values.len();
    if n < MIN_LFDR_VALUES {
        return Err(Error::InsufficientData {
            needed: MIN_LFDR_VALUES,
            got: n,
        });
    }
    if values.iter().any(|v| !(v.is_finite() && v.abs() < 1.0)) {
        return Err(Error::InvalidParameter("partial correlations must lie in (-1, 1)".into()));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::DegenerateFit("all values are equal".into()));
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let max_abs = abs[n - 1];
    let min_window = abs[MIN_LFDR_VALUES.min(n) / 2];
    let mut c = quantile(&abs, 0.5);
    let mut kappa = f64::NAN;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..MAX_WINDOW_ITER {
        iterations = it + 1;
        let inside: Vec<f64> = abs.iter().copied().filter(|&r| r <= c).collect();
        if inside.is_empty() || c <= 0.0 {
            return Err(Error::DegenerateFit("null window holds no non-zero values".into()));
        }
        kappa = fit_kappa(&inside, c);
        let target = null_quantile_abs(NULL_WINDOW_MASS, kappa)?.min(max_abs);
        if (target - c).abs() <= 1e-9 * c {
            converged = true;
            break;
        }
        c = (0.5 * (c + target)).max(min_window);
    }
    let inside = abs.iter().filter(|&&r| r <= c).count() as f64;
    let eta0 = (inside / n as f64 / null_cdf_abs(c, kappa)?).clamp(0.0, 1.0);
    let kde = Kde::silverman(values)?;
    let bandwidth = kde.bandwidth;
    Ok(LfdrFit {
        eta0,
        kappa,
        kde,
        diagnostics: LfdrDiagnostics {
            method: "truncated-ml-window",
            window: c,
            iterations,
            converged,
            bandwidth,
            n_values: n,
        },
    })
}

/// Unordered vertex pairs `(i, j)`, `i < j`, each with a presence probability.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeSet {
    edges: BTreeMap<(usize, usize), f64>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `(i, j)` in either order; self-loops and out-of-range probabilities are rejected.
    pub fn insert(&mut self, i: usize, j: usize, prob: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::InvalidParameter(format!("edge probability {prob} outside [0, 1]")));
        }
        self.edges.insert((i.min(j), i.max(j)), prob);
        Ok(())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut e = Self::new();
        for (i, j) in pairs {
            e.insert(i, j, 1.0)?;
        }
        Ok(e)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    pub fn prob(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.edges.iter().map(|(k, v)| (*k, *v))
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.edges.keys().copied().collect()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges.keys().all(|k| other.edges.contains_key(k))
    }
}

/// `1 − lFDR` for every pair.
pub fn lfdr_per_edge(pc: &PartialCorrMatrix, fit: &LfdrFit) -> EdgeSet {
    let p = pc.order();
    let mut e = EdgeSet::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let prob = 1.0 - fit.lfdr(pc.get(i, j));
            e.edges.insert((i, j), prob.clamp(0.0, 1.0));
        }
    }
    e
}

/// Pairs with `1 − lFDR ≥ threshold`.
pub fn select_edges(pc: &PartialCorrMatrix, fit: &LfdrFit, threshold: f64) -> Result<EdgeSet> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let all = lfdr_per_edge(pc, fit);
    Ok(EdgeSet {
        edges: all.edges.into_iter().filter(|(_, v)| *v >= threshold).collect(),
    })
}

/// A precision matrix with the unselected off-diagonal entries set to zero.
#[derive(Debug, Clone)]
pub struct Sparsified {
    pub matrix: SymMatrix,
    /// Smallest eigenvalue; non-positive values mean the result is not p.d.
    pub min_eigenvalue: f64,
}

impl Sparsified {
    pub fn is_pd(&self) -> bool {
        self.min_eigenvalue > 0.0
    }
}

/// Zeroes every off-diagonal entry outside `edges`. The result is not
/// repaired if it loses positive definiteness.
pub fn sparsify(omega: &SymMatrix, edges: &EdgeSet) -> Result<Sparsified> {
    let matrix = SymMatrix::from_upper_fn(omega.order(), |i, j| {
        if i == j || edges.contains(i, j) {
            omega.get(i, j)
        } else {
            0.0
        }
    })?;
    let min_eigenvalue = eig_sym(&matrix)?.min_value();
    Ok(Sparsified {
        matrix,
        min_eigenvalue,
    })
}

/// Pairs with `|ω_ij| > tol`.
pub fn support_of(omega: &SymMatrix, tol: f64) -> EdgeSet {
    let p = omega.order();
    let mut e = EdgeSet::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if omega.get(i, j).abs() > tol {
                e.edges.insert((i, j), 1.0);
            }
        }
    }
    e
}

/// `(sensitivity, specificity)` of `selected` against `truth` over `p` vertices.
pub fn support_metrics(selected: &EdgeSet, truth: &EdgeSet, p: usize) -> Result<(f64, f64)> {
    let total = p * p.saturating_sub(1) / 2;
    if let Some(((i, j), _)) = selected.iter().chain(truth.iter()).find(|((_, j), _)| *j >= p) {
        return Err(Error::InvalidParameter(format!("edge ({i}, {j}) outside {p} vertices")));
    }
    if truth.is_empty() {
        return Err(Error::UndefinedMetric("sensitivity needs at least one true edge".into()));
    }
    let negatives = total - truth.len();
    if negatives == 0 {
        return Err(Error::UndefinedMetric("specificity needs at least one null pair".into()));
    }
    let tp = selected.iter().filter(|((i, j), _)| truth.contains(*i, *j)).count();
    let fp = selected.len() - tp;
    Ok((tp as f64 / truth.len() as f64, 1.0 - fp as f64 / negatives as f64))
}

/// Union over ranked lists of each list's top `⌈½p(p−1)α⌉` edges.
pub fn stable_edges(top_lists: &[Vec<(usize, usize)>], p: usize, alpha: f64) -> Result<EdgeSet> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let total = p * p.saturating_sub(1) / 2;
    let top = (total as f64 * alpha - 1e-9).ceil().max(0.0) as usize;
    let mut e = EdgeSet::new();
    for list in top_lists {
        for &(i, j) in list.iter().take(top) {
            e.insert(i, j, 1.0)?;
        }
    }
    Ok(e)
}

/// Pairs ranked by descending probability, ties by index.
pub fn rank_edges(scores: &EdgeSet) -> Vec<(usize, usize)> {
    let mut v: Vec<((usize, usize), f64)> = scores.iter().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(k, _)| k).collect()
}
