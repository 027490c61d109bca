//! Gauss-Radau rules on `[0, 1]` with the right endpoint pinned, and the
//! rational approximation `r_m(x) = Σ w_i f_{t_i}(x)` of `ln x` they induce.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qstate::{spectral, CMat, SUPPORT_CUTOFF};

/// Largest supported rule; beyond this the nodes crowd 0 too tightly to be useful.
pub const MAX_NODES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(m: usize) -> Result<Self> {
        gauss_radau(m)
    }

    pub fn m(&self) -> usize {
        self.nodes.len()
    }

    /// Strictly increasing, in `(0, 1]`, last one exactly 1.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        r_m_eval(self, x)
    }
}

/// `f_t(x) = (x − 1) / (t(x − 1) + 1)`.
pub fn f_t(t: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::arg(format!("f_t needs t in [0, 1], got {t}")));
    }
    if !(x > 0.0) {
        return Err(Error::arg(format!("f_t needs x > 0, got {x}")));
    }
    Ok(f_t_unchecked(t, x))
}

#[inline]
pub(crate) fn f_t_unchecked(t: f64, x: f64) -> f64 {
    (x - 1.0) / (t * (x - 1.0) + 1.0)
}

/// The m-node Gauss-Radau rule for `∫₀¹ · dt` with a node fixed at `t = 1`.
///
/// Golub's construction: take the Jacobi matrix of the shifted Legendre
/// recurrence, replace its last diagonal entry so that 1 becomes an
/// eigenvalue, and read nodes and weights off the eigen-decomposition.
pub fn gauss_radau(m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::arg("a quadrature rule needs at least one node"));
    }
    if m > MAX_NODES {
        return Err(Error::Unsupported(format!(
            "Gauss-Radau rules are limited to {MAX_NODES} nodes in double precision, got {m}"
        )));
    }
    // monic shifted Legendre: p_{k+1} = (x − 1/2) p_k − β_k p_{k−1}
    let alpha = 0.5;
    let beta = |k: usize| {
        let k = k as f64;
        k * k / (4.0 * (4.0 * k * k - 1.0))
    };
    // ratio p_k(1) / p_{k−1}(1), kept as a ratio to avoid under/overflow
    let mut ratio = 1.0 - alpha;
    for k in 1..m.saturating_sub(1) {
        ratio = (1.0 - alpha) - beta(k) / ratio;
    }
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        jac[(k, k)] = alpha;
    }
    for k in 1..m {
        let b = beta(k).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    jac[(m - 1, m - 1)] = if m == 1 { 1.0 } else { 1.0 - beta(m - 1) / ratio };

    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let last = pairs[m - 1].0;
    if (last - 1.0).abs() > 1e-10 {
        return Err(Error::Conditioning(format!("pinned node drifted to {last}")));
    }
    pairs[m - 1].0 = 1.0;
    let (nodes, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if nodes[0] <= 0.0 || weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::Conditioning(format!("degenerate rule for m = {m}")));
    }
    Ok(QuadratureRule { nodes, weights })
}

/// `r_m(x) = Σ_i w_i f_{t_i}(x)`, natural-log units.
pub fn r_m_eval(rule: &QuadratureRule, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::arg(format!("r_m needs x > 0, got {x}")));
    }
    Ok(r_m_unchecked(rule, x))
}

#[inline]
pub(crate) fn r_m_unchecked(rule: &QuadratureRule, x: f64) -> f64 {
    rule.iter().map(|(t, w)| w * f_t_unchecked(t, x)).sum()
}

/// `r_m(M)` by spectral calculus on the support of a PSD matrix; zero-class
/// eigenvalues map to 0.
pub fn r_m_matrix(rule: &QuadratureRule, m: &CMat) -> Result<CMat> {
    let spec = spectral(m, SUPPORT_CUTOFF)?;
    Ok(spec.apply(|x| r_m_unchecked(rule, x)))
}
