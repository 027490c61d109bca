//! Standard f-divergences for `f = −f_t` and `f = −r_m / ln 2`.
//!
//! For PSD `ρ = Σ λ_j P_j` and `σ = Σ μ_k Q_k`,
//!
//! ```text
//! D_f(ρ‖σ) = Σ_{λ_j>0, μ_k>0} λ_j f(μ_k/λ_j) tr(P_j Q_k) + f(0⁺) tr(ρ(I − σ⁰)).
//! ```
//!
//! With `f = −f_t` the summand simplifies to `λ(λ − μ) / (tμ + (1 − t)λ)` and
//! `f(0⁺) = 1/(1 − t)`, which is `+∞` at `t = 1`. The sum runs over rank-one
//! eigenprojectors; it is basis invariant, so degenerate spectra need no
//! special handling.

use std::f64::consts::LN_2;


use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::qstate::{spectral, CMat, DensityMatrix, SpectralDecomp, SUPPORT_CUTOFF, SUPPORT_LEAK_TOL};
use crate::quadrature::{r_m_matrix, QuadratureRule};

/// Which divergence to evaluate.
#[derive(Clone, Debug)]
pub enum DivergenceSpec {
    /// `D_{−f_t}`, natural units (no logarithm appears).
    SingleT(f64),
    /// `D_{−r_m/ln 2} = (1/ln 2) Σ w_i D_{−f_{t_i}}`, in bits.
    Quadrature(QuadratureRule),
}

impl DivergenceSpec {
    pub fn evaluate(&self, rho: &CMat, sigma: &CMat) -> Result<ExtReal> {
        match self {
            DivergenceSpec::SingleT(t) => d_minus_ft(*t, rho, sigma),
            DivergenceSpec::Quadrature(rule) => d_rm(rule, rho, sigma),
        }
    }
}

/// Spectra of a pair plus the overlap weights `|⟨f_k|e_j⟩|² = tr(P_j Q_k)`.
struct PairSpectra {
    rho: SpectralDecomp,
    sigma: SpectralDecomp,
    overlap: CMat,
}

impl PairSpectra {
    fn new(rho: &CMat, sigma: &CMat) -> Result<Self> {
        if rho.shape() != sigma.shape() {
            return Err(Error::arg(format!(
                "divergence needs equal dimensions, got {:?} and {:?}",
                rho.shape(),
                sigma.shape()
            )));
        }
        let rho = spectral(rho, SUPPORT_CUTOFF)?;
        let sigma = spectral(sigma, SUPPORT_CUTOFF)?;
        let overlap = sigma.eigenvectors.adjoint() * &rho.eigenvectors;
        Ok(Self { rho, sigma, overlap })
    }

    /// Σ over supports of `λ_j (−f_t)(μ_k/λ_j) tr(P_j Q_k)`, and `tr(ρ(I − σ⁰))`.
    fn support_sum(&self, t: f64) -> (f64, f64) {
        let sigma_support: Vec<usize> = self.sigma.support_indices().collect();
        let mut sum = 0.0;
        let mut leak = 0.0;
        for j in self.rho.support_indices() {
            let lambda = self.rho.eigenvalues[j];
            let mut captured = 0.0;
            for &k in &sigma_support {
                let mu = self.sigma.eigenvalues[k];
                let w = self.overlap[(k, j)].norm_sqr();
                captured += w;
                sum += w * lambda * (lambda - mu) / (t * mu + (1.0 - t) * lambda);
            }
            leak += lambda * (1.0 - captured).max(0.0);
        }
        (sum, leak)
    }

    fn d_minus_ft(&self, t: f64) -> ExtReal {
        let (sum, leak) = self.support_sum(t);
        if t >= 1.0 {
            if leak > SUPPORT_LEAK_TOL {
                ExtReal::PosInf
            } else {
                ExtReal::Finite(sum)
            }
        } else {
            ExtReal::Finite(sum + leak / (1.0 - t))
        }
    }
}

fn check_t(t: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { (0.0..=1.0).contains(&t) } else { t > 0.0 && t <= 1.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::arg(format!("t = {t} is outside the admissible range")))
    }
}

/// `D_{−f_t}(ρ‖σ)`.
///
/// At `t = 0` this reduces to `tr ρ − tr(ρ⁰σ)`, i.e. `1 − tr(ρ⁰σ)` for states.
pub fn d_minus_ft(t: f64, rho: &CMat, sigma: &CMat) -> Result<ExtReal> {
    check_t(t, true)?;
    Ok(PairSpectra::new(rho, sigma)?.d_minus_ft(t))
}

/// `D_{−r_m/ln 2}(ρ‖σ) = (1/ln 2) Σ_i w_i D_{−f_{t_i}}(ρ‖σ)`, bits.
pub fn d_rm(rule: &QuadratureRule, rho: &CMat, sigma: &CMat) -> Result<ExtReal> {
    let pair = PairSpectra::new(rho, sigma)?;
    let total = rule
        .iter()
        .map(|(t, w)| pair.d_minus_ft(t).scale(w))
        .fold(ExtReal::Finite(0.0), |a, b| a + b);
    Ok(total.scale(1.0 / LN_2))
}

/// Minimiser of the variational objective for `D_{−f_t}` and its value.
#[derive(Clone, Debug)]
pub struct VariationalSolution {
    pub z: CMat,
    pub value: f64,
}

/// The bracketed objective `tr ρ + tr ρ(Z + Z*) + (1 − t) tr ρZ*Z + t tr σZZ*`.
pub fn variational_objective(t: f64, rho: &CMat, sigma: &CMat, z: &CMat) -> f64 {
    let zs = z.adjoint();
    let lin = (rho * z).trace().re * 2.0;
    let quad_rho = (rho * &zs * z).trace().re;
    let quad_sigma = (sigma * z * &zs).trace().re;
    rho.trace().re + lin + (1.0 - t) * quad_rho + t * quad_sigma
}

/// Evaluate `D_{−f_t}` through its variational form: solve the stationarity
/// condition `(1 − t) Zρ + t σZ = −ρ` in the eigenbases of `ρ` and `σ`, then
/// return `−(1/t)` times the objective at that `Z`.
pub fn variational_solution(t: f64, rho: &CMat, sigma: &CMat) -> Result<VariationalSolution> {
    check_t(t, false)?;
    let pair = PairSpectra::new(rho, sigma)?;
    let clip = |s: &SpectralDecomp| -> Vec<f64> {
        (0..s.eigenvalues.len()).map(|i| if s.is_zero_class(i) { 0.0 } else { s.eigenvalues[i] }).collect()
    };
    let lambda = clip(&pair.rho);
    let mu = clip(&pair.sigma);
    let scale = lambda.iter().chain(mu.iter()).copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let n = lambda.len();
    let mut zt = CMat::zeros(n, n);
    for k in 0..n {
        for j in 0..n {
            let num = pair.overlap[(k, j)] * lambda[j];
            if num.norm() == 0.0 {
                continue;
            }
            let den = (1.0 - t) * lambda[j] + t * mu[k];
            if den <= 1e-14 * scale {
                if num.norm() > 1e-12 * scale {
                    return Err(Error::Conditioning(format!(
                        "stationarity system is singular at t = {t}: ρ is not supported inside σ"
                    )));
                }
                continue;
            }
            zt[(k, j)] = -num / den;
        }
    }
    let z = &pair.sigma.eigenvectors * zt * pair.rho.eigenvectors.adjoint();
    let value = -variational_objective(t, rho, sigma, &z) / t;
    Ok(VariationalSolution { z, value })
}

pub fn variational_value(t: f64, rho: &CMat, sigma: &CMat) -> Result<f64> {
    Ok(variational_solution(t, rho, sigma)?.value)
}

/// `E_sq^(m)` of a pure bipartite state from its marginal:
/// `(1/ln 2) tr(ρ_A r_m(ρ_A⁻))`, bits.
pub fn pure_state_sq_m(rule: &QuadratureRule, rho_a: &DensityMatrix) -> Result<f64> {
    let inv = crate::qstate::gen_inverse(rho_a.matrix())?;
    let r = r_m_matrix(rule, &inv)?;
    Ok((rho_a.matrix() * r).trace().re / LN_2)
}

/// Gap between `E_sq^(m)` and `E_sq`: `(2 d_A − 2) / (m² ln 2)`, bits.
pub fn sq_m_error_bound(m: usize, d_a: usize) -> Result<f64> {
    if m == 0 || d_a == 0 {
        return Err(Error::arg("m and d_A must be positive"));
    }
    Ok((2.0 * d_a as f64 - 2.0) / ((m * m) as f64 * LN_2))
}

/// `(1/ln 2) Σ_j λ_j (−r_m)(μ_j/λ_j)` for commuting diagonal pairs.
pub fn d_rm_diagonal(rule: &QuadratureRule, lambda: &[f64], mu: &[f64]) -> ExtReal {
    let mut total = ExtReal::Finite(0.0);
    for (&l, &u) in lambda.iter().zip(mu) {
        if l <= 0.0 {
            continue;
        }
        if u <= 0.0 {
            // −f_1(0⁺) = +∞ and the last node is always t = 1
            return ExtReal::PosInf;
        }
        total = total + ExtReal::Finite(-l * crate::quadrature::r_m_unchecked(rule, u / l));
    }
    total.scale(1.0 / LN_2)
}
