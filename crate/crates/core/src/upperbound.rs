//! Heuristic upper bounds: minimise `½(H(A|D) + H(A|E))` over purifications
//! `(I_AB ⊗ V)|ψ⟩` of `ρ_AB` with `V` an isometry from the purifying reference
//! into `D ⊗ E` of fixed dimensions.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::moment::{BoundKind, BoundResult};
use crate::qstate::{canonical_purification, CMat, CVec, DensityMatrix};
use crate::solver::Status;

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_MAX_ITERS: usize = 500;
/// Eigenvalues are floored here inside the logarithms.
pub const EIGEN_FLOOR: f64 = 1e-12;
const FD_STEP: f64 = 1e-5;
const INIT_SCALE: f64 = 1.0;

/// Real parameters of `V`: the first `rank` columns of `exp(iH)` with `H`
/// Hermitian on `D ⊗ E`, packed as `n` diagonal entries followed by
/// `(re, im)` for each strictly upper entry, `n²` numbers in all.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionAnsatz {
    pub d_d: usize,
    pub d_e: usize,
    pub params: Vec<f64>,
    pub rng_seed: u64,
}

impl ExtensionAnsatz {
    pub fn num_params(d_d: usize, d_e: usize) -> usize {
        (d_d * d_e).pow(2)
    }

    /// Gaussian entries of scale 1, drawn from the given seed.
    pub fn random(d_d: usize, d_e: usize, rng_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let params = (0..Self::num_params(d_d, d_e))
            .map(|_| INIT_SCALE * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        ExtensionAnsatz { d_d, d_e, params, rng_seed }
    }

    fn hermitian(&self) -> CMat {
        let n = self.d_d * self.d_e;
        let mut h = CMat::zeros(n, n);
        let mut it = self.params.iter().copied();
        for i in 0..n {
            h[(i, i)] = Complex64::new(it.next().unwrap_or(0.0), 0.0);
        }
        for i in 0..n {
            for j in i + 1..n {
                let re = it.next().unwrap_or(0.0);
                let im = it.next().unwrap_or(0.0);
                h[(i, j)] = Complex64::new(re, im);
                h[(j, i)] = Complex64::new(re, -im);
            }
        }
        h
    }

    /// `(d_D d_E) × rank` isometry.
    pub fn isometry(&self, rank: usize) -> Result<CMat> {
        let n = self.d_d * self.d_e;
        if rank > n {
            return Err(Error::arg(format!("d_D·d_E = {n} is smaller than rank(ρ_AB) = {rank}")));
        }
        if self.params.len() != Self::num_params(self.d_d, self.d_e) {
            return Err(Error::arg(format!(
                "ansatz has {} parameters, expected {}",
                self.params.len(),
                Self::num_params(self.d_d, self.d_e)
            )));
        }
        let eig = self.hermitian().symmetric_eigen();
        let u = &eig.eigenvectors;
        let phases = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)));
        // first `rank` columns of exp(iH) = U e^{iΛ} U†
        let rows = u.rows(0, rank).adjoint();
        Ok(u * DMatrix::from_diagonal(&phases) * rows)
    }
}

/// Precomputed purification of `ρ_AB`, reusable across many ansatz evaluations.
struct Problem {
    d_a: usize,
    d_b: usize,
    /// `(d_A d_B) × rank` amplitudes of the canonical purification.
    psi: CMat,
}

impl Problem {
    fn new(rho: &DensityMatrix) -> Result<Self> {
        if rho.dims().len() != 2 {
            return Err(Error::arg(format!("upper bound needs a bipartite state, got dims {:?}", rho.dims())));
        }
        let pur = canonical_purification(rho)?;
        let r = pur.reference_dim;
        let psi = CMat::from_fn(pur.system_dim, r, |s, k| pur.vector[s * r + k]);
        Ok(Problem { d_a: rho.dims()[0], d_b: rho.dims()[1], psi })
    }

    fn rank(&self) -> usize {
        self.psi.ncols()
    }

    fn value(&self, ansatz: &ExtensionAnsatz) -> Result<f64> {
        let v = ansatz.isometry(self.rank())?;
        Ok(self.value_with(&v, ansatz.d_d, ansatz.d_e))
    }

    fn value_with(&self, v: &CMat, d_d: usize, d_e: usize) -> f64 {
        let (d_a, d_b) = (self.d_a, self.d_b);
        // amplitudes ψ(a, b, d, e) with (d, e) flattened as d·d_E + e
        let out = &self.psi * v.transpose();
        let amp = |a: usize, b: usize, d: usize, e: usize| out[(a * d_b + b, d * d_e + e)];
        let m_ad = CMat::from_fn(d_a * d_d, d_b * d_e, |r, c| amp(r / d_d, c / d_e, r % d_d, c % d_e));
        let m_ae = CMat::from_fn(d_a * d_e, d_b * d_d, |r, c| amp(r / d_e, c / d_d, c % d_d, r % d_e));
        let cond = |m: CMat, d_x: usize| {
            let rho_ax = &m * m.adjoint();
            let rho_x = CMat::from_fn(d_x, d_x, |i, j| (0..d_a).map(|a| rho_ax[(a * d_x + i, a * d_x + j)]).sum());
            entropy(&rho_ax) - entropy(&rho_x)
        };
        0.5 * (cond(m_ad, d_d) + cond(m_ae, d_e))
    }
}

/// Pure extension on `A ⊗ B ⊗ D ⊗ E` whose `AB` marginal is `ρᵀ`.
pub fn transposed_extension(rho: &DensityMatrix, ansatz: &ExtensionAnsatz) -> Result<DensityMatrix> {
    let problem = Problem::new(rho)?;
    let v = ansatz.isometry(problem.rank())?;
    let out = &problem.psi * v.transpose();
    let amps = CVec::from_iterator(out.len(), (0..out.nrows()).flat_map(|r| (0..out.ncols()).map(move |c| (r, c))).map(|(r, c)| out[(r, c)].conj()));
    DensityMatrix::from_pure(vec![problem.d_a, problem.d_b, ansatz.d_d, ansatz.d_e], &amps)
}

fn entropy(rho: &CMat) -> f64 {
    -rho.symmetric_eigenvalues().iter().map(|&l| l.max(0.0) * l.max(EIGEN_FLOOR).log2()).sum::<f64>()
}

/// `½(H(A|D) + H(A|E))` in bits for the purification selected by `ansatz`.
pub fn objective(rho: &DensityMatrix, ansatz: &ExtensionAnsatz) -> Result<f64> {
    Problem::new(rho)?.value(ansatz)
}

struct Local {
    params: Vec<f64>,
    value: f64,
    iterations: usize,
}

fn gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + FD_STEP;
            let up = f(&probe);
            probe[i] = x[i] - FD_STEP;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// BFGS with central-difference gradients and Armijo backtracking.
fn bfgs(f: impl Fn(&[f64]) -> f64, x0: Vec<f64>, max_iters: usize) -> Local {
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut fx = f(x.as_slice());
    let mut g = DVector::from_vec(gradient(&f, x.as_slice()));
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut stalls = 0;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        if g.amax() < 1e-9 {
            break;
        }
        let mut p = -(&hinv * &g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            hinv.fill_with_identity();
            p = -g.clone();
            slope = -g.norm_squared();
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &x + &p * alpha;
            let ft = f(trial.as_slice());
            if ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else { break };
        let g_new = DVector::from_vec(gradient(&f, x_new.as_slice()));
        let s = &x_new - &x;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let rho = 1.0 / sy;
            let hy = &hinv * &yv;
            let yhy = yv.dot(&hy);
            // H ← H − ρ(s hyᵀ + hy sᵀ) + (ρ² yᵀHy + ρ) s sᵀ
            hinv -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            hinv += &s * s.transpose() * (rho * rho * yhy + rho);
        }
        stalls = if fx - f_new <= 1e-13 * (1.0 + fx.abs()) { stalls + 1 } else { 0 };
        x = x_new;
        fx = f_new;
        g = g_new;
        if stalls >= 3 {
            break;
        }
    }
    Local { params: x.as_slice().to_vec(), value: fx, iterations }
}

/// Per-restart seed, independent of how restarts are scheduled.
fn restart_seed(seed: u64, restart: usize) -> u64 {
    use sha2::{Digest, Sha256};
    let digest = Sha256::new().chain_update(seed.to_le_bytes()).chain_update((restart as u64).to_le_bytes()).finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

#[derive(Clone, Debug)]
pub struct UpperBoundOutcome {
    pub result: BoundResult,
    pub best: ExtensionAnsatz,
    /// Best value after each restart; non-increasing.
    pub best_so_far: Vec<f64>,
}

pub fn upper_bound(
    rho: &DensityMatrix,
    d_d: usize,
    d_e: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<UpperBoundOutcome> {
    let start = Instant::now();
    if d_d == 0 || d_e == 0 {
        return Err(Error::arg("d_D and d_E must be positive"));
    }
    if restarts == 0 {
        return Err(Error::arg("at least one restart is needed"));
    }
    let problem = Problem::new(rho)?;
    if problem.rank() > d_d * d_e {
        return Err(Error::arg(format!(
            "d_D·d_E = {} is smaller than rank(ρ_AB) = {}",
            d_d * d_e,
            problem.rank()
        )));
    }

    let mut best: Option<(f64, ExtensionAnsatz)> = None;
    let mut best_so_far = Vec::with_capacity(restarts);
    let mut total_iters = 0;
    for restart in 0..restarts {
        let init = ExtensionAnsatz::random(d_d, d_e, restart_seed(seed, restart));
        let rng_seed = init.rng_seed;
        let f = |x: &[f64]| {
            let a = ExtensionAnsatz { d_d, d_e, params: x.to_vec(), rng_seed };
            problem.value(&a).unwrap_or(f64::INFINITY)
        };
        let local = bfgs(f, init.params, max_iters);
        total_iters += local.iterations;
        log::debug!("upper bound restart {restart}: {:.9} after {} iterations", local.value, local.iterations);
        if best.as_ref().map_or(true, |(v, _)| local.value < *v) {
            best = Some((local.value, ExtensionAnsatz { d_d, d_e, params: local.params, rng_seed }));
        }
        best_so_far.push(best.as_ref().unwrap().0);
    }
    let (value, ansatz) = best.unwrap();

    let v = ansatz.isometry(problem.rank())?;
    let defect = (v.adjoint() * &v - CMat::identity(v.ncols(), v.ncols())).camax();
    if defect > 1e-8 {
        return Err(Error::Conditioning(format!("optimised isometry drifted: ‖V†V − I‖ = {defect:.2e}")));
    }
    let mut result = BoundResult::new(BoundKind::UpperHeuristic, value, Status::Optimal);
    result.d_d = Some(d_d);
    result.d_e = Some(d_e);
    result.restarts = Some(restarts);
    result.wall_time = start.elapsed().as_secs_f64();
    result.notes.push(format!("{total_iters} quasi-Newton iterations over {restarts} restarts"));
    Ok(UpperBoundOutcome { result, best: ansatz, best_so_far })
}
