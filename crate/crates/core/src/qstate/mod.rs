//! Finite-dimensional quantum states.
//!
//! Dense complex matrices with a positional subsystem profile: tensor
//! products, partial traces, spectral calculus, purifications, entropies in
//! bits, and the Werner family.
//!
//! Subsystem order is fixed at construction. Partial traces keep the
//! surviving subsystems in their original order and nothing in this module
//! ever reorders them behind the caller's back.

pub mod random;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Eigenvalues below `SUPPORT_CUTOFF * λ_max` are treated as exact zeros.
pub const SUPPORT_CUTOFF: f64 = 1e-12;
/// Deviations above this are logged but accepted.
pub const WARN_TOL: f64 = 1e-9;
/// Deviations above this are rejected.
pub const HARD_TOL: f64 = 1e-6;
/// `tr(ρ(I − σ⁰))` above this counts as a support violation.
pub const SUPPORT_LEAK_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A unit-trace positive semidefinite Hermitian matrix on `∏ dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMat,
}

impl DensityMatrix {
    /// Validate and wrap `data`.
    ///
    /// Hermiticity, trace and positivity deviations up to `HARD_TOL` are
    /// accepted (with a warning above `WARN_TOL`); the stored matrix is the
    /// Hermitian part of the input.
    pub fn new(dims: Vec<usize>, data: CMat) -> Result<Self> {
        check_dims(&dims, &data)?;
        let report = validate_state(&data)?;
        if report.worst() > WARN_TOL {
            log::warn!(
                "state accepted with deviations: hermiticity {:.2e}, trace {:.2e}, min eigenvalue {:.2e}",
                report.hermiticity,
                report.trace,
                report.negativity
            );
        }
        Ok(Self { dims, data: hermitian_part(&data) })
    }

    /// Wrap without validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(dims: Vec<usize>, data: CMat) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.nrows());
        Self { dims, data }
    }

    /// `|ψ⟩⟨ψ|` for a (re)normalized vector.
    pub fn from_pure(dims: Vec<usize>, psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::arg("zero vector has no pure state"));
        }
        let psi = psi.unscale(norm);
        let data = &psi * psi.adjoint();
        check_dims(&dims, &data)?;
        Ok(Self { dims, data })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        let data = CMat::identity(n, n).unscale(n as f64);
        check_dims(&dims, &data)?;
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.data
    }

    pub fn into_matrix(self) -> CMat {
        self.data
    }

    /// `self ⊗ other`, subsystem lists concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix::new_unchecked(dims, tensor(&self.data, &other.data))
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn spectral(&self) -> Result<SpectralDecomp> {
        spectral(&self.data, SUPPORT_CUTOFF)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        Ok(entropy_of_spectrum(&self.spectral()?.eigenvalues))
    }

    /// Number of eigenvalues outside the zero class.
    pub fn rank(&self) -> Result<usize> {
        Ok(self.spectral()?.support_indices().count())
    }
}

/// Deviations of a matrix from being a density matrix.
#[derive(Clone, Copy, Debug, Default)]
pub struct StateReport {
    pub hermiticity: f64,
    pub trace: f64,
    pub negativity: f64,
}

impl StateReport {
    fn worst(&self) -> f64 {
        self.hermiticity.max(self.trace).max(self.negativity)
    }
}

/// Measure Hermiticity, trace and positivity deviations, failing past `HARD_TOL`.
pub fn validate_state(data: &CMat) -> Result<StateReport> {
    if !data.is_square() || data.nrows() == 0 {
        return Err(Error::Contract(format!(
            "density matrix must be square and nonempty, got {}x{}",
            data.nrows(),
            data.ncols()
        )));
    }
    let scale = 1.0 + max_abs(data);
    let hermiticity = max_abs(&(data - data.adjoint())) / scale;
    let trace = (data.trace() - ONE).norm();
    let min_eig = hermitian_part(data)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let report = StateReport { hermiticity, trace, negativity: (-min_eig).max(0.0) };
    if report.hermiticity > HARD_TOL {
        return Err(Error::Contract(format!("matrix is not Hermitian (deviation {:.3e})", hermiticity)));
    }
    if report.trace > HARD_TOL {
        return Err(Error::Contract(format!("trace deviates from 1 by {:.3e}", trace)));
    }
    if report.negativity > HARD_TOL {
        return Err(Error::Contract(format!("smallest eigenvalue {:.3e} is negative", min_eig)));
    }
    Ok(report)
}

fn check_dims(dims: &[usize], data: &CMat) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::arg(format!("subsystem dimensions must be positive, got {dims:?}")));
    }
    let n: usize = dims.iter().product();
    if data.nrows() != n || data.ncols() != n {
        return Err(Error::arg(format!(
            "dims {dims:?} need a {n}x{n} matrix, got {}x{}",
            data.nrows(),
            data.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).unscale(2.0)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Maps (kept multi-index, traced multi-index) to the full row index.
struct SplitIndex {
    keep_dim: usize,
    trace_dim: usize,
    table: Vec<usize>,
}

impl SplitIndex {
    fn new(dims: &[usize], keep: &[usize]) -> Self {
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let keep_dim: usize = keep.iter().map(|&i| dims[i]).product();
        let trace_dim: usize = traced.iter().map(|&i| dims[i]).product();
        // strides of each subsystem in the full row index (first subsystem slowest)
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let offsets = |subsystems: &[usize], total: usize| -> Vec<usize> {
            (0..total)
                .map(|mut idx| {
                    let mut full = 0;
                    for &s in subsystems.iter().rev() {
                        full += (idx % dims[s]) * strides[s];
                        idx /= dims[s];
                    }
                    full
                })
                .collect()
        };
        let keep_off = offsets(keep, keep_dim);
        let trace_off = offsets(&traced, trace_dim);
        let mut table = Vec::with_capacity(keep_dim * trace_dim);
        for k in &keep_off {
            for t in &trace_off {
                table.push(k + t);
            }
        }
        Self { keep_dim, trace_dim, table }
    }

    fn full(&self, k: usize, t: usize) -> usize {
        self.table[k * self.trace_dim + t]
    }
}

fn check_keep(dims: &[usize], keep: &[usize]) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::arg("partial trace must keep at least one subsystem"));
    }
    for (pos, &k) in keep.iter().enumerate() {
        if k >= dims.len() {
            return Err(Error::arg(format!("subsystem index {k} out of range for {} subsystems", dims.len())));
        }
        if keep[..pos].contains(&k) {
            return Err(Error::arg(format!("subsystem index {k} listed twice")));
        }
    }
    Ok(())
}

/// Trace out every subsystem not listed in `keep`.
///
/// The result carries the kept dimensions in their original positional order,
/// regardless of the order in which `keep` lists them.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mut keep = keep.to_vec();
    check_keep(&rho.dims, &keep)?;
    keep.sort_unstable();
    let out = partial_trace_matrix(&rho.data, &rho.dims, &keep);
    let dims = keep.iter().map(|&i| rho.dims[i]).collect();
    Ok(DensityMatrix::new_unchecked(dims, out))
}

/// Partial trace of a plain matrix; `keep` must be sorted and valid.
pub(crate) fn partial_trace_matrix(data: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let split = SplitIndex::new(dims, keep);
    CMat::from_fn(split.keep_dim, split.keep_dim, |k1, k2| {
        (0..split.trace_dim).map(|t| data[(split.full(k1, t), split.full(k2, t))]).sum()
    })
}

/// `I_rest ⊗ op` with `op` acting on the subsystems `keep` (sorted) of `dims`.
pub(crate) fn embed_with_identity(op: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let split = SplitIndex::new(dims, keep);
    let n: usize = dims.iter().product();
    let mut out = CMat::zeros(n, n);
    for k1 in 0..split.keep_dim {
        for k2 in 0..split.keep_dim {
            let v = op[(k1, k2)];
            if v == ZERO {
                continue;
            }
            for t in 0..split.trace_dim {
                out[(split.full(k1, t), split.full(k2, t))] = v;
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix with a zero-class cutoff.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `eigenvalues`.
    pub eigenvectors: CMat,
    /// Relative cutoff: `λ < support_cutoff · λ_max` is zero-class.
    pub support_cutoff: f64,
}

impl SpectralDecomp {
    fn threshold(&self) -> f64 {
        let max = self.eigenvalues.last().copied().unwrap_or(0.0);
        self.support_cutoff * max.max(0.0)
    }

    pub fn is_zero_class(&self, i: usize) -> bool {
        let max = self.eigenvalues.last().copied().unwrap_or(0.0);
        max <= 0.0 || self.eigenvalues[i] < self.threshold()
    }

    pub fn support_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.eigenvalues.len()).filter(move |&i| !self.is_zero_class(i))
    }

    pub fn zero_class_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.eigenvalues.len()).filter(move |&i| self.is_zero_class(i))
    }

    pub fn reconstruct(&self) -> CMat {
        let v = &self.eigenvectors;
        let scaled = CMat::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * self.eigenvalues[c]);
        scaled * v.adjoint()
    }

    /// `f(M)` on the support; zero-class eigenvalues map to 0.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.eigenvectors.nrows();
        let mut out = CMat::zeros(n, n);
        for i in self.support_indices() {
            let col = self.eigenvectors.column(i);
            out += (col * col.adjoint()) * Complex64::from(f(self.eigenvalues[i]));
        }
        out
    }

    pub fn support_projector(&self) -> CMat {
        self.apply(|_| 1.0)
    }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn spectral(m: &CMat, cutoff: f64) -> Result<SpectralDecomp> {
    if !m.is_square() {
        return Err(Error::Contract("spectral decomposition needs a square matrix".into()));
    }
    let dev = max_abs(&(m - m.adjoint()));
    if dev > HARD_TOL * (1.0 + max_abs(m)) {
        return Err(Error::Contract(format!("matrix is not Hermitian (deviation {dev:.3e})")));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMat::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomp { eigenvalues, eigenvectors, support_cutoff: cutoff })
}

/// Moore-Penrose inverse of a PSD matrix: inverts the support, zero elsewhere.
pub fn gen_inverse(m: &CMat) -> Result<CMat> {
    Ok(spectral(m, SUPPORT_CUTOFF)?.apply(|x| 1.0 / x))
}

/// A purification `Σ_k √λ_k |e_k⟩ ⊗ |k⟩` on system ⊗ reference.
#[derive(Clone, Debug)]
pub struct Purification {
    pub vector: CVec,
    pub system_dim: usize,
    /// Equals the rank of the purified state.
    pub reference_dim: usize,
}

pub fn canonical_purification(rho: &DensityMatrix) -> Result<Purification> {
    let spec = rho.spectral()?;
    let support: Vec<usize> = spec.support_indices().collect();
    let n = rho.dim();
    let r = support.len();
    let mut vector = CVec::zeros(n * r);
    for (k, &i) in support.iter().enumerate() {
        let amp = spec.eigenvalues[i].sqrt();
        for s in 0..n {
            vector[s * r + k] = spec.eigenvectors[(s, i)] * amp;
        }
    }
    Ok(Purification { vector, system_dim: n, reference_dim: r })
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `−Σ λ log₂ λ` with `0·log 0 = 0`.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().copied().fold(0.0, f64::max);
    -eigenvalues
        .iter()
        .filter(|&&l| l >= SUPPORT_CUTOFF * max)
        .map(|&l| xlog2x(l))
        .sum::<f64>()
}

/// Quantum relative entropy `D(ρ‖σ)` in bits; `+∞` on a support violation.
pub fn rel_entropy(rho: &DensityMatrix, sigma: &CMat) -> Result<ExtReal> {
    rel_entropy_matrix(rho.matrix(), sigma)
}

pub(crate) fn rel_entropy_matrix(rho: &CMat, sigma: &CMat) -> Result<ExtReal> {
    if rho.shape() != sigma.shape() {
        return Err(Error::arg(format!(
            "relative entropy needs equal dimensions, got {:?} and {:?}",
            rho.shape(),
            sigma.shape()
        )));
    }
    let sr = spectral(rho, SUPPORT_CUTOFF)?;
    let ss = spectral(sigma, SUPPORT_CUTOFF)?;
    let overlap = ss.eigenvectors.adjoint() * &sr.eigenvectors;
    let sigma_support: Vec<usize> = ss.support_indices().collect();
    let mut leak = 0.0;
    let mut cross = 0.0;
    let mut self_term = 0.0;
    for j in sr.support_indices() {
        let lambda = sr.eigenvalues[j];
        self_term += xlog2x(lambda);
        let mut captured = 0.0;
        for &k in &sigma_support {
            let w = overlap[(k, j)].norm_sqr();
            captured += w;
            cross += lambda * ss.eigenvalues[k].log2() * w;
        }
        leak += lambda * (1.0 - captured);
    }
    if leak > SUPPORT_LEAK_TOL {
        return Ok(ExtReal::PosInf);
    }
    Ok(ExtReal::Finite(self_term - cross))
}

/// `H(A|E) = −D(ρ_AE ‖ I_A ⊗ ρ_E)` in bits, where `a` lists the subsystems of
/// `A` and every other subsystem of `rho` is conditioned on.
pub fn cond_entropy(rho: &DensityMatrix, a: &[usize]) -> Result<f64> {
    check_keep(rho.dims(), a)?;
    let cond: Vec<usize> = (0..rho.dims().len()).filter(|i| !a.contains(i)).collect();
    let reference = if cond.is_empty() {
        CMat::identity(rho.dim(), rho.dim()) * rho.matrix().trace()
    } else {
        let rho_e = partial_trace_matrix(rho.matrix(), rho.dims(), &cond);
        embed_with_identity(&rho_e, rho.dims(), &cond)
    };
    match rel_entropy_matrix(rho.matrix(), &reference)? {
        ExtReal::Finite(d) => Ok(-d),
        ExtReal::PosInf => Err(Error::Contract(
            "state leaks out of the support of I_A ⊗ ρ_E; input is not PSD".into(),
        )),
    }
}

/// Conditional mutual information `I(A:B|E) = H(A|E) − H(A|BE)` of a state on A⊗B⊗E.
pub fn cmi(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims().len() != 3 {
        return Err(Error::arg(format!("cmi needs three subsystems, got dims {:?}", rho.dims())));
    }
    let rho_ae = partial_trace(rho, &[0, 2])?;
    Ok(cond_entropy(&rho_ae, &[0])? - cond_entropy(rho, &[0])?)
}

/// The swap operator on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> CMat {
    let mut f = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = ONE;
        }
    }
    f
}

/// `p·Π_sym/tr Π_sym + (1−p)·Π_asym/tr Π_asym` on `C^d ⊗ C^d`.
pub fn werner(d: usize, p: f64) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::arg(format!("Werner dimension must be at least 2, got {d}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!("Werner parameter p must lie in [0, 1], got {p}")));
    }
    let n = d * d;
    let id = CMat::identity(n, n);
    let f = swap_operator(d);
    let sym = (&id + &f).unscale(2.0);
    let asym = (&id - &f).unscale(2.0);
    let df = d as f64;
    let data = sym * Complex64::from(p / (df * (df + 1.0) / 2.0))
        + asym * Complex64::from((1.0 - p) / (df * (df - 1.0) / 2.0));
    Ok(DensityMatrix::new_unchecked(vec![d, d], data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(v.len(), v.iter().map(|&x| c(x))))
    }

    fn dm(dims: Vec<usize>, m: CMat) -> DensityMatrix {
        DensityMatrix::new(dims, m).unwrap()
    }

    fn bell() -> DensityMatrix {
        let mut psi = CVec::zeros(4);
        psi[0] = c(1.0);
        psi[3] = c(1.0);
        DensityMatrix::from_pure(vec![2, 2], &psi).unwrap()
    }

    #[test]
    fn tensor_of_identities_and_diagonals() {
        let i2 = CMat::identity(2, 2);
        assert_eq!(tensor(&i2, &i2), CMat::identity(4, 4));
        let p = 0.3;
        let got = tensor(&diag(&[1.0, 0.0]), &diag(&[p, 1.0 - p]));
        assert_eq!(got, diag(&[p, 1.0 - p, 0.0, 0.0]));
    }

    #[test]
    fn tensor_matches_index_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random::ginibre(2, 2, &mut rng);
        let b = random::ginibre(2, 2, &mut rng);
        let k = tensor(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..2 {
                    for l in 0..2 {
                        assert_eq!(k[(i * 2 + kk, j * 2 + l)], a[(i, j)] * b[(kk, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ra = random::random_density(&[2], 2, &mut rng);
        let rb = random::random_density(&[3], 3, &mut rng);
        let prod = ra.tensor(&rb);
        let back = prod.partial_trace(&[0]).unwrap();
        assert_eq!(back.dims(), &[2]);
        assert_abs_diff_eq!(max_abs(&(back.matrix() - ra.matrix())), 0.0, epsilon = 1e-14);

        let half = bell().partial_trace(&[1]).unwrap();
        assert_abs_diff_eq!(max_abs(&(half.matrix() - CMat::identity(2, 2).unscale(2.0))), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_matches_brute_force_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::random_density(&[2, 3], 6, &mut rng);
        let m = rho.matrix();
        // tr_B: sum over the environment basis
        let mut expect_a = CMat::zeros(2, 2);
        for a1 in 0..2 {
            for a2 in 0..2 {
                for b in 0..3 {
                    expect_a[(a1, a2)] += m[(a1 * 3 + b, a2 * 3 + b)];
                }
            }
        }
        let mut expect_b = CMat::zeros(3, 3);
        for b1 in 0..3 {
            for b2 in 0..3 {
                for a in 0..2 {
                    expect_b[(b1, b2)] += m[(a * 3 + b1, a * 3 + b2)];
                }
            }
        }
        let got_a = partial_trace(&rho, &[0]).unwrap();
        let got_b = partial_trace(&rho, &[1]).unwrap();
        assert!(max_abs(&(got_a.matrix() - expect_a)) < 1e-14);
        assert!(max_abs(&(got_b.matrix() - expect_b)) < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let rho = bell();
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&rho, &[0, 0]), Err(Error::Argument(_))));
    }

    #[test]
    fn partial_trace_keeps_positional_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random::random_density(&[2], 2, &mut rng);
        let b = random::random_density(&[3], 3, &mut rng);
        let e = random::random_density(&[2], 2, &mut rng);
        let abe = a.tensor(&b).tensor(&e);
        let ae = abe.partial_trace(&[2, 0]).unwrap();
        assert_eq!(ae.dims(), &[2, 2]);
        assert!(max_abs(&(ae.matrix() - a.tensor(&e).matrix())) < 1e-14);
    }

    #[test]
    fn spectral_basics() {
        let s = spectral(&CMat::identity(2, 2).unscale(2.0), SUPPORT_CUTOFF).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.5, epsilon = 1e-15);

        let s = spectral(&diag(&[0.0, 1.0]), 1e-12).unwrap();
        assert!(s.is_zero_class(0));
        assert!(!s.is_zero_class(1));
        assert_eq!(s.zero_class_indices().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn spectral_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 3, 6] {
            let h = random::random_hermitian(n, &mut rng);
            let s = spectral(&h, SUPPORT_CUTOFF).unwrap();
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(max_abs(&(s.reconstruct() - &h)) < 1e-10);
        }
    }

    #[test]
    fn spectral_rejects_non_hermitian() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(spectral(&m, SUPPORT_CUTOFF), Err(Error::Contract(_))));
    }

    #[test]
    fn gen_inverse_cases() {
        let g = gen_inverse(&CMat::identity(2, 2).unscale(2.0)).unwrap();
        assert!(max_abs(&(g - CMat::identity(2, 2) * c(2.0))) < 1e-14);
        let g = gen_inverse(&diag(&[1.0, 0.0])).unwrap();
        assert!(max_abs(&(g - diag(&[1.0, 0.0]))) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random::random_density(&[4], 2, &mut rng);
        let m = rho.matrix();
        let g = gen_inverse(m).unwrap();
        assert!(max_abs(&(m * &g * m - m)) < 1e-9);
        let proj = rho.spectral().unwrap().support_projector();
        assert!(max_abs(&(&g * m - proj)) < 1e-9);
    }

    #[test]
    fn purification_of_pure_and_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = random::random_pure(3, &mut rng);
        let pure = DensityMatrix::from_pure(vec![3], &psi).unwrap();
        let p = canonical_purification(&pure).unwrap();
        assert_eq!(p.reference_dim, 1);
        let overlap = (psi.adjoint() * &p.vector)[0].norm();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);

        let mixed = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let p = canonical_purification(&mixed).unwrap();
        assert_eq!(p.reference_dim, 2);
        let joint = DensityMatrix::from_pure(vec![2, 2], &p.vector).unwrap();
        for keep in [0, 1] {
            let r = joint.partial_trace(&[keep]).unwrap();
            assert!(max_abs(&(r.matrix() - CMat::identity(2, 2).unscale(2.0))) < 1e-12);
        }

        let w = werner(2, 0.3).unwrap();
        let p = canonical_purification(&w).unwrap();
        let joint = DensityMatrix::from_pure(vec![4, p.reference_dim], &p.vector).unwrap();
        let back = joint.partial_trace(&[0]).unwrap();
        assert!(max_abs(&(back.matrix() - w.matrix())) < 1e-9);
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = dm(vec![2], diag(&[0.3, 0.7]));
        assert_abs_diff_eq!(rel_entropy(&rho, rho.matrix()).unwrap().to_f64(), 0.0, epsilon = 1e-14);

        let rho = dm(vec![2], diag(&[1.0, 0.0]));
        let d = rel_entropy(&rho, &diag(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(d.to_f64(), 1.0, epsilon = 1e-14);

        let rho = dm(vec![2], diag(&[0.5, 0.5]));
        assert_eq!(rel_entropy(&rho, &diag(&[1.0, 0.0])).unwrap(), ExtReal::PosInf);

        assert!(matches!(rel_entropy(&rho, &CMat::identity(3, 3)), Err(Error::Argument(_))));
    }

    #[test]
    fn conditional_entropy_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random::random_density(&[2], 2, &mut rng);
        let e = random::random_density(&[3], 3, &mut rng);
        let h = cond_entropy(&a.tensor(&e), &[0]).unwrap();
        assert_abs_diff_eq!(h, a.entropy().unwrap(), epsilon = 1e-10);

        assert_abs_diff_eq!(cond_entropy(&bell(), &[0]).unwrap(), -1.0, epsilon = 1e-12);

        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert_abs_diff_eq!(cond_entropy(&mixed, &[0]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cmi_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ab = random::random_density(&[2, 2], 4, &mut rng);
        let e = random::random_density(&[3], 3, &mut rng);
        let mutual = ab.partial_trace(&[0]).unwrap().entropy().unwrap()
            + ab.partial_trace(&[1]).unwrap().entropy().unwrap()
            - ab.entropy().unwrap();
        assert_abs_diff_eq!(cmi(&ab.tensor(&e)).unwrap(), mutual, epsilon = 1e-10);

        let trivial = DensityMatrix::new(vec![1], CMat::identity(1, 1)).unwrap();
        assert_abs_diff_eq!(cmi(&bell().tensor(&trivial)).unwrap(), 2.0, epsilon = 1e-12);

        let a = random::random_density(&[2], 2, &mut rng);
        let b = random::random_density(&[2], 1, &mut rng);
        assert_abs_diff_eq!(cmi(&a.tensor(&b).tensor(&e)).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn werner_cases() {
        let singlet = werner(2, 0.0).unwrap();
        let s = singlet.spectral().unwrap();
        assert_eq!(s.support_indices().count(), 1);
        let mut psi = CVec::zeros(4);
        psi[1] = c(1.0);
        psi[2] = c(-1.0);
        let expect = DensityMatrix::from_pure(vec![2, 2], &psi).unwrap();
        assert!(max_abs(&(singlet.matrix() - expect.matrix())) < 1e-15);

        let sym = werner(2, 1.0).unwrap();
        let pi_sym = (CMat::identity(4, 4) + swap_operator(2)).unscale(2.0);
        assert!(max_abs(&(sym.matrix() - pi_sym.unscale(3.0))) < 1e-15);

        let w = werner(3, 0.5).unwrap();
        assert_abs_diff_eq!(w.matrix().trace().re, 1.0, epsilon = 1e-14);
        let ev = w.spectral().unwrap().eigenvalues;
        for &l in &ev[..6] {
            assert_abs_diff_eq!(l, 0.5 / 6.0, epsilon = 1e-12);
        }
        for &l in &ev[6..] {
            assert_abs_diff_eq!(l, 0.5 / 3.0, epsilon = 1e-12);
        }

        assert!(matches!(werner(2, 1.5), Err(Error::Argument(_))));
        assert!(matches!(werner(1, 0.5), Err(Error::Argument(_))));
    }

    #[test]
    fn validation_thresholds() {
        let mut m = CMat::identity(2, 2).unscale(2.0);
        m[(0, 0)] += c(1e-8);
        assert!(DensityMatrix::new(vec![2], m.clone()).is_ok());
        m[(0, 0)] += c(1e-5);
        assert!(matches!(DensityMatrix::new(vec![2], m), Err(Error::Contract(_))));
        let neg = diag(&[1.1, -0.1]);
        assert!(matches!(DensityMatrix::new(vec![2], neg), Err(Error::Contract(_))));
        assert!(matches!(DensityMatrix::new(vec![3], CMat::identity(2, 2)), Err(Error::Argument(_))));
    }
}
