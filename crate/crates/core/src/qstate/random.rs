//! Random matrices and states for tests and multi-start initialisation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMat, CVec, DensityMatrix};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unit vector.
pub fn random_pure(n: usize, rng: &mut impl Rng) -> CVec {
    let v = CVec::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()).unscale(2.0)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random PSD matrix of the given rank with unit trace.
pub fn random_psd(n: usize, rank: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(n, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale(tr)
}

/// Induced-measure random state of rank at most `rank`.
pub fn random_density(dims: &[usize], rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let n: usize = dims.iter().product();
    DensityMatrix::new_unchecked(dims.to_vec(), random_psd(n, rank, rng))
}
