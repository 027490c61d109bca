//! Real standard-form SDPs and the backends that solve them.
//!
//! Standard form: minimise `⟨C, X⟩` subject to `⟨A_i, X⟩ = b_i` and `X ⪰ 0`,
//! with `⟨A, X⟩ = Σ_ij A_ij X_ij` over the full symmetric matrices.

mod admm;
mod external;
pub mod sdpa;

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use admm::{solve_embedded, solve_embedded_from};
#[cfg(test)]
pub(crate) use admm::split_real;
pub use external::{solve_external, ENV_SOLVER};

/// Symmetric matrix stored as its upper triangle (`i ≤ j`).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    side: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new(side: usize) -> Self {
        SparseSym { side, entries: Vec::new() }
    }

    /// Builds from `(i, j, value)` triples in either triangle; duplicates add.
    pub fn from_triplets(side: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut s = SparseSym::new(side);
        for (i, j, v) in triplets {
            s.push(i, j, v);
        }
        s.normalize();
        s
    }

    /// Sets `A_ij = A_ji += v`. Call [`SparseSym::normalize`] before use.
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.side && j < self.side, "entry ({i}, {j}) outside side {}", self.side);
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, v));
    }

    /// Sorts row-major, merges duplicates and drops zeros.
    pub fn normalize(&mut self) {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        self.entries = merged;
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn inner(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x[(i, j)] } else { 2.0 * v * x[(i, j)] })
            .sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.side, self.side);
        for &(i, j, v) in &self.entries {
            d[(i, j)] += v;
            if i != j {
                d[(j, i)] += v;
            }
        }
        d
    }
}

/// Provenance recorded in exports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceMeta {
    pub m: usize,
    pub k: usize,
    pub dims: Vec<usize>,
    pub state_hash: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpInstance {
    pub side: usize,
    pub objective: SparseSym,
    pub constraints: Vec<SparseSym>,
    pub rhs: Vec<f64>,
    pub meta: Option<InstanceMeta>,
}

impl SdpInstance {
    pub fn new(side: usize) -> Self {
        SdpInstance { side, objective: SparseSym::new(side), constraints: Vec::new(), rhs: Vec::new(), meta: None }
    }

    pub fn add_constraint(&mut self, a: SparseSym, b: f64) {
        self.constraints.push(a);
        self.rhs.push(b);
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.side == 0 {
            return Err(Error::arg("SDP instance has an empty PSD block"));
        }
        if self.constraints.len() != self.rhs.len() {
            return Err(Error::arg("constraint and right-hand-side counts differ"));
        }
        let bad_side = std::iter::once(&self.objective)
            .chain(&self.constraints)
            .any(|a| a.side != self.side);
        if bad_side {
            return Err(Error::arg("coefficient matrix side does not match the PSD block"));
        }
        if self.rhs.iter().any(|b| !b.is_finite()) {
            return Err(Error::arg("non-finite right-hand side"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Embedded,
    External,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    pub backend: Backend,
    /// Falls back to `SQUASH_SDP_SOLVER` when unset.
    pub external_path: Option<PathBuf>,
    pub time_limit: Duration,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_iters: 50_000,
            backend: Backend::Embedded,
            external_path: None,
            time_limit: Duration::from_secs(3600),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::arg("solver tolerances must be positive"));
        }
        if self.time_limit.is_zero() {
            return Err(Error::arg("solver time limit must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Optimal | Status::NearOptimal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::NearOptimal => "near_optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::NumericalTrouble => "numerical_trouble",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Primal matrix as returned by a backend.
#[derive(Clone, Debug)]
pub enum PrimalMatrix {
    Full(DMatrix<f64>),
    /// `X = ½ diag(P, P)`, produced when the problem separated into a real half.
    RealHalf(DMatrix<f64>),
}

impl PrimalMatrix {
    pub fn to_full(&self) -> DMatrix<f64> {
        match self {
            PrimalMatrix::Full(x) => x.clone(),
            PrimalMatrix::RealHalf(p) => {
                let n = p.nrows();
                let mut x = DMatrix::zeros(2 * n, 2 * n);
                x.view_mut((0, 0), (n, n)).copy_from(&(p * 0.5));
                x.view_mut((n, n), (n, n)).copy_from(&(p * 0.5));
                x
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub primal: f64,
    pub dual: f64,
    pub status: Status,
    pub iterations: usize,
    pub wall_time: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub x: Option<PrimalMatrix>,
}

impl Solution {
    pub fn gap(&self) -> f64 {
        (self.primal - self.dual).abs()
    }
}

pub fn solve(instance: &SdpInstance, opts: &SolverOptions) -> Result<Solution> {
    instance.validate()?;
    opts.validate()?;
    match opts.backend {
        Backend::Embedded => solve_embedded(instance, opts),
        Backend::External => solve_external(instance, opts),
    }
}
