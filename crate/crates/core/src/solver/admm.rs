//! Embedded backend: alternating-direction augmented Lagrangian on the dual
//! (Wen, Goldfarb and Yin), with a cached block pseudo-inverse of `A Aᵀ`.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use faer::linalg::matmul::triangular::{matmul as tri_matmul, BlockStructure};
use faer::{Mat, Parallelism, Side};
use nalgebra::{DMatrix, DVector};

use super::{PrimalMatrix, SdpInstance, Solution, SolverOptions, SparseSym, Status};
use crate::error::Result;

/// Over-relaxation of the multiplier step.
const RELAX: f64 = 1.6;
const MU_BOUNDS: (f64, f64) = (1e-4, 1e4);
const MU_INTERVAL: usize = 20;
const AA_MEMORY: usize = 10;
/// An extrapolated point is kept only if its step is at most this multiple
/// (squared) of the step it replaced.
const AA_SAFEGUARD: f64 = 1.0;
/// Near-optimal accepts residuals up to this multiple of the tolerance.
const NEAR_FACTOR: f64 = 1e3;
/// Scaled iterate size above which a diverging run is read as a certificate.
const DIVERGENCE: f64 = 1e2;

pub fn solve_embedded(inst: &SdpInstance, opts: &SolverOptions) -> Result<Solution> {
    solve_embedded_from(inst, opts, None)
}

/// As [`solve_embedded`], starting the primal iterate at `x0`.
pub fn solve_embedded_from(inst: &SdpInstance, opts: &SolverOptions, x0: Option<&DMatrix<f64>>) -> Result<Solution> {
    let start = Instant::now();
    if let Some(x0) = x0 {
        if x0.nrows() != inst.side || x0.ncols() != inst.side {
            return Err(crate::error::Error::arg("warm start has the wrong size"));
        }
    }
    if let Some(real) = split_real(inst) {
        log::debug!("solving the real half: side {} -> {}", inst.side, real.side);
        let half = x0.map(|x| x.view((0, 0), (real.side, real.side)) * 2.0);
        let mut sol = run(&real, opts, start, half.as_ref());
        sol.x = sol.x.map(|x| match x {
            PrimalMatrix::Full(p) => PrimalMatrix::RealHalf(p),
            other => other,
        });
        return Ok(sol);
    }
    Ok(run(inst, opts, start, x0))
}

/// Recognises `[[P, 0], [0, P]]` objectives and constraints next to
/// `[[0, −Q], [Q, 0]]` constraints with zero right-hand side. Such problems are
/// invariant under conjugation, so the real half `min ⟨P_C, M⟩, ⟨P_i, M⟩ = b_i`
/// has the same value and `X = ½ diag(M, M)` recovers a solution.
pub(crate) fn split_real(inst: &SdpInstance) -> Option<SdpInstance> {
    if inst.side % 2 != 0 {
        return None;
    }
    let n = inst.side / 2;
    let mut out = SdpInstance::new(n);
    out.objective = diagonal_half(&inst.objective, n)?;
    for (a, &b) in inst.constraints.iter().zip(&inst.rhs) {
        if let Some(p) = diagonal_half(a, n) {
            out.add_constraint(p, b);
        } else if b == 0.0 && is_antisymmetric_offdiag(a, n) {
            continue;
        } else {
            return None;
        }
    }
    out.meta = inst.meta.clone();
    Some(out)
}

fn diagonal_half(a: &SparseSym, n: usize) -> Option<SparseSym> {
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    for &(i, j, v) in a.entries() {
        match (i < n, j < n) {
            (true, true) => top.push((i, j, v)),
            (false, false) => bottom.push((i - n, j - n, v)),
            _ => return None,
        }
    }
    (top == bottom).then(|| SparseSym::from_triplets(n, top))
}

fn is_antisymmetric_offdiag(a: &SparseSym, n: usize) -> bool {
    let mut block: HashMap<(usize, usize), f64> = HashMap::new();
    for &(i, j, v) in a.entries() {
        if !(i < n && j >= n) || i == j - n {
            return false;
        }
        block.insert((i, j - n), v);
    }
    block.iter().all(|(&(r, c), &v)| block.get(&(c, r)).is_some_and(|&w| (v + w).abs() <= 1e-15 * v.abs().max(1.0)))
}

/// The constraint map with `(A Aᵀ)⁺` cached per connected block of constraints.
struct Operator {
    ptr: Vec<usize>,
    idx: Vec<(u32, u32)>,
    val: Vec<f64>,
    blocks: Vec<Block>,
}

struct Block {
    rows: Vec<usize>,
    pinv: DMatrix<f64>,
    /// Orthonormal basis of the block's range, for the consistency check.
    range: DMatrix<f64>,
}

impl Operator {
    fn new(inst: &SdpInstance) -> Self {
        let m = inst.constraints.len();
        let mut ptr = Vec::with_capacity(m + 1);
        let mut idx = Vec::new();
        let mut val = Vec::new();
        ptr.push(0);
        for a in &inst.constraints {
            for &(i, j, v) in a.entries() {
                idx.push((i as u32, j as u32));
                val.push(v);
            }
            ptr.push(idx.len());
        }

        // constraints touching a common entry share a block
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut owner: HashMap<(u32, u32), usize> = HashMap::new();
        for r in 0..m {
            for e in ptr[r]..ptr[r + 1] {
                match owner.get(&idx[e]) {
                    Some(&o) => {
                        let (a, b) = (find(&mut parent, o), find(&mut parent, r));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        owner.insert(idx[e], r);
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for r in 0..m {
            let root = find(&mut parent, r);
            groups.entry(root).or_default().push(r);
        }
        let mut roots: Vec<usize> = groups.keys().copied().collect();
        roots.sort_unstable();

        let mut op = Operator { ptr, idx, val, blocks: Vec::with_capacity(roots.len()) };
        for root in roots {
            let rows = groups.remove(&root).unwrap();
            op.blocks.push(op.factor_block(rows));
        }
        op
    }

    fn factor_block(&self, rows: Vec<usize>) -> Block {
        let k = rows.len();
        let mut by_entry: HashMap<(u32, u32), Vec<(usize, f64)>> = HashMap::new();
        for (local, &r) in rows.iter().enumerate() {
            for e in self.ptr[r]..self.ptr[r + 1] {
                by_entry.entry(self.idx[e]).or_default().push((local, self.val[e]));
            }
        }
        let mut g = DMatrix::<f64>::zeros(k, k);
        for (&(i, j), list) in &by_entry {
            let w = if i == j { 1.0 } else { 2.0 };
            for &(p, vp) in list {
                for &(q, vq) in list {
                    g[(p, q)] += w * vp * vq;
                }
            }
        }
        let eig = g.symmetric_eigen();
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let keep: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 1e-12 * top.max(1e-300)).collect();
        let range = DMatrix::from_fn(k, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
        let inv = DVector::from_iterator(keep.len(), keep.iter().map(|&i| 1.0 / eig.eigenvalues[i]));
        let pinv = &range * DMatrix::from_diagonal(&inv) * range.transpose();
        Block { rows, pinv, range }
    }

    /// Largest distance of `b` from the range of `A`, block by block.
    fn range_defect(&self, b: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|blk| {
                let local = DVector::from_iterator(blk.rows.len(), blk.rows.iter().map(|&r| b[r]));
                let proj = &blk.range * (blk.range.transpose() * &local);
                (local - proj).norm()
            })
            .fold(0.0, f64::max)
    }

    fn apply(&self, x: &Mat<f64>) -> Vec<f64> {
        (0..self.ptr.len() - 1)
            .map(|r| {
                (self.ptr[r]..self.ptr[r + 1])
                    .map(|e| {
                        let (i, j) = self.idx[e];
                        let w = if i == j { 1.0 } else { 2.0 };
                        w * self.val[e] * x.read(i as usize, j as usize)
                    })
                    .sum()
            })
            .collect()
    }

    /// `out -= Σ y_r A_r`.
    fn sub_adjoint(&self, y: &[f64], out: &mut Mat<f64>) {
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for e in self.ptr[r]..self.ptr[r + 1] {
                let (i, j) = (self.idx[e].0 as usize, self.idx[e].1 as usize);
                let d = yr * self.val[e];
                out.write(i, j, out.read(i, j) - d);
                if i != j {
                    out.write(j, i, out.read(j, i) - d);
                }
            }
        }
    }

    fn solve_gram(&self, rhs: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; rhs.len()];
        for blk in &self.blocks {
            let local = DVector::from_iterator(blk.rows.len(), blk.rows.iter().map(|&r| rhs[r]));
            let sol = &blk.pinv * local;
            for (p, &r) in blk.rows.iter().enumerate() {
                y[r] = sol[p];
            }
        }
        y
    }
}

fn dense(a: &SparseSym, n: usize, scale: f64) -> Mat<f64> {
    let mut m = Mat::<f64>::zeros(n, n);
    for &(i, j, v) in a.entries() {
        m.write(i, j, m.read(i, j) + v * scale);
        if i != j {
            m.write(j, i, m.read(j, i) + v * scale);
        }
    }
    m
}

fn frob(m: &Mat<f64>) -> f64 {
    m.norm_l2()
}

fn inner(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a.read(i, j) * b.read(i, j);
        }
    }
    s
}

/// Splits `v` into `(v₊, (−v)₊)` through one eigendecomposition.
fn psd_parts(v: &Mat<f64>) -> (Mat<f64>, Mat<f64>) {
    let n = v.nrows();
    let eig = v.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let u = eig.u();
    let pos: Vec<usize> = (0..n).filter(|&i| s.read(i) > 0.0).collect();
    let neg: Vec<usize> = (0..n).filter(|&i| s.read(i) < 0.0).collect();
    let (cols, sign) = if pos.len() <= neg.len() { (&pos, 1.0) } else { (&neg, -1.0) };
    let w = Mat::<f64>::from_fn(n, cols.len(), |i, c| u.read(i, cols[c]) * (sign * s.read(cols[c])).sqrt());
    let mut part = Mat::<f64>::zeros(n, n);
    tri_matmul(
        part.as_mut(),
        BlockStructure::TriangularLower,
        w.as_ref(),
        BlockStructure::Rectangular,
        w.transpose(),
        BlockStructure::Rectangular,
        None,
        1.0,
        Parallelism::None,
    );
    for j in 0..n {
        for i in 0..j {
            part.write(i, j, part.read(j, i));
        }
    }
    // v = v₊ − (−v)₊
    let other = if sign > 0.0 { &part - v } else { v + &part };
    if sign > 0.0 {
        (part, other)
    } else {
        (other, part)
    }
}

/// Reads a non-converged run: a large `y` with `bᵀŷ > 0` certifies primal
/// infeasibility, a large `X` with `⟨C, X̂⟩ < 0` and `A(X̂) ≈ 0` an unbounded ray.
#[allow(clippy::too_many_arguments)]
fn classify_failure(op: &Operator, b: &[f64], c: &Mat<f64>, x: &Mat<f64>, y: &[f64], pinf: f64, dinf: f64, tol: f64) -> Status {
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let by = b.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    if pinf > NEAR_FACTOR * tol && y_norm > DIVERGENCE && by / y_norm > 1e-3 {
        return Status::Infeasible;
    }
    let x_norm = frob(x);
    if dinf > NEAR_FACTOR * tol && x_norm > DIVERGENCE {
        let cx = inner(c, x) / x_norm;
        let ax = op.apply(x).iter().map(|v| v * v).sum::<f64>().sqrt() / x_norm;
        if cx < -1e-3 && -cx > 10.0 * ax {
            return Status::Unbounded;
        }
    }
    Status::NumericalTrouble
}

fn to_nalgebra(m: &Mat<f64>, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.read(i, j) * scale)
}

struct Step {
    x: Mat<f64>,
    s: Mat<f64>,
    y: Vec<f64>,
    ax: Vec<f64>,
    dinf_s: f64,
}

/// One relaxed ADMM map `(X, S) ↦ (X⁺, S⁺)`.
fn admm_step(op: &Operator, b: &[f64], c: &Mat<f64>, ac: &[f64], mu: f64, x: &Mat<f64>, s: &Mat<f64>) -> Step {
    let ax = op.apply(x);
    let as_ = op.apply(s);
    let rhs: Vec<f64> = (0..b.len()).map(|r| mu * (b[r] - ax[r]) + ac[r] - as_[r]).collect();
    let y = op.solve_gram(&rhs);
    let mut v = c.clone();
    op.sub_adjoint(&y, &mut v);
    v -= x * faer::scale(mu);
    let (plus, minus) = psd_parts(&v);
    let x_new = minus * faer::scale(1.0 / mu);
    let dinf_s = mu * frob(&(x - &x_new));
    let x_rel = x * faer::scale(1.0 - RELAX) + &x_new * faer::scale(RELAX);
    let ax = op.apply(&x_rel);
    Step { x: x_rel, s: plus, y, ax, dinf_s }
}

fn flatten(x: &Mat<f64>, s: &Mat<f64>) -> Vec<f64> {
    let n = x.nrows();
    let mut out = Vec::with_capacity(2 * n * n);
    for m in [x, s] {
        for j in 0..n {
            out.extend_from_slice(m.col_as_slice(j));
        }
    }
    out
}

fn unflatten(z: &[f64], n: usize) -> (Mat<f64>, Mat<f64>) {
    let half = n * n;
    let x = Mat::from_fn(n, n, |i, j| z[j * n + i]);
    let s = Mat::from_fn(n, n, |i, j| z[half + j * n + i]);
    (x, s)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Type-II Anderson acceleration of a fixed-point map.
struct Anderson {
    memory: usize,
    d_map: VecDeque<Vec<f64>>,
    d_res: VecDeque<Vec<f64>>,
    /// Inner products of the `d_res` columns, kept in step with them.
    gram: VecDeque<VecDeque<f64>>,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

impl Anderson {
    fn new(memory: usize) -> Self {
        Anderson { memory, d_map: VecDeque::new(), d_res: VecDeque::new(), gram: VecDeque::new(), last: None }
    }

    fn reset(&mut self) {
        self.d_map.clear();
        self.d_res.clear();
        self.gram.clear();
        self.last = None;
    }

    fn push(&mut self, d_map: Vec<f64>, d_res: Vec<f64>) {
        if self.d_res.len() == self.memory {
            self.d_map.pop_front();
            self.d_res.pop_front();
            self.gram.pop_front();
            for row in &mut self.gram {
                row.pop_front();
            }
        }
        let mut row: VecDeque<f64> = self.d_res.iter().map(|c| dot(c, &d_res)).collect();
        let own = dot(&d_res, &d_res);
        for (r, &v) in self.gram.iter_mut().zip(&row) {
            r.push_back(v);
        }
        row.push_back(own);
        self.gram.push_back(row);
        self.d_map.push_back(d_map);
        self.d_res.push_back(d_res);
    }

    /// Takes `z` and `t = T(z)` and proposes the next iterate.
    fn propose(&mut self, z: &[f64], t: Vec<f64>) -> Vec<f64> {
        let res: Vec<f64> = t.iter().zip(z).map(|(p, q)| p - q).collect();
        if let Some((t_prev, r_prev)) = self.last.take() {
            let dm = t.iter().zip(&t_prev).map(|(p, q)| p - q).collect();
            let dr = res.iter().zip(&r_prev).map(|(p, q)| p - q).collect();
            self.push(dm, dr);
        }
        let k = self.d_res.len();
        let mut out = t.clone();
        if k > 0 {
            let mut g = DMatrix::from_fn(k, k, |p, q| self.gram[p][q]);
            let rhs = DVector::from_iterator(k, self.d_res.iter().map(|c| dot(c, &res)));
            let reg = 1e-10 * g.trace().max(1e-300);
            for p in 0..k {
                g[(p, p)] += reg;
            }
            if let Some(gamma) = g.cholesky().map(|ch| ch.solve(&rhs)) {
                if gamma.iter().all(|v| v.is_finite()) {
                    for (p, col) in self.d_map.iter().enumerate() {
                        for (o, d) in out.iter_mut().zip(col) {
                            *o -= gamma[p] * d;
                        }
                    }
                }
            }
        }
        self.last = Some((t, res));
        out
    }
}

fn run(inst: &SdpInstance, opts: &SolverOptions, start: Instant, x0: Option<&DMatrix<f64>>) -> Solution {
    let n = inst.side;
    let b_norm = inst.rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    let c_norm = inst.objective.frobenius_sq().sqrt();
    let outcome = |status, primal, dual, iterations, pinf, dinf, x| Solution {
        primal,
        dual,
        status,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        x,
    };

    let op = Operator::new(inst);
    if op.range_defect(&inst.rhs) > 1e-9 * (1.0 + b_norm) {
        return outcome(Status::Infeasible, f64::INFINITY, f64::INFINITY, 0, f64::INFINITY, 0.0, None);
    }

    let sb = b_norm.max(1.0);
    let sc = c_norm.max(1.0);
    let b: Vec<f64> = inst.rhs.iter().map(|v| v / sb).collect();
    let c = dense(&inst.objective, n, 1.0 / sc);
    let ac = op.apply(&c);

    let mut x = match x0 {
        Some(x0) => Mat::from_fn(n, n, |i, j| x0[(i, j)] / sb),
        None => Mat::<f64>::zeros(n, n),
    };
    let mut s = Mat::<f64>::zeros(n, n);
    let mut y = vec![0.0; b.len()];
    let mut mu = 1.0;
    let mut ratio_log = 0.0;
    let tol = opts.rel_tol;
    let mut aa = Anderson::new(AA_MEMORY);
    // plain image of the last accepted point, the fallback when an extrapolation misbehaves
    let mut fallback: Option<(Mat<f64>, Mat<f64>, f64)> = None;

    let mut status = Status::NumericalTrouble;
    let mut report = (f64::NAN, f64::NAN, f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    for it in 1..=opts.max_iters {
        iterations = it;
        let step = admm_step(&op, &b, &c, &ac, mu, &x, &s);
        let move_sq = frob(&(&step.x - &x)).powi(2) + frob(&(&step.s - &s)).powi(2);
        if let Some((fx, fs, fmove)) = fallback.take() {
            if move_sq > AA_SAFEGUARD * fmove {
                aa.reset();
                x = fx;
                s = fs;
                continue;
            }
        }
        y = step.y;
        let pinf_s = step.ax.iter().zip(&b).map(|(a, bb)| (a - bb).powi(2)).sum::<f64>().sqrt();
        let pinf = pinf_s * sb / (1.0 + b_norm);
        // dual residual C − A*y − S = μ(X − X_new)
        let dinf_s = step.dinf_s;
        let dinf = mu / RELAX * frob(&(&x - &step.x)) * sc / (1.0 + c_norm);
        let pobj = inner(&c, &step.x) * sb * sc;
        let dobj = dot(&b, &y) * sb * sc;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        report = (pobj, dobj, pinf, dinf);

        if !(pobj.is_finite() && dobj.is_finite() && pinf.is_finite() && dinf.is_finite()) {
            status = Status::NumericalTrouble;
            x = step.x;
            break;
        }
        if it % 200 == 0 {
            log::debug!("admm {it}: p {pobj:.9} d {dobj:.9} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}");
        }
        let near = pinf <= NEAR_FACTOR * tol && dinf <= NEAR_FACTOR * tol && gap <= NEAR_FACTOR * tol;
        if pinf <= tol && dinf <= tol && (gap <= tol || (pobj - dobj).abs() <= opts.abs_tol) {
            status = Status::Optimal;
            x = step.x;
            break;
        }
        if it == opts.max_iters || start.elapsed() >= opts.time_limit {
            x = step.x;
            status = if near {
                Status::NearOptimal
            } else {
                classify_failure(&op, &b, &c, &x, &y, pinf, dinf, tol)
            };
            break;
        }

        ratio_log += ((pinf_s + 1e-300) / (dinf_s + 1e-300)).ln();
        let mut mu_changed = false;
        if it % MU_INTERVAL == 0 {
            let mean = ratio_log / MU_INTERVAL as f64;
            let old = mu;
            if mean > 2.0 {
                mu = (mu * 2.0).min(MU_BOUNDS.1);
            } else if mean < -2.0 {
                mu = (mu * 0.5).max(MU_BOUNDS.0);
            }
            mu_changed = mu != old;
            ratio_log = 0.0;
        }
        if mu_changed {
            aa.reset();
            x = step.x;
            s = step.s;
            continue;
        }
        let z = flatten(&x, &s);
        let proposal = aa.propose(&z, flatten(&step.x, &step.s));
        let (px, ps) = unflatten(&proposal, n);
        fallback = Some((step.x, step.s, move_sq));
        x = px;
        s = ps;
    }

    let (pobj, dobj, pinf, dinf) = report;
    let x_out = Some(PrimalMatrix::Full(to_nalgebra(&x, sb)));
    outcome(status, pobj, dobj, iterations, pinf, dinf, x_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pinned_trace(values: &[f64]) -> SdpInstance {
        let mut inst = SdpInstance::new(1);
        inst.objective = SparseSym::from_triplets(1, [(0, 0, 1.0)]);
        for &v in values {
            inst.add_constraint(SparseSym::from_triplets(1, [(0, 0, 1.0)]), v);
        }
        inst
    }

    #[test]
    fn one_by_one_pinned() {
        let sol = solve_embedded(&pinned_trace(&[5.0]), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert_abs_diff_eq!(sol.primal, 5.0, epsilon = 1e-7);
    }

    #[test]
    fn contradictory_pins_are_infeasible() {
        let sol = solve_embedded(&pinned_trace(&[1.0, 2.0]), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
    }

    #[test]
    fn negative_pin_is_infeasible() {
        let opts = SolverOptions { max_iters: 3000, ..Default::default() };
        let sol = solve_embedded(&pinned_trace(&[-1.0]), &opts).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
    }

    #[test]
    fn unbounded_direction_detected() {
        // minimise X01 with only X00 = 1 pinned: X11 free, so X01 → −∞
        let mut inst = SdpInstance::new(2);
        inst.objective = SparseSym::from_triplets(2, [(0, 1, 0.5)]);
        inst.add_constraint(SparseSym::from_triplets(2, [(0, 0, 1.0)]), 1.0);
        let opts = SolverOptions { max_iters: 5000, ..Default::default() };
        let sol = solve_embedded(&inst, &opts).unwrap();
        assert_eq!(sol.status, Status::Unbounded, "{sol:?}");
    }

    #[test]
    fn smallest_eigenvalue_problem() {
        // min ⟨C, X⟩ with tr X = 1 is λ_min(C)
        let c = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, -1.0, 0.0, -1.0, 1.0]);
        let mut inst = SdpInstance::new(3);
        inst.objective = SparseSym::from_triplets(3, (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).map(|(i, j)| (i, j, c[(i, j)])));
        inst.add_constraint(SparseSym::from_triplets(3, (0..3).map(|i| (i, i, 1.0))), 1.0);
        let sol = solve_embedded(&inst, &SolverOptions::default()).unwrap();
        let lmin = c.symmetric_eigen().eigenvalues.min();
        assert_eq!(sol.status, Status::Optimal);
        assert_abs_diff_eq!(sol.primal, lmin, epsilon = 1e-7);
        assert!((sol.primal - sol.dual).abs() <= 1e-6);
    }

    #[test]
    fn real_split_recognised() {
        // Hermitian 1x1 pinned to 2, realified: X00 + X11 = 2, X01 antisymmetric part free
        let mut inst = SdpInstance::new(2);
        inst.objective = SparseSym::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0)]);
        inst.add_constraint(SparseSym::from_triplets(2, [(0, 0, 1.0), (1, 1, 1.0)]), 2.0);
        let real = split_real(&inst).unwrap();
        assert_eq!(real.side, 1);
        let sol = solve_embedded(&inst, &SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.primal, 2.0, epsilon = 1e-7);
        assert!(matches!(sol.x, Some(PrimalMatrix::RealHalf(_))));

        let mut lopsided = inst.clone();
        lopsided.objective = SparseSym::from_triplets(2, [(0, 0, 1.0)]);
        assert!(split_real(&lopsided).is_none());
    }
}
