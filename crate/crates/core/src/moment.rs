//! Level-k moment relaxation of the `E_sq^(m)` polynomial program.
//!
//! The moment matrix is indexed by `(α, u)` with `α` a basis state of `AB`
//! and `u` a word of degree at most `k`; row `u_idx · d_A d_B + α`. Cell
//! `((α,u),(β,v))` holds `L(|α⟩⟨β| ⊗ u v*)`. The top-left block is pinned to
//! the input state, entry `(α, β)` to `⟨α|ρ|β⟩`.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fdiv::{pure_state_sq_m, variational_solution};
use crate::ncpoly::{build_p_m, canonicalize, involution, word_mul, Assignment, Family, Letter, MatPoly, Word};
use crate::qstate::{CMat, DensityMatrix};
use crate::quadrature::QuadratureRule;
use crate::solver::{self, Backend, InstanceMeta, PrimalMatrix, SdpInstance, SolverOptions, SparseSym, Status};

pub const DEFAULT_WORD_CAP: usize = 2000;
/// Highest level accepted; only `k = 1` is tuned for speed.
pub const MAX_LEVEL: usize = 2;

const CONJ: u32 = 1 << 31;

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis {
    k: usize,
    words: Vec<Word>,
}

impl MonomialBasis {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Number of canonical words of degree at most `k` over `m` nodes and `d_A`:
/// `Σ_n (n+1) L^n` with `L = 2 m d_A²` letters per family.
pub fn basis_size(k: usize, m: usize, d_a: usize) -> usize {
    let l = 2 * m * d_a * d_a;
    (0..=k).map(|n| (n + 1).saturating_mul(l.saturating_pow(n as u32))).fold(0, usize::saturating_add)
}

pub fn enumerate_words(k: usize, m: usize, d_a: usize) -> Result<MonomialBasis> {
    enumerate_words_capped(k, m, d_a, DEFAULT_WORD_CAP)
}

pub fn enumerate_words_capped(k: usize, m: usize, d_a: usize, cap: usize) -> Result<MonomialBasis> {
    let size = basis_size(k, m, d_a);
    if size > cap {
        return Err(Error::Resource { size, cap });
    }
    let letters = |family| {
        let mut v = Vec::new();
        for i in 0..m {
            for a1 in 0..d_a {
                for a2 in 0..d_a {
                    for starred in [false, true] {
                        v.push(Letter::new(family, i, a1, a2, starred));
                    }
                }
            }
        }
        v
    };
    let (ys, zs) = (letters(Family::Y), letters(Family::Z));
    let sequences = |alphabet: &[Letter], len: usize| {
        let mut out: Vec<Vec<Letter>> = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s| alphabet.iter().map(move |&l| [s.as_slice(), &[l]].concat()))
                .collect();
        }
        out
    };
    let mut words = Vec::with_capacity(size);
    for deg in 0..=k {
        for ny in 0..=deg {
            for y in sequences(&ys, ny) {
                for z in sequences(&zs, deg - ny) {
                    words.push(canonicalize(y.iter().chain(&z)));
                }
            }
        }
    }
    words.sort();
    debug_assert_eq!(words.len(), size);
    Ok(MonomialBasis { k, words })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    LowerSdp,
    UpperHeuristic,
    PureClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Bits; for SDP bounds the solver's primal objective.
    pub value: f64,
    /// `max(value, 0)`.
    pub value_clamped: f64,
    pub kind: BoundKind,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub d_d: Option<usize>,
    pub d_e: Option<usize>,
    pub restarts: Option<usize>,
    pub solver_status: Status,
    pub primal_dual_gap: f64,
    pub wall_time: f64,
    pub notes: Vec<String>,
}

impl BoundResult {
    pub fn new(kind: BoundKind, value: f64, status: Status) -> Self {
        BoundResult {
            value,
            value_clamped: value.max(0.0),
            kind,
            m: None,
            k: None,
            d_d: None,
            d_e: None,
            restarts: None,
            solver_status: status,
            primal_dual_gap: 0.0,
            wall_time: 0.0,
            notes: Vec::new(),
        }
    }
}

/// SHA-256 over the dimension profile and the little-endian matrix entries.
pub fn state_hash(rho: &DensityMatrix) -> String {
    let mut h = Sha256::new();
    for &d in rho.dims() {
        h.update((d as u64).to_le_bytes());
    }
    let m = rho.matrix();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            h.update(m[(i, j)].re.to_le_bytes());
            h.update(m[(i, j)].im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug)]
pub struct MomentProblem {
    pub d_a: usize,
    pub d_b: usize,
    pub m: usize,
    pub k: usize,
    pub basis: MonomialBasis,
    /// Sorted canonical products `u v*`.
    products: Vec<Word>,
    /// `u_idx · |W| + v_idx` → index into `products`.
    product_of: Vec<u32>,
    /// `(α ν + β) · |products| + w` → variable id, high bit set for the conjugate.
    var_of: Vec<u32>,
    num_vars: usize,
    /// Pinned `(variable, value)` pairs, from the top-left block.
    pub equalities: Vec<(usize, Complex64)>,
    /// Upper triangle `(p, q, C[p,q])` of the Hermitian objective; value is `tr(C M)`.
    pub objective: Vec<(usize, usize, Complex64)>,
    pub state_hash: String,
}

impl MomentProblem {
    /// `d_A d_B`.
    pub fn nu(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn block_side(&self) -> usize {
        self.nu() * self.basis.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn cell_index(&self, alpha: usize, u: usize) -> usize {
        u * self.nu() + alpha
    }

    /// `(variable, conjugated)` behind moment-matrix cell `(p, q)`.
    pub fn cell_var(&self, p: usize, q: usize) -> (usize, bool) {
        let nu = self.nu();
        let (u, alpha) = (p / nu, p % nu);
        let (v, beta) = (q / nu, q % nu);
        let w = self.product_of[u * self.basis.len() + v] as usize;
        let code = self.var_of[(alpha * nu + beta) * self.products.len() + w];
        ((code & !CONJ) as usize, code & CONJ != 0)
    }

    /// Moment matrix with the given variable values.
    pub fn assemble(&self, values: &[Complex64]) -> CMat {
        let n = self.block_side();
        CMat::from_fn(n, n, |p, q| {
            let (var, conj) = self.cell_var(p, q);
            if conj {
                values[var].conj()
            } else {
                values[var]
            }
        })
    }

    /// Largest spread among cells sharing a variable.
    pub fn consistency_residual(&self, mm: &CMat) -> f64 {
        let mut first: Vec<Option<Complex64>> = vec![None; self.num_vars];
        let mut worst: f64 = 0.0;
        for p in 0..mm.nrows() {
            for q in 0..mm.ncols() {
                let (var, conj) = self.cell_var(p, q);
                let val = if conj { mm[(p, q)].conj() } else { mm[(p, q)] };
                match first[var] {
                    Some(f) => worst = worst.max((f - val).norm()),
                    None => first[var] = Some(val),
                }
            }
        }
        worst
    }

    /// Largest deviation from the pinned top-left block.
    pub fn equality_residual(&self, mm: &CMat) -> f64 {
        let nu = self.nu();
        let mut worst: f64 = 0.0;
        for a in 0..nu {
            for b in 0..nu {
                let (var, conj) = self.cell_var(a, b);
                if let Some(&(_, v)) = self.equalities.iter().find(|e| e.0 == var) {
                    let v = if conj { v.conj() } else { v };
                    worst = worst.max((mm[(a, b)] - v).norm());
                }
            }
        }
        worst
    }

    pub fn objective_value(&self, mm: &CMat) -> f64 {
        self.objective
            .iter()
            .map(|&(p, q, c)| if p == q { c.re * mm[(p, p)].re } else { 2.0 * (c * mm[(q, p)]).re })
            .sum()
    }

    /// Cell values `tr(τ (|α⟩⟨β| ⊗ û v̂*))` for a state `τ` on `A ⊗ B ⊗ H`.
    /// The result is feasible for the problem built from `τ_ABᵀ`.
    pub fn witness_matrix(&self, tau: &DensityMatrix, assignment: &Assignment) -> Result<CMat> {
        let nu = self.nu();
        let d_h = assignment.dim();
        if tau.dim() != nu * d_h {
            return Err(Error::arg(format!(
                "witness state has side {}, expected {} x {d_h}",
                tau.dim(),
                nu
            )));
        }
        let ops: Vec<CMat> = self.basis.words().iter().map(|w| assignment.word(w)).collect::<Result<_>>()?;
        let rho = tau.matrix();
        let n = self.block_side();
        let mut mm = CMat::zeros(n, n);
        for (ui, uop) in ops.iter().enumerate() {
            for (vi, vop) in ops.iter().enumerate() {
                let prod = uop * vop.adjoint();
                for alpha in 0..nu {
                    for beta in 0..nu {
                        // tr(τ (|α⟩⟨β| ⊗ X)) = tr(⟨β|τ|α⟩ X)
                        let block = rho.view((beta * d_h, alpha * d_h), (d_h, d_h));
                        mm[(ui * nu + alpha, vi * nu + beta)] = (block * &prod).trace();
                    }
                }
            }
        }
        Ok(mm)
    }
}

pub fn build_moment_problem(rho: &DensityMatrix, rule: &QuadratureRule, k: usize) -> Result<MomentProblem> {
    build_moment_problem_capped(rho, rule, k, DEFAULT_WORD_CAP)
}

/// Drops basis words `u` whose diagonal moment `u u*` is unpinned, absent from
/// the objective and produced by no other pair. Such a diagonal is a free
/// variable that can grow without bound, so removing the rows leaves the
/// infimum unchanged while making it attainable.
fn prune_free_diagonals(full: &MonomialBasis, polys: &[MatPoly]) -> MonomialBasis {
    let mut in_objective: BTreeSet<Word> = BTreeSet::new();
    for p in polys {
        for (_, _, w, _) in p.iter() {
            in_objective.insert(w.clone());
            in_objective.insert(involution(w));
        }
    }
    let mut producers: HashMap<Word, usize> = HashMap::new();
    for u in full.words() {
        for v in full.words() {
            *producers.entry(word_mul(u, &involution(v))).or_insert(0) += 1;
        }
    }
    let words = full
        .words()
        .iter()
        .filter(|u| {
            let diag = word_mul(u, &involution(u));
            u.is_empty() || in_objective.contains(&diag) || producers[&diag] > 1
        })
        .cloned()
        .collect();
    MonomialBasis { k: full.k, words }
}

pub fn build_moment_problem_capped(
    rho: &DensityMatrix,
    rule: &QuadratureRule,
    k: usize,
    cap: usize,
) -> Result<MomentProblem> {
    let dims = rho.dims();
    if dims.len() != 2 {
        return Err(Error::arg(format!("the moment relaxation needs a bipartite state, got dims {dims:?}")));
    }
    if k == 0 || k > MAX_LEVEL {
        return Err(Error::arg(format!("relaxation level must be in 1..={MAX_LEVEL}, got {k}")));
    }
    let (d_a, d_b) = (dims[0], dims[1]);
    let m = rule.m();
    let full = enumerate_words_capped(k, m, d_a, cap)?;
    let nu = d_a * d_b;
    let polys = [build_p_m(rule, d_a, Family::Z), build_p_m(rule, d_a, Family::Y)];
    let basis = prune_free_diagonals(&full, &polys);
    if basis.len() < full.len() {
        log::debug!("dropped {} of {} basis words with free diagonal moments", full.len() - basis.len(), full.len());
    }

    let raw: Vec<Word> = basis
        .words()
        .iter()
        .flat_map(|u| basis.words().iter().map(move |v| word_mul(u, &involution(v))))
        .collect();
    let products: Vec<Word> = raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let np = products.len();
    let index: HashMap<&Word, u32> = products.iter().enumerate().map(|(i, w)| (w, i as u32)).collect();
    let product_of: Vec<u32> = raw.iter().map(|w| index[w]).collect();
    let star_of: Vec<usize> = products.iter().map(|w| index[&involution(w)] as usize).collect();

    // representative = smaller of (α, β, w) and (β, α, w*) in index order
    let unset = u32::MAX;
    let mut var_of = vec![unset; nu * nu * np];
    let mut num_vars = 0u32;
    for alpha in 0..nu {
        for beta in 0..nu {
            for w in 0..np {
                let t = (alpha * nu + beta) * np + w;
                if var_of[t] != unset {
                    continue;
                }
                let partner = (beta * nu + alpha) * np + star_of[w];
                var_of[t] = num_vars;
                if partner != t {
                    var_of[partner] = num_vars | CONJ;
                }
                num_vars += 1;
            }
        }
    }

    let mut mp = MomentProblem {
        d_a,
        d_b,
        m,
        k,
        basis,
        products,
        product_of,
        var_of,
        num_vars: num_vars as usize,
        equalities: Vec::new(),
        objective: Vec::new(),
        state_hash: state_hash(rho),
    };

    let r = rho.matrix();
    for alpha in 0..nu {
        for beta in 0..nu {
            let (var, conj) = mp.cell_var(alpha, beta);
            if !conj {
                mp.equalities.push((var, r[(alpha, beta)]));
            }
        }
    }

    // first basis pair (u, v) with u v* = w, for every product word
    let mut pair_of: HashMap<u32, (usize, usize)> = HashMap::new();
    let nw = mp.basis.len();
    for (i, &w) in mp.product_of.iter().enumerate() {
        pair_of.entry(w).or_insert((i / nw, i % nw));
    }
    let product_index: HashMap<&Word, u32> = mp.products.iter().enumerate().map(|(i, w)| (w, i as u32)).collect();
    let mut c: HashMap<(usize, usize), Complex64> = HashMap::new();
    for p in &polys {
        for (a1, a2, w, coeff) in p.iter() {
            let (ui, vi) = product_index
                .get(w)
                .and_then(|i| pair_of.get(i))
                .copied()
                .ok_or_else(|| Error::Contract(format!("objective word {w} is not a product of basis words")))?;
            let g = coeff * 0.5;
            for b in 0..d_b {
                let pp = mp.cell_index(a1 * d_b + b, ui);
                let qq = mp.cell_index(a2 * d_b + b, vi);
                // Re(g M[p,q]) as tr(C M) with C Hermitian
                let (key, add) = match pp.cmp(&qq) {
                    std::cmp::Ordering::Less => ((pp, qq), g.conj() * 0.5),
                    std::cmp::Ordering::Greater => ((qq, pp), g * 0.5),
                    std::cmp::Ordering::Equal => ((pp, pp), Complex64::new(g.re, 0.0)),
                };
                *c.entry(key).or_insert(Complex64::new(0.0, 0.0)) += add;
            }
        }
    }
    let mut objective: Vec<(usize, usize, Complex64)> =
        c.into_iter().filter(|(_, v)| v.norm() > 0.0).map(|((p, q), v)| (p, q, v)).collect();
    objective.sort_by_key(|&(p, q, _)| (p, q));
    mp.objective = objective;
    Ok(mp)
}

/// Real standard form on `X ⪰ 0` of side `2N`, read through
/// `M = X₁₁ + X₂₂ + i(X₂₁ − X₁₂)`.
///
/// Every PSD `M` arises (from `X = ½[[Re M, −Im M], [Im M, Re M]]`) and every
/// PSD `X` gives a PSD `M`, so the optimum matches the complex problem without
/// constraints tying the blocks of `X` together.
pub fn realify(mp: &MomentProblem) -> SdpInstance {
    let n = mp.block_side();
    let mut inst = SdpInstance::new(2 * n);
    inst.meta = Some(InstanceMeta { m: mp.m, k: mp.k, dims: vec![mp.d_a, mp.d_b], state_hash: mp.state_hash.clone() });

    let mut obj = SparseSym::new(2 * n);
    for &(p, q, c) in &mp.objective {
        if p == q {
            obj.push(p, p, c.re);
            obj.push(p + n, p + n, c.re);
        } else {
            // 2 Re(C[p,q] conj(M[p,q])) = 2 (Re C Re M + Im C Im M)
            obj.push(p, q, c.re);
            obj.push(p + n, q + n, c.re);
            obj.push(q, p + n, c.im);
            obj.push(p, q + n, -c.im);
        }
    }
    obj.normalize();
    inst.objective = obj;

    let re_terms = |p: usize, q: usize, s: f64| -> [(usize, usize, f64); 2] {
        let w = if p == q { 1.0 } else { 0.5 };
        [(p, q, s * w), (p + n, q + n, s * w)]
    };
    let im_terms = |p: usize, q: usize, s: f64| -> [(usize, usize, f64); 2] { [(q, p + n, 0.5 * s), (p, q + n, -0.5 * s)] };

    let mut pinned: Vec<Option<Complex64>> = vec![None; mp.num_vars()];
    for &(var, v) in &mp.equalities {
        pinned[var] = Some(v);
    }
    let mut first: Vec<Option<(usize, usize, bool)>> = vec![None; mp.num_vars()];
    for p in 0..n {
        for q in p..n {
            let (var, conj) = mp.cell_var(p, q);
            let sign = if conj { -1.0 } else { 1.0 };
            let self_conj = {
                // (α, β, w) equal to its own partner
                let (var2, conj2) = mp.cell_var(q, p);
                var2 == var && conj2 == conj
            };
            if let Some(v) = pinned[var] {
                inst.add_constraint(SparseSym::from_triplets(2 * n, re_terms(p, q, 1.0)), v.re);
                if p != q {
                    inst.add_constraint(SparseSym::from_triplets(2 * n, im_terms(p, q, 1.0)), sign * v.im);
                }
                continue;
            }
            if self_conj && p != q {
                inst.add_constraint(SparseSym::from_triplets(2 * n, im_terms(p, q, 1.0)), 0.0);
            }
            match first[var] {
                None => first[var] = Some((p, q, conj)),
                Some((p0, q0, conj0)) => {
                    let re = re_terms(p, q, 1.0).into_iter().chain(re_terms(p0, q0, -1.0));
                    inst.add_constraint(SparseSym::from_triplets(2 * n, re), 0.0);
                    if !self_conj {
                        let s0 = if conj0 { -1.0 } else { 1.0 };
                        let im = im_terms(p, q, sign).into_iter().chain(im_terms(p0, q0, -s0));
                        inst.add_constraint(SparseSym::from_triplets(2 * n, im), 0.0);
                    }
                }
            }
        }
    }
    inst
}

/// The complex moment matrix `M` encoded by a realified primal point.
/// Realified point `½ [[Re M, −Im M], [Im M, Re M]]` for a Hermitian moment matrix.
pub fn realify_point(mm: &CMat) -> DMatrix<f64> {
    let n = mm.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = mm[(r % n, c % n)];
        0.5 * match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Moment matrix of an explicit extension `τ` on `A ⊗ B ⊗ D ⊗ E`, with every
/// letter set to the minimiser of its variational problem: `Z_i` from
/// `(τ_AD, I_A ⊗ τ_D)` at node `t_i`, `Y_i` likewise from `τ_AE`. Feasible for
/// the problem built from `τ_ABᵀ`.
pub fn extension_witness(mp: &MomentProblem, rule: &QuadratureRule, tau: &DensityMatrix) -> Result<CMat> {
    let dims = tau.dims();
    if dims.len() != 4 || dims[0] != mp.d_a || dims[1] != mp.d_b {
        return Err(Error::arg(format!("extension dims {dims:?} do not match A, B, D, E")));
    }
    let (d_a, d_d, d_e) = (dims[0], dims[2], dims[3]);
    let mut asg = Assignment::new(d_d * d_e);
    for (family, keep, d_x) in [(Family::Z, 2, d_d), (Family::Y, 3, d_e)] {
        let tau_ax = tau.partial_trace(&[0, keep])?;
        let tau_x = tau_ax.partial_trace(&[1])?;
        let sigma = crate::qstate::tensor(&CMat::identity(d_a, d_a), tau_x.matrix());
        for (i, (t, _)) in rule.iter().enumerate() {
            let sol = variational_solution(t, tau_ax.matrix(), &sigma)?;
            for a1 in 0..d_a {
                for a2 in 0..d_a {
                    let block = sol.z.view((a1 * d_x, a2 * d_x), (d_x, d_x)).into_owned();
                    let op = match family {
                        Family::Z => crate::qstate::tensor(&block, &CMat::identity(d_e, d_e)),
                        Family::Y => crate::qstate::tensor(&CMat::identity(d_d, d_d), &block),
                    };
                    asg.set(family, i, a1, a2, op)?;
                }
            }
        }
    }
    mp.witness_matrix(tau, &asg)
}

pub fn moment_from_primal(x: &PrimalMatrix) -> CMat {
    match x {
        PrimalMatrix::RealHalf(p) => p.map(|v| Complex64::new(v, 0.0)),
        PrimalMatrix::Full(x) => {
            let n = x.nrows() / 2;
            CMat::from_fn(n, n, |p, q| {
                Complex64::new(x[(p, q)] + x[(p + n, q + n)], x[(p + n, q)] - x[(p, q + n)])
            })
        }
    }
}

/// Starting point for the embedded solver.
#[derive(Clone, Debug, Default)]
pub enum WarmStart {
    Cold,
    /// Moment matrix of a heuristic extension found by a short upper-bound search.
    #[default]
    Auto,
    /// Moment matrix of this extension of `ρᵀ` on `A ⊗ B ⊗ D ⊗ E`.
    Extension(DensityMatrix),
}

const AUTO_RESTARTS: usize = 2;
const AUTO_ITERS: usize = 300;
const AUTO_SEED: u64 = 0x5eed;
const AUTO_MAX_SIDE: usize = 4;
const WARM_MIX: f64 = 1e-6;

/// Witness for the warm start. A marginal of `τ` with numerically tiny
/// eigenvalues can make the t = 1 letters singular, so retry on a slightly
/// depolarized `τ`. The start point need not be exactly feasible.
fn warm_witness(mp: &MomentProblem, rule: &QuadratureRule, tau: &DensityMatrix) -> Result<CMat> {
    match extension_witness(mp, rule, tau) {
        Err(Error::Conditioning(e)) => {
            log::debug!("warm start witness: {e}; depolarizing by {WARM_MIX:e}");
            let mixed = DensityMatrix::maximally_mixed(tau.dims().to_vec())?;
            let data = tau.matrix().scale(1.0 - WARM_MIX) + mixed.matrix().scale(WARM_MIX);
            extension_witness(mp, rule, &DensityMatrix::new(tau.dims().to_vec(), data)?)
        }
        other => other,
    }
}

fn auto_extension(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let rank = rho.rank()?;
    let side = (1..).find(|s| s * s >= rank).unwrap().max(rank.min(AUTO_MAX_SIDE));
    let out = crate::upperbound::upper_bound(rho, side, side, AUTO_RESTARTS, AUTO_ITERS, AUTO_SEED)?;
    log::debug!("warm-start extension {side}x{side}: {:.6} bits", out.result.value);
    crate::upperbound::transposed_extension(rho, &out.best)
}

/// SDP lower bound on `E_sq^(m)` (and hence on `E_sq`), bits.
pub fn lower_bound(rho: &DensityMatrix, m: usize, k: usize, opts: &SolverOptions) -> Result<BoundResult> {
    lower_bound_with(rho, m, k, opts, &WarmStart::Auto)
}

pub fn lower_bound_with(
    rho: &DensityMatrix,
    m: usize,
    k: usize,
    opts: &SolverOptions,
    warm: &WarmStart,
) -> Result<BoundResult> {
    let start = Instant::now();
    let rule = QuadratureRule::new(m)?;
    let mp = build_moment_problem(rho, &rule, k)?;
    let inst = realify(&mp);
    log::info!(
        "moment problem: m {m}, k {k}, block side {}, {} variables, {} constraints",
        mp.block_side(),
        mp.num_vars(),
        inst.num_constraints()
    );
    opts.validate()?;
    let sol = match opts.backend {
        Backend::External => solver::solve(&inst, opts)?,
        Backend::Embedded => {
            let tau = match warm {
                WarmStart::Cold => None,
                WarmStart::Extension(tau) => Some(tau.clone()),
                WarmStart::Auto => match auto_extension(rho) {
                    Ok(tau) => Some(tau),
                    Err(e) => {
                        log::warn!("no warm start: {e}");
                        None
                    }
                },
            };
            let x0 = match tau {
                Some(tau) => Some(realify_point(&warm_witness(&mp, &rule, &tau)?)),
                None => None,
            };
            inst.validate()?;
            solver::solve_embedded_from(&inst, opts, x0.as_ref())?
        }
    };
    let mut res = BoundResult::new(BoundKind::LowerSdp, sol.primal, sol.status);
    res.m = Some(m);
    res.k = Some(k);
    res.primal_dual_gap = sol.gap();
    res.wall_time = start.elapsed().as_secs_f64();
    res.notes.push("solver primal objective, not post-processed into a rigorous certificate".into());
    if let Some(x) = &sol.x {
        let mm = moment_from_primal(x);
        let resid = mp.consistency_residual(&mm);
        log::debug!("moment pairing residual {resid:.2e}");
    }
    if !res.value.is_finite() {
        res.value_clamped = res.value;
    }
    Ok(res)
}

/// Closed form for pure states: `(1/ln 2) tr(ρ_A r_m(ρ_A⁻¹))`.
pub fn pure_state_bound(rho: &DensityMatrix, m: usize) -> Result<BoundResult> {
    let start = Instant::now();
    if rho.dims().len() != 2 {
        return Err(Error::arg("pure-state formula needs a bipartite state"));
    }
    let purity = (rho.matrix() * rho.matrix()).trace().re;
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!("state is not pure (tr ρ² = {purity})")));
    }
    let rule = QuadratureRule::new(m)?;
    let rho_a = rho.partial_trace(&[0])?;
    let value = pure_state_sq_m(&rule, &rho_a)?;
    let mut res = BoundResult::new(BoundKind::PureClosedForm, value, Status::Optimal);
    res.m = Some(m);
    res.wall_time = start.elapsed().as_secs_f64();
    Ok(res)
}

/// Dense Hermitian objective matrix.
pub fn objective_matrix(mp: &MomentProblem) -> CMat {
    let n = mp.block_side();
    let mut c = CMat::zeros(n, n);
    for &(p, q, v) in &mp.objective {
        c[(p, q)] += v;
        if p != q {
            c[(q, p)] += v.conj();
        }
    }
    c
}
