//! Noncommutative polynomials in the letters `Y_i[a₁,a₂]`, `Z_i[a₁,a₂]` and
//! their adjoints. Letters of different families commute; letters of the same
//! family are free. Indices are zero-based in code and one-based in dumps.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{CMat, DensityMatrix};
use crate::quadrature::QuadratureRule;

/// Coefficients with modulus below this are dropped after merging.
pub const PRUNE_TOL: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Y,
    Z,
}

/// Field order gives the total order used everywhere: family, node, row, column, star.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub family: Family,
    pub i: usize,
    pub a1: usize,
    pub a2: usize,
    pub starred: bool,
}

impl Letter {
    pub fn new(family: Family, i: usize, a1: usize, a2: usize, starred: bool) -> Self {
        Letter { family, i, a1, a2, starred }
    }

    pub fn star(self) -> Self {
        Letter { starred: !self.starred, ..self }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::Y => 'Y',
            Family::Z => 'Z',
        };
        write!(f, "{fam}{}[{},{}]", self.i + 1, self.a1 + 1, self.a2 + 1)?;
        if self.starred {
            f.write_char('*')?;
        }
        Ok(())
    }
}

/// A monomial in canonical form: Y-letters first, then Z-letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    y: Vec<Letter>,
    z: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn y_part(&self) -> &[Letter] {
        &self.y
    }

    pub fn z_part(&self) -> &[Letter] {
        &self.z
    }

    pub fn degree(&self) -> usize {
        self.y.len() + self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree() == 0
    }

    pub fn letters(&self) -> impl Iterator<Item = &Letter> + '_ {
        self.y.iter().chain(self.z.iter())
    }
}

/// Ordered by degree, then lexicographically by letters.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.letters().cmp(other.letters()))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_char('1');
        }
        for (n, l) in self.letters().enumerate() {
            if n > 0 {
                f.write_char(' ')?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Stable partition of the letters into Y-part and Z-part.
pub fn canonicalize<'a>(letters: impl IntoIterator<Item = &'a Letter>) -> Word {
    let mut w = Word::empty();
    for &l in letters {
        match l.family {
            Family::Y => w.y.push(l),
            Family::Z => w.z.push(l),
        }
    }
    w
}

pub fn involution(w: &Word) -> Word {
    Word {
        y: w.y.iter().rev().map(|l| l.star()).collect(),
        z: w.z.iter().rev().map(|l| l.star()).collect(),
    }
}

pub fn word_mul(u: &Word, v: &Word) -> Word {
    let mut y = Vec::with_capacity(u.y.len() + v.y.len());
    y.extend_from_slice(&u.y);
    y.extend_from_slice(&v.y);
    let mut z = Vec::with_capacity(u.z.len() + v.z.len());
    z.extend_from_slice(&u.z);
    z.extend_from_slice(&v.z);
    Word { y, z }
}

/// Matrix whose entries are polynomials, stored sparsely with canonical words.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly {
    side: usize,
    entries: BTreeMap<(usize, usize), BTreeMap<Word, Complex64>>,
}

impl MatPoly {
    pub fn zero(side: usize) -> Self {
        MatPoly { side, entries: BTreeMap::new() }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Adds `coeff · w` to entry `(r, c)`, merging like terms and pruning zeros.
    pub fn add_term(&mut self, r: usize, c: usize, w: Word, coeff: Complex64) {
        assert!(r < self.side && c < self.side, "entry ({r}, {c}) outside side {}", self.side);
        let entry = self.entries.entry((r, c)).or_default();
        let slot = entry.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0));
        *slot += coeff;
        if slot.norm() < PRUNE_TOL {
            entry.remove(&w);
        }
        if entry.is_empty() {
            self.entries.remove(&(r, c));
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> Option<&BTreeMap<Word, Complex64>> {
        self.entries.get(&(r, c))
    }

    /// Nonzero entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Word, Complex64)> + '_ {
        self.entries
            .iter()
            .flat_map(|(&(r, c), terms)| terms.iter().map(move |(w, &x)| (r, c, w, x)))
    }

    pub fn term_count(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.iter().map(|(_, _, w, _)| w.degree()).max().unwrap_or(0)
    }

    /// Largest violation of `entry(r,c)(w) = conj(entry(c,r)(w*))`.
    pub fn hermitian_defect(&self) -> f64 {
        let zero = Complex64::new(0.0, 0.0);
        let mut worst: f64 = 0.0;
        for (r, c, w, x) in self.iter() {
            let partner = self
                .entry(c, r)
                .and_then(|t| t.get(&involution(w)))
                .copied()
                .unwrap_or(zero);
            worst = worst.max((x - partner.conj()).norm());
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Text listing, one term per line, for golden comparisons.
    pub fn dump(&self) -> String {
        let mut out = format!("side {}\n", self.side);
        for (r, c, w, x) in self.iter() {
            writeln!(out, "[{},{}] {:+.17e} {:+.17e}i  {}", r + 1, c + 1, x.re, x.im, w).unwrap();
        }
        out
    }
}

/// `P^(m)` for one family, with the `1/ln 2` factor folded into the coefficients.
///
/// Entry `(a₁, a₂)` is `Σᵢ wᵢ/(tᵢ ln 2) · [Z[a₁,a₂] + Z[a₂,a₁]* + (1−tᵢ) Σ Z[a₃,a₁]* Z[a₃,a₂]
/// + δ(a₁,a₂)(1 + tᵢ Σ Z[a₃,a₄] Z[a₃,a₄]*)]`.
pub fn build_p_m(rule: &QuadratureRule, d_a: usize, family: Family) -> MatPoly {
    let mut p = MatPoly::zero(d_a);
    let re = |x: f64| Complex64::new(x, 0.0);
    let single = |l: Letter| canonicalize([l].iter());
    let pair = |l1: Letter, l2: Letter| canonicalize([l1, l2].iter());
    for (i, (t, w)) in rule.iter().enumerate() {
        let s = w / (t * LN_2);
        let z = |a1, a2, st| Letter::new(family, i, a1, a2, st);
        for a1 in 0..d_a {
            for a2 in 0..d_a {
                p.add_term(a1, a2, single(z(a1, a2, false)), re(s));
                p.add_term(a1, a2, single(z(a2, a1, true)), re(s));
                if t < 1.0 {
                    for a3 in 0..d_a {
                        p.add_term(a1, a2, pair(z(a3, a1, true), z(a3, a2, false)), re(s * (1.0 - t)));
                    }
                }
            }
            p.add_term(a1, a1, Word::empty(), re(s));
            for a3 in 0..d_a {
                for a4 in 0..d_a {
                    p.add_term(a1, a1, pair(z(a3, a4, false), z(a3, a4, true)), re(s * t));
                }
            }
        }
    }
    p
}

/// Concrete operators on a space `H` for the unstarred letters; starred
/// letters evaluate to adjoints.
#[derive(Clone, Debug)]
pub struct Assignment {
    dim: usize,
    ops: BTreeMap<(Family, usize, usize, usize), CMat>,
}

impl Assignment {
    pub fn new(dim: usize) -> Self {
        Assignment { dim, ops: BTreeMap::new() }
    }

    /// Every letter of the given shape set to the zero operator.
    pub fn zeros(dim: usize, m: usize, d_a: usize, families: &[Family]) -> Self {
        let mut a = Assignment::new(dim);
        for &f in families {
            for i in 0..m {
                for a1 in 0..d_a {
                    for a2 in 0..d_a {
                        a.ops.insert((f, i, a1, a2), CMat::zeros(dim, dim));
                    }
                }
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn set(&mut self, family: Family, i: usize, a1: usize, a2: usize, op: CMat) -> Result<()> {
        if op.shape() != (self.dim, self.dim) {
            return Err(Error::arg(format!(
                "operator for {family:?}{i}[{a1},{a2}] is {:?}, expected side {}",
                op.shape(),
                self.dim
            )));
        }
        self.ops.insert((family, i, a1, a2), op);
        Ok(())
    }

    pub fn letter(&self, l: &Letter) -> Result<CMat> {
        let op = self
            .ops
            .get(&(l.family, l.i, l.a1, l.a2))
            .ok_or_else(|| Error::arg(format!("no operator assigned to {l}")))?;
        Ok(if l.starred { op.adjoint() } else { op.clone() })
    }

    /// Product of the letter operators in word order.
    pub fn word(&self, w: &Word) -> Result<CMat> {
        let mut acc = CMat::identity(self.dim, self.dim);
        for l in w.letters() {
            acc = acc * self.letter(l)?;
        }
        Ok(acc)
    }
}

/// `tr(ρ_{AH} · Σ_{r,c} |r⟩⟨c| ⊗ P[r,c](assignment))`, real part.
///
/// The state's first subsystem is `A` (dimension `poly.side()`); the remaining
/// factors together form `H`.
pub fn evaluate(poly: &MatPoly, assignment: &Assignment, state: &DensityMatrix) -> Result<f64> {
    let d_a = poly.side();
    let dims = state.dims();
    if dims.is_empty() || dims[0] != d_a {
        return Err(Error::arg(format!("state dims {dims:?} do not start with d_A = {d_a}")));
    }
    let d_h = state.dim() / d_a;
    if d_h != assignment.dim() {
        return Err(Error::arg(format!(
            "assignment acts on dimension {}, state has H of dimension {d_h}",
            assignment.dim()
        )));
    }
    let rho = state.matrix();
    let mut total = Complex64::new(0.0, 0.0);
    for (&(r, c), terms) in &poly.entries {
        // tr(ρ (|r⟩⟨c| ⊗ X)) = tr(⟨c|ρ|r⟩ X)
        let block = rho.view((c * d_h, r * d_h), (d_h, d_h));
        let mut op = CMat::zeros(d_h, d_h);
        for (w, &x) in terms {
            op += assignment.word(w)? * x;
        }
        total += (block * op).trace();
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdiv::{d_rm, variational_solution};
    use crate::qstate::{random, tensor};
    use crate::quadrature::gauss_radau;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn y(i: usize, a1: usize, a2: usize) -> Letter {
        Letter::new(Family::Y, i, a1, a2, false)
    }
    fn z(i: usize, a1: usize, a2: usize) -> Letter {
        Letter::new(Family::Z, i, a1, a2, false)
    }

    fn random_letter(rng: &mut impl Rng) -> Letter {
        let fam = if rng.gen() { Family::Y } else { Family::Z };
        Letter::new(fam, rng.gen_range(0..2), rng.gen_range(0..2), rng.gen_range(0..2), rng.gen())
    }

    fn random_word(len: usize, rng: &mut impl Rng) -> Word {
        let ls: Vec<Letter> = (0..len).map(|_| random_letter(rng)).collect();
        canonicalize(&ls)
    }

    #[test]
    fn canonicalize_examples() {
        let w = canonicalize(&[z(0, 0, 0), y(0, 0, 1)]);
        assert_eq!(w.y_part(), &[y(0, 0, 1)]);
        assert_eq!(w.z_part(), &[z(0, 0, 0)]);

        let w = canonicalize(&[y(0, 0, 0), y(0, 0, 0).star()]);
        assert_eq!(w.y_part(), &[y(0, 0, 0), y(0, 0, 0).star()]);

        let w = canonicalize(&[z(0, 0, 0), y(0, 0, 0), z(0, 0, 0).star(), y(0, 0, 0).star()]);
        assert_eq!(w.y_part(), &[y(0, 0, 0), y(0, 0, 0).star()]);
        assert_eq!(w.z_part(), &[z(0, 0, 0), z(0, 0, 0).star()]);
    }

    #[test]
    fn canonicalize_ignores_cross_family_interleaving() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let ls: Vec<Letter> = (0..6).map(|_| random_letter(&mut rng)).collect();
            let w = canonicalize(&ls);
            assert_eq!(canonicalize(w.letters()), w);
            let mut shuffled = ls.clone();
            // bubble adjacent cross-family pairs at random
            for _ in 0..20 {
                let k = rng.gen_range(0..5);
                if shuffled[k].family != shuffled[k + 1].family {
                    shuffled.swap(k, k + 1);
                }
            }
            assert_eq!(canonicalize(&shuffled), w);
        }
    }

    #[test]
    fn involution_and_product_laws() {
        assert_eq!(involution(&Word::empty()), Word::empty());
        let single = canonicalize(&[z(1, 0, 1)]);
        assert_eq!(involution(&single).z_part(), &[z(1, 0, 1).star()]);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = random_word(4, &mut rng);
            let v = random_word(4, &mut rng);
            let w = random_word(3, &mut rng);
            assert_eq!(involution(&involution(&u)), u);
            assert_eq!(involution(&word_mul(&u, &v)), word_mul(&involution(&v), &involution(&u)));
            assert_eq!(word_mul(&word_mul(&u, &v), &w), word_mul(&u, &word_mul(&v, &w)));
            assert_eq!(word_mul(&u, &Word::empty()), u);
            assert_eq!(word_mul(&u, &v).degree(), 8);
        }
        let zy = word_mul(&canonicalize(&[z(0, 0, 0)]), &canonicalize(&[y(0, 0, 0)]));
        assert_eq!(zy.y_part(), &[y(0, 0, 0)]);
    }

    #[test]
    fn word_order_is_degree_then_letters() {
        let a = canonicalize(&[y(1, 1, 1)]);
        let b = canonicalize(&[z(0, 0, 0)]);
        let ab = canonicalize(&[y(0, 0, 0), y(0, 0, 0)]);
        assert!(Word::empty() < a && a < b && b < ab);
        assert!(canonicalize(&[y(0, 0, 0)]) < canonicalize(&[y(0, 0, 0).star()]));
    }

    #[test]
    fn p_m_single_node_golden() {
        let rule = gauss_radau(1).unwrap();
        let p = build_p_m(&rule, 1, Family::Z);
        let c = format!("{:+.17e}", 1.0 / LN_2);
        let expected = format!(
            "side 1\n\
             [1,1] {c} +0.00000000000000000e0i  1\n\
             [1,1] {c} +0.00000000000000000e0i  Z1[1,1]\n\
             [1,1] {c} +0.00000000000000000e0i  Z1[1,1]*\n\
             [1,1] {c} +0.00000000000000000e0i  Z1[1,1] Z1[1,1]*\n"
        );
        assert_eq!(p.dump(), expected);
    }

    #[test]
    fn p_m_structure() {
        for (m, d_a) in [(1, 2), (3, 2), (2, 3)] {
            let rule = gauss_radau(m).unwrap();
            let p = build_p_m(&rule, d_a, Family::Y);
            assert!(p.is_hermitian(1e-14));
            assert_eq!(p.max_degree(), 2);
            assert!(p.iter().all(|(_, _, w, _)| w.z_part().is_empty()));
            for a1 in 0..d_a {
                for a2 in 0..d_a {
                    let e = p.entry(a1, a2).unwrap();
                    if a1 != a2 {
                        assert!(!e.contains_key(&Word::empty()));
                    } else {
                        // t = 1 drops the (1 − t) terms of the last node
                        let quad_nonlast = (m - 1) * d_a + m * d_a * d_a;
                        assert_eq!(e.len(), 2 * m + quad_nonlast + 1, "m {m} d_A {d_a}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_assignment_keeps_constants() {
        let rule = gauss_radau(3).unwrap();
        let p = build_p_m(&rule, 2, Family::Z);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = random::random_density(&[2, 2], 4, &mut rng);
        let a = Assignment::zeros(2, 3, 2, &[Family::Z]);
        let expect: f64 = rule.iter().map(|(t, w)| w / (t * LN_2)).sum();
        assert_abs_diff_eq!(evaluate(&p, &a, &state).unwrap(), expect, epsilon = 1e-12);
    }

    fn block_operator(ops: &[CMat], d_a: usize, d_h: usize) -> CMat {
        let mut out = CMat::zeros(d_a * d_h, d_a * d_h);
        for a1 in 0..d_a {
            for a2 in 0..d_a {
                out.view_mut((a1 * d_h, a2 * d_h), (d_h, d_h)).copy_from(&ops[a1 * d_a + a2]);
            }
        }
        out
    }

    #[test]
    fn evaluation_matches_block_operator_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (d_a, d_h, m) = (2, 3, 2);
        let rule = gauss_radau(m).unwrap();
        let p = build_p_m(&rule, d_a, Family::Z);
        for _ in 0..5 {
            let state = random::random_density(&[d_a, d_h], 3, &mut rng);
            let rho = state.matrix();
            let rho_h = state.partial_trace(&[1]).unwrap();
            let sigma = tensor(&CMat::identity(d_a, d_a), rho_h.matrix());
            let mut a = Assignment::new(d_h);
            let mut expect = 0.0;
            for (i, (t, w)) in rule.iter().enumerate() {
                let ops: Vec<CMat> = (0..d_a * d_a).map(|_| random::ginibre(d_h, d_h, &mut rng)).collect();
                for a1 in 0..d_a {
                    for a2 in 0..d_a {
                        a.set(Family::Z, i, a1, a2, ops[a1 * d_a + a2].clone()).unwrap();
                    }
                }
                let zb = block_operator(&ops, d_a, d_h);
                let id = CMat::identity(d_a * d_h, d_a * d_h);
                let inner = (rho * (&id + &zb + zb.adjoint() + zb.adjoint() * &zb * Complex64::from(1.0 - t)))
                    .trace()
                    .re
                    + t * (&sigma * &zb * zb.adjoint()).trace().re;
                expect += w / (t * LN_2) * inner;
            }
            assert_abs_diff_eq!(evaluate(&p, &a, &state).unwrap(), expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn sylvester_assignment_attains_minus_d_rm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (d_a, d_h) = (2, 2);
        for m in [1, 2, 4] {
            let rule = gauss_radau(m).unwrap();
            let p = build_p_m(&rule, d_a, Family::Z);
            let state = random::random_density(&[d_a, d_h], 4, &mut rng);
            let rho_h = state.partial_trace(&[1]).unwrap();
            let sigma = tensor(&CMat::identity(d_a, d_a), rho_h.matrix());
            let mut a = Assignment::new(d_h);
            for (i, (t, _)) in rule.iter().enumerate() {
                let sol = variational_solution(t, state.matrix(), &sigma).unwrap();
                for a1 in 0..d_a {
                    for a2 in 0..d_a {
                        let op = sol.z.view((a1 * d_h, a2 * d_h), (d_h, d_h)).into_owned();
                        a.set(Family::Z, i, a1, a2, op).unwrap();
                    }
                }
            }
            let target = -d_rm(&rule, state.matrix(), &sigma).unwrap().to_f64();
            let at_opt = evaluate(&p, &a, &state).unwrap();
            assert_abs_diff_eq!(at_opt, target, epsilon = 1e-7);

            // any other assignment is feasible for the infimum
            for _ in 0..5 {
                let mut b = a.clone();
                for i in 0..m {
                    let op = a.letter(&z(i, 0, 1)).unwrap() + random::ginibre(d_h, d_h, &mut rng) * Complex64::from(0.3);
                    b.set(Family::Z, i, 0, 1, op).unwrap();
                }
                assert!(evaluate(&p, &b, &state).unwrap() >= target - 1e-8);
            }
        }
    }

    #[test]
    fn evaluate_rejects_mismatched_dimensions() {
        let rule = gauss_radau(1).unwrap();
        let p = build_p_m(&rule, 2, Family::Z);
        let state = DensityMatrix::maximally_mixed(vec![2, 3]).unwrap();
        let a = Assignment::zeros(2, 1, 2, &[Family::Z]);
        assert!(matches!(evaluate(&p, &a, &state), Err(Error::Argument(_))));
        let mut a = Assignment::new(3);
        assert!(a.set(Family::Z, 0, 0, 0, CMat::zeros(2, 2)).is_err());
    }
}
