//! The diagonal action `S(g) = Σ λ_i(g) x_i ∂_i` of a commutative Lie
//! algebra with basis `g_1, …, g_l`, its weights and small-divisor data.
//!
//! The monomial field `x^Q ∂_i` is an eigenvector of every `ad S(g_j)` with
//! eigenvalue `α_{Q,i}(g_j) = Σ_k q_k λ_k(g_j) − λ_i(g_j)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{self, Matrix};
use crate::scalar::{Arith, GaussianRational, Scalar};
use crate::series::{FormalSeries, MultiIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct LieMorphism {
    arith: Arith,
    /// `lambda[j][i] = λ_i(g_j)`.
    lambda: Matrix,
    /// Coordinates `K` such that `L = (λ_{K_r}(g_j))_{r,j}` is invertible.
    minor_cols: Vec<usize>,
    minor_inv: Matrix,
}

/// A weight `α_{Q,i}` evaluated on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    pub coeffs: Vec<Scalar>,
    pub q: MultiIndex,
    pub i: usize,
}

impl Weight {
    /// `‖α‖ = max_j |α(g_j)|`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, arith: Arith) -> bool {
        self.coeffs.iter().all(|c| arith.is_zero(c))
    }

    /// `α(g) = Σ_j g_j α(g_j)`.
    pub fn eval(&self, g: &[Scalar], arith: Arith) -> Scalar {
        let mut s = arith.zero();
        for (c, x) in self.coeffs.iter().zip(g) {
            s += &(c * x);
        }
        s
    }

    pub fn key(&self, arith: Arith) -> WeightKey {
        WeightKey::of(&self.coeffs, arith)
    }
}

/// Hashable, ordered identity of a weight vector. Float weights are
/// quantized on a grid of size equal to the tolerance; weights within the
/// tolerance of zero map to the zero key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightKey {
    Exact(Vec<GaussianRational>),
    Float(Vec<(i64, i64)>),
}

impl WeightKey {
    pub fn of(coeffs: &[Scalar], arith: Arith) -> Self {
        match arith {
            Arith::Exact => WeightKey::Exact(
                coeffs
                    .iter()
                    .map(|c| c.as_exact().cloned().expect("exact weight in exact mode"))
                    .collect(),
            ),
            Arith::Float { tol } => {
                if coeffs.iter().all(|c| arith.is_zero(c)) {
                    return WeightKey::Float(vec![(0, 0); coeffs.len()]);
                }
                WeightKey::Float(
                    coeffs
                        .iter()
                        .map(|c| {
                            let z = c.to_complex();
                            ((z.re / tol).round() as i64, (z.im / tol).round() as i64)
                        })
                        .collect(),
                )
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            WeightKey::Exact(v) => v.iter().all(|g| g.is_zero()),
            WeightKey::Float(v) => v.iter().all(|&(a, b)| a == 0 && b == 0),
        }
    }
}

/// One weight space component of a field.
#[derive(Clone, Debug)]
pub struct WeightBucket {
    pub weight: Vec<Scalar>,
    pub field: VectorField,
}

/// Finite-prefix small-divisor data.
#[derive(Clone, Debug, Serialize)]
pub struct DiophantineReport {
    pub k_max: usize,
    /// `omega[k]` for `0 ≤ k ≤ k_max`.
    pub omega: Vec<f64>,
    pub bruno_partial: f64,
    /// `(Q, i)` with vanishing weight, `2 ≤ |Q| ≤ 2^{k_max}`, `i` 0-based.
    pub resonant_set: Vec<(Vec<u32>, usize)>,
    pub tolerance: f64,
}

/// Default cap on the number of monomials enumerated by diagnostics.
pub const DEFAULT_BUDGET: u128 = 5_000_000;

impl LieMorphism {
    /// `lambda[j][i] = λ_i(g_j)`; fails unless the rows are independent.
    pub fn new(lambda: Matrix, arith: Arith) -> Result<Self> {
        let l = lambda.len();
        if l == 0 {
            return Err(Error::Invalid("Lie morphism with no generators".into()));
        }
        let n = lambda[0].len();
        if n == 0 || lambda.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("ragged eigenvalue matrix".into()));
        }
        let lambda: Matrix = lambda
            .iter()
            .map(|r| r.iter().map(|c| arith.coerce(c)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let cols = linalg::independent_columns(&lambda, arith);
        if cols.len() < l {
            return Err(Error::NotInjective { rank: cols.len(), l });
        }
        let minor: Matrix = cols
            .iter()
            .map(|&k| (0..l).map(|j| lambda[j][k].clone()).collect())
            .collect();
        let minor_inv = linalg::inverse(&minor, arith)?;
        Ok(LieMorphism {
            arith,
            lambda,
            minor_cols: cols,
            minor_inv,
        })
    }

    /// A single diagonal field (`l = 1`).
    pub fn single(lambda: Vec<Scalar>, arith: Arith) -> Result<Self> {
        Self::new(vec![lambda], arith)
    }

    pub fn from_ints(rows: &[&[i64]], arith: Arith) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&v| arith.int(v)).collect()).collect(), arith)
    }

    pub fn arith(&self) -> Arith {
        self.arith
    }

    pub fn l(&self) -> usize {
        self.lambda.len()
    }

    pub fn n(&self) -> usize {
        self.lambda[0].len()
    }

    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    pub fn minor_cols(&self) -> &[usize] {
        &self.minor_cols
    }

    /// `L⁻¹` for the chosen minor.
    pub fn minor_inverse(&self) -> &Matrix {
        &self.minor_inv
    }

    /// `S_j = S(g_j)`.
    pub fn basis_field(&self, j: usize, cap: usize) -> VectorField {
        VectorField::diagonal_linear(&self.lambda[j], cap, self.arith)
    }

    pub fn basis_fields(&self, cap: usize) -> Vec<VectorField> {
        (0..self.l()).map(|j| self.basis_field(j, cap)).collect()
    }

    /// Eigenvalues `λ_i(g)` of `S(g)` for `g = Σ g_j g_j`.
    pub fn eigenvalues(&self, g: &[Scalar]) -> Vec<Scalar> {
        (0..self.n())
            .map(|i| {
                let mut s = self.arith.zero();
                for j in 0..self.l() {
                    s += &(&g[j] * &self.lambda[j][i]);
                }
                s
            })
            .collect()
    }

    pub fn field_of(&self, g: &[Scalar], cap: usize) -> VectorField {
        VectorField::diagonal_linear(&self.eigenvalues(g), cap, self.arith)
    }

    pub fn weight_of(&self, q: &MultiIndex, i: usize) -> Weight {
        let coeffs = (0..self.l())
            .map(|j| {
                let row = &self.lambda[j];
                let mut s = -&row[i];
                for (k, lk) in row.iter().enumerate() {
                    let e = q.get(k);
                    if e != 0 {
                        s += &(lk * &self.arith.int(e as i64));
                    }
                }
                s
            })
            .collect();
        Weight { coeffs, q: *q, i }
    }

    /// `Λ·Q`, the weight of the function `x^Q`.
    pub fn function_weight(&self, q: &MultiIndex) -> Vec<Scalar> {
        (0..self.l())
            .map(|j| {
                let mut s = self.arith.zero();
                for (k, lk) in self.lambda[j].iter().enumerate() {
                    let e = q.get(k);
                    if e != 0 {
                        s += &(lk * &self.arith.int(e as i64));
                    }
                }
                s
            })
            .collect()
    }

    /// Whether `x^Q` is a first integral of every `S(g_j)`.
    pub fn is_first_integral_monomial(&self, q: &MultiIndex) -> bool {
        self.function_weight(q).iter().all(|c| self.arith.is_zero(c))
    }

    /// Split a field into weight spaces, ordered by key.
    pub fn weight_decompose(&self, p: &VectorField) -> Vec<WeightBucket> {
        let (n, cap, arith) = (p.n(), p.cap(), p.arith());
        let mut buckets: BTreeMap<WeightKey, WeightBucket> = BTreeMap::new();
        for (i, comp) in p.components().iter().enumerate() {
            for (q, c) in comp.terms() {
                let w = self.weight_of(q, i);
                let key = w.key(arith);
                let b = buckets.entry(key).or_insert_with(|| WeightBucket {
                    weight: w.coeffs.clone(),
                    field: VectorField::zero(n, cap, arith),
                });
                let mut comps = std::mem::replace(&mut b.field, VectorField::zero(n, cap, arith)).into_components();
                comps[i].add_term(*q, c.clone());
                b.field = VectorField::new(comps).expect("same shape");
            }
        }
        buckets.into_values().collect()
    }

    /// The zero-weight part of `P`.
    pub fn zero_weight_projection(&self, p: &VectorField) -> VectorField {
        self.filter_terms(p, true)
    }

    /// Everything but the zero-weight part.
    pub fn nonzero_weight_part(&self, p: &VectorField) -> VectorField {
        self.filter_terms(p, false)
    }

    fn filter_terms(&self, p: &VectorField, keep_zero: bool) -> VectorField {
        let arith = p.arith();
        let comps = p
            .components()
            .iter()
            .enumerate()
            .map(|(i, comp)| {
                let mut out = FormalSeries::zero(comp.n(), comp.cap(), arith);
                for (q, c) in comp.terms() {
                    if self.weight_of(q, i).is_zero(arith) == keep_zero {
                        out.add_term(*q, c.clone());
                    }
                }
                out
            })
            .collect();
        VectorField::new(comps).expect("same shape")
    }

    /// Zero-weight part of a function (its first-integral part).
    pub fn first_integral_part(&self, f: &FormalSeries) -> FormalSeries {
        let mut out = FormalSeries::zero(f.n(), f.cap(), f.arith());
        for (q, c) in f.terms() {
            if self.is_first_integral_monomial(q) {
                out.add_term(*q, c.clone());
            }
        }
        out
    }

    /// Distinct weights with source degree in `lo..=hi`, keyed, each with its
    /// first `(Q, i)` witness.
    pub fn distinct_weights(&self, lo: usize, hi: usize, budget: u128) -> Result<BTreeMap<WeightKey, Weight>> {
        let n = self.n();
        let needed: u128 = (lo..=hi).map(|d| MultiIndex::count_of_degree(n, d)).sum::<u128>() * n as u128;
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let mut out = BTreeMap::new();
        for d in lo..=hi {
            for q in MultiIndex::all_of_degree(n, d) {
                for i in 0..n {
                    let w = self.weight_of(&q, i);
                    out.entry(w.key(self.arith)).or_insert(w);
                }
            }
        }
        Ok(out)
    }

    /// `ω_k` for `0 ≤ k ≤ k_max`, the Bruno partial sum and the resonant set.
    /// `ω_0` ranges over an empty set and is set to 1; likewise any `ω_k`
    /// whose range holds no nonzero weight.
    pub fn omega_sequence(&self, k_max: usize, budget: u128) -> Result<DiophantineReport> {
        if k_max < 1 {
            return Err(Error::Invalid("k_max must be at least 1".into()));
        }
        if k_max > 20 {
            return Err(Error::BudgetExceeded {
                needed: u128::MAX,
                budget,
            });
        }
        let n = self.n();
        let top = 1usize << k_max;
        let needed = MultiIndex::count_of_degree(n + 1, top);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let arith = self.arith;
        let mut omega = vec![1.0];
        let mut running = f64::INFINITY;
        let mut resonant_set = Vec::new();
        for k in 1..=k_max {
            let lo = if k == 1 { 2 } else { (1usize << (k - 1)) + 1 };
            let hi = 1usize << k;
            for d in lo..=hi {
                for q in MultiIndex::all_of_degree(n, d) {
                    for i in 0..n {
                        let w = self.weight_of(&q, i);
                        if w.is_zero(arith) {
                            resonant_set.push((q.to_vec(n), i));
                        } else {
                            running = running.min(w.norm());
                        }
                    }
                }
            }
            omega.push(if running.is_finite() { running } else { 1.0 });
        }
        let bruno_partial = omega
            .iter()
            .enumerate()
            .map(|(k, w)| -w.ln() / (1u64 << k) as f64)
            .sum::<f64>();
        // −ln 1 is −0.0; report a clean zero
        let bruno_partial = if bruno_partial == 0.0 { 0.0 } else { bruno_partial };
        Ok(DiophantineReport {
            k_max,
            omega,
            bruno_partial,
            resonant_set,
            tolerance: arith.tolerance(),
        })
    }

    /// Finite-order regularity certificate: no nonzero weight with source
    /// degree `1 ≤ |Q| ≤ N` vanishes on `g0`.
    pub fn is_regular_element(&self, g0: &[Scalar], order: usize) -> Result<bool> {
        let weights = self.distinct_weights(1, order, DEFAULT_BUDGET)?;
        Ok(self.regular_against(g0, &weights))
    }

    fn regular_against(&self, g0: &[Scalar], weights: &BTreeMap<WeightKey, Weight>) -> bool {
        if g0.iter().all(|c| self.arith.is_zero(c)) {
            return false;
        }
        weights
            .iter()
            .filter(|(k, _)| !k.is_zero())
            .all(|(_, w)| !self.arith.is_zero(&w.eval(g0, self.arith)))
    }

    /// A regular element found by seeded random rational sampling.
    pub fn find_regular_element(&self, order: usize, seed: u64, attempts: usize) -> Result<Vec<Scalar>> {
        let weights = self.distinct_weights(1, order, DEFAULT_BUDGET)?;
        let l = self.l();
        let mut first = vec![self.arith.zero(); l];
        first[0] = self.arith.one();
        if self.regular_against(&first, &weights) {
            return Ok(first);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..attempts {
            let g: Vec<Scalar> = (0..l)
                .map(|_| {
                    let p: i64 = rng.gen_range(-97..=97);
                    let q: i64 = rng.gen_range(1..=89);
                    self.arith.ratio(p, q)
                })
                .collect();
            if self.regular_against(&g, &weights) {
                return Ok(g);
            }
        }
        Err(Error::NoRegularElement(attempts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;

    fn ex() -> Arith {
        Arith::Exact
    }

    #[test]
    fn ito_weights() {
        let s = LieMorphism::from_ints(&[&[1, -1]], ex()).unwrap();
        let w = s.weight_of(&MultiIndex::new(&[1, 1]), 0);
        assert_eq!(w.coeffs, vec![ex().int(-1)]);
        let w = s.weight_of(&MultiIndex::new(&[2, 1]), 0);
        assert!(w.is_zero(ex()));
        assert!(s.weight_of(&MultiIndex::unit(1), 1).is_zero(ex()));
    }

    #[test]
    fn resonant_monomial_of_one_two() {
        let s = LieMorphism::from_ints(&[&[1, 2]], ex()).unwrap();
        assert!(s.weight_of(&MultiIndex::new(&[2, 0]), 1).is_zero(ex()));
        let p = VectorField::monomial(2, 4, ex(), MultiIndex::new(&[2, 0]), 1, ex().one());
        let b = s.weight_decompose(&p);
        assert_eq!(b.len(), 1);
        assert!(b[0].weight.iter().all(|c| ex().is_zero(c)));
    }

    #[test]
    fn rank_deficient_rejected() {
        let e = LieMorphism::from_ints(&[&[1, 2], &[2, 4]], ex());
        assert!(matches!(e, Err(Error::NotInjective { rank: 1, l: 2 })));
    }

    #[test]
    fn omega_for_integer_weights() {
        let s = LieMorphism::from_ints(&[&[1, -1]], ex()).unwrap();
        let r = s.omega_sequence(3, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.omega, vec![1.0; 4]);
        assert_eq!(r.bruno_partial, 0.0);
    }

    #[test]
    fn budget_guard() {
        let s = LieMorphism::from_ints(&[&[1, -1, 2, 3]], ex()).unwrap();
        assert!(matches!(s.omega_sequence(10, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn float_key_zero() {
        let a = Arith::float();
        let k = WeightKey::of(&[Scalar::Float(Complex64::new(1e-14, 0.0))], a);
        assert!(k.is_zero());
    }

    #[test]
    fn regular_elements() {
        let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], ex()).unwrap();
        // x1 ∂x2 has weight (1, −1), which vanishes on g0 = (1, 1)
        let g = s.find_regular_element(6, 7, 100).unwrap();
        assert!(s.is_regular_element(&g, 6).unwrap());
        assert!(!s.is_regular_element(&[ex().int(1), ex().int(1)], 6).unwrap());
    }
}
