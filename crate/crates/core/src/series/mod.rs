//! Sparse truncated multivariate power series.
//!
//! A [`FormalSeries`] stores the nonzero coefficients of a power series in
//! `n` variables whose terms of total degree above the cap `N` are
//! discarded. Arithmetic between series with different caps, dimensions or
//! arithmetic modes is refused; the fallible `checked_*` methods report it
//! and the operator impls panic on it.

mod majorant;
mod multi_index;

pub use majorant::{inverse_bound, majorant_norm, PolyradiusSpec};
pub use multi_index::{MultiIndex, MAX_VARS};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{Arith, Scalar};

#[derive(Clone, Debug)]
pub struct FormalSeries {
    n: usize,
    cap: usize,
    arith: Arith,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl PartialEq for FormalSeries {
    /// Same shape and, coefficient by coefficient, equal under the zero test.
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.cap == other.cap
            && self.arith == other.arith
            && self.checked_sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl FormalSeries {
    pub fn zero(n: usize, cap: usize, arith: Arith) -> Self {
        assert!(n >= 1 && n <= MAX_VARS, "variable count out of range");
        FormalSeries {
            n,
            cap,
            arith,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, cap: usize, arith: Arith, c: Scalar) -> Self {
        Self::monomial(n, cap, arith, MultiIndex::zero(), c)
    }

    pub fn one(n: usize, cap: usize, arith: Arith) -> Self {
        Self::constant(n, cap, arith, arith.one())
    }

    /// The coordinate function `x_i` (0-based `i`).
    pub fn var(n: usize, cap: usize, arith: Arith, i: usize) -> Self {
        assert!(i < n, "variable index out of range");
        Self::monomial(n, cap, arith, MultiIndex::unit(i), arith.one())
    }

    pub fn monomial(n: usize, cap: usize, arith: Arith, q: MultiIndex, c: Scalar) -> Self {
        let mut s = Self::zero(n, cap, arith);
        s.add_term(q, c);
        s
    }

    pub fn from_terms(
        n: usize,
        cap: usize,
        arith: Arith,
        terms: impl IntoIterator<Item = (MultiIndex, Scalar)>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(Error::Invalid(format!("variable count {n} out of range")));
        }
        let mut s = Self::zero(n, cap, arith);
        for (q, c) in terms {
            if !q.fits(n) {
                return Err(Error::Invalid(format!("exponent {q:?} uses more than {n} variables")));
            }
            let c = arith.coerce(&c)?;
            s.add_term(q, c);
        }
        Ok(s)
    }

    /// Integer-coefficient literal: `&[(exponents, coeff)]`.
    pub fn from_ints(n: usize, cap: usize, arith: Arith, terms: &[(&[u32], i64)]) -> Self {
        let mut s = Self::zero(n, cap, arith);
        for (q, c) in terms {
            s.add_term(MultiIndex::new(q), arith.int(*c));
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation cap `N`.
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn arith(&self) -> Arith {
        self.arith
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &Scalar)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, q: &MultiIndex) -> Scalar {
        self.terms.get(q).cloned().unwrap_or_else(|| self.arith.zero())
    }

    pub fn coeff_of(&self, e: &[u32]) -> Scalar {
        self.coeff(&MultiIndex::new(e))
    }

    /// Lowest stored degree; `None` for the zero series.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().next().map(|q| q.degree())
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(|q| q.degree())
    }

    /// Add `c·x^q` in place; terms above the cap are dropped, results below
    /// the zero test are pruned.
    pub fn add_term(&mut self, q: MultiIndex, c: Scalar) {
        if q.degree() > self.cap {
            return;
        }
        match self.terms.get_mut(&q) {
            Some(v) => {
                *v += &c;
                if self.arith.is_zero(v) {
                    self.terms.remove(&q);
                }
            }
            None => {
                if !self.arith.is_zero(&c) {
                    self.terms.insert(q, c);
                }
            }
        }
    }

    fn compat(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(self.n, o.n));
        }
        if self.cap != o.cap {
            return Err(Error::OrderMismatch(self.cap, o.cap));
        }
        if self.arith != o.arith {
            return Err(Error::ArithMismatch);
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        self.compat(o)?;
        let mut r = self.clone();
        for (q, c) in &o.terms {
            r.add_term(*q, c.clone());
        }
        Ok(r)
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        self.compat(o)?;
        let mut r = self.clone();
        for (q, c) in &o.terms {
            r.add_term(*q, -c);
        }
        Ok(r)
    }

    /// Cauchy product truncated at the cap.
    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        self.compat(o)?;
        let (a, b) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        let mut acc: HashMap<MultiIndex, Scalar> = HashMap::new();
        for (qa, ca) in &a.terms {
            let room = self.cap - qa.degree();
            for (qb, cb) in &b.terms {
                if qb.degree() > room {
                    break;
                }
                let p = ca * cb;
                match acc.get_mut(&qa.add(qb)) {
                    Some(v) => *v += &p,
                    None => {
                        acc.insert(qa.add(qb), p);
                    }
                }
            }
        }
        let arith = self.arith;
        Ok(FormalSeries {
            n: self.n,
            cap: self.cap,
            arith,
            terms: acc.into_iter().filter(|(_, c)| !arith.is_zero(c)).collect(),
        })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if self.arith.is_zero(c) {
            return Self::zero(self.n, self.cap, self.arith);
        }
        let mut r = Self::zero(self.n, self.cap, self.arith);
        for (q, v) in &self.terms {
            r.add_term(*q, v * c);
        }
        r
    }

    pub fn mul_monomial(&self, q: &MultiIndex, c: &Scalar) -> Self {
        let mut r = Self::zero(self.n, self.cap, self.arith);
        for (p, v) in &self.terms {
            r.add_term(p.add(q), v * c);
        }
        r
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n, self.cap, self.arith);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Self {
        FormalSeries {
            n: self.n,
            cap: self.cap,
            arith: self.arith,
            terms: self
                .terms
                .iter()
                .filter(|(q, _)| keep(q))
                .map(|(q, c)| (*q, c.clone()))
                .collect(),
        }
    }

    /// Taylor polynomial of degree `≤ k` (cap unchanged).
    pub fn jet(&self, k: usize) -> Self {
        self.filter(|q| q.degree() <= k)
    }

    pub fn homogeneous(&self, k: usize) -> Self {
        self.filter(|q| q.degree() == k)
    }

    /// Terms of degree `≥ k`.
    pub fn tail(&self, k: usize) -> Self {
        self.filter(|q| q.degree() >= k)
    }

    pub fn degree_range(&self, lo: usize, hi: usize) -> Self {
        self.filter(|q| q.degree() >= lo && q.degree() <= hi)
    }

    /// The same coefficients under another cap; lowering discards terms.
    pub fn with_cap(&self, cap: usize) -> Self {
        FormalSeries {
            n: self.n,
            cap,
            arith: self.arith,
            terms: self
                .terms
                .iter()
                .filter(|(q, _)| q.degree() <= cap)
                .map(|(q, c)| (*q, c.clone()))
                .collect(),
        }
    }

    /// `∂f/∂x_i`. Only degrees `< N` of the result are known, so the cap
    /// drops by one.
    pub fn partial(&self, i: usize) -> Self {
        let mut d = self.derivative(i);
        d.cap = self.cap.saturating_sub(1);
        d
    }

    /// `∂f/∂x_i` keeping the cap; callers are responsible for the fact that
    /// the top degree is not determined by `f`.
    pub(crate) fn derivative(&self, i: usize) -> Self {
        assert!(i < self.n);
        let mut r = Self::zero(self.n, self.cap, self.arith);
        for (q, c) in &self.terms {
            if let Some(p) = q.dec(i) {
                r.add_term(p, c * &self.arith.int(q.get(i) as i64));
            }
        }
        r
    }

    /// Whether the two series agree on all degrees `≤ k`.
    pub fn eq_mod(&self, o: &Self, k: usize) -> bool {
        if self.n != o.n || self.arith != o.arith {
            return false;
        }
        let a = self.jet(k).with_cap(k);
        let b = o.jet(k).with_cap(k);
        a == b
    }

    /// Lowest degree at which the two series differ.
    pub fn first_difference(&self, o: &Self) -> Option<usize> {
        let a = self.with_cap(self.cap.max(o.cap));
        let b = o.with_cap(self.cap.max(o.cap));
        a.checked_sub(&b).ok().and_then(|d| d.order())
    }

    /// Reinterpret in another arithmetic mode (exact values become floats).
    pub fn to_arith(&self, arith: Arith) -> Result<Self> {
        let mut r = Self::zero(self.n, self.cap, arith);
        for (q, c) in &self.terms {
            r.add_term(*q, arith.coerce(c)?);
        }
        Ok(r)
    }

    /// Embed into `m ≥ n` variables (new variables unused).
    pub fn extend_vars(&self, m: usize) -> Self {
        assert!(m >= self.n && m <= MAX_VARS);
        FormalSeries {
            n: m,
            cap: self.cap,
            arith: self.arith,
            terms: self.terms.clone(),
        }
    }

    /// `f(φ_1, …, φ_n)` for substitutions without constant term.
    ///
    /// The substitutions share the result's dimension and cap; `f` must be
    /// known at least up to that cap.
    pub fn compose(&self, subs: &[FormalSeries]) -> Result<Self> {
        if subs.len() != self.n {
            return Err(Error::DimensionMismatch(subs.len(), self.n));
        }
        let first = &subs[0];
        let (m, cap, arith) = (first.n, first.cap, first.arith);
        for s in subs {
            first.compat(s)?;
            if s.order() == Some(0) {
                return Err(Error::Invalid("substitution with constant term".into()));
            }
        }
        if self.arith != arith {
            return Err(Error::ArithMismatch);
        }
        if self.cap < cap {
            return Err(Error::OrderMismatch(self.cap, cap));
        }
        let ords: Vec<usize> = subs.iter().map(|s| s.order().unwrap_or(usize::MAX / 64)).collect();
        let mut cache: HashMap<MultiIndex, FormalSeries> = HashMap::new();
        cache.insert(MultiIndex::zero(), Self::one(m, cap, arith));
        let mut acc: HashMap<MultiIndex, Scalar> = HashMap::new();
        for (q, c) in &self.terms {
            let lowest: usize = (0..self.n).map(|j| q.get(j) as usize * ords[j]).sum();
            if lowest > cap {
                continue;
            }
            let p = power(&mut cache, subs, q);
            for (k, v) in &p.terms {
                let t = c * v;
                match acc.get_mut(k) {
                    Some(x) => *x += &t,
                    None => {
                        acc.insert(*k, t);
                    }
                }
            }
        }
        Ok(FormalSeries {
            n: m,
            cap,
            arith,
            terms: acc.into_iter().filter(|(_, c)| !arith.is_zero(c)).collect(),
        })
    }

    /// `f(y + V(y))` by the Taylor expansion `Σ_K ∂^K f · V^K / K!`,
    /// efficient when `V` has high order.
    pub fn compose_shift(&self, v: &[FormalSeries]) -> Result<Self> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(v.len(), self.n));
        }
        for s in v {
            self.compat(s)?;
        }
        let ordv = v.iter().filter_map(|s| s.order()).min();
        let Some(ordv) = ordv else {
            return Ok(self.clone());
        };
        if ordv < 2 {
            return Err(Error::Invalid("shift must have order at least 2".into()));
        }
        // ∂^K f V^K has order ≥ |K|(ordv − 1) + ord f
        let kmax = self.cap / (ordv - 1);
        let mut derivs: HashMap<MultiIndex, FormalSeries> = HashMap::new();
        derivs.insert(MultiIndex::zero(), self.clone());
        let mut pows: HashMap<MultiIndex, FormalSeries> = HashMap::new();
        pows.insert(MultiIndex::zero(), Self::one(self.n, self.cap, self.arith));
        let mut out = self.clone();
        for k in 1..=kmax {
            for kk in MultiIndex::all_of_degree(self.n, k) {
                let j = kk.last_nonzero().unwrap();
                let prev = kk.dec(j).unwrap();
                let Some(dprev) = derivs.get(&prev) else { continue };
                let d = dprev.derivative(j);
                if d.is_zero() {
                    continue;
                }
                derivs.insert(kk, d.clone());
                let vk = power(&mut pows, v, &kk);
                if vk.is_zero() {
                    continue;
                }
                let fact = self.arith.int(kk.factorial() as i64);
                let term = (&d * &vk).scale(&fact.recip());
                out = &out + &term;
            }
        }
        Ok(out)
    }

    /// `f(y + V(y))`, choosing between plain composition and the Taylor
    /// expansion by a cost estimate.
    pub fn compose_id_plus(&self, v: &[FormalSeries]) -> Result<Self> {
        let ordv = v.iter().filter_map(|s| s.order()).min().unwrap_or(usize::MAX);
        if ordv == usize::MAX {
            return Ok(self.clone());
        }
        if ordv >= 2 {
            let kmax = self.cap / (ordv - 1);
            let shifts: u128 = (1..=kmax).map(|k| MultiIndex::count_of_degree(self.n, k)).sum();
            if shifts < self.len() as u128 {
                return self.compose_shift(v);
            }
        }
        let subs: Vec<FormalSeries> = v
            .iter()
            .enumerate()
            .map(|(j, s)| &Self::var(self.n, self.cap, self.arith, j) + s)
            .collect();
        self.compose(&subs)
    }

    /// Exact quotient `self / d` for polynomials, or `None` when `d` does
    /// not divide. Works by repeatedly cancelling the leading term in the
    /// graded lex order.
    pub fn div_exact(&self, d: &Self) -> Result<Option<Self>> {
        self.compat(d)?;
        let Some((ld, cd)) = d.terms.iter().next_back() else {
            return Err(Error::Invalid("division by zero series".into()));
        };
        let inv = cd.recip();
        let mut rem = self.clone();
        let mut quo = Self::zero(self.n, self.cap, self.arith);
        while let Some((lr, cr)) = rem.terms.iter().next_back() {
            let Some(qm) = lr.checked_sub(ld) else {
                return Ok(None);
            };
            let c = cr * &inv;
            rem = &rem - &d.mul_monomial(&qm, &c);
            quo.add_term(qm, c);
        }
        Ok(Some(quo))
    }

    /// Linear substitution `x ↦ M x` (rows of `M` give the new variables).
    pub fn linear_substitute(&self, m: &[Vec<Scalar>]) -> Result<Self> {
        let subs: Vec<FormalSeries> = m
            .iter()
            .map(|row| {
                let mut s = Self::zero(self.n, self.cap, self.arith);
                for (j, c) in row.iter().enumerate() {
                    s.add_term(MultiIndex::unit(j), c.clone());
                }
                s
            })
            .collect();
        self.compose(&subs)
    }
}

fn power(
    cache: &mut HashMap<MultiIndex, FormalSeries>,
    subs: &[FormalSeries],
    q: &MultiIndex,
) -> FormalSeries {
    if let Some(p) = cache.get(q) {
        return p.clone();
    }
    let j = q.last_nonzero().expect("zero index is cached");
    let prev = q.dec(j).unwrap();
    let p = power(cache, subs, &prev);
    let r = &p * &subs[j];
    cache.insert(*q, r.clone());
    r
}

impl<'a> Add<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn add(self, o: &FormalSeries) -> FormalSeries {
        self.checked_add(o).expect("series add: incompatible operands")
    }
}

impl<'a> Sub<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn sub(self, o: &FormalSeries) -> FormalSeries {
        self.checked_sub(o).expect("series sub: incompatible operands")
    }
}

impl<'a> Mul<&'a FormalSeries> for &'a FormalSeries {
    type Output = FormalSeries;
    fn mul(self, o: &FormalSeries) -> FormalSeries {
        self.checked_mul(o).expect("series mul: incompatible operands")
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        FormalSeries {
            n: self.n,
            cap: self.cap,
            arith: self.arith,
            terms: self.terms.iter().map(|(q, c)| (*q, -c)).collect(),
        }
    }
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (q, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for k in 0..self.n {
                match q.get(k) {
                    0 => {}
                    1 => write!(f, "*x{}", k + 1)?,
                    e => write!(f, "*x{}^{}", k + 1, e)?,
                }
            }
        }
        write!(f, " + O({})", self.cap + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex() -> Arith {
        Arith::Exact
    }

    #[test]
    fn additive_inverse_and_sum() {
        let x1 = FormalSeries::var(2, 4, ex(), 0);
        let x2 = FormalSeries::var(2, 4, ex(), 1);
        assert!((&x1 + &(-&x1)).is_zero());
        let s = &(&x1 + &x2) + &x2;
        assert_eq!(s.coeff_of(&[0, 1]), ex().int(2));
        assert_eq!(s.coeff_of(&[1, 0]), ex().int(1));
    }

    #[test]
    fn binomial_square() {
        let x1 = FormalSeries::var(2, 4, ex(), 0);
        let x2 = FormalSeries::var(2, 4, ex(), 1);
        let s = &x1 + &x2;
        let sq = &s * &s;
        let want = FormalSeries::from_ints(2, 4, ex(), &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)]);
        assert_eq!(sq, want);
        let one = FormalSeries::one(2, 4, ex());
        assert_eq!(&s * &one, s);
    }

    #[test]
    fn truncation_is_hard() {
        let x = FormalSeries::var(1, 3, ex(), 0);
        assert!(x.pow(4).is_zero());
        let y = FormalSeries::var(1, 4, ex(), 0);
        assert!(matches!(x.checked_add(&y), Err(Error::OrderMismatch(3, 4))));
        let z = FormalSeries::var(2, 3, ex(), 0);
        assert!(matches!(x.checked_mul(&z), Err(Error::DimensionMismatch(1, 2))));
    }

    #[test]
    fn composition_and_shift_agree() {
        let a = ex();
        let f = FormalSeries::from_ints(2, 8, a, &[(&[1, 0], 1), (&[2, 1], 3), (&[0, 3], -2), (&[4, 0], 1)]);
        let v = vec![
            FormalSeries::from_ints(2, 8, a, &[(&[1, 2], 1)]),
            FormalSeries::from_ints(2, 8, a, &[(&[3, 0], 2), (&[0, 4], -1)]),
        ];
        let subs: Vec<_> = (0..2).map(|j| &FormalSeries::var(2, 8, a, j) + &v[j]).collect();
        assert_eq!(f.compose(&subs).unwrap(), f.compose_shift(&v).unwrap());
    }

    #[test]
    fn exact_division() {
        let a = ex();
        let d = FormalSeries::from_ints(2, 10, a, &[(&[1, 1], 1), (&[2, 0], 3)]);
        let q = FormalSeries::from_ints(2, 10, a, &[(&[0, 3], 2), (&[1, 0], -1), (&[2, 2], 5)]);
        let p = &d * &q;
        assert_eq!(p.div_exact(&d).unwrap().unwrap(), q);
        let r = &p + &FormalSeries::var(2, 10, a, 1);
        assert!(r.div_exact(&d).unwrap().is_none());
    }

    #[test]
    fn partial_lowers_cap() {
        let f = FormalSeries::from_ints(2, 5, ex(), &[(&[3, 1], 2)]);
        let d = f.partial(0);
        assert_eq!(d.cap(), 4);
        assert_eq!(d.coeff_of(&[2, 1]), ex().int(6));
    }
}
