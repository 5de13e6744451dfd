//! Vector fields as `n`-tuples of series, Lie brackets and jets.
//!
//! All components of a field share the dimension, cap and arithmetic mode.
//! For fields vanishing at the origin the truncated bracket is exact modulo
//! degree `N + 1`; this is what makes order bookkeeping in the normalizer
//! work without raising caps.

mod diffeo;

pub use diffeo::{exp_conjugate, flow_map, JetDiffeo};

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::io::{series_from_json, series_to_json, FieldJson};
use crate::linalg::Matrix;
use crate::scalar::{Arith, Scalar};
use crate::series::{FormalSeries, MultiIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<FormalSeries>,
}

impl VectorField {
    pub fn new(comps: Vec<FormalSeries>) -> Result<Self> {
        let Some(first) = comps.first() else {
            return Err(Error::Invalid("vector field with no components".into()));
        };
        if first.n() != comps.len() {
            return Err(Error::DimensionMismatch(first.n(), comps.len()));
        }
        for c in &comps {
            if c.n() != first.n() {
                return Err(Error::DimensionMismatch(first.n(), c.n()));
            }
            if c.cap() != first.cap() {
                return Err(Error::OrderMismatch(first.cap(), c.cap()));
            }
            if c.arith() != first.arith() {
                return Err(Error::ArithMismatch);
            }
        }
        Ok(VectorField { comps })
    }

    pub fn zero(n: usize, cap: usize, arith: Arith) -> Self {
        VectorField {
            comps: (0..n).map(|_| FormalSeries::zero(n, cap, arith)).collect(),
        }
    }

    /// `Σ λ_k x_k ∂_k`.
    pub fn diagonal_linear(lambda: &[Scalar], cap: usize, arith: Arith) -> Self {
        let n = lambda.len();
        VectorField {
            comps: lambda
                .iter()
                .enumerate()
                .map(|(k, l)| FormalSeries::monomial(n, cap, arith, MultiIndex::unit(k), l.clone()))
                .collect(),
        }
    }

    /// The field `c·x^q ∂_i`.
    pub fn monomial(n: usize, cap: usize, arith: Arith, q: MultiIndex, i: usize, c: Scalar) -> Self {
        let mut f = Self::zero(n, cap, arith);
        f.comps[i].add_term(q, c);
        f
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn cap(&self) -> usize {
        self.comps[0].cap()
    }

    pub fn arith(&self) -> Arith {
        self.comps[0].arith()
    }

    pub fn components(&self) -> &[FormalSeries] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &FormalSeries {
        &self.comps[i]
    }

    pub fn into_components(self) -> Vec<FormalSeries> {
        self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Minimum component order; `None` for the zero field.
    pub fn order(&self) -> Option<usize> {
        self.comps.iter().filter_map(|c| c.order()).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.comps.iter().filter_map(|c| c.max_degree()).max()
    }

    /// `M[k][j]` = coefficient of `x_j` in component `k`.
    pub fn linear_part(&self) -> Matrix {
        let n = self.n();
        self.comps
            .iter()
            .map(|c| (0..n).map(|j| c.coeff(&MultiIndex::unit(j))).collect())
            .collect()
    }

    /// Diagonal of the linear part if the linear part is diagonal.
    pub fn diagonal(&self) -> Option<Vec<Scalar>> {
        let m = self.linear_part();
        let a = self.arith();
        for (i, row) in m.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if i != j && !a.is_zero(c) {
                    return None;
                }
            }
        }
        Some((0..self.n()).map(|i| m[i][i].clone()).collect())
    }

    pub fn map(&self, f: impl Fn(&FormalSeries) -> FormalSeries) -> Self {
        VectorField {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn jet(&self, k: usize) -> Self {
        self.map(|c| c.jet(k))
    }

    pub fn homogeneous(&self, k: usize) -> Self {
        self.map(|c| c.homogeneous(k))
    }

    pub fn tail(&self, k: usize) -> Self {
        self.map(|c| c.tail(k))
    }

    pub fn degree_range(&self, lo: usize, hi: usize) -> Self {
        self.map(|c| c.degree_range(lo, hi))
    }

    pub fn with_cap(&self, cap: usize) -> Self {
        self.map(|c| c.with_cap(cap))
    }

    pub fn to_arith(&self, arith: Arith) -> Result<Self> {
        Ok(VectorField {
            comps: self.comps.iter().map(|c| c.to_arith(arith)).collect::<Result<_>>()?,
        })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|s| s.scale(c))
    }

    /// `f · X`.
    pub fn mul_function(&self, f: &FormalSeries) -> Self {
        self.map(|s| f * s)
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(VectorField {
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(VectorField {
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect(),
        })
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.n() != o.n() {
            return Err(Error::DimensionMismatch(self.n(), o.n()));
        }
        if self.cap() != o.cap() {
            return Err(Error::OrderMismatch(self.cap(), o.cap()));
        }
        if self.arith() != o.arith() {
            return Err(Error::ArithMismatch);
        }
        Ok(())
    }

    /// `X(f) = Σ_j X_j ∂f/∂x_j`, cap unchanged (exact when `X` vanishes at 0).
    pub fn lie_derivative(&self, f: &FormalSeries) -> FormalSeries {
        let mut acc = FormalSeries::zero(f.n(), f.cap(), f.arith());
        for (j, xj) in self.comps.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            let d = f.derivative(j);
            if !d.is_zero() {
                acc = &acc + &(xj * &d);
            }
        }
        acc
    }

    /// `[X, Y]_k = Σ_j (X_j ∂_j Y_k − Y_j ∂_j X_k)`.
    pub fn bracket(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let comps = (0..self.n())
            .map(|k| &self.lie_derivative(&o.comps[k]) - &o.lie_derivative(&self.comps[k]))
            .collect();
        Ok(VectorField { comps })
    }

    /// `M · X` for a constant matrix `M`.
    pub fn apply_matrix(&self, m: &Matrix) -> Self {
        let n = self.n();
        VectorField {
            comps: (0..n)
                .map(|k| {
                    let mut acc = FormalSeries::zero(n, self.cap(), self.arith());
                    for j in 0..n {
                        if !self.arith().is_zero(&m[k][j]) {
                            acc = &acc + &self.comps[j].scale(&m[k][j]);
                        }
                    }
                    acc
                })
                .collect(),
        }
    }

    /// Substitute the same map into every component.
    pub fn compose(&self, subs: &[FormalSeries]) -> Result<Self> {
        Ok(VectorField {
            comps: self.comps.iter().map(|c| c.compose(subs)).collect::<Result<_>>()?,
        })
    }

    pub fn eq_mod(&self, o: &Self, k: usize) -> bool {
        self.n() == o.n() && self.comps.iter().zip(&o.comps).all(|(a, b)| a.eq_mod(b, k))
    }

    /// Lowest degree where the two fields differ, if any.
    pub fn first_difference(&self, o: &Self) -> Option<usize> {
        self.comps
            .iter()
            .zip(&o.comps)
            .filter_map(|(a, b)| a.first_difference(b))
            .min()
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            n: self.n(),
            order_cap: self.cap(),
            components: self.comps.iter().map(series_to_json).collect(),
            is_diffeo: None,
        }
    }

    pub fn from_json(j: &FieldJson, arith: Arith) -> Result<Self> {
        if j.components.len() != j.n {
            return Err(Error::DimensionMismatch(j.n, j.components.len()));
        }
        let comps = j
            .components
            .iter()
            .map(|c| {
                if c.order != j.order_cap {
                    return Err(Error::OrderMismatch(j.order_cap, c.order));
                }
                series_from_json(c, arith)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }
}

impl<'a> Add<&'a VectorField> for &'a VectorField {
    type Output = VectorField;
    fn add(self, o: &VectorField) -> VectorField {
        self.checked_add(o).expect("field add: incompatible operands")
    }
}

impl<'a> Sub<&'a VectorField> for &'a VectorField {
    type Output = VectorField;
    fn sub(self, o: &VectorField) -> VectorField {
        self.checked_sub(o).expect("field sub: incompatible operands")
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        self.map(|c| -c)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.comps.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "d/dx{}: {}", k + 1, c)?;
        }
        Ok(())
    }
}
