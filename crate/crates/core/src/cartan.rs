//! Decomposition of normal forms over the first-integral ring and the
//! Cartan-type certificate.
//!
//! A normal form `NF_i` lies in the module spanned by the basis fields
//! `S_j = S(g_j)` when `NF_i = Σ_j a_ij S_j` with every `a_ij` a first
//! integral of the action. The family is of Cartan type when the matrix of
//! junior parts of `(a_ij)` has a nonzero determinant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{self, SeriesMatrix};
use crate::series::{FormalSeries, MultiIndex};
use crate::torus::LieMorphism;

#[derive(Clone, Debug)]
pub struct NormalFormDecomposition {
    /// `a[i][j]`, known up to degree `N − 1` (the cap is kept at `N`).
    pub a: SeriesMatrix,
    pub basis: Vec<VectorField>,
    /// Cofactor transpose, `C·A = det(A)·Id`.
    pub cofactor: SeriesMatrix,
    pub det: FormalSeries,
    /// `d_i = ord NF_i`.
    pub orders: Vec<usize>,
}

/// Monomial basis of the first-integral ring up to a degree.
#[derive(Clone, Debug)]
pub struct FirstIntegralRing {
    pub n: usize,
    pub degree: usize,
    pub monomials: Vec<MultiIndex>,
}

impl FirstIntegralRing {
    pub fn new(s: &LieMorphism, degree: usize) -> Self {
        let monomials = MultiIndex::all_in_range(s.n(), 0, degree)
            .into_iter()
            .filter(|q| s.is_first_integral_monomial(q))
            .collect();
        FirstIntegralRing {
            n: s.n(),
            degree,
            monomials,
        }
    }

    pub fn contains(&self, f: &FormalSeries) -> bool {
        f.terms()
            .all(|(q, _)| q.degree() > self.degree || self.monomials.binary_search(q).is_ok())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CartanCertificate {
    pub cartan: bool,
    pub orders: Vec<usize>,
    /// `Σ (d_i − 1)`.
    pub predicted_ord_det: usize,
    /// Order of `det A` as computed; `None` if it vanishes to the cap.
    pub ord_det: Option<usize>,
    /// Least `p` with `det A_p ≢ 0`, `A_p = (J^{p+d_i−2} a_ij)`.
    pub p0: Option<usize>,
}

impl NormalFormDecomposition {
    pub fn l(&self) -> usize {
        self.a.len()
    }

    /// `A_p = (J^{p+d_i−2}(a_ij))`; `A_1` is the junior matrix.
    pub fn truncated_matrix(&self, p: usize) -> SeriesMatrix {
        self.a
            .iter()
            .zip(&self.orders)
            .map(|(row, &d)| row.iter().map(|x| x.jet((p + d).saturating_sub(2))).collect())
            .collect()
    }

    pub fn junior(&self) -> SeriesMatrix {
        self.truncated_matrix(1)
    }

    fn one(&self) -> FormalSeries {
        let a = &self.a[0][0];
        FormalSeries::one(a.n(), a.cap(), a.arith())
    }

    /// `Σ_j a_ij S_j`.
    pub fn recombine(&self, i: usize) -> VectorField {
        let mut acc = self.basis[0].mul_function(&self.a[i][0]);
        for j in 1..self.l() {
            acc = &acc + &self.basis[j].mul_function(&self.a[i][j]);
        }
        acc
    }

    pub fn certificate(&self) -> CartanCertificate {
        let one = self.one();
        let predicted: usize = self.orders.iter().map(|d| d - 1).sum();
        let cap = one.cap();
        let mut p0 = None;
        for p in 1..=cap.max(1) {
            if !linalg::series_det(&self.truncated_matrix(p), &one).is_zero() {
                p0 = Some(p);
                break;
            }
        }
        let junior_det = linalg::series_det(&self.junior(), &one);
        CartanCertificate {
            cartan: !junior_det.is_zero(),
            orders: self.orders.clone(),
            predicted_ord_det: predicted,
            ord_det: self.det.order(),
            p0,
        }
    }
}

/// Solve `NF_i = Σ_j a_ij S_j` with first-integral coefficients.
pub fn decompose_over_module(nf: &[VectorField], s: &LieMorphism) -> Result<NormalFormDecomposition> {
    let l = s.l();
    if nf.len() != l {
        return Err(Error::Invalid(format!("{} fields for an action of rank {l}", nf.len())));
    }
    let n = s.n();
    let first = &nf[0];
    let (cap, arith) = (first.cap(), first.arith());
    let linv = s.minor_inverse();
    let cols = s.minor_cols();
    let mut a = Vec::with_capacity(l);
    let mut orders = Vec::with_capacity(l);
    for (i, x) in nf.iter().enumerate() {
        if x.n() != n {
            return Err(Error::DimensionMismatch(x.n(), n));
        }
        // component k must be x_k · g_ik
        let mut g = Vec::with_capacity(n);
        for k in 0..n {
            let mut gk = FormalSeries::zero(n, cap, arith);
            for (q, c) in x.component(k).terms() {
                let Some(p) = q.dec(k) else {
                    return Err(Error::NotInModule(format!(
                        "field {}: term {q:?} in component {} is not divisible by x{}",
                        i + 1,
                        k + 1,
                        k + 1
                    )));
                };
                gk.add_term(p, c.clone());
            }
            g.push(gk);
        }
        let row: Vec<FormalSeries> = (0..l)
            .map(|j| {
                let mut acc = FormalSeries::zero(n, cap, arith);
                for (r, &k) in cols.iter().enumerate() {
                    if !arith.is_zero(&linv[j][r]) {
                        acc = &acc + &g[k].scale(&linv[j][r]);
                    }
                }
                acc
            })
            .collect();
        for k in 0..n {
            let mut want = FormalSeries::zero(n, cap, arith);
            for (j, aij) in row.iter().enumerate() {
                want = &want + &aij.scale(&s.lambda()[j][k]);
            }
            if let Some(d) = want.first_difference(&g[k]) {
                return Err(Error::NotInModule(format!(
                    "field {}: component {} is not a combination of the basis fields (degree {})",
                    i + 1,
                    k + 1,
                    d + 1
                )));
            }
        }
        for (j, aij) in row.iter().enumerate() {
            if let Some((q, _)) = aij.terms().find(|(q, _)| !s.is_first_integral_monomial(q)) {
                return Err(Error::NotInModule(format!(
                    "field {}: coefficient a_{}{} has non-invariant monomial {q:?}",
                    i + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
        let d = row
            .iter()
            .filter_map(|x| x.order())
            .min()
            .ok_or_else(|| Error::NotInModule(format!("field {} vanishes identically", i + 1)))?;
        orders.push(d + 1);
        a.push(row);
    }
    let one = FormalSeries::one(n, cap, arith);
    let det = linalg::series_det(&a, &one);
    let cofactor = linalg::series_adjugate(&a, &one);
    Ok(NormalFormDecomposition {
        a,
        basis: s.basis_fields(cap),
        cofactor,
        det,
        orders,
    })
}

/// Cartan-type certificate with order diagnostics.
pub fn certify_cartan(dec: &NormalFormDecomposition) -> CartanCertificate {
    dec.certificate()
}

/// Outcome of the auto-normalization check for a commuting pair.
#[derive(Clone, Debug, Serialize)]
pub struct AutoNormalization {
    pub order_y: usize,
    /// `Ord(Y) + k − 1`.
    pub claimed_order: usize,
    pub holds: bool,
}

/// For `X` regular with linear part `s` and normalized to order `k`, and
/// `Y` commuting with `X`: checks `[s, J^{Ord(Y)+k−1}(Y)] = 0`.
pub fn check_auto_normalization(
    x: &VectorField,
    y: &VectorField,
    s: &VectorField,
    k: usize,
) -> Result<AutoNormalization> {
    let cap = x.cap();
    let comm = x.bracket(y)?;
    if let Some(d) = comm.order() {
        return Err(Error::CommutationFailure(format!("[X, Y] has a term of degree {d}")));
    }
    if !s.bracket(&x.jet(k))?.is_zero() {
        return Err(Error::Invalid(format!("X is not normalized to order {k}")));
    }
    let order_y = y.order().ok_or_else(|| Error::Invalid("Y vanishes identically".into()))?;
    let claimed = (order_y + k - 1).min(cap);
    let holds = s.bracket(&y.jet(claimed))?.is_zero();
    Ok(AutoNormalization {
        order_y,
        claimed_order: claimed,
        holds,
    })
}
