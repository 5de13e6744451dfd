//! Degree-by-degree Poincaré–Dulac normalization against a diagonal linear
//! part, and the linear change of coordinates that makes a triangular
//! linear part diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{JetDiffeo, VectorField};
use crate::linalg::{self, Matrix};
use crate::scalar::{Arith, Scalar};
use crate::series::MultiIndex;

/// Which solution of `[s, U_k] = P_k` is taken at each degree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `U_k` has no component on the kernel of `ad s`.
    #[default]
    ZeroOnKernel,
}

/// A monomial kept in the normal form because its weight was within the
/// float tolerance of zero without being exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearResonance {
    pub degree: usize,
    pub monomial: Vec<u32>,
    /// 0-based component index.
    pub component: usize,
    pub weight_abs: f64,
}

#[derive(Clone, Debug)]
pub struct PoincareDulac {
    pub nf: VectorField,
    /// `pullback(phi, X) = nf`.
    pub phi: JetDiffeo,
    pub near_resonances: Vec<NearResonance>,
}

/// Normalize `x` up to degree `order` against the diagonal linear field `s`.
pub fn poincare_dulac_normalize(x: &VectorField, s: &VectorField, order: usize, gauge: Gauge) -> Result<PoincareDulac> {
    let Gauge::ZeroOnKernel = gauge;
    let eig = s
        .diagonal()
        .ok_or_else(|| Error::LinearPart("the reference linear field is not diagonal".into()))?;
    if s.max_degree().is_some_and(|d| d > 1) {
        return Err(Error::LinearPart("the reference field is not linear".into()));
    }
    if x.n() != s.n() {
        return Err(Error::DimensionMismatch(x.n(), s.n()));
    }
    if order > x.cap() {
        return Err(Error::OrderMismatch(order, x.cap()));
    }
    let arith = x.arith();
    let want = s.with_cap(x.cap()).to_arith(arith)?;
    if x.jet(1) != want {
        return Err(Error::LinearPart("linear part of X differs from s".into()));
    }
    let mut fields = vec![x.with_cap(order)];
    let mut phi = JetDiffeo::identity(x.n(), order, arith);
    let mut near = Vec::new();
    normalize_degrees(&mut fields, &eig, 2, order, &mut phi, &mut near)?;
    Ok(PoincareDulac {
        nf: fields.pop().expect("one field"),
        phi,
        near_resonances: near,
    })
}

/// The `U_k` removing the nonzero-weight part of the homogeneous field `p`
/// (weights taken against the eigenvalues `eig`).
pub(crate) fn homological_solve(p: &VectorField, eig: &[Scalar], near: &mut Vec<NearResonance>) -> VectorField {
    let (n, cap, arith) = (p.n(), p.cap(), p.arith());
    let mut u = VectorField::zero(n, cap, arith);
    for (i, comp) in p.components().iter().enumerate() {
        for (q, c) in comp.terms() {
            let alpha = weight(q, i, eig, arith);
            if arith.is_zero(&alpha) {
                if !alpha.is_structural_zero() {
                    near.push(NearResonance {
                        degree: q.degree(),
                        monomial: q.to_vec(n),
                        component: i,
                        weight_abs: alpha.abs(),
                    });
                }
                continue;
            }
            u = &u + &VectorField::monomial(n, cap, arith, *q, i, c / &alpha);
        }
    }
    u
}

fn weight(q: &MultiIndex, i: usize, eig: &[Scalar], arith: Arith) -> Scalar {
    let mut a = -&eig[i];
    for (k, e) in eig.iter().enumerate() {
        let qk = q.get(k);
        if qk != 0 {
            a += &(e * &arith.int(qk as i64));
        }
    }
    a
}

/// Normalize `fields[0]` on degrees `lo..=hi`, conjugating every field by
/// the same maps and accumulating them into `phi`.
pub(crate) fn normalize_degrees(
    fields: &mut [VectorField],
    eig: &[Scalar],
    lo: usize,
    hi: usize,
    phi: &mut JetDiffeo,
    near: &mut Vec<NearResonance>,
) -> Result<()> {
    for k in lo.max(2)..=hi {
        let u = homological_solve(&fields[0].homogeneous(k), eig, near);
        if u.is_zero() {
            continue;
        }
        let step = JetDiffeo::id_plus(&u)?;
        for f in fields.iter_mut() {
            *f = step.pullback(f)?;
        }
        *phi = JetDiffeo::compose(phi, &step)?;
    }
    Ok(())
}

/// Linear map `x = P u` making the linear part of `x` diagonal, for linear
/// parts that are already diagonal or triangular with distinct diagonal
/// entries. Returns `P` and the diagonal.
pub fn diagonalize_linear_part(x: &VectorField) -> Result<(JetDiffeo, Vec<Scalar>)> {
    let (n, cap, arith) = (x.n(), x.cap(), x.arith());
    if let Some(eig) = x.diagonal() {
        return Ok((JetDiffeo::identity(n, cap, arith), eig));
    }
    let m = x.linear_part();
    let lower = (0..n).all(|i| (i + 1..n).all(|j| arith.is_zero(&m[i][j])));
    let upper = (0..n).all(|i| (0..i).all(|j| arith.is_zero(&m[i][j])));
    if !lower && !upper {
        return Err(Error::LinearPart("only triangular linear parts are diagonalized".into()));
    }
    let eig: Vec<Scalar> = (0..n).map(|i| m[i][i].clone()).collect();
    for i in 0..n {
        for j in 0..i {
            if arith.approx_eq(&eig[i], &eig[j]) {
                return Err(Error::LinearPart("repeated eigenvalue on a triangular linear part".into()));
            }
        }
    }
    // columns of P are eigenvectors, scaled to a unit diagonal; for a
    // triangular matrix the i-th eigenvector has a nonzero i-th entry
    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for (i, e) in eig.iter().enumerate() {
        let shifted: Matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { &m[i][j] - e } else { m[i][j].clone() }).collect())
            .collect();
        let v = linalg::null_vector(&shifted, arith)
            .ok_or_else(|| Error::LinearPart("eigenvector not found".into()))?;
        let pivot = v[i].clone();
        cols.push(v.iter().map(|c| c / &pivot).collect());
    }
    let p = linalg::transpose(&cols);
    Ok((JetDiffeo::linear(&p, cap, arith)?, eig))
}
