//! Polynomial jet diffeomorphisms fixing the origin.
//!
//! A [`JetDiffeo`] `φ` is stored as its component series `φ_k(y)`, read as
//! the change of coordinates `x = φ(y)` from new coordinates `y` to old
//! coordinates `x`. With this reading the pullback `φ*X` is the field `Y`
//! with `Dφ(y)·Y(y) = X(φ(y))`, and `compose(φ, ψ) = φ ∘ ψ` satisfies
//! `(φ ∘ ψ)* = ψ* ∘ φ*`.

use crate::error::{Error, Result};
use crate::io::FieldJson;
use crate::linalg::{self, Matrix};
use crate::scalar::Arith;
use crate::series::{FormalSeries, MultiIndex};

use super::VectorField;

#[derive(Clone, Debug, PartialEq)]
pub struct JetDiffeo {
    map: Vec<FormalSeries>,
}

impl JetDiffeo {
    pub fn identity(n: usize, cap: usize, arith: Arith) -> Self {
        JetDiffeo {
            map: (0..n).map(|j| FormalSeries::var(n, cap, arith, j)).collect(),
        }
    }

    /// `Id + U`; `U` must vanish to order at least 2.
    pub fn id_plus(u: &VectorField) -> Result<Self> {
        if let Some(d) = u.order() {
            if d < 2 {
                return Err(Error::Invalid(format!("Id + U needs ord U >= 2, got {d}")));
            }
        }
        let id = Self::identity(u.n(), u.cap(), u.arith());
        Ok(JetDiffeo {
            map: id.map.iter().zip(u.components()).map(|(a, b)| a + b).collect(),
        })
    }

    /// Linear map `y ↦ M y`.
    pub fn linear(m: &Matrix, cap: usize, arith: Arith) -> Result<Self> {
        let n = m.len();
        let comps = m
            .iter()
            .map(|row| {
                let mut s = FormalSeries::zero(n, cap, arith);
                for (j, c) in row.iter().enumerate() {
                    s.add_term(MultiIndex::unit(j), c.clone());
                }
                s
            })
            .collect();
        Self::from_components(comps)
    }

    /// Any map without constant term and with invertible linear part.
    pub fn from_components(map: Vec<FormalSeries>) -> Result<Self> {
        let f = VectorField::new(map)?;
        if f.components().iter().any(|c| c.order() == Some(0)) {
            return Err(Error::Invalid("diffeomorphism must fix the origin".into()));
        }
        linalg::inverse(&f.linear_part(), f.arith())
            .map_err(|_| Error::Invalid("diffeomorphism with singular linear part".into()))?;
        Ok(JetDiffeo { map: f.into_components() })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn cap(&self) -> usize {
        self.map[0].cap()
    }

    pub fn arith(&self) -> Arith {
        self.map[0].arith()
    }

    pub fn components(&self) -> &[FormalSeries] {
        &self.map
    }

    pub fn as_field(&self) -> VectorField {
        VectorField { comps: self.map.clone() }
    }

    pub fn linear_part(&self) -> Matrix {
        self.as_field().linear_part()
    }

    pub fn is_tangent_to_identity(&self) -> bool {
        linalg::is_identity(&self.linear_part(), self.arith())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n(), self.cap(), self.arith())
    }

    /// `φ − L y`, the part of degree `≥ 2`.
    pub fn nonlinear_part(&self) -> VectorField {
        self.as_field().tail(2)
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &JetDiffeo, inner: &JetDiffeo) -> Result<JetDiffeo> {
        let map = if inner.is_tangent_to_identity() {
            let v = inner.nonlinear_part();
            outer
                .map
                .iter()
                .map(|c| c.compose_id_plus(v.components()))
                .collect::<Result<Vec<_>>>()?
        } else {
            outer.map.iter().map(|c| c.compose(&inner.map)).collect::<Result<Vec<_>>>()?
        };
        Ok(JetDiffeo { map })
    }

    /// Inverse modulo degree `N + 1`, by the fixed point
    /// `ψ = L⁻¹(x − W∘ψ)` where `φ = L y + W`.
    pub fn invert(&self) -> Result<JetDiffeo> {
        let (n, cap, arith) = (self.n(), self.cap(), self.arith());
        let linv = linalg::inverse(&self.linear_part(), arith)?;
        let w = self.nonlinear_part();
        let id = VectorField {
            comps: Self::identity(n, cap, arith).map,
        };
        let mut psi = id.apply_matrix(&linv);
        if w.is_zero() {
            return Ok(JetDiffeo { map: psi.comps });
        }
        // every pass fixes at least one more degree
        for _ in 0..=cap {
            let next = (&id - &w.compose(psi.components())?).apply_matrix(&linv);
            if next == psi {
                break;
            }
            psi = next;
        }
        Ok(JetDiffeo { map: psi.comps })
    }

    /// Image of the coordinate functions under `x = φ(y)`, applied to `X`:
    /// returns `X ∘ φ`.
    fn field_along(&self, x: &VectorField) -> Result<VectorField> {
        if self.is_tangent_to_identity() {
            let v = self.nonlinear_part();
            Ok(x.map_result(|c| c.compose_id_plus(v.components()))?)
        } else {
            x.compose(&self.map)
        }
    }

    /// Pullback `φ*X`: the field `Y` with `Dφ(y)·Y(y) = X(φ(y))`, solved by
    /// the fixed point `Y = L⁻¹(X∘φ − DW·Y)`.
    pub fn pullback(&self, x: &VectorField) -> Result<VectorField> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch(x.n(), self.n()));
        }
        if x.cap() != self.cap() {
            return Err(Error::OrderMismatch(x.cap(), self.cap()));
        }
        let arith = self.arith();
        let linv = linalg::inverse(&self.linear_part(), arith)?;
        let xphi = self.field_along(x)?;
        let w = self.nonlinear_part();
        let mut y = xphi.apply_matrix(&linv);
        if w.is_zero() {
            return Ok(y);
        }
        let n = self.n();
        let dw: Vec<Vec<FormalSeries>> = (0..n)
            .map(|k| (0..n).map(|j| w.comps[k].derivative(j)).collect())
            .collect();
        for _ in 0..=self.cap() {
            let mut rhs = xphi.clone();
            for k in 0..n {
                for j in 0..n {
                    if dw[k][j].is_zero() || y.comps[j].is_zero() {
                        continue;
                    }
                    rhs.comps[k] = &rhs.comps[k] - &(&dw[k][j] * &y.comps[j]);
                }
            }
            let next = rhs.apply_matrix(&linv);
            if next == y {
                break;
            }
            y = next;
        }
        Ok(y)
    }

    pub fn to_json(&self) -> FieldJson {
        let mut j = self.as_field().to_json();
        j.is_diffeo = Some(true);
        j
    }

    pub fn from_json(j: &FieldJson, arith: Arith) -> Result<Self> {
        if j.is_diffeo != Some(true) {
            return Err(Error::Invalid("expected a diffeomorphism (\"is_diffeo\": true)".into()));
        }
        Self::from_components(VectorField::from_json(j, arith)?.into_components())
    }
}

impl VectorField {
    fn map_result(&self, f: impl Fn(&FormalSeries) -> Result<FormalSeries>) -> Result<VectorField> {
        Ok(VectorField {
            comps: self.comps.iter().map(f).collect::<Result<_>>()?,
        })
    }
}

/// `X + [U,X] + ½[U,[U,X]] + ⋯`, stopped when a term vanishes (it must, for
/// `ord U ≥ 2`, once its order passes the cap).
pub fn exp_conjugate(u: &VectorField, x: &VectorField) -> Result<VectorField> {
    if let Some(d) = u.order() {
        if d < 2 {
            return Err(Error::Invalid(format!("exp_conjugate needs ord U >= 2, got {d}")));
        }
    }
    let arith = x.arith();
    let mut acc = x.clone();
    let mut term = x.clone();
    let mut k: i64 = 1;
    loop {
        term = u.bracket(&term)?.scale(&arith.ratio(1, k));
        if term.is_zero() {
            break;
        }
        acc = &acc + &term;
        k += 1;
    }
    Ok(acc)
}

/// Time-one flow of `U` as a jet: `Σ_k L_U^k(id)/k!`.
pub fn flow_map(u: &VectorField) -> Result<JetDiffeo> {
    if let Some(d) = u.order() {
        if d < 2 {
            return Err(Error::Invalid(format!("flow_map needs ord U >= 2, got {d}")));
        }
    }
    let (n, cap, arith) = (u.n(), u.cap(), u.arith());
    let mut comps = Vec::with_capacity(n);
    for j in 0..n {
        let mut term = FormalSeries::var(n, cap, arith, j);
        let mut acc = term.clone();
        let mut k: i64 = 1;
        loop {
            term = u.lie_derivative(&term).scale(&arith.ratio(1, k));
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
            k += 1;
        }
        comps.push(acc);
    }
    JetDiffeo::from_components(comps)
}
