//! The degree-doubling step for a Cartan-type family.
//!
//! With `X_i = NF_i + R_i`, `NF_i = Σ_j a_ij S_j` normalized to order
//! `m + d_i − 1`, the step finds the polynomial `U` of degrees `m+1..=2m`
//! with `J^{2m+d_i−1}(R_i + [U, NF_i]) = 0` on every nonzero weight, then
//! conjugates by `Id + U`.
//!
//! Writing `[NF_i, U_α] = Σ_j a_ij α(g_j) U_α − Σ_j U_α(a_ij) S_j` and
//! multiplying the system by the cofactor transpose `C` gives, for any row
//! `i`, `det²·α(g_i)²·U_α = α(g_i)·det·G_i + D̃_i(G_i)` where
//! `G_i = Σ_p c_ip (F_p + R'_p)` and `D̃_i(V) = Σ_q c_iq Σ_r V(a_qr) S_r`.
//! `R'_p`, the part of `[NF_p, U_α]` beyond degree `2m + d_p − 1`, only
//! enters above the degrees that fix `U`; this is checked on every step and
//! corrected by re-solving when it fails.

use serde::Serialize;

use crate::cartan::{decompose_over_module, NormalFormDecomposition};
use crate::error::{Error, Result};
use crate::field::{JetDiffeo, VectorField};
use crate::linalg::{self, SeriesMatrix};
use crate::scalar::Scalar;
use crate::series::FormalSeries;
use crate::torus::{LieMorphism, WeightKey};

/// Re-solves allowed when the high remainder reaches the solved degrees.
const MAX_REFINEMENTS: usize = 4;

#[derive(Clone, Debug)]
pub struct NewtonState {
    /// Current conjugated family, at the working cap `N`.
    pub fields: Vec<VectorField>,
    /// `d_i = ord X_i`.
    pub orders: Vec<usize>,
    /// Certified order: `X_i` is normalized to order `m + d_i − 1`.
    pub m: usize,
    /// Accumulated map with `pullback(psi, original_i) = fields[i]`.
    pub psi: JetDiffeo,
    pub reports: Vec<StepReport>,
    /// Data of the last step, kept for the estimate diagnostics.
    pub last: Option<SolveRecord>,
}

/// One weight space of the last correction.
#[derive(Clone, Debug)]
pub struct BucketRecord {
    pub key: WeightKey,
    /// `α(g_j)` for each basis element.
    pub weight: Vec<Scalar>,
    /// `argmax_j |α(g_j)|`.
    pub i_star: usize,
    pub u: VectorField,
    /// `R_{i,α}` for each member of the family.
    pub remainders: Vec<VectorField>,
}

#[derive(Clone, Debug)]
pub struct SolveRecord {
    pub m: usize,
    pub orders: Vec<usize>,
    /// Normal-form parts before the step.
    pub nf: Vec<VectorField>,
    pub decomposition: NormalFormDecomposition,
    pub buckets: Vec<BucketRecord>,
}

/// Observed orders of the remainder contributions after multiplying by `C`.
#[derive(Clone, Debug, Serialize)]
pub struct RestOrders {
    /// `min_i ord(Σ_p c_ip R'_p)`, `None` when it vanishes below the work cap.
    pub first: Option<usize>,
    pub first_required: usize,
    /// `min_i ord(D̃_i(Σ_p c_ip R'_p))`.
    pub second: Option<usize>,
    pub second_required: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub m: usize,
    pub new_m: usize,
    pub orders: Vec<usize>,
    pub ord_det: Option<usize>,
    pub work_cap: usize,
    /// Number of nonzero weights in the correction.
    pub weights: usize,
    pub u_order: Option<usize>,
    pub u_degree: Option<usize>,
    pub rest: RestOrders,
    pub refinements: usize,
    pub nilpotent: bool,
    pub residual_zero: bool,
    pub normalized: bool,
}

impl NewtonState {
    /// A state for a family already normalized to order `m`.
    pub fn new(fields: Vec<VectorField>, m: usize, psi: JetDiffeo) -> Result<Self> {
        let orders = fields
            .iter()
            .enumerate()
            .map(|(i, f)| f.order().ok_or_else(|| Error::Invalid(format!("field {} vanishes", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        if m == 0 {
            return Err(Error::Invalid("normalization order must be positive".into()));
        }
        Ok(NewtonState {
            fields,
            orders,
            m,
            psi,
            reports: Vec::new(),
            last: None,
        })
    }

    pub fn cap(&self) -> usize {
        self.fields[0].cap()
    }

    /// `NF_i^{m+d_i−1}`.
    pub fn nf(&self, i: usize) -> VectorField {
        self.fields[i].jet(self.m + self.orders[i] - 1)
    }

    /// `R_i^{m+d_i}`.
    pub fn remainder(&self, i: usize) -> VectorField {
        self.fields[i].tail(self.m + self.orders[i])
    }

    /// Whether every `NF_i` commutes with the action.
    pub fn is_normalized(&self, s: &LieMorphism) -> bool {
        (0..self.fields.len()).all(|i| s.nonzero_weight_part(&self.nf(i)).is_zero())
    }

    /// Whether another step fits below the cap.
    pub fn can_step(&self) -> bool {
        let dmax = self.orders.iter().copied().max().unwrap_or(1);
        2 * self.m + dmax - 1 <= self.cap()
    }
}

/// Index of the basis element where the weight is largest in modulus.
fn i_star(weight: &[Scalar]) -> usize {
    let mut best = 0;
    for (j, w) in weight.iter().enumerate() {
        if w.abs() > weight[best].abs() {
            best = j;
        }
    }
    best
}

struct Solver<'a> {
    s: &'a LieMorphism,
    m: usize,
    orders: &'a [usize],
    a: SeriesMatrix,
    c: SeriesMatrix,
    det: FormalSeries,
    det2: FormalSeries,
    lead: FormalSeries,
    ord_det: usize,
    basis: Vec<VectorField>,
    nf: Vec<VectorField>,
}

impl Solver<'_> {
    fn l(&self) -> usize {
        self.a.len()
    }

    /// `D_q(V) = Σ_r V(a_qr) S_r`.
    fn d_op(&self, q: usize, v: &VectorField) -> VectorField {
        let mut acc = VectorField::zero(v.n(), v.cap(), v.arith());
        for r in 0..self.l() {
            let f = v.lie_derivative(&self.a[q][r]);
            if !f.is_zero() {
                acc = &acc + &self.basis[r].mul_function(&f);
            }
        }
        acc
    }

    /// `D̃_i(V) = Σ_q c_iq D_q(V)`.
    fn d_tilde(&self, i: usize, v: &VectorField) -> VectorField {
        let mut acc = VectorField::zero(v.n(), v.cap(), v.arith());
        for q in 0..self.l() {
            if self.c[i][q].is_zero() {
                continue;
            }
            acc = &acc + &self.d_op(q, v).mul_function(&self.c[i][q]);
        }
        acc
    }

    /// `Σ_p c_ip V_p`.
    fn c_row(&self, i: usize, v: &[VectorField]) -> VectorField {
        let mut acc = VectorField::zero(v[0].n(), v[0].cap(), v[0].arith());
        for (p, vp) in v.iter().enumerate() {
            if !self.c[i][p].is_zero() && !vp.is_zero() {
                acc = &acc + &vp.mul_function(&self.c[i][p]);
            }
        }
        acc
    }

    /// Terms of nonzero weight whose `i*` is `i`, each divided by `α(g_i)^e`.
    fn group_part(&self, v: &VectorField, i: usize, e: u32) -> VectorField {
        let arith = v.arith();
        let comps = v
            .components()
            .iter()
            .enumerate()
            .map(|(k, comp)| {
                let mut out = FormalSeries::zero(comp.n(), comp.cap(), arith);
                for (q, c) in comp.terms() {
                    let w = self.s.weight_of(q, k);
                    if w.is_zero(arith) || i_star(&w.coeffs) != i {
                        continue;
                    }
                    out.add_term(*q, c * &w.coeffs[i].pow(e).recip());
                }
                out
            })
            .collect();
        VectorField::new(comps).expect("same shape")
    }

    /// Solve for `U` given the right-hand sides `data_p` (degrees up to the
    /// work cap), grouping weights by `i*`.
    fn solve(&self, data: &[VectorField]) -> Result<VectorField> {
        let l = self.l();
        let first = &data[0];
        let mut u = VectorField::zero(first.n(), first.cap(), first.arith());
        for i in 0..l {
            let d1: Vec<VectorField> = data.iter().map(|v| self.group_part(v, i, 1)).collect();
            if d1.iter().all(|v| v.is_zero()) {
                continue;
            }
            let d2: Vec<VectorField> = data.iter().map(|v| self.group_part(v, i, 2)).collect();
            let g1 = self.c_row(i, &d1);
            let g2 = self.c_row(i, &d2);
            let rhs = &g1.mul_function(&self.det) + &self.d_tilde(i, &g2);
            u = &u + &self.divide_through(&rhs)?;
        }
        Ok(u)
    }

    /// Triangular solve of `det²·U = rhs` for `U` of degrees `m+1..=2m`,
    /// modulo degree `2m + 2·ord(det) + 1`.
    fn divide_through(&self, rhs: &VectorField) -> Result<VectorField> {
        let o2 = 2 * self.ord_det;
        let mut rem = rhs.clone();
        let mut u = VectorField::zero(rhs.n(), rhs.cap(), rhs.arith());
        for k in self.m + 1..=2 * self.m {
            let target = rem.homogeneous(k + o2);
            if target.is_zero() {
                continue;
            }
            let mut comps = Vec::with_capacity(target.n());
            for (j, t) in target.components().iter().enumerate() {
                if t.is_zero() {
                    comps.push(t.clone());
                    continue;
                }
                let q = t.div_exact(&self.lead)?.ok_or_else(|| {
                    Error::SolveInconsistent(format!(
                        "degree {} of component {} is not divisible by the leading form of det²",
                        k + o2,
                        j + 1
                    ))
                })?;
                comps.push(q);
            }
            let uk = VectorField::new(comps)?;
            rem = &rem - &uk.mul_function(&self.det2);
            u = &u + &uk;
        }
        if let Some(d) = rem.jet(2 * self.m + o2).order() {
            return Err(Error::SolveInconsistent(format!(
                "residual of the multiplied-through equation at degree {d}"
            )));
        }
        Ok(u)
    }

    /// `R'_p`: the part of `[NF_p, U]` beyond degree `2m + d_p − 1`.
    fn high_remainders(&self, u: &VectorField) -> Result<Vec<VectorField>> {
        self.nf
            .iter()
            .zip(self.orders)
            .map(|(nf, d)| Ok(nf.bracket(u)?.tail(2 * self.m + d)))
            .collect()
    }

    fn rest_orders(&self, r: &[VectorField]) -> RestOrders {
        let l = self.l();
        let mut first = None::<usize>;
        let mut second = None::<usize>;
        let min_opt = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        for i in 0..l {
            let g = self.c_row(i, r);
            first = min_opt(first, g.order());
            second = min_opt(second, self.d_tilde(i, &g).order());
        }
        let first_required = 2 * self.m + 1 + self.ord_det;
        let second_required = 2 * self.m + 1 + 2 * self.ord_det;
        let holds = first.is_none_or(|o| o >= first_required) && second.is_none_or(|o| o >= second_required);
        RestOrders {
            first,
            first_required,
            second,
            second_required,
            holds,
        }
    }
}

/// One degree-doubling step: from normalization order `m` to `2m`.
pub fn newton_step(state: &NewtonState, s: &LieMorphism) -> Result<NewtonState> {
    let l = s.l();
    if state.fields.len() != l {
        return Err(Error::Invalid(format!("{} fields for an action of rank {l}", state.fields.len())));
    }
    let (n, cap, arith) = (state.fields[0].n(), state.cap(), state.fields[0].arith());
    let m = state.m;
    if !state.can_step() {
        return Err(Error::Invalid(format!("a step from order {m} needs jets beyond the cap {cap}")));
    }
    let nf: Vec<VectorField> = (0..l).map(|i| state.nf(i)).collect();
    if !state.is_normalized(s) {
        return Err(Error::Invalid(format!("family is not normalized to order {m}")));
    }
    let dec = decompose_over_module(&nf, s)?;
    let cert = dec.certificate();
    if !cert.cartan {
        return Err(Error::CartanViolation("junior parts are not free (det of the junior matrix vanishes)".into()));
    }
    if let Some(p0) = cert.p0 {
        if m < p0 {
            return Err(Error::Invalid(format!("order {m} is below p0 = {p0}")));
        }
    }
    let ord_det = dec
        .det
        .order()
        .ok_or_else(|| Error::CartanViolation("det A vanishes".into()))?;
    let orders = dec.orders.clone();

    // all data below are polynomials; raising the cap keeps them exact
    let w = 2 * m + 2 * ord_det;
    let a: SeriesMatrix = dec.a.iter().map(|row| row.iter().map(|x| x.with_cap(w)).collect()).collect();
    let one = FormalSeries::one(n, w, arith);
    let det = linalg::series_det(&a, &one);
    let c = linalg::series_adjugate(&a, &one);
    let det2 = &det * &det;
    let lead = det2.homogeneous(2 * ord_det);
    let solver = Solver {
        s,
        m,
        orders: &orders,
        a,
        c,
        det,
        det2,
        lead,
        ord_det,
        basis: s.basis_fields(w),
        nf: nf.iter().map(|x| x.with_cap(w)).collect(),
    };

    let f: Vec<VectorField> = (0..l)
        .map(|p| state.remainder(p).jet(2 * m + orders[p] - 1).with_cap(w))
        .collect();
    let mut u = solver.solve(&f)?;
    let rest = solver.rest_orders(&solver.high_remainders(&u)?);
    let mut refinements = 0;
    if !rest.holds {
        while refinements < MAX_REFINEMENTS {
            let r = solver.high_remainders(&u)?;
            let data: Vec<VectorField> = f.iter().zip(&r).map(|(a, b)| a + b).collect();
            let next = solver.solve(&data)?;
            refinements += 1;
            if next == u {
                break;
            }
            u = next;
        }
    }
    let nilpotent = (0..l).all(|i| solver.d_tilde(i, &solver.d_tilde(i, &u)).is_zero());

    let u_n = u.with_cap(cap);
    let (fields, psi) = if u_n.is_zero() {
        (state.fields.clone(), state.psi.clone())
    } else {
        let step = JetDiffeo::id_plus(&u_n)?;
        let fields = state.fields.iter().map(|x| step.pullback(x)).collect::<Result<Vec<_>>>()?;
        (fields, JetDiffeo::compose(&state.psi, &step)?)
    };

    // postconditions
    let mut residual_zero = true;
    let mut normalized = true;
    for i in 0..l {
        let top = 2 * m + orders[i] - 1;
        let res = &state.remainder(i) + &u_n.bracket(&nf[i])?;
        if !s.nonzero_weight_part(&res.jet(top)).is_zero() {
            residual_zero = false;
        }
        if !s.nonzero_weight_part(&fields[i].jet(top)).is_zero() {
            normalized = false;
        }
    }
    if !residual_zero || !normalized {
        return Err(Error::SolveInconsistent(format!(
            "step from order {m}: cohomological residual zero = {residual_zero}, normalized = {normalized}"
        )));
    }

    let remainders: Vec<Vec<_>> = (0..l).map(|i| s.weight_decompose(&state.remainder(i))).collect();
    let buckets: Vec<BucketRecord> = s
        .weight_decompose(&u_n)
        .into_iter()
        .map(|b| {
            let key = WeightKey::of(&b.weight, arith);
            let rs = remainders
                .iter()
                .map(|bs| {
                    bs.iter()
                        .find(|r| WeightKey::of(&r.weight, arith) == key)
                        .map_or_else(|| VectorField::zero(n, cap, arith), |r| r.field.clone())
                })
                .collect();
            BucketRecord {
                i_star: i_star(&b.weight),
                key,
                weight: b.weight,
                u: b.field,
                remainders: rs,
            }
        })
        .collect();

    let report = StepReport {
        m,
        new_m: 2 * m,
        orders: orders.clone(),
        ord_det: Some(ord_det),
        work_cap: w,
        weights: buckets.len(),
        u_order: u_n.order(),
        u_degree: u_n.max_degree(),
        rest,
        refinements,
        nilpotent,
        residual_zero,
        normalized,
    };
    let mut reports = state.reports.clone();
    reports.push(report);
    Ok(NewtonState {
        fields,
        orders: orders.clone(),
        m: 2 * m,
        psi,
        reports,
        last: Some(SolveRecord {
            m,
            orders,
            nf,
            decomposition: dec,
            buckets,
        }),
    })
}

/// `D̃_i` built from a decomposition, for checking `D̃_i ∘ D̃_i = 0` on
/// arbitrary inputs.
pub fn d_tilde(dec: &NormalFormDecomposition, i: usize, v: &VectorField) -> VectorField {
    let mut acc = VectorField::zero(v.n(), v.cap(), v.arith());
    let l = dec.l();
    for q in 0..l {
        let mut dq = VectorField::zero(v.n(), v.cap(), v.arith());
        for r in 0..l {
            let f = v.lie_derivative(&dec.a[q][r].with_cap(v.cap()));
            if !f.is_zero() {
                dq = &dq + &dec.basis[r].with_cap(v.cap()).mul_function(&f);
            }
        }
        acc = &acc + &dq.mul_function(&dec.cofactor[i][q].with_cap(v.cap()));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Arith;
    use crate::series::MultiIndex;

    fn ex() -> Arith {
        Arith::Exact
    }

    #[test]
    fn normal_family_needs_no_correction() {
        let s = LieMorphism::from_ints(&[&[1, -1]], ex()).unwrap();
        let cap = 8;
        let f = FormalSeries::from_ints(2, cap, ex(), &[(&[0, 0], 1), (&[1, 1], 2)]);
        let x = s.basis_field(0, cap).mul_function(&f);
        let st = NewtonState::new(vec![x.clone()], 2, JetDiffeo::identity(2, cap, ex())).unwrap();
        let next = newton_step(&st, &s).unwrap();
        assert_eq!(next.m, 4);
        assert_eq!(next.fields[0], x);
        assert!(next.psi.is_identity());
    }

    #[test]
    fn ito_single_pair_step_matches_stepwise() {
        // (1 + xy)(x∂x − y∂y) pulled back by (x + x²y², y)
        let s = LieMorphism::from_ints(&[&[1, -1]], ex()).unwrap();
        let cap = 9;
        let f = FormalSeries::from_ints(2, cap, ex(), &[(&[0, 0], 1), (&[1, 1], 1)]);
        let nf = s.basis_field(0, cap).mul_function(&f);
        let phi = JetDiffeo::from_components(vec![
            FormalSeries::from_ints(2, cap, ex(), &[(&[1, 0], 1), (&[2, 2], 1)]),
            FormalSeries::var(2, cap, ex(), 1),
        ])
        .unwrap();
        let x = phi.pullback(&nf).unwrap();
        // normalized to order 3: the perturbation starts in degree 4
        let st = NewtonState::new(vec![x.clone()], 2, JetDiffeo::identity(2, cap, ex())).unwrap();
        assert!(st.is_normalized(&s));
        let next = newton_step(&st, &s).unwrap();
        assert!(next.is_normalized(&s));
        let r = next.reports.last().unwrap();
        assert!(r.residual_zero && r.normalized && r.nilpotent);

        // stepwise on degrees 3..=4 from the same start
        let mut fields = vec![x.clone()];
        let mut psi = JetDiffeo::identity(2, cap, ex());
        let eig = x.diagonal().unwrap();
        let mut near = Vec::new();
        crate::normalizer::poincare_dulac::normalize_degrees(&mut fields, &eig, 3, 4, &mut psi, &mut near).unwrap();
        let u_newton = next.psi.nonlinear_part();
        let u_step = psi.nonlinear_part();
        assert_eq!(u_newton.degree_range(3, 4), u_step.degree_range(3, 4));
    }

    #[test]
    fn d_tilde_squares_to_zero() {
        let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], ex()).unwrap();
        let cap = 7;
        let u1 = FormalSeries::from_ints(4, cap, ex(), &[(&[1, 0, 1, 0], 1)]);
        let u2 = FormalSeries::from_ints(4, cap, ex(), &[(&[0, 1, 0, 1], 1)]);
        let x1 = &s.basis_field(0, cap) + &s.basis_field(1, cap).scale(&ex().int(3));
        let x2 = &s.basis_field(0, cap).mul_function(&u1) + &s.basis_field(1, cap).mul_function(&u2);
        let dec = decompose_over_module(&[x1, x2], &s).unwrap();
        let v = VectorField::monomial(4, cap, ex(), MultiIndex::new(&[2, 0, 0, 1]), 2, ex().int(5));
        for i in 0..2 {
            assert!(d_tilde(&dec, i, &d_tilde(&dec, i, &v)).is_zero());
        }
    }
}
