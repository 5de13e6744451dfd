//! Seeded test families: normal families in the span of the basis fields
//! with first-integral coefficients, hidden by random polynomial changes of
//! coordinates, and integrable Hamiltonian pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cartan::{decompose_over_module, FirstIntegralRing};
use crate::error::{Error, Result};
use crate::field::{JetDiffeo, VectorField};
use crate::hamiltonian::{lie_transform, Hamiltonian};
use crate::scalar::{Arith, Scalar};
use crate::series::{FormalSeries, MultiIndex};
use crate::torus::LieMorphism;

const ATTEMPTS: usize = 64;

fn small_int(rng: &mut impl Rng) -> i64 {
    let v = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// Sum of up to `terms` first-integral monomials of degree `lo..=hi`.
pub fn random_first_integral(
    s: &LieMorphism,
    cap: usize,
    lo: usize,
    hi: usize,
    terms: usize,
    rng: &mut impl Rng,
) -> FormalSeries {
    let arith = s.arith();
    let ring = FirstIntegralRing::new(s, hi.min(cap));
    let pool: Vec<&MultiIndex> = ring.monomials.iter().filter(|q| q.degree() >= lo).collect();
    let mut f = FormalSeries::zero(s.n(), cap, arith);
    for q in pool.choose_multiple(rng, terms.min(pool.len())) {
        f.add_term(**q, arith.int(small_int(rng)));
    }
    f
}

/// `NF_i = Σ_j a_ij S_j` with `ord NF_i = orders[i]` (`orders[0] = 1`,
/// constant part of `a_0` equal to `g0`) and a nonzero junior determinant.
pub fn random_normal_family(
    s: &LieMorphism,
    g0: &[Scalar],
    orders: &[usize],
    cap: usize,
    rng: &mut impl Rng,
) -> Result<Vec<VectorField>> {
    let (n, l, arith) = (s.n(), s.l(), s.arith());
    if orders.len() != l || orders.first() != Some(&1) {
        return Err(Error::Invalid("orders must have length l and start with 1".into()));
    }
    let basis = s.basis_fields(cap);
    for _ in 0..ATTEMPTS {
        let mut nf = Vec::with_capacity(l);
        for (i, &d) in orders.iter().enumerate() {
            let mut x = VectorField::zero(n, cap, arith);
            for (j, sj) in basis.iter().enumerate() {
                let mut a = random_first_integral(s, cap - 1, d, cap - 1, 3, rng);
                if i == 0 {
                    a.add_term(MultiIndex::zero(), g0[j].clone());
                } else {
                    a = &a + &random_first_integral(s, cap - 1, d - 1, d - 1, 2, rng);
                }
                x = &x + &sj.mul_function(&a.with_cap(cap));
            }
            nf.push(x);
        }
        if nf.iter().zip(orders).any(|(x, &d)| x.order() != Some(d)) {
            continue;
        }
        if decompose_over_module(&nf, s)?.certificate().cartan {
            return Ok(nf);
        }
    }
    Err(Error::Invalid(format!("no Cartan family with orders {orders:?} after {ATTEMPTS} attempts")))
}

/// `Id + P` with `P` a sum of `terms` monomials of degree `lo..=hi`.
pub fn random_jet(n: usize, cap: usize, arith: Arith, lo: usize, hi: usize, terms: usize, rng: &mut impl Rng) -> Result<JetDiffeo> {
    let lo = lo.max(2);
    let mut p = VectorField::zero(n, cap, arith);
    if lo <= hi.min(cap) {
        let pool = MultiIndex::all_in_range(n, lo, hi.min(cap));
        for _ in 0..terms {
            let q = *pool.choose(rng).expect("nonempty pool");
            let i = rng.gen_range(0..n);
            p = &p + &VectorField::monomial(n, cap, arith, q, i, arith.int(small_int(rng)));
        }
    }
    JetDiffeo::id_plus(&p)
}

/// A normal family and its conjugate by a random jet.
#[derive(Clone, Debug)]
pub struct ConjugatedFamily {
    pub s: LieMorphism,
    pub g0: Vec<Scalar>,
    pub orders: Vec<usize>,
    pub nf: Vec<VectorField>,
    /// `x[i] = pullback(phi, nf[i])`.
    pub phi: JetDiffeo,
    pub x: Vec<VectorField>,
}

#[derive(Clone, Debug)]
pub struct FamilyConfig {
    pub cap: usize,
    pub orders: Vec<usize>,
    /// Lowest degree of the hiding jet; a family normalized to order `m`
    /// needs `jet_lo ≥ m + 1`.
    pub jet_lo: usize,
    pub jet_hi: usize,
    pub jet_terms: usize,
}

/// Random regular element, normal family and hiding jet, all from `seed`.
pub fn conjugated_family(s: &LieMorphism, cfg: &FamilyConfig, seed: u64) -> Result<ConjugatedFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = s.find_regular_element(cfg.cap, seed, ATTEMPTS)?;
    let nf = random_normal_family(s, &g0, &cfg.orders, cfg.cap, &mut rng)?;
    let phi = random_jet(s.n(), cfg.cap, s.arith(), cfg.jet_lo, cfg.jet_hi, cfg.jet_terms, &mut rng)?;
    let x = nf.iter().map(|f| phi.pullback(f)).collect::<Result<_>>()?;
    Ok(ConjugatedFamily {
        s: s.clone(),
        g0,
        orders: cfg.orders.clone(),
        nf,
        phi,
        x,
    })
}

/// `x²∂x + (x + y)∂y`.
pub fn two_variable_example(cap: usize) -> VectorField {
    let a = Arith::Exact;
    VectorField::new(vec![
        FormalSeries::from_ints(2, cap, a, &[(&[2, 0], 1)]),
        FormalSeries::from_ints(2, cap, a, &[(&[1, 0], 1), (&[0, 1], 1)]),
    ])
    .expect("two components")
}

/// Two commuting Hamiltonians in two degrees of freedom with quadratic
/// part `λ_1 x_1y_1 + λ_2 x_2y_2`: `u·λ + ⋯` and `u_1² + u_2² + ⋯` in the
/// actions `u_k = x_k y_k`, moved by a random symplectic Lie transform.
/// Caps are `cap`; the fields have cap `cap − 1`.
pub fn integrable_pair(lambda: &[Scalar; 2], cap: usize, arith: Arith, seed: u64) -> Result<Vec<Hamiltonian>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = |e: [u32; 2], c: Scalar| FormalSeries::monomial(4, cap, arith, MultiIndex::new(&[e[0], e[1], e[0], e[1]]), c);
    let mut h1 = &u([1, 0], lambda[0].clone()) + &u([0, 1], lambda[1].clone());
    let mut h2 = &u([2, 0], arith.one()) + &u([0, 2], arith.one());
    for e in [[1, 1], [2, 0], [0, 2], [2, 1]] {
        h1 = &h1 + &u(e, arith.int(small_int(&mut rng)));
    }
    for e in [[1, 2], [3, 0]] {
        h2 = &h2 + &u(e, arith.int(small_int(&mut rng)));
    }
    let mut g = FormalSeries::zero(4, cap, arith);
    let pool = MultiIndex::all_in_range(4, 3, 4.min(cap));
    for q in pool.choose_multiple(&mut rng, 4) {
        g.add_term(*q, arith.int(small_int(&mut rng)));
    }
    [h1, h2]
        .iter()
        .map(|h| Hamiltonian::new(lie_transform(h, &g)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugated_family_is_consistent() {
        let a = Arith::Exact;
        let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], a).unwrap();
        let cfg = FamilyConfig {
            cap: 8,
            orders: vec![1, 3],
            jet_lo: 3,
            jet_hi: 4,
            jet_terms: 3,
        };
        let fam = conjugated_family(&s, &cfg, 7).unwrap();
        assert!(fam.nf[0].bracket(&fam.nf[1]).unwrap().is_zero());
        assert!(fam.x[0].bracket(&fam.x[1]).unwrap().is_zero());
        let again = conjugated_family(&s, &cfg, 7).unwrap();
        assert_eq!(again.x, fam.x);
    }
}
