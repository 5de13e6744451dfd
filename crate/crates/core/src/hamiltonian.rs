//! Hamiltonian front-end for integrable systems with a nonresonant
//! quadratic part: Hamiltonian fields, the action morphism
//! `S(g_k) = x_k∂x_k − y_k∂y_k`, the nonresonance scan and the check that a
//! normal form depends on the actions `x_k y_k` only.
//!
//! Variables are ordered `x_1..x_p, y_1..y_p`.

use serde::Serialize;

use crate::cartan::decompose_over_module;
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::io::{scalar_repr, ScalarRepr};
use crate::normalizer::{normalize_family, NormalizeOptions, Normalized};
use crate::scalar::{Arith, Scalar};
use crate::series::{FormalSeries, MultiIndex};
use crate::torus::LieMorphism;

/// A Hamiltonian of order ≥ 2 whose quadratic part is `Σ λ_k x_k y_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    h: FormalSeries,
    pairs: usize,
}

impl Hamiltonian {
    pub fn new(h: FormalSeries) -> Result<Self> {
        let n = h.n();
        if n == 0 || n % 2 != 0 {
            return Err(Error::Invalid(format!("a Hamiltonian needs an even number of variables, got {n}")));
        }
        if let Some(d) = h.order() {
            if d < 2 {
                return Err(Error::Invalid(format!("Hamiltonian has a term of degree {d}")));
            }
        }
        let pairs = n / 2;
        for (q, _) in h.homogeneous(2).terms() {
            let k = (0..pairs).find(|&k| q.get(k) == 1 && q.get(pairs + k) == 1);
            if k.is_none() {
                return Err(Error::Invalid(
                    "quadratic part must be a combination of the products x_k y_k".into(),
                ));
            }
        }
        Ok(Hamiltonian { h, pairs })
    }

    pub fn series(&self) -> &FormalSeries {
        &self.h
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    /// Coefficients of `x_k y_k` in the quadratic part.
    pub fn lambda(&self) -> Vec<Scalar> {
        (0..self.pairs).map(|k| self.h.coeff(&action_monomial(self.pairs, k, 1))).collect()
    }
}

fn action_monomial(pairs: usize, k: usize, power: u32) -> MultiIndex {
    let mut e = vec![0; 2 * pairs];
    e[k] = power;
    e[pairs + k] = power;
    MultiIndex::new(&e)
}

/// `ẋ_k = ∂H/∂y_k`, `ẏ_k = −∂H/∂x_k`, with cap one below that of `H`.
pub fn hamiltonian_vector_field(h: &Hamiltonian) -> VectorField {
    let p = h.pairs;
    let f = &h.h;
    let mut comps: Vec<FormalSeries> = (0..p).map(|k| f.partial(p + k)).collect();
    comps.extend((0..p).map(|k| -&f.partial(k)));
    VectorField::new(comps).expect("components share a shape")
}

/// `{f, g} = Σ_k ∂f/∂x_k ∂g/∂y_k − ∂f/∂y_k ∂g/∂x_k`.
///
/// For `f`, `g` of order ≥ 2 every degree up to the common cap is
/// determined, so the cap is kept.
pub fn poisson_bracket(f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch(f.n(), g.n()));
    }
    if f.cap() != g.cap() {
        return Err(Error::OrderMismatch(f.cap(), g.cap()));
    }
    if f.n() % 2 != 0 {
        return Err(Error::Invalid("odd number of variables".into()));
    }
    for s in [f, g] {
        if s.order().is_some_and(|d| d < 2) {
            return Err(Error::Invalid("Poisson bracket needs series of order >= 2".into()));
        }
    }
    let p = f.n() / 2;
    let mut acc = FormalSeries::zero(f.n(), f.cap(), f.arith());
    for k in 0..p {
        let a = &f.derivative(k) * &g.derivative(p + k);
        let b = &f.derivative(p + k) * &g.derivative(k);
        acc = &(&acc + &a) - &b;
    }
    Ok(acc)
}

/// `H ∘ exp(X_G) = Σ_k ad^k H / k!` for `ord G ≥ 3`, a symplectic change of
/// coordinates applied at the level of functions.
pub fn lie_transform(h: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries> {
    if g.order().is_some_and(|d| d < 3) {
        return Err(Error::Invalid("generating function must have order >= 3".into()));
    }
    let arith = h.arith();
    let mut acc = h.clone();
    let mut term = h.clone();
    let mut k = 1;
    loop {
        term = poisson_bracket(&term, g)?.scale(&arith.ratio(1, k));
        if term.is_zero() {
            break;
        }
        acc = &acc + &term;
        k += 1;
    }
    Ok(acc)
}

/// Rows `e_k − e_{p+k}`: `S(g_k) = x_k∂x_k − y_k∂y_k`.
pub fn build_ito_morphism(pairs: usize, arith: Arith) -> Result<LieMorphism> {
    if pairs == 0 {
        return Err(Error::Invalid("need at least one pair".into()));
    }
    let rows = (0..pairs)
        .map(|k| {
            (0..2 * pairs)
                .map(|j| {
                    if j == k {
                        arith.one()
                    } else if j == pairs + k {
                        arith.int(-1)
                    } else {
                        arith.zero()
                    }
                })
                .collect()
        })
        .collect();
    LieMorphism::new(rows, arith)
}

#[derive(Clone, Debug, Serialize)]
pub struct StarCheck {
    pub bound: u32,
    pub holds: bool,
    /// A relation `Σ λ_k m_k = 0`, smallest in max-norm, first nonzero
    /// entry positive.
    pub witness: Option<Vec<i64>>,
}

const STAR_BUDGET: u128 = 50_000_000;

/// Scan `Σ λ_k m_k ≠ 0` over `0 < max|m_k| ≤ bound`.
pub fn check_star_condition(lambda: &[Scalar], bound: u32, arith: Arith) -> Result<StarCheck> {
    if bound == 0 {
        return Err(Error::Invalid("bound must be at least 1".into()));
    }
    let n = lambda.len();
    let needed = (2 * bound as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > STAR_BUDGET {
        return Err(Error::BudgetExceeded {
            needed,
            budget: STAR_BUDGET,
        });
    }
    for r in 1..=bound as i64 {
        // shell max|m| = r in lexicographic order
        let mut m = vec![-r; n];
        loop {
            let on_shell = m.iter().any(|v| v.abs() == r);
            let leading_positive = m.iter().find(|v| **v != 0).is_some_and(|v| *v > 0);
            if on_shell && leading_positive {
                let mut acc = arith.zero();
                for (l, &mk) in lambda.iter().zip(&m) {
                    if mk != 0 {
                        acc += &(l * &arith.int(mk));
                    }
                }
                if arith.is_zero(&acc) {
                    return Ok(StarCheck {
                        bound,
                        holds: false,
                        witness: Some(m),
                    });
                }
            }
            let Some(pos) = (0..n).rev().find(|&k| m[k] < r) else { break };
            m[pos] += 1;
            for v in &mut m[pos + 1..] {
                *v = -r;
            }
        }
    }
    Ok(StarCheck {
        bound,
        holds: true,
        witness: None,
    })
}

/// Whether `x^q` is a product of actions `x_k y_k`.
pub fn is_action_monomial(q: &MultiIndex, pairs: usize) -> bool {
    (0..pairs).all(|k| q.get(k) == q.get(pairs + k))
}

/// The normal forms decompose over the basis fields with coefficients that
/// are series in the actions alone.
pub fn verify_action_normal_form(nf: &[VectorField], s: &LieMorphism) -> bool {
    let pairs = s.n() / 2;
    if s.n() % 2 != 0 {
        return false;
    }
    match decompose_over_module(nf, s) {
        Ok(dec) => dec
            .a
            .iter()
            .flatten()
            .all(|f| f.terms().all(|(q, _)| is_action_monomial(q, pairs))),
        Err(_) => false,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ItoReport {
    pub pairs: usize,
    pub lambda: Vec<ScalarRepr>,
    pub star: StarCheck,
    pub commute: bool,
    pub action_normal_form: Option<bool>,
    /// The normalizing jet is not made symplectic.
    pub symplectic: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ItoOutcome {
    pub report: ItoReport,
    pub normalized: Option<Normalized>,
}

/// Nonresonance scan, normalization of the Hamiltonian fields and the
/// action-variable check.
pub fn run_ito(hs: &[Hamiltonian], star_bound: u32, opts: &NormalizeOptions) -> Result<ItoOutcome> {
    let first = hs.first().ok_or_else(|| Error::Invalid("no Hamiltonians".into()))?;
    let pairs = first.pairs();
    if hs.len() != pairs {
        return Err(Error::Invalid(format!("{} Hamiltonians for {pairs} pairs", hs.len())));
    }
    let arith = first.series().arith();
    for h in hs {
        if h.pairs() != pairs {
            return Err(Error::DimensionMismatch(2 * h.pairs(), 2 * pairs));
        }
        if h.series().cap() < opts.order + 1 {
            return Err(Error::OrderMismatch(h.series().cap(), opts.order + 1));
        }
    }
    let lambda = first.lambda();
    let star = check_star_condition(&lambda, star_bound, arith)?;
    let fields: Vec<VectorField> = hs
        .iter()
        .map(|h| hamiltonian_vector_field(&Hamiltonian::new(h.series().with_cap(opts.order + 1)).expect("checked")))
        .collect();
    let commute = fields
        .iter()
        .skip(1)
        .map(|f| Ok(fields[0].bracket(f)?.is_zero()))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    let mut report = ItoReport {
        pairs,
        lambda: lambda.iter().map(scalar_repr).collect(),
        star,
        commute,
        action_normal_form: None,
        symplectic: false,
        error: None,
    };
    if !report.star.holds {
        report.error = Some("the quadratic part is resonant".into());
        return Ok(ItoOutcome {
            report,
            normalized: None,
        });
    }
    let s = build_ito_morphism(pairs, arith)?;
    let normalized = normalize_family(&fields, &s, opts)?;
    report.action_normal_form = Some(verify_action_normal_form(&normalized.nf, &s));
    Ok(ItoOutcome {
        report,
        normalized: Some(normalized),
    })
}
