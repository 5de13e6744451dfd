//! Numerical diagnostics for the bound on the cohomological solution.
//!
//! All constants follow the proofs of the determinant lemma and of the
//! estimate on `U_α`; norms are majorant norms on the polydisc of radii
//! `t0^{κ_k}·r`. The field norm is the largest component norm, a matrix norm
//! is the largest entry norm.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::linalg::{self, SeriesMatrix};
use crate::series::{inverse_bound, majorant_norm, FormalSeries, MultiIndex, PolyradiusSpec};
use crate::torus::{LieMorphism, DEFAULT_BUDGET};

use super::newton::NewtonState;

/// Slack allowed when comparing float-evaluated norms.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct EstimateConstants {
    pub m: usize,
    pub r: f64,
    pub kappa: Vec<f64>,
    pub t0: f64,
    /// `min (κ, T)` over the terms of `det A_{p0}`.
    pub d: f64,
    /// The unique minimizer `T0`.
    pub t_min: Vec<u32>,
    /// `|p_{T0}|`.
    pub p_t0: f64,
    /// `|T0|`.
    pub s_exp: usize,
    pub eta: f64,
    pub eta1: f64,
    /// `|1/det A|_{t0^κ·r} ≤ c/(t0^d r^s)`.
    pub c: f64,
    pub m1: f64,
    pub m_const: f64,
    /// `|A_{p0}|_1`.
    pub a_norm: f64,
    /// Largest entry of `L^{-1}` in modulus.
    pub linv_norm: f64,
    /// `max_j |S_j|_1`.
    pub s_norm: f64,
    pub c1: f64,
    /// `ω_{k+1}` for `m = 2^k`.
    pub omega: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hypotheses {
    pub r_in_range: bool,
    /// `max_i |NF_i − J^{p0+d_i−1}(NF_i)|`.
    pub nf_deviation: f64,
    /// `max_i |D(NF_i − J¹(NF_i))|`.
    pub derivative: f64,
    /// Both of the above below `η1` and `1/2 < r ≤ 1`.
    pub theorem: bool,
    /// `|A − A_{p0}|`, compared with `η`.
    pub matrix_deviation: f64,
    pub lemma: bool,
    /// The stricter smallness region of the induction, with the offsets
    /// `8n/(m − d_i + 1)`.
    pub induction_region: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    /// `α(g_j)` as `[re, im]`.
    pub weight: Vec<[f64; 2]>,
    pub i_star: usize,
    /// `|U_α|`.
    pub lhs: f64,
    /// `c1/ω̂² · max_i |R_{i,α}|`.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateDiagnostics {
    pub constants: EstimateConstants,
    pub hypotheses: Hypotheses,
    pub hypotheses_unmet: bool,
    /// Direct bound on `|1/det A|` by the inverse lemma, when it applies.
    pub inverse_bound: Option<f64>,
    /// `c/(t0^d r^s)`.
    pub inverse_claim: f64,
    pub checks: Vec<BoundCheck>,
    pub all_hold: bool,
    /// Smallest `rhs − lhs` over the checks.
    pub min_slack: Option<f64>,
}

/// `κ_k = 1 + frac(√p)` over consecutive primes, shifted by `offset`.
/// Square roots of distinct primes are independent over the rationals.
pub fn incommensurable_kappa(n: usize, offset: usize) -> Vec<f64> {
    primes(n + offset)
        .into_iter()
        .skip(offset)
        .map(|p| {
            let r = (p as f64).sqrt();
            1.0 + (r - r.floor())
        })
        .collect()
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 2u64;
    while out.len() < count {
        if out.iter().take_while(|p| *p * *p <= k).all(|p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

fn pairing(kappa: &[f64], t: &MultiIndex) -> f64 {
    kappa.iter().enumerate().map(|(k, x)| x * t.get(k) as f64).sum()
}

/// `(d, T0, |p_T0|)` when the minimum of `(κ, T)` is attained once.
fn leading_term(det: &FormalSeries, kappa: &[f64]) -> Option<(f64, MultiIndex, f64)> {
    let mut vals: Vec<(f64, MultiIndex, f64)> = det.terms().map(|(t, c)| (pairing(kappa, t), *t, c.abs())).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = vals.first()?.clone();
    if vals.len() > 1 && vals[1].0 - first.0 <= 1e-9 * first.0.abs().max(1.0) {
        return None;
    }
    Some(first)
}

/// First `κ` candidate giving `det` a unique leading term.
pub fn choose_kappa(det: &FormalSeries, seed: u64) -> Result<Vec<f64>> {
    let base = (seed % 97) as usize;
    for attempt in 0..64 {
        let kappa = incommensurable_kappa(det.n(), base + attempt);
        if leading_term(det, &kappa).is_some() {
            return Ok(kappa);
        }
    }
    Err(Error::Invalid("no weight vector separates the terms of det A".into()))
}

fn field_norm(x: &VectorField, p: &PolyradiusSpec) -> f64 {
    x.components().iter().map(|c| majorant_norm(c, p)).fold(0.0, f64::max)
}

/// `max_{k,p} |∂_p X_k|`.
fn derivative_norm(x: &VectorField, p: &PolyradiusSpec) -> f64 {
    let mut best: f64 = 0.0;
    for c in x.components() {
        for j in 0..x.n() {
            best = best.max(majorant_norm(&c.partial(j), p));
        }
    }
    best
}

fn matrix_norm(a: &SeriesMatrix, p: &PolyradiusSpec) -> f64 {
    a.iter().flatten().map(|x| majorant_norm(x, p)).fold(0.0, f64::max)
}

fn permutations(l: usize) -> Vec<(Vec<usize>, bool)> {
    fn go(prefix: &mut Vec<usize>, left: &mut Vec<usize>, odd: bool, out: &mut Vec<(Vec<usize>, bool)>) {
        if left.is_empty() {
            out.push((prefix.clone(), odd));
            return;
        }
        for k in 0..left.len() {
            let v = left.remove(k);
            prefix.push(v);
            // moving the k-th remaining element to the front costs k transpositions
            go(prefix, left, odd ^ (k % 2 == 1), out);
            prefix.pop();
            left.insert(k, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..l).collect(), false, &mut out);
    out
}

/// `(|Q|, ‖d_Q‖_1)` for `det(A + Z) − det(A) = Σ_Q d_Q(A) Z^Q`.
fn perturbation_norms(a: &SeriesMatrix) -> Vec<(usize, f64)> {
    let l = a.len();
    let zero = &a[0][0] - &a[0][0];
    let mut coeffs: BTreeMap<Vec<(usize, usize)>, FormalSeries> = BTreeMap::new();
    for (sigma, odd) in permutations(l) {
        for mask in 1u32..(1 << l) {
            let key: Vec<(usize, usize)> = (0..l).filter(|i| mask & (1 << i) != 0).map(|i| (i, sigma[i])).collect();
            let mut prod = FormalSeries::one(zero.n(), zero.cap(), zero.arith());
            for i in (0..l).filter(|i| mask & (1 << i) == 0) {
                prod = &prod * &a[i][sigma[i]];
            }
            let e = coeffs.entry(key).or_insert_with(|| zero.clone());
            *e = if odd { &*e - &prod } else { &*e + &prod };
        }
    }
    let unit = PolyradiusSpec::uniform(zero.n(), 1.0);
    coeffs
        .into_iter()
        .map(|(k, v)| (k.len(), majorant_norm(&v, &unit)))
        .filter(|(_, v)| *v > 0.0)
        .collect()
}

/// Largest `x ≤ hi` with `f(x) ≤ 0`, for `f` increasing with `f(0) < 0`.
fn bisect(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    if f(hi) <= 0.0 {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn factorial_f64(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Constants and the bound check for the last step of `state`.
///
/// `p` supplies `r`, `κ` and an upper bound for `t0`; `t0` itself is the
/// largest admissible value below that bound.
pub fn estimate_diagnostics(state: &NewtonState, s: &LieMorphism, p: &PolyradiusSpec) -> Result<EstimateDiagnostics> {
    let rec = state
        .last
        .as_ref()
        .ok_or_else(|| Error::Invalid("no Newton step has been recorded".into()))?;
    let dec = &rec.decomposition;
    let (l, n) = (dec.l(), s.n());
    if p.kappa.len() != n {
        return Err(Error::DimensionMismatch(p.kappa.len(), n));
    }
    let m = rec.m;
    if !m.is_power_of_two() {
        return Err(Error::Invalid(format!("step order {m} is not a power of two")));
    }
    let k = m.trailing_zeros() as usize;
    let p0 = dec.certificate().p0.unwrap_or(1);
    let ap0 = dec.truncated_matrix(p0);
    let det_p0 = linalg::series_det(&ap0, &FormalSeries::one(n, dec.det.cap(), dec.det.arith()));
    let (d, t_min, p_t0) = leading_term(&det_p0, &p.kappa)
        .ok_or_else(|| Error::Invalid("κ does not single out a leading term of det A_{p0}".into()))?;
    let s_exp = t_min.degree();
    let r = p.r;

    // t0: Σ_{T≠T0} |p_T| t^{(κ,T)−d} r^{|T|−s} ≤ |p_T0|/4
    let others: Vec<(f64, f64)> = det_p0
        .terms()
        .filter(|(t, _)| **t != t_min)
        .map(|(t, c)| (pairing(&p.kappa, t) - d, c.abs() * r.powi(t.degree() as i32 - s_exp as i32)))
        .collect();
    let t0 = bisect(|t| others.iter().map(|(e, w)| w * t.powf(*e)).sum::<f64>() - p_t0 / 4.0, p.t0);
    let target = p_t0 / 4.0 * r.powi(s_exp as i32) * t0.powf(d);
    let pert = perturbation_norms(&ap0);
    let ptilde = |eta: f64| pert.iter().map(|(q, w)| w * eta.powi(*q as i32)).sum::<f64>();
    let mut hi = 1.0;
    while ptilde(hi) <= target && hi < 1e12 {
        hi *= 2.0;
    }
    let eta = bisect(|e| ptilde(e) - target, hi);

    let c = 2.0 / p_t0;
    let m1 = factorial_f64(l);
    let m_const = factorial_f64(l - 1);
    let a_norm = matrix_norm(&ap0, &PolyradiusSpec::uniform(n, 1.0));
    let linv_norm = linalg::max_abs(s.minor_inverse());
    let s_norm = linalg::max_abs(s.lambda());
    let min_tk = p.kappa.iter().map(|kk| t0.powf(*kk)).fold(f64::INFINITY, f64::min);
    let eta1 = min_tk * eta / (2.0 * l as f64 * linv_norm);
    let lf = l as f64;
    let ce = (a_norm + eta).powi(l as i32 - 1);
    let c1 = 4f64.powi(s_exp as i32) * c * c * lf * m_const * ce / t0.powf(2.0 * d)
        * ((m1 * a_norm.powi(l as i32) + 1.0 / (2.0 * c)) + lf * lf * m_const * ce * n as f64 * eta * s_norm);
    let omega = s.omega_sequence(k + 1, DEFAULT_BUDGET)?.omega[k + 1];
    let omega_hat = omega.min(1.0);
    let factor = c1 / (omega_hat * omega_hat);
    let gamma = factor.max(1.0).powf(-1.0 / m as f64);

    let poly = PolyradiusSpec::new(r, p.kappa.clone(), t0)?;
    let per_field: Vec<(f64, f64)> = rec
        .nf
        .iter()
        .zip(&rec.orders)
        .map(|(x, di)| {
            let dev = field_norm(&(x - &x.jet(p0 + di - 1)), &poly);
            let der = derivative_norm(&x.tail(2), &poly);
            (dev, der)
        })
        .collect();
    let nf_deviation = per_field.iter().map(|x| x.0).fold(0.0, f64::max);
    let derivative = per_field.iter().map(|x| x.1).fold(0.0, f64::max);
    let r_in_range = r > 0.5 && r <= 1.0;
    let theorem = r_in_range && nf_deviation < eta1 && derivative < eta1;
    let diff: SeriesMatrix = dec
        .a
        .iter()
        .zip(&ap0)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect())
        .collect();
    let matrix_deviation = matrix_norm(&diff, &poly);
    let lemma = matrix_deviation < eta;
    let nn = n as f64;
    let dmax = rec.orders.iter().copied().max().unwrap_or(1);
    let m_floor = (8.0 * nn / (min_tk * eta1)).floor() + 1.0;
    let induction_region = (m as f64) >= m_floor
        && m >= p0.max(dmax)
        && per_field.iter().zip(&rec.orders).all(|((dev, der), di)| {
            let gap = (m - di + 1) as f64;
            *dev < eta1 - 8.0 * nn / gap && *der < eta1 - 8.0 * nn / (min_tk * gap)
        });

    let lead = FormalSeries::monomial(n, dec.det.cap(), dec.det.arith(), t_min, det_p0.coeff(&t_min));
    let inverse = inverse_bound(&lead, &(&dec.det - &lead), &poly).ok();
    let inverse_claim = c / (t0.powf(d) * r.powi(s_exp as i32));

    let checks: Vec<BoundCheck> = rec
        .buckets
        .iter()
        .map(|b| {
            let lhs = field_norm(&b.u, &poly);
            let rmax = b.remainders.iter().map(|x| field_norm(x, &poly)).fold(0.0, f64::max);
            let rhs = factor * rmax;
            BoundCheck {
                weight: b.weight.iter().map(|w| {
                    let z = w.to_complex();
                    [z.re, z.im]
                }).collect(),
                i_star: b.i_star,
                lhs,
                rhs,
                holds: lhs <= rhs + BOUND_SLACK,
            }
        })
        .collect();
    let all_hold = checks.iter().all(|c| c.holds);
    let min_slack = checks.iter().map(|c| c.rhs - c.lhs).reduce(f64::min);
    Ok(EstimateDiagnostics {
        constants: EstimateConstants {
            m,
            r,
            kappa: p.kappa.clone(),
            t0,
            d,
            t_min: t_min.to_vec(n),
            p_t0,
            s_exp,
            eta,
            eta1,
            c,
            m1,
            m_const,
            a_norm,
            linv_norm,
            s_norm,
            c1,
            omega,
            gamma,
        },
        hypotheses: Hypotheses {
            r_in_range,
            nf_deviation,
            derivative,
            theorem,
            matrix_deviation,
            lemma,
            induction_region,
        },
        hypotheses_unmet: !theorem,
        inverse_bound: inverse,
        inverse_claim,
        checks,
        all_hold,
        min_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let odd = p.iter().filter(|(_, o)| *o).count();
        assert_eq!(odd, 3);
        assert!(p.contains(&(vec![1, 0, 2], true)));
        assert!(p.contains(&(vec![1, 2, 0], false)));
    }

    #[test]
    fn kappa_is_positive_and_distinct() {
        let k = incommensurable_kappa(4, 0);
        assert_eq!(k.len(), 4);
        for i in 0..4 {
            assert!(k[i] > 1.0 && k[i] < 2.0);
            for j in 0..i {
                assert!((k[i] - k[j]).abs() > 1e-3);
            }
        }
    }

    #[test]
    fn perturbation_of_two_by_two() {
        // det(A + Z) − det A = a11 z22 + a22 z11 − a12 z21 − a21 z12 + z11 z22 − z12 z21
        let ar = crate::scalar::Arith::Exact;
        let c = |v: i64| FormalSeries::constant(1, 2, ar, ar.int(v));
        let a = vec![vec![c(2), c(3)], vec![c(5), c(7)]];
        let mut norms = perturbation_norms(&a);
        norms.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(norms, vec![(1, 2.0), (1, 3.0), (1, 5.0), (1, 7.0), (2, 1.0), (2, 1.0)]);
    }
}
