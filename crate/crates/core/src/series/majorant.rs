use serde::{Deserialize, Serialize};

use super::FormalSeries;
use crate::error::{Error, Result};

/// Anisotropic polydisc with radii `R_i = t0^{κ_i} · r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyradiusSpec {
    pub r: f64,
    pub kappa: Vec<f64>,
    pub t0: f64,
}

impl PolyradiusSpec {
    pub fn new(r: f64, kappa: Vec<f64>, t0: f64) -> Result<Self> {
        if !(r > 0.0) || !(t0 > 0.0 && t0 <= 1.0) || kappa.iter().any(|k| !(*k > 0.0)) {
            return Err(Error::Invalid(format!(
                "polyradius needs r > 0, 0 < t0 <= 1, kappa > 0 (got r={r}, t0={t0}, kappa={kappa:?})"
            )));
        }
        Ok(PolyradiusSpec { r, kappa, t0 })
    }

    /// Isotropic polydisc of radius `r` (`κ = 1`, `t0 = 1`).
    pub fn uniform(n: usize, r: f64) -> Self {
        PolyradiusSpec {
            r,
            kappa: vec![1.0; n],
            t0: 1.0,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        self.kappa.iter().map(|k| self.t0.powf(*k) * self.r).collect()
    }

    pub fn with_r(&self, r: f64) -> Self {
        PolyradiusSpec { r, ..self.clone() }
    }
}

/// `|f|_R = Σ_Q |f_Q| R^Q`.
pub fn majorant_norm(f: &FormalSeries, p: &PolyradiusSpec) -> f64 {
    let radii = p.radii();
    assert_eq!(radii.len(), f.n(), "polyradius dimension");
    f.terms()
        .map(|(q, c)| {
            let mut w = c.abs();
            for (k, r) in radii.iter().enumerate() {
                w *= r.powi(q.get(k) as i32);
            }
            w
        })
        .fold(0.0, |a, b| a + b)
}

/// Bound on `|1/(f+g)|_R` for a monomial `f = p·x^T`:
/// `|1/f|_R / (1 − |1/f|_R |g|_R)`, valid when `|1/f|_R |g|_R < 1`.
pub fn inverse_bound(f: &FormalSeries, g: &FormalSeries, p: &PolyradiusSpec) -> Result<f64> {
    if f.len() != 1 {
        return Err(Error::Invalid("inverse_bound expects a monomial f".into()));
    }
    let inv_f = 1.0 / majorant_norm(f, p);
    let prod = inv_f * majorant_norm(g, p);
    if !(prod < 1.0) {
        return Err(Error::InverseBound(prod));
    }
    Ok(inv_f / (1.0 - prod))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Arith;

    #[test]
    fn norm_of_linear() {
        let a = Arith::Exact;
        let f = FormalSeries::from_ints(2, 3, a, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let p = PolyradiusSpec::new(1.0, vec![1.0, 2.0], 0.5).unwrap();
        let r = p.radii();
        assert!((majorant_norm(&f, &p) - (r[0] + r[1])).abs() < 1e-15);
    }

    #[test]
    fn inverse_bound_trivial_cases() {
        let a = Arith::Exact;
        let p = PolyradiusSpec::uniform(2, 0.5);
        let f = FormalSeries::from_ints(2, 4, a, &[(&[1, 1], 1)]);
        let zero = FormalSeries::zero(2, 4, a);
        assert!((inverse_bound(&f, &zero, &p).unwrap() - 4.0).abs() < 1e-12);
        let one = FormalSeries::one(2, 4, a);
        let g = FormalSeries::from_ints(2, 4, a, &[(&[1, 0], 1)]);
        assert!((inverse_bound(&one, &g, &p).unwrap() - 2.0).abs() < 1e-12);
        let big = FormalSeries::from_ints(2, 4, a, &[(&[0, 0], 3)]);
        assert!(matches!(inverse_bound(&one, &big, &p), Err(Error::InverseBound(_))));
    }
}
