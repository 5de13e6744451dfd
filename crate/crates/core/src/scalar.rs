//! Coefficient scalars.
//!
//! A [`Scalar`] is either an exact Gaussian rational or a double-precision
//! complex number. The zero test of the float variant depends on a tolerance
//! that is not stored in the scalar itself but in the [`Arith`] context carried
//! by every series, so that the tolerance is fixed once per session.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num::{BigInt, BigRational, Complex, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Arithmetic mode of a session.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arith {
    Exact,
    Float { tol: f64 },
}

impl Default for Arith {
    fn default() -> Self {
        Arith::Exact
    }
}

impl Arith {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn float() -> Self {
        Arith::Float {
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn float_with(tol: f64) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::Invalid(format!("float tolerance must be positive, got {tol}")));
        }
        Ok(Arith::Float { tol })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Arith::Exact)
    }

    /// Zero-test threshold; `0.0` in exact mode.
    pub fn tolerance(&self) -> f64 {
        match self {
            Arith::Exact => 0.0,
            Arith::Float { tol } => *tol,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.int(0)
    }

    pub fn one(&self) -> Scalar {
        self.int(1)
    }

    pub fn int(&self, v: i64) -> Scalar {
        match self {
            Arith::Exact => Scalar::Exact(GaussianRational::from_int(v)),
            Arith::Float { .. } => Scalar::Float(Complex64::new(v as f64, 0.0)),
        }
    }

    pub fn ratio(&self, p: i64, q: i64) -> Scalar {
        assert!(q != 0, "zero denominator");
        match self {
            Arith::Exact => Scalar::Exact(GaussianRational::real(BigRational::new(p.into(), q.into()))),
            Arith::Float { .. } => Scalar::Float(Complex64::new(p as f64 / q as f64, 0.0)),
        }
    }

    /// Gaussian rational `(re_p/re_q) + i (im_p/im_q)`.
    pub fn gaussian(&self, re: (i64, i64), im: (i64, i64)) -> Scalar {
        let re = self.ratio(re.0, re.1);
        let im = self.ratio(im.0, im.1);
        &re + &(&im * &self.imag_unit())
    }

    pub fn imag_unit(&self) -> Scalar {
        match self {
            Arith::Exact => Scalar::Exact(GaussianRational {
                re: BigRational::zero(),
                im: BigRational::one(),
            }),
            Arith::Float { .. } => Scalar::Float(Complex64::new(0.0, 1.0)),
        }
    }

    /// A float value; rejected in exact mode.
    pub fn real_f64(&self, v: f64) -> Result<Scalar> {
        self.complex(Complex64::new(v, 0.0))
    }

    pub fn complex(&self, z: Complex64) -> Result<Scalar> {
        match self {
            Arith::Exact => Err(Error::Invalid(format!(
                "float value {z} in exact mode; use rational strings"
            ))),
            Arith::Float { .. } => Ok(Scalar::Float(z)),
        }
    }

    /// Bring a scalar into this mode. Exact values convert to floats; the
    /// reverse direction is refused.
    pub fn coerce(&self, s: &Scalar) -> Result<Scalar> {
        match (self, s) {
            (Arith::Exact, Scalar::Exact(_)) => Ok(s.clone()),
            (Arith::Exact, Scalar::Float(z)) => Err(Error::Invalid(format!(
                "float value {z} in exact mode"
            ))),
            (Arith::Float { .. }, _) => Ok(Scalar::Float(s.to_complex())),
        }
    }

    pub fn is_zero(&self, s: &Scalar) -> bool {
        match s {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Float(z) => z.norm() <= self.tolerance(),
        }
    }

    pub fn approx_eq(&self, a: &Scalar, b: &Scalar) -> bool {
        self.is_zero(&(a - b))
    }
}

/// `re + i im` with arbitrary-precision rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn from_int(v: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn real(re: BigRational) -> Self {
        GaussianRational {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }

    fn mul_ref(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(&self.re * &o.re);
        }
        GaussianRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by exact zero");
        if self.im.is_zero() {
            return Self::real(self.re.recip());
        }
        let d = self.norm_sqr();
        GaussianRational {
            re: &self.re / &d,
            im: -(&self.im / &d),
        }
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // keep 64 significant bits of each side, put the exponent back afterwards
        let nb = r.numer().bits() as i64;
        let db = r.denom().bits() as i64;
        let ns = (nb - 64).max(0);
        let ds = (db - 64).max(0);
        let n = (r.numer() >> ns as usize).to_f64().unwrap_or(0.0);
        let d = (r.denom() >> ds as usize).to_f64().unwrap_or(1.0);
        n / d * 2f64.powi((ns - ds).clamp(-2000, 2000) as i32)
    })
}

/// Parse `"p"`, `"p/q"` or a decimal like `"-0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("cannot parse rational {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// Always `"p/q"`, also for integers.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussianRational),
    Float(Complex64),
}

impl Scalar {
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_complex(),
            Scalar::Float(z) => *z,
        }
    }

    /// Modulus as a double.
    pub fn abs(&self) -> f64 {
        match self {
            Scalar::Exact(g) if g.is_real() => ratio_to_f64(&g.re).abs(),
            _ => self.to_complex().norm(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Structural zero (exact zero, or float exactly `0.0`).
    pub fn is_structural_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(g.inv()),
            Scalar::Float(z) => Scalar::Float(z.inv()),
        }
    }

    pub fn pow(&self, k: u32) -> Scalar {
        let mut acc = match self {
            Scalar::Exact(_) => Scalar::Exact(GaussianRational::from_int(1)),
            Scalar::Float(_) => Scalar::Float(Complex64::new(1.0, 0.0)),
        };
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn as_exact(&self) -> Option<&GaussianRational> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Float(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) if g.im.is_zero() => write!(f, "{}", g.re),
            Scalar::Exact(g) => write!(f, "({} + {}i)", g.re, g.im),
            Scalar::Float(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Scalar::Float(z) => write!(f, "({} + {}i)", z.re, z.im),
        }
    }
}

fn binop(
    a: &Scalar,
    b: &Scalar,
    exact: impl FnOnce(&GaussianRational, &GaussianRational) -> GaussianRational,
    float: impl FnOnce(Complex64, Complex64) -> Complex64,
) -> Scalar {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(exact(x, y)),
        _ => Scalar::Float(float(a.to_complex(), b.to_complex())),
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        binop(
            self,
            o,
            |x, y| GaussianRational {
                re: &x.re + &y.re,
                im: if x.im.is_zero() && y.im.is_zero() {
                    BigRational::zero()
                } else {
                    &x.im + &y.im
                },
            },
            |x, y| x + y,
        )
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        binop(
            self,
            o,
            |x, y| GaussianRational {
                re: &x.re - &y.re,
                im: &x.im - &y.im,
            },
            |x, y| x - y,
        )
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        binop(self, o, |x, y| x.mul_ref(y), |x, y| x * y)
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        binop(self, o, |x, y| x.mul_ref(&y.inv()), |x, y| x / y)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussianRational {
                re: -&g.re,
                im: -&g.im,
            }),
            Scalar::Float(z) => Scalar::Float(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        match (&mut *self, o) {
            (Scalar::Exact(x), Scalar::Exact(y)) => {
                x.re += &y.re;
                if !y.im.is_zero() {
                    x.im += &y.im;
                }
            }
            (Scalar::Float(x), _) => *x += o.to_complex(),
            _ => *self = &*self + o,
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        match (&mut *self, o) {
            (Scalar::Exact(x), Scalar::Exact(y)) => {
                x.re -= &y.re;
                if !y.im.is_zero() {
                    x.im -= &y.im;
                }
            }
            (Scalar::Float(x), _) => *x -= o.to_complex(),
            _ => *self = &*self - o,
        }
    }
}

/// Factorial as an exact scalar in the given mode.
pub fn factorial(arith: &Arith, k: u32) -> Scalar {
    let mut acc = arith.one();
    for j in 2..=k {
        acc = &acc * &arith.int(j as i64);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_zero_test_is_exact() {
        let a = Arith::Exact;
        let third = a.ratio(1, 3);
        let x = &(&third + &third) + &third;
        assert!(a.approx_eq(&x, &a.one()));
        assert!(!a.is_zero(&a.ratio(1, 1_000_000_000)));
    }

    #[test]
    fn float_zero_test_uses_tolerance() {
        let a = Arith::float_with(1e-9).unwrap();
        assert!(a.is_zero(&Scalar::Float(Complex64::new(1e-10, -1e-10))));
        assert!(!a.is_zero(&Scalar::Float(Complex64::new(1e-8, 0.0))));
        assert!(Arith::float_with(0.0).is_err());
    }

    #[test]
    fn gaussian_division() {
        let a = Arith::Exact;
        let z = a.gaussian((1, 1), (2, 1));
        let w = &z / &z;
        assert_eq!(w, a.one());
        let i = a.imag_unit();
        assert_eq!(&i * &i, a.int(-1));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&parse_rational("6/4").unwrap()), "3/2");
        assert_eq!(format_rational(&parse_rational("5").unwrap()), "5/1");
        assert_eq!(format_rational(&parse_rational("-0.25").unwrap()), "-1/4");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigRational::new(num::pow(BigInt::from(10), 400), num::pow(BigInt::from(10), 399));
        assert!((ratio_to_f64(&big) - 10.0).abs() < 1e-9);
    }
}
