//! JSON representations of scalars, series and fields.
//!
//! Exact values are written as `"p/q"` strings, float values as numbers.
//! On input a scalar may be a string (`"3"`, `"-1/2"`, `"0.25"`), a number,
//! or an object `{"re": …, "im": …}`.

use num::{BigInt, BigRational, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Arith, Complex64, GaussianRational, Scalar};
use crate::series::{FormalSeries, MultiIndex};

/// One real number: a rational string or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Str(String),
    Num(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Complex { re: Real, #[serde(default)] im: Option<Real> },
    Real(Real),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub q: Vec<u32>,
    pub re: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Real>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub n: usize,
    pub order: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub n: usize,
    pub order_cap: usize,
    pub components: Vec<SeriesJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_diffeo: Option<bool>,
}

fn real_exact(r: &Real) -> Result<BigRational> {
    match r {
        Real::Str(s) => parse_rational(s),
        Real::Num(x) if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15 => {
            Ok(BigRational::from_integer(BigInt::from(*x as i64)))
        }
        Real::Num(x) => Err(Error::Invalid(format!(
            "non-integer number {x} in exact mode; write it as a \"p/q\" string"
        ))),
    }
}

fn real_float(r: &Real) -> Result<f64> {
    match r {
        Real::Num(x) => Ok(*x),
        Real::Str(s) => {
            if let Ok(v) = s.trim().parse::<f64>() {
                return Ok(v);
            }
            parse_rational(s)?
                .to_f64()
                .ok_or_else(|| Error::Invalid(format!("cannot convert {s:?} to float")))
        }
    }
}

pub fn parse_parts(re: &Real, im: Option<&Real>, arith: Arith) -> Result<Scalar> {
    match arith {
        Arith::Exact => Ok(Scalar::Exact(GaussianRational {
            re: real_exact(re)?,
            im: match im {
                Some(i) => real_exact(i)?,
                None => BigRational::from_integer(0.into()),
            },
        })),
        Arith::Float { .. } => Ok(Scalar::Float(Complex64::new(
            real_float(re)?,
            match im {
                Some(i) => real_float(i)?,
                None => 0.0,
            },
        ))),
    }
}

pub fn parse_scalar(r: &ScalarRepr, arith: Arith) -> Result<Scalar> {
    match r {
        ScalarRepr::Real(x) => parse_parts(x, None, arith),
        ScalarRepr::Complex { re, im } => parse_parts(re, im.as_ref(), arith),
    }
}

/// Real and imaginary parts; the imaginary part is omitted when zero.
pub fn scalar_parts(s: &Scalar) -> (Real, Option<Real>) {
    match s {
        Scalar::Exact(g) => (
            Real::Str(format_rational(&g.re)),
            (!g.is_real()).then(|| Real::Str(format_rational(&g.im))),
        ),
        Scalar::Float(z) => (Real::Num(z.re), (z.im != 0.0).then_some(Real::Num(z.im))),
    }
}

pub fn scalar_repr(s: &Scalar) -> ScalarRepr {
    match scalar_parts(s) {
        (re, None) => ScalarRepr::Real(re),
        (re, im) => ScalarRepr::Complex { re, im },
    }
}

pub fn series_to_json(f: &FormalSeries) -> SeriesJson {
    SeriesJson {
        n: f.n(),
        order: f.cap(),
        terms: f
            .terms()
            .map(|(q, c)| {
                let (re, im) = scalar_parts(c);
                TermJson {
                    q: q.to_vec(f.n()),
                    re,
                    im,
                }
            })
            .collect(),
    }
}

pub fn series_from_json(j: &SeriesJson, arith: Arith) -> Result<FormalSeries> {
    let mut terms = Vec::with_capacity(j.terms.len());
    for t in &j.terms {
        if t.q.len() != j.n {
            return Err(Error::Invalid(format!(
                "exponent vector {:?} has length {} but n = {}",
                t.q,
                t.q.len(),
                j.n
            )));
        }
        terms.push((MultiIndex::from_slice(&t.q)?, parse_parts(&t.re, t.im.as_ref(), arith)?));
    }
    FormalSeries::from_terms(j.n, j.order, arith, terms)
}
