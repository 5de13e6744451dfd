//! Normalization of a whole family, stepwise or by Newton doubling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cartan::{decompose_over_module, CartanCertificate};
use crate::error::{Error, Result};
use crate::field::{JetDiffeo, VectorField};
use crate::io::{scalar_repr, ScalarRepr};
use crate::scalar::Scalar;
use crate::series::PolyradiusSpec;
use crate::torus::LieMorphism;

use super::estimates::{choose_kappa, estimate_diagnostics, EstimateDiagnostics};
use super::newton::{newton_step, NewtonState, StepReport};
use super::poincare_dulac::{diagonalize_linear_part, normalize_degrees, NearResonance};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Stepwise,
    #[default]
    Newton,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stepwise" => Ok(Mode::Stepwise),
            "newton" => Ok(Mode::Newton),
            other => Err(Error::Invalid(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Stepwise => "stepwise",
            Mode::Newton => "newton",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NormalizeOptions {
    pub order: usize,
    pub mode: Mode,
    /// Seeds the choice of `κ` for the estimates.
    pub seed: u64,
    /// Compute estimate diagnostics and the radius schedule after each
    /// Newton step.
    pub estimates: bool,
    /// Starting radius `r` of the schedule.
    pub radius: f64,
}

impl NormalizeOptions {
    pub fn new(order: usize, mode: Mode) -> Self {
        NormalizeOptions {
            order,
            mode,
            seed: 0,
            estimates: true,
            radius: 1.0,
        }
    }
}

/// One line of the radius schedule: `ρ = m^{−1/m}·R_k`,
/// `R_{k+1} = γ_k·m^{−2/m}·R_k`.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusEntry {
    pub k: usize,
    pub m: usize,
    pub radius: f64,
    pub rho: f64,
    pub next_radius: f64,
    pub gamma: f64,
}

/// Behaviour of the computed prefix of the radius sequence.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusObservation {
    pub radii: Vec<f64>,
    pub decreasing: bool,
    /// Smallest `k1` (as an index into `radii`) with `R_k > R_{k1}/2` for
    /// every later `k` of the prefix.
    pub k1: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalChecks {
    /// Every field commutes with the action up to the cap.
    pub normalized: bool,
    /// `pullback(psi, X_i) = NF_i` exactly.
    pub conjugation: bool,
    /// The normal forms lie in the first-integral module.
    pub decomposes: bool,
}

impl FinalChecks {
    pub fn passed(&self) -> bool {
        self.normalized && self.conjugation
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizeReport {
    pub mode: Mode,
    pub order: usize,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    /// `X_1` has linear part `S(g0)`.
    pub g0: Vec<ScalarRepr>,
    /// A linear change of coordinates was applied first.
    pub diagonalized: bool,
    pub stepwise_degrees: Vec<usize>,
    /// First Newton order (a power of two), when Newton mode ran.
    pub m0: Option<usize>,
    pub newton_steps: Vec<StepReport>,
    pub certificate: Option<CartanCertificate>,
    pub certificate_error: Option<String>,
    pub kappa: Option<Vec<f64>>,
    pub estimates: Vec<EstimateDiagnostics>,
    pub estimate_errors: Vec<String>,
    pub gamma: Vec<f64>,
    pub radius_ledger: Vec<RadiusEntry>,
    pub radius_observation: Option<RadiusObservation>,
    pub near_resonances: Vec<NearResonance>,
    pub checks: FinalChecks,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub nf: Vec<VectorField>,
    pub psi: JetDiffeo,
    pub report: NormalizeReport,
}

/// `g` with `S(g)` having the eigenvalues `eig`, if any.
fn solve_for_g(s: &LieMorphism, eig: &[Scalar]) -> Option<Vec<Scalar>> {
    let arith = s.arith();
    let linv = s.minor_inverse();
    let cols = s.minor_cols();
    let g: Vec<Scalar> = (0..s.l())
        .map(|j| {
            let mut acc = arith.zero();
            for (r, &k) in cols.iter().enumerate() {
                acc += &(&linv[j][r] * &eig[k]);
            }
            acc
        })
        .collect();
    let back = s.eigenvalues(&g);
    back.iter().zip(eig).all(|(a, b)| arith.approx_eq(a, b)).then_some(g)
}

fn observe(radii: &[f64]) -> RadiusObservation {
    let decreasing = radii.windows(2).all(|w| w[1] <= w[0]);
    let k1 = (0..radii.len())
        .find(|&j| radii[j..].iter().all(|r| *r > radii[j] / 2.0))
        .unwrap_or(radii.len().saturating_sub(1));
    RadiusObservation {
        radii: radii.to_vec(),
        decreasing,
        k1,
    }
}

/// Normalize `x` (with `x[0]` regular) to order `opts.order`.
pub fn normalize_family(x: &[VectorField], s: &LieMorphism, opts: &NormalizeOptions) -> Result<Normalized> {
    let l = s.l();
    let cap = opts.order;
    if x.len() != l {
        return Err(Error::Invalid(format!("{} fields for an action of rank {l}", x.len())));
    }
    if cap < 2 {
        return Err(Error::Invalid("truncation order must be at least 2".into()));
    }
    let n = s.n();
    for f in x {
        if f.n() != n {
            return Err(Error::DimensionMismatch(f.n(), n));
        }
        if f.cap() < cap {
            return Err(Error::OrderMismatch(f.cap(), cap));
        }
        if f.arith() != s.arith() {
            return Err(Error::ArithMismatch);
        }
    }
    let orig: Vec<VectorField> = x.iter().map(|f| f.with_cap(cap)).collect();
    for (i, xi) in orig.iter().enumerate().skip(1) {
        if let Some(d) = orig[0].bracket(xi)?.order() {
            return Err(Error::CommutationFailure(format!("[X_1, X_{}] has a term of degree {d}", i + 1)));
        }
    }

    let (p, eig) = diagonalize_linear_part(&orig[0])?;
    let diagonalized = !p.is_identity();
    let mut fields: Vec<VectorField> = if diagonalized {
        orig.iter().map(|f| p.pullback(f)).collect::<Result<_>>()?
    } else {
        orig.clone()
    };
    let mut psi = p;
    let g0 = solve_for_g(s, &eig)
        .ok_or_else(|| Error::LinearPart("the linear part of X_1 is not S(g) for any g".into()))?;
    if !s.is_regular_element(&g0, cap)? {
        return Err(Error::LinearPart(format!("X_1 is not regular up to order {cap}")));
    }

    let mut near = Vec::new();
    let mut stepwise_degrees = Vec::new();
    let mut newton_steps = Vec::new();
    let mut m0 = None;
    let mut estimates = Vec::new();
    let mut estimate_errors = Vec::new();
    let mut kappa = None;
    let mut ledger = Vec::new();
    match opts.mode {
        Mode::Stepwise => {
            normalize_degrees(&mut fields, &eig, 2, cap, &mut psi, &mut near)?;
            stepwise_degrees.extend(2..=cap);
        }
        Mode::Newton => {
            let dmax = fields
                .iter()
                .map(|f| f.order().ok_or_else(|| Error::Invalid("a field vanishes identically".into())))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .unwrap_or(1);
            let start = dmax.max(2).next_power_of_two();
            let pre = start.min(cap);
            normalize_degrees(&mut fields, &eig, 2, pre, &mut psi, &mut near)?;
            stepwise_degrees.extend(2..=pre);
            let mut state = NewtonState::new(fields, pre, psi)?;
            if state.can_step() {
                m0 = Some(start);
                let nf: Vec<VectorField> = (0..l).map(|i| state.nf(i)).collect();
                let dec = decompose_over_module(&nf, s)?;
                if !dec.certificate().cartan {
                    return Err(Error::CartanViolation("junior parts are not free over the first integrals".into()));
                }
                let mut radius = opts.radius;
                while state.can_step() {
                    state = newton_step(&state, s)?;
                    newton_steps.push(state.reports.last().expect("step report").clone());
                    if !opts.estimates {
                        continue;
                    }
                    let rec = state.last.as_ref().expect("solve record");
                    if kappa.is_none() {
                        let dec = &rec.decomposition;
                        let one = crate::series::FormalSeries::one(n, dec.det.cap(), dec.det.arith());
                        let det1 = crate::linalg::series_det(&dec.truncated_matrix(1), &one);
                        match choose_kappa(&det1, opts.seed) {
                            Ok(k) => kappa = Some(k),
                            Err(e) => estimate_errors.push(e.to_string()),
                        }
                    }
                    let Some(kv) = kappa.clone() else { continue };
                    let spec = PolyradiusSpec::new(opts.radius, kv, 1.0)?;
                    match estimate_diagnostics(&state, s, &spec) {
                        Ok(diag) => {
                            let m = rec.m;
                            let mf = m as f64;
                            let gamma = diag.constants.gamma;
                            let next = gamma * mf.powf(-2.0 / mf) * radius;
                            ledger.push(RadiusEntry {
                                k: m.trailing_zeros() as usize,
                                m,
                                radius,
                                rho: mf.powf(-1.0 / mf) * radius,
                                next_radius: next,
                                gamma,
                            });
                            radius = next;
                            estimates.push(diag);
                        }
                        Err(e) => estimate_errors.push(format!("step from order {}: {e}", rec.m)),
                    }
                }
            }
            let reached = state.m;
            fields = state.fields;
            psi = state.psi;
            if reached < cap {
                normalize_degrees(&mut fields, &eig, reached + 1, cap, &mut psi, &mut near)?;
                stepwise_degrees.extend(reached + 1..=cap);
            }
        }
    }

    let (certificate, certificate_error) = match decompose_over_module(&fields, s) {
        Ok(dec) => (Some(dec.certificate()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let normalized = fields.iter().all(|f| s.nonzero_weight_part(f).is_zero());
    let conjugation = orig
        .iter()
        .zip(&fields)
        .map(|(o, f)| Ok(psi.pullback(o)? == *f))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    let gamma = ledger.iter().map(|e| e.gamma).collect();
    let radius_observation = (!ledger.is_empty()).then(|| {
        let mut radii: Vec<f64> = ledger.iter().map(|e| e.radius).collect();
        radii.push(ledger.last().expect("nonempty").next_radius);
        observe(&radii)
    });
    let report = NormalizeReport {
        mode: opts.mode,
        order: cap,
        n,
        l,
        seed: opts.seed,
        g0: g0.iter().map(scalar_repr).collect(),
        diagonalized,
        stepwise_degrees,
        m0,
        newton_steps,
        checks: FinalChecks {
            normalized,
            conjugation,
            decomposes: certificate.is_some(),
        },
        certificate,
        certificate_error,
        kappa,
        estimates,
        estimate_errors,
        gamma,
        radius_ledger: ledger,
        radius_observation,
        near_resonances: near,
    };
    Ok(Normalized { nf: fields, psi, report })
}
