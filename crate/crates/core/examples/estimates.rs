//! Estimate diagnostics along a Newton run: the constants of the
//! cohomological bound, which hypotheses hold, and the radius schedule.

use cartan_nf::families::{conjugated_family, FamilyConfig};
use cartan_nf::normalizer::{normalize_family, Mode, NormalizeOptions};
use cartan_nf::{Arith, LieMorphism};

fn main() -> cartan_nf::Result<()> {
    let s = LieMorphism::from_ints(&[&[1, -1]], Arith::Exact)?;
    let cfg = FamilyConfig {
        cap: 16,
        orders: vec![1],
        jet_lo: 2,
        jet_hi: 3,
        jet_terms: 2,
    };
    let fam = conjugated_family(&s, &cfg, 2)?;
    let mut opts = NormalizeOptions::new(16, Mode::Newton);
    opts.seed = 5;
    let out = normalize_family(&fam.x, &s, &opts)?;
    println!("kappa {:?}", out.report.kappa);
    for e in &out.report.estimates {
        let c = &e.constants;
        println!(
            "m={:<2} t0={:.3} eta={:.3e} c1={:.3e} omega={} gamma={:.4}  theorem hyp {}  {} bounds hold: {}",
            c.m,
            c.t0,
            c.eta,
            c.c1,
            c.omega,
            c.gamma,
            e.hypotheses.theorem,
            e.checks.len(),
            e.all_hold
        );
    }
    for r in &out.report.radius_ledger {
        println!("R_{} = {:.5}  rho = {:.5}  next {:.5}", r.k, r.radius, r.rho, r.next_radius);
    }
    if let Some(o) = &out.report.radius_observation {
        println!("decreasing {}  k1 = {}", o.decreasing, o.k1);
    }
    Ok(())
}
