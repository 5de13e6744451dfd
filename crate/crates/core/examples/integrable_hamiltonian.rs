//! Two commuting Hamiltonians with nonresonant quadratic part: the
//! normalized Hamiltonian fields depend on the actions x_k y_k only.

use cartan_nf::families::integrable_pair;
use cartan_nf::hamiltonian::run_ito;
use cartan_nf::normalizer::{Mode, NormalizeOptions};
use cartan_nf::Arith;

fn main() -> cartan_nf::Result<()> {
    let order = 10;
    let exact = Arith::Exact;
    // coefficients reach ~1e4 at this order, so the absolute zero test
    // needs room above the rounding noise
    let float = Arith::float_with(1e-6)?;
    let cases = [
        ("exact, λ = (1, i)", exact, [exact.one(), exact.imag_unit()]),
        ("float, λ = (1, √2)", float, [float.one(), float.real_f64(2f64.sqrt())?]),
    ];
    for (name, arith, lambda) in cases {
        let hs = integrable_pair(&lambda, order + 1, arith, 3)?;
        let out = run_ito(&hs, 20, &NormalizeOptions::new(order, Mode::Newton))?;
        let r = &out.report;
        println!("{name}: (*) {} commute {} action normal form {:?}", r.star.holds, r.commute, r.action_normal_form);
        if let Some(n) = &out.normalized {
            println!("  checks {:?}, near resonances {}", n.report.checks, n.report.near_resonances.len());
        }
    }
    Ok(())
}
