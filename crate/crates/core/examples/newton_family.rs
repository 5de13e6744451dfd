//! A normal family hidden by a random polynomial change of coordinates,
//! recovered by Newton degree doubling and by the stepwise method.

use cartan_nf::families::{conjugated_family, FamilyConfig};
use cartan_nf::normalizer::{normalize_family, Mode, NormalizeOptions};
use cartan_nf::{Arith, LieMorphism};

fn main() -> cartan_nf::Result<()> {
    let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], Arith::Exact)?;
    let cfg = FamilyConfig {
        cap: 10,
        orders: vec![1, 3],
        jet_lo: 2,
        jet_hi: 4,
        jet_terms: 4,
    };
    let fam = conjugated_family(&s, &cfg, 11)?;
    let g0: Vec<String> = fam.g0.iter().map(|g| g.to_string()).collect();
    println!("regular element ({})", g0.join(", "));

    for mode in [Mode::Newton, Mode::Stepwise] {
        let out = normalize_family(&fam.x, &s, &NormalizeOptions::new(cfg.cap, mode))?;
        println!("{mode}: stepwise degrees {:?}, checks {:?}", out.report.stepwise_degrees, out.report.checks);
        for st in &out.report.newton_steps {
            println!(
                "  step {} -> {}: weights {}, refinements {}, nilpotent {}, residual zero {}, normalized {}",
                st.m, st.new_m, st.weights, st.refinements, st.nilpotent, st.residual_zero, st.normalized
            );
        }
    }
    Ok(())
}
