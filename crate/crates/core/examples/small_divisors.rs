//! Small-divisor data of a diagonal action: the sequence ω_k, the partial
//! Bruno sum, resonances and a regular element.

use cartan_nf::torus::DEFAULT_BUDGET;
use cartan_nf::{Arith, LieMorphism};

fn main() -> cartan_nf::Result<()> {
    let a = Arith::Exact;
    // two oscillator pairs: integer weights, so every ω_k is 1
    let ito = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], a)?;
    let rep = ito.omega_sequence(4, DEFAULT_BUDGET)?;
    println!("omega {:?}  bruno {}", rep.omega, rep.bruno_partial);
    println!("{} resonant pairs up to degree 16", rep.resonant_set.len());
    let g: Vec<String> = ito.find_regular_element(8, 1, 64)?.iter().map(|g| g.to_string()).collect();
    println!("regular element ({})", g.join(", "));

    let one_two = LieMorphism::from_ints(&[&[1, 2]], a)?;
    let rep = one_two.omega_sequence(3, DEFAULT_BUDGET)?;
    println!("λ = (1,2): resonances {:?}", rep.resonant_set);

    // a single irrational ratio in float mode
    let f = Arith::float();
    let golden = LieMorphism::single(vec![f.one(), f.real_f64((1.0 + 5f64.sqrt()) / 2.0)?], f)?;
    let rep = golden.omega_sequence(5, DEFAULT_BUDGET)?;
    for (k, w) in rep.omega.iter().enumerate() {
        println!("  ω_{k} = {w:.6}");
    }
    println!("  bruno partial {:.6}", rep.bruno_partial);
    Ok(())
}
