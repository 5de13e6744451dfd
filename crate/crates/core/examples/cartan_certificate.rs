//! Decomposing a normal family over the first-integral module and
//! certifying it is of Cartan type.

use cartan_nf::cartan::{decompose_over_module, FirstIntegralRing};
use cartan_nf::{Arith, FormalSeries, LieMorphism};

fn main() -> cartan_nf::Result<()> {
    let a = Arith::Exact;
    let cap = 7;
    let s = LieMorphism::from_ints(&[&[1, 0, -1, 0], &[0, 1, 0, -1]], a)?;
    let ring = FirstIntegralRing::new(&s, 4);
    println!("first-integral monomials up to degree 4: {:?}", ring.monomials.iter().map(|q| q.to_vec(4)).collect::<Vec<_>>());

    // X1 = S1 + (1/2)S2,  X2 = x1y1·S1 + 3·x2y2·S2
    let u1 = FormalSeries::from_ints(4, cap, a, &[(&[1, 0, 1, 0], 1)]);
    let u2 = FormalSeries::from_ints(4, cap, a, &[(&[0, 1, 0, 1], 3)]);
    let x1 = &s.basis_field(0, cap) + &s.basis_field(1, cap).scale(&a.ratio(1, 2));
    let x2 = &s.basis_field(0, cap).mul_function(&u1) + &s.basis_field(1, cap).mul_function(&u2);

    let dec = decompose_over_module(&[x1, x2], &s)?;
    println!("det A = {}", dec.det);
    let cert = dec.certificate();
    println!(
        "cartan {}  orders {:?}  ord det {:?} (predicted {})  p0 {:?}",
        cert.cartan, cert.orders, cert.ord_det, cert.predicted_ord_det, cert.p0
    );
    Ok(())
}
