//! Lie brackets of fields and the action of jet diffeomorphisms on them.
//!
//! A `JetDiffeo` stores the map from new to old coordinates, and
//! `pullback` rewrites a field in the new coordinates. To first order,
//! `pullback(Id + U, X) = X + [U, X]`.

use cartan_nf::field::{exp_conjugate, flow_map};
use cartan_nf::{Arith, FormalSeries, JetDiffeo, MultiIndex, VectorField};

fn main() -> cartan_nf::Result<()> {
    let a = Arith::Exact;
    let cap = 6;
    let x = VectorField::diagonal_linear(&[a.int(1), a.int(2)], cap, a);
    let u = VectorField::monomial(2, cap, a, MultiIndex::new(&[0, 2]), 0, a.ratio(1, 3));

    // [x∂x + 2y∂y, y²∂x] has weight 2·2 − 1 = 3
    println!("[S, U] =\n{}", x.bracket(&u)?);

    let phi = JetDiffeo::id_plus(&u)?;
    let moved = phi.pullback(&x)?;
    println!("pullback(Id+U, S) =\n{moved}");

    let back = phi.invert()?.pullback(&moved)?;
    assert_eq!(back, x);

    // the time-one flow conjugates like exp(ad U)
    let flow = flow_map(&u)?;
    let lhs = flow.pullback(&x)?;
    let rhs = exp_conjugate(&u, &x)?;
    println!("flow and exp(ad U) agree: {}", lhs == rhs);

    let y = FormalSeries::var(2, cap, a, 1);
    println!("U(y) = {}", u.lie_derivative(&y));
    Ok(())
}
