//! Sparse truncated series: products, composition, exact division and the
//! weighted majorant norm.

use cartan_nf::series::{inverse_bound, majorant_norm};
use cartan_nf::{Arith, FormalSeries, PolyradiusSpec};

fn main() -> cartan_nf::Result<()> {
    let a = Arith::Exact;
    // 1 + x + y, cap 4
    let f = FormalSeries::from_ints(2, 4, a, &[(&[0, 0], 1), (&[1, 0], 1), (&[0, 1], 1)]);
    let sq = f.checked_mul(&f)?;
    println!("(1+x+y)^2 = {sq}");
    println!("(1+x+y)^5 mod deg 5 = {}", f.pow(5));

    // x ↦ x + y², y ↦ y
    let subs = [
        FormalSeries::from_ints(2, 4, a, &[(&[1, 0], 1), (&[0, 2], 1)]),
        FormalSeries::var(2, 4, a, 1),
    ];
    println!("f(x + y², y) = {}", f.compose(&subs)?);

    let q = sq.div_exact(&f)?.expect("divisible");
    assert_eq!(q, f);

    let p = PolyradiusSpec::new(0.5, vec![1.0, 1.5], 1.0)?;
    println!("|f| at radii (0.5, 0.5^1.5) = {:.6}", majorant_norm(&f, &p));
    let mono = FormalSeries::from_ints(2, 4, a, &[(&[0, 0], 1)]);
    let small = FormalSeries::from_ints(2, 4, a, &[(&[1, 1], 1)]);
    println!("|1/(1+xy)| <= {:.6}", inverse_bound(&mono, &small, &p)?);
    Ok(())
}
