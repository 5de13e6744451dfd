//! Stepwise normalization of x²∂x + (x+y)∂y.
//!
//! The linear part is triangular, so the field is first written in
//! eigen-coordinates x = u, y = −u + v. The normal form is u²∂u + v∂v and
//! the change of coordinates v1 = v + Σ (k−1)! u^k diverges.

use cartan_nf::families::two_variable_example;
use cartan_nf::normalizer::{diagonalize_linear_part, poincare_dulac_normalize, Gauge};

fn main() -> cartan_nf::Result<()> {
    let cap = 12;
    let x = two_variable_example(cap);
    let (p, eig) = diagonalize_linear_part(&x)?;
    println!("eigenvalues {eig:?}");
    let diag = p.pullback(&x)?;
    println!("in eigen-coordinates:\n{diag}");

    let pd = poincare_dulac_normalize(&diag, &diag.jet(1), cap, Gauge::ZeroOnKernel)?;
    println!("normal form:\n{}", pd.nf);

    let forward = pd.phi.invert()?;
    for k in 2..=cap as u32 {
        println!("  coefficient of u^{k:<2} in v1: {}", forward.components()[1].coeff_of(&[k, 0]));
    }
    Ok(())
}
