//! Left-invariant derivatives, the sublaplacian and homogeneous Taylor
//! polynomials.

use hglp::calculus::{invariant_derivative, step_for_order, sublaplacian, taylor_poly, MultiIndex, Side};
use hglp::GroupSpec;

fn main() -> hglp::Result<()> {
    let g = GroupSpec::heisenberg();
    let f = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1]) - 0.5 * x[2] * x[2]).exp() * (1.0 + x[0]);
    let x = [0.3, -0.2, 0.4];
    for j in [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]] {
        let i = MultiIndex(j);
        let v = invariant_derivative(&g, &f, &i, &x, Side::Left, step_for_order(i.order()))?;
        println!("X^{i} f(x) = {v:.8}");
    }
    println!("sublaplacian f(x) = {:.8}", sublaplacian(&g, f, &x)?);

    let p = taylor_poly(&g, f, &x, 2.0, Side::Left)?;
    println!("Taylor polynomial of homogeneous degree {} at x:", p.hom_degree());
    for (i, c) in p.coeffs() {
        println!("  {i}: {c:.6}");
    }
    // f(x y) - P(y) shrinks like rho(y)^3
    for h in [0.2, 0.1, 0.05] {
        let y = g.dilate(h, &[1.0, 1.0, 1.0])?;
        println!("remainder at rho(y) = {:.3}: {:.3e}", g.hom_norm(&y), p.remainder(&g, f, &y));
    }
    Ok(())
}
