//! Group law, dilations, the homogeneous norm and polar integration on the
//! Heisenberg group.

use hglp::group::{polar_integrate, validate_group, PolarQuadrature};
use hglp::{GridSpec, GroupSpec};

fn main() -> hglp::Result<()> {
    let mut g = GroupSpec::heisenberg();
    let x = [1.0, 0.5, -0.25];
    let y = [-0.3, 2.0, 1.0];
    println!("x y = {:?}", g.multiply(&x, &y)?);
    println!("A_2 x = {:?}", g.dilate(2.0, &x)?);
    println!("rho(x) = {:.6}, rho(A_2 x) = {:.6}", g.hom_norm(&x), g.hom_norm(&g.dilate(2.0, &x)?));

    let report = validate_group(&mut g, 10_000, 1)?;
    println!(
        "associativity {:.1e}, automorphism {:.1e}, Haar {:.1e}, c0_hat {:.4}, stored c0 {:.4}",
        report.associativity_defect, report.automorphism_defect, report.haar_defect, report.c0_hat, report.c0
    );

    let gaussian = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp();
    let polar = polar_integrate(&g, gaussian, &PolarQuadrature::new(&g, 24, 6.0, 30)?)?;
    let cartesian = GridSpec::new(vec![6.0; 3], vec![33; 3])?.integrate(gaussian)?;
    println!("gaussian mass: polar {polar:.8}, cartesian {cartesian:.8}, exact {:.8}", std::f64::consts::PI.powf(1.5));
    Ok(())
}
