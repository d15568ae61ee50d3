//! Named kernels, moment certificates and the decay of the correlation
//! `C(eta, psi, t, L)` on the plane.

use hglp::calculus::MultiIndex;
use hglp::kernels::{bump, bump_at, certify_moments, corr_decay, kernel_by_name, vanishing_moment_kernel, HeatConfig};
use hglp::GroupSpec;

fn main() -> hglp::Result<()> {
    let g = GroupSpec::abelian(2)?;
    let heat = HeatConfig::default();
    for name in ["bump", "bump@0.5", "dgauss:1,0", "dgauss:2,1"] {
        let k = kernel_by_name(&g, name, &heat)?;
        println!("{name}: moment order {}, integral {:.3e}", k.moment_order(), k.integral());
    }
    let d = kernel_by_name(&g, "dgauss:2,1", &heat)?;
    let cert = certify_moments(&g, &d, d.moment_order())?;
    println!("dgauss:2,1 certificate: {} monomials, worst ratio {:.1e}", cert.moments.len(), cert.worst_ratio);

    // narrow eta with two vanishing moments against a wide psi
    let eta = vanishing_moment_kernel(&g, &bump_at(&g, 0.25)?, &MultiIndex(vec![2, 0]))?;
    let psi = vanishing_moment_kernel(&g, &bump(&g), &MultiIndex(vec![0, 1]))?;
    let table = corr_decay(&g, &eta, &psi, 0.0, &[1.0, 2.0, 4.0, 8.0, 16.0], 41, 1e-3)?;
    table.write_csv(std::io::stdout().lock())?;
    println!("large-t slope {:?}, expected {}", table.slope_large, table.expected_large);

    // the Heisenberg heat family is built from the closed-form heat kernel
    let h = GroupSpec::heisenberg();
    let phi = kernel_by_name(&h, "heat:1", &heat)?;
    println!("heat:1 on heisenberg: moment order {}, l1 norm {:.4}", phi.moment_order(), phi.l1_norm());
    Ok(())
}
