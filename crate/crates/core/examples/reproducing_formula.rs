//! A continuous reproducing pair on the line: fit the normalizer and watch
//! the truncated synthesis residual shrink as the window widens.

use hglp::harness::{reproduce_check, ReproduceSettings};
use hglp::kernels::{bump, bump_at, kernel_by_name, HeatConfig};
use hglp::reproducing::{pair_kernel, PairMode, ReproducingPair};
use hglp::{GridSpec, GroupSpec};

fn main() -> hglp::Result<()> {
    let g = GroupSpec::abelian(1)?;
    let phi = kernel_by_name(&g, "dgauss:1", &HeatConfig::default())?.with_quad_points(201)?;
    let k = pair_kernel(&g, &phi, &phi, 201)?;
    let mut pair = ReproducingPair::from_kernels(vec![phi.clone()], vec![phi], vec![k], PairMode::Continuous)?;
    let probes = [bump(&g), bump_at(&g, 0.8)?, bump_at(&g, 1.25)?]
        .into_iter()
        .map(|p| p.with_quad_points(81))
        .collect::<hglp::Result<Vec<_>>>()?;
    let s = ReproduceSettings {
        eps: 2f64.powi(-5),
        big_b: 2f64.powi(5),
        widenings: 3,
        out: GridSpec::for_group(&g, 4.0, 41)?,
        probe_out: GridSpec::for_group(&g, 4.0, 21)?,
        residual_bound: 0.05,
    };
    for row in reproduce_check(&g, &mut pair, &probes, &s, "example")? {
        println!("{} | {:.3e} | {}", row.quantity, row.lhs, if row.pass { "pass" } else { "FAIL" });
    }
    println!("normalizer c = {:.6}", pair.normalizer());
    Ok(())
}
