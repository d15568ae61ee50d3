//! g-function, area integral, discrete square function and maximal
//! functions of an atom on the plane.

use hglp::conv::{area_integral, discrete_square, g_function, hl_maximal, peetre_max, Field, HlRadii, MaximalParams, ScaleGrid};
use hglp::kernels::{kernel_by_name, HeatConfig};
use hglp::{GridSpec, GroupSpec};

fn main() -> hglp::Result<()> {
    let g = GroupSpec::abelian(2)?;
    let heat = HeatConfig::default();
    let f = kernel_by_name(&g, "dgauss:1,1", &heat)?.with_quad_points(41)?;
    let kappa = kernel_by_name(&g, "dgauss:2,0", &heat)?.with_quad_points(41)?;
    let out = GridSpec::for_group(&g, 5.0, 41)?;
    let scales = ScaleGrid::dyadic(3, 2)?;

    let gf = g_function(&g, Field::kernel(&f, 1.0), &kappa, &scales, &out)?;
    let area = area_integral(&g, Field::kernel(&f, 1.0), &kappa, &scales, &out)?;
    let dsq = discrete_square(&g, Field::kernel(&f, 1.0), &kappa, 0.5, 2.0, (-3, 3), &out)?;
    for (name, v) in [("g-function", &gf), ("area integral", &area), ("discrete square", &dsq)] {
        println!("{name}: L2 {:.5}, L1 {:.5}", v.lp_norm(2.0, None), v.lp_norm(1.0, None));
    }

    let hl = hl_maximal(&g, &gf, &HlRadii::All)?;
    let peetre = peetre_max(&g, &gf, &MaximalParams::from_r(&g, 1.0, 1.0)?)?;
    println!("Hardy-Littlewood maximal of g: sup {:.5}", hl.values().iter().cloned().fold(0.0, f64::max));
    println!(
        "Peetre maximal of g: sup {:.5}, truncation bound {:.2e}",
        peetre.field.values().iter().cloned().fold(0.0, f64::max),
        peetre.truncation_bound
    );
    Ok(())
}
