//! Test families: a base kernel, its dilates and its left translates.

use crate::conv::Field;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::group::GroupSpec;
use crate::kernels::{kernel_by_name, product_extents, HeatConfig, KernelSpec};

/// `f(x) = kappa(x0^{-1} x)` with a grid carrying its mass.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub name: String,
    kernel: KernelSpec,
    translate: Option<Vec<f64>>,
    grid: GridSpec,
}

impl TestFunction {
    pub fn new(g: &GroupSpec, kernel: KernelSpec, translate: Option<Vec<f64>>, points: usize) -> Result<Self> {
        let base = kernel.clone().with_quad_points(points)?.quad_grid().clone();
        let (name, grid) = match &translate {
            None => (kernel.name().to_string(), base),
            Some(x0) => {
                if x0.len() != g.dim() {
                    return Err(Error::invalid("translate has the wrong dimension"));
                }
                let shift: Vec<f64> = x0.iter().map(|v| v.abs()).collect();
                let ext = product_extents(g, &shift, base.extents());
                (format!("{} at {x0:?}", kernel.name()), GridSpec::new(ext, vec![points; g.dim()])?)
            }
        };
        Ok(Self {
            name,
            kernel,
            translate,
            grid,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn eval(&self, g: &GroupSpec, x: &[f64]) -> f64 {
        match &self.translate {
            None => self.kernel.eval(x),
            Some(x0) => {
                let n = x.len();
                let (mut s, mut y) = (vec![0.0; n], vec![0.0; n]);
                g.left_div_into(x0, x, &mut s, &mut y);
                self.kernel.eval(&y)
            }
        }
    }

    /// Runs `body` with the function as a convolution factor.
    pub fn with_field<R>(&self, g: &GroupSpec, body: impl FnOnce(Field<'_>) -> R) -> R {
        let f = |x: &[f64]| self.eval(g, x);
        body(Field::func(&f, &self.grid))
    }
}

/// `base@s` for every dilation `s`, then `base` translated by each point.
pub fn build_family(
    g: &GroupSpec,
    base: &str,
    dilations: &[f64],
    translates: &[Vec<f64>],
    points: usize,
    heat: &HeatConfig,
) -> Result<Vec<TestFunction>> {
    let mut out = Vec::new();
    for &s in dilations {
        let name = if s == 1.0 { base.to_string() } else { format!("{base}@{s}") };
        out.push(TestFunction::new(g, kernel_by_name(g, &name, heat)?, None, points)?);
    }
    let k = kernel_by_name(g, base, heat)?;
    for x0 in translates {
        out.push(TestFunction::new(g, k.clone(), Some(x0.clone()), points)?);
    }
    if out.is_empty() {
        return Err(Error::DegenerateFamily("the test family is empty".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translates_move_the_mass() {
        let g = GroupSpec::heisenberg();
        let fam = build_family(&g, "bump", &[1.0, 0.5], &[vec![0.5, 0.0, 0.25]], 17, &HeatConfig::default()).unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(fam[1].name, "bump@0.5");
        let x0 = [0.5, 0.0, 0.25];
        assert!((fam[2].eval(&g, &x0) - fam[0].eval(&g, &[0.0; 3])).abs() < 1e-14);
        let m0 = fam[0].grid().integrate(|x| fam[0].eval(&g, x)).unwrap();
        let m2 = fam[2].grid().integrate(|x| fam[2].eval(&g, x)).unwrap();
        assert!((m0 - m2).abs() < 1e-3 * m0, "{m0} {m2}");
        assert!(build_family(&g, "bump", &[], &[], 17, &HeatConfig::default()).is_err());
    }
}
