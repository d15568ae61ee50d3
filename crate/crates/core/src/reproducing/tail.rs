use rayon::prelude::*;

use super::pair::{PairMode, ReproducingPair};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::kernels::{KernelBody, KernelSpec};

/// `zeta = c sum_l int_1^T K^(l)_t dt/t` on `grid` (default: the sample grid
/// of the first pair kernel). With `T` large, `zeta` differs from the full
/// tail `int_1^inf` by `zeta_T`, whose amplitude is `T^{-gamma}`.
pub fn tail_kernel(g: &GroupSpec, pair: &ReproducingPair, t_max: f64, grid: Option<GridSpec>) -> Result<KernelSpec> {
    if pair.mode() != PairMode::Continuous {
        return Err(Error::invalid("the tail kernel is defined for continuous pairs"));
    }
    if !(t_max > 1.0) {
        return Err(Error::invalid(format!("the tail integral needs T > 1, got {t_max}")));
    }
    let grid = match grid {
        Some(grid) => grid,
        None => match pair.kernels()[0].body() {
            KernelBody::Sampled(s) => s.grid().clone(),
            KernelBody::PolyGauss(_) => pair.kernels()[0].quad_grid().clone(),
        },
    };
    let step = (1.0 / pair.b()).ln() / pair.u_subdiv() as f64;
    let n = (t_max.ln() / step).round().max(1.0) as usize;
    let ts: Vec<f64> = (0..=n).map(|k| (k as f64 * step).exp()).collect();
    let ws: Vec<f64> = (0..=n).map(|k| if k == 0 || k == n { 0.5 * step } else { step }).collect();
    let c = pair.normalizer();
    let dim = g.dim();
    let nodes = grid.nodes_flat();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = &nodes[i * dim..(i + 1) * dim];
            let mut acc = 0.0;
            for k in pair.kernels() {
                for (t, w) in ts.iter().zip(&ws) {
                    acc += w * k.eval_dilated(g, *t, x);
                }
            }
            c * acc
        })
        .collect();
    let zeta = SampledFunction::new(grid, values, format!("zeta up to T = {t_max}"))?;
    if zeta.max_abs() == 0.0 {
        return Err(Error::DegeneratePair("the tail kernel vanishes".into()));
    }
    let tail = zeta.boundary_mass_fraction();
    if tail > 1e-3 {
        return Err(Error::GridTooSmall(format!("{tail:.2e} of zeta sits on the grid boundary")));
    }
    Ok(KernelSpec::sampled("zeta", zeta, -1.0, "tail kernel of a reproducing pair"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::MultiIndex;
    use crate::conv::Field;
    use crate::kernels::{bump, bump_at, dgauss, HeatConfig};
    use crate::reproducing::fit_normalizer;

    #[test]
    fn abelian_tail_has_unit_mass() {
        let g = GroupSpec::abelian(1).unwrap();
        let phi = dgauss(&g, &MultiIndex(vec![1])).unwrap();
        let mut pair = ReproducingPair::new(&g, vec![phi.clone()], vec![phi], PairMode::Continuous, 0.0).unwrap();
        let out = GridSpec::new(vec![4.0], vec![41]).unwrap();
        let probes: Vec<_> = [bump(&g), bump_at(&g, 0.8).unwrap(), bump_at(&g, 1.25).unwrap()]
            .into_iter()
            .map(|k| k.with_quad_points(81).unwrap())
            .collect();
        let fields: Vec<Field> = probes.iter().map(|p| Field::kernel(p, 1.0)).collect();
        fit_normalizer(&g, &mut pair, &fields, 1.0 / 32.0, 32.0, &out).unwrap();
        let grid = GridSpec::new(vec![12.0], vec![241]).unwrap();
        let mut zeta = tail_kernel(&g, &pair, 2f64.powi(8), Some(grid)).unwrap();
        assert!((zeta.integral() - 1.0).abs() < 0.03, "{}", zeta.integral());
        let s = zeta.seminorm(&g, 1).unwrap();
        assert!(s.is_finite() && s > 0.0);
    }

    #[test]
    fn heat_tail_has_unit_mass() {
        let g = GroupSpec::heisenberg();
        let mut pair = ReproducingPair::heat(&g, 1, 1, &HeatConfig::default()).unwrap();
        // the heat pair integrates to delta / 8
        pair.set_normalizer(8.0);
        let zeta = tail_kernel(&g, &pair, 2f64.powi(6), None).unwrap();
        assert!((zeta.integral() - 1.0).abs() < 0.03, "{}", zeta.integral());
    }

    #[test]
    fn degenerate_or_discrete_pairs_fail() {
        let g = GroupSpec::abelian(1).unwrap();
        let phi = dgauss(&g, &MultiIndex(vec![1])).unwrap();
        let pair = ReproducingPair::new(&g, vec![phi.clone()], vec![phi], PairMode::Continuous, 0.0).unwrap();
        let grid = GridSpec::new(vec![12.0], vec![241]).unwrap();
        let dead = pair.scaled_phis(0.0);
        assert!(matches!(tail_kernel(&g, &dead, 64.0, Some(grid.clone())), Err(Error::DegeneratePair(_))));
        let disc = pair.clone().with_mode(PairMode::Discrete);
        assert!(tail_kernel(&g, &disc, 64.0, Some(grid.clone())).is_err());
        assert!(tail_kernel(&g, &pair, 0.5, Some(grid)).is_err());
        let small = GridSpec::new(vec![1.0], vec![21]).unwrap();
        assert!(matches!(tail_kernel(&g, &pair, 64.0, Some(small)), Err(Error::GridTooSmall(_))));
    }
}
