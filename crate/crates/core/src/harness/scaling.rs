//! Scaling identities for `(T_t f)(x) = f(A_t x)` checked on matched grids:
//! `T_t F**_{N,R} = (T_t F)**_{N,tR}`, `T_t(f*g) = t^gamma (T_t f)*(T_t g)`
//! and `T_t M f = M T_t f`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::ReportRow;
use crate::conv::{convolve, peetre_max, scale_fn, scale_sampled, Field, HlOperator, HlRadii, MaximalParams};
use crate::error::Result;
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;

/// Largest relative gap accepted for each identity.
pub const SCALING_TOL: f64 = 1e-3;

type Profile = Vec<(f64, Vec<f64>, Vec<f64>)>;

fn random_profile(g: &GroupSpec, rng: &mut ChaCha8Rng) -> Profile {
    (0..3)
        .map(|_| {
            let c = (0..g.dim()).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let w = (0..g.dim()).map(|_| rng.gen_range(2.0..5.0)).collect();
            (rng.gen_range(-1.0..1.0), c, w)
        })
        .collect()
}

fn eval_profile(p: &Profile, x: &[f64]) -> f64 {
    p.iter()
        .map(|(a, c, w)| {
            let e: f64 = x.iter().zip(c).zip(w).map(|((xi, ci), wi)| wi * (xi - ci) * (xi - ci)).sum();
            a * (-e).exp()
        })
        .sum()
}

/// `max |a - b| / max |a|` over matching nodes.
pub fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale > 0.0 {
        gap / scale
    } else {
        gap
    }
}

/// One row per identity and per `t`, on a `points`-per-axis grid of the
/// given `radius`.
pub fn scaling_identities(
    g: &GroupSpec,
    ts: &[f64],
    radius: f64,
    points: usize,
    seed: u64,
    experiment: &str,
) -> Result<Vec<ReportRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = GridSpec::for_group(g, radius, points)?;
    let pf = random_profile(g, &mut rng);
    let ph = random_profile(g, &mut rng);
    let f = |x: &[f64]| eval_profile(&pf, x);
    let h = |x: &[f64]| eval_profile(&ph, x);
    let sampled = grid.sample(f, "F")?;
    let hl = HlOperator::new(g, &grid, &HlRadii::All)?;
    let mf = hl.apply(&sampled)?;
    let params = MaximalParams::new(2.0 * g.gamma(), 1.0)?;
    let pm = peetre_max(g, &sampled, &params)?.field;
    let fh = convolve(g, Field::func(&f, &grid), Field::func(&h, &grid), &grid)?;
    let mut rows = Vec::new();
    for &t in ts {
        let tgrid = grid.dilated(g, 1.0 / t);
        let tf = scale_sampled(g, t, &sampled)?;

        let lhs = scale_sampled(g, t, &pm)?;
        let rhs = peetre_max(g, &tf, &MaximalParams::new(params.n, t * params.r_scale)?)?.field;
        rows.push(gap_row(experiment, "peetre-scaling", t, &lhs, &rhs));

        let tfe = scale_fn(g, t, f)?;
        let the = scale_fn(g, t, h)?;
        let lhs = scale_sampled(g, t, &fh)?;
        let rhs = convolve(g, Field::func(&tfe, &tgrid), Field::func(&the, &tgrid), &tgrid)?.scaled(t.powf(g.gamma()));
        rows.push(gap_row(experiment, "convolution-scaling", t, &lhs, &rhs));

        let lhs = scale_sampled(g, t, &mf)?;
        let rhs = HlOperator::new(g, &tgrid, &HlRadii::All)?.apply(&tf)?;
        rows.push(gap_row(experiment, "maximal-scaling", t, &lhs, &rhs));
    }
    Ok(rows)
}

fn gap_row(experiment: &str, tag: &str, t: f64, lhs: &SampledFunction, rhs: &SampledFunction) -> ReportRow {
    let gap = relative_gap(lhs.values(), rhs.values());
    let same_grid = lhs.grid() == rhs.grid() || grids_close(lhs.grid(), rhs.grid());
    let norm = lhs.max_abs();
    ReportRow::new(experiment, tag, format!("t = {t}"), gap * norm, norm).judged(
        format!("relative gap <= {SCALING_TOL} on matched grids"),
        SCALING_TOL,
        same_grid && gap <= SCALING_TOL,
    )
}

fn grids_close(a: &GridSpec, b: &GridSpec) -> bool {
    a.counts() == b.counts() && a.extents().iter().zip(b.extents()).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        let rows = scaling_identities(&g, &[0.5, 2.0], 2.5, 9, 3, "t").unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.pass, "{r:?}");
            assert!(r.ratio < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn gap_detects_mismatch() {
        assert_eq!(relative_gap(&[2.0, 1.0], &[2.0, 1.0]), 0.0);
        assert!((relative_gap(&[2.0, 1.0], &[2.0, 1.5]) - 0.25).abs() < 1e-15);
        assert_eq!(relative_gap(&[0.0], &[0.5]), 0.5);
    }
}
