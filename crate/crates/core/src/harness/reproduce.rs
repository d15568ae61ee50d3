//! Truncated synthesis residuals of a reproducing pair on a probe family,
//! with the normalizer fitted on the widest window.

use super::report::ReportRow;
use crate::conv::Field;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::kernels::KernelSpec;
use crate::reproducing::{fit_normalizer_from, relative_sup_error, sample_field, ReproducingPair, ResidualRecord, SynthesisFields};

#[derive(Clone, Debug)]
pub struct ReproduceSettings {
    pub eps: f64,
    pub big_b: f64,
    /// Number of narrower windows `[eps 2^k, B 2^-k]`, `k = 1..=widenings`.
    pub widenings: u32,
    /// Grid of the first probe.
    pub out: GridSpec,
    /// Grid of the other probes.
    pub probe_out: GridSpec,
    /// Largest accepted residual on the widest window.
    pub residual_bound: f64,
}

impl ReproduceSettings {
    /// Windows from the narrowest to `[eps, B]`.
    pub fn windows(&self) -> Result<Vec<(f64, f64)>> {
        let w: Vec<(f64, f64)> = (0..=self.widenings)
            .rev()
            .map(|k| {
                let r = 2f64.powi(k as i32);
                (self.eps * r, self.big_b / r)
            })
            .collect();
        if !(w[0].0 < w[0].1) {
            return Err(Error::Config(format!(
                "[{}, {}] is too short for {} widenings",
                self.eps, self.big_b, self.widenings
            )));
        }
        Ok(w)
    }
}

/// Fits the normalizer, records residuals on `pair`, and reports one
/// normalizer row, then per probe a residual row and a monotonicity row.
pub fn reproduce_check(
    g: &GroupSpec,
    pair: &mut ReproducingPair,
    probes: &[KernelSpec],
    s: &ReproduceSettings,
    experiment: &str,
) -> Result<Vec<ReportRow>> {
    if probes.len() < 3 {
        return Err(Error::DegenerateFamily("the probe family needs at least three members".into()));
    }
    let windows = s.windows()?;
    let mut fields = Vec::with_capacity(probes.len());
    let mut targets = Vec::with_capacity(probes.len());
    for (i, p) in probes.iter().enumerate() {
        let out = if i == 0 { &s.out } else { &s.probe_out };
        fields.push(SynthesisFields::compute(g, pair, Field::kernel(p, 1.0), s.eps, s.big_b, out)?);
        targets.push(sample_field(g, Field::kernel(p, 1.0), out)?);
    }
    let widest: Vec<SampledFunction> = fields.iter().map(|f| f.sum(s.eps, s.big_b)).collect::<Result<_>>()?;
    let c = fit_normalizer_from(&widest, &targets)?;
    pair.set_normalizer(c);
    let mut rows = vec![ReportRow::new(experiment, "reproducing-normalizer", "fitted normalizer c", c, 1.0)
        .with_constant(c)
        .judged("c finite and nonzero", f64::NAN, c.is_finite() && c != 0.0)];
    for ((p, f), t) in probes.iter().zip(&fields).zip(&targets) {
        let mut history = Vec::with_capacity(windows.len());
        for &(lo, hi) in &windows {
            let r = relative_sup_error(&f.sum(lo, hi)?.scaled(c), t);
            pair.record(ResidualRecord {
                eps: lo,
                big_b: hi,
                probe: p.name().to_string(),
                residual: r,
            });
            history.push(r);
        }
        let last = history[history.len() - 1];
        let pts = t.grid().counts()[0];
        rows.push(
            ReportRow::new(
                experiment,
                "reproducing-residual",
                format!("||S f - f||_inf / ||f||_inf on [{}, {}]; f = {}; {pts} points per axis", s.eps, s.big_b, p.name()),
                last,
                1.0,
            )
            .with_constant(c)
            .at_most("residual", last, s.residual_bound),
        );
        let monotone = history.windows(2).all(|w| w[1] <= w[0]);
        let trail: Vec<String> = history.iter().map(|r| format!("{r:.3e}")).collect();
        rows.push(
            ReportRow::new(
                experiment,
                "reproducing-residual",
                format!("residuals over widening windows: {}; f = {}", trail.join(" > "), p.name()),
                last,
                history[0],
            )
            .judged("residual non-increasing as the window widens", f64::NAN, monotone),
        );
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{bump, bump_at, kernel_by_name, HeatConfig};
    use crate::reproducing::{pair_kernel, PairMode};

    #[test]
    fn abelian_pair_reproduces() {
        let g = GroupSpec::abelian(1).unwrap();
        let heat = HeatConfig::default();
        let phi = kernel_by_name(&g, "dgauss:1", &heat).unwrap().with_quad_points(201).unwrap();
        let k = pair_kernel(&g, &phi, &phi, 201).unwrap();
        let mut pair = ReproducingPair::from_kernels(vec![phi.clone()], vec![phi], vec![k], PairMode::Continuous).unwrap();
        let probes: Vec<KernelSpec> = [bump(&g), bump_at(&g, 0.8).unwrap(), bump_at(&g, 1.25).unwrap()]
            .into_iter()
            .map(|p| p.with_quad_points(81).unwrap())
            .collect();
        let s = ReproduceSettings {
            eps: 2f64.powi(-5),
            big_b: 2f64.powi(5),
            widenings: 3,
            out: GridSpec::for_group(&g, 4.0, 41).unwrap(),
            probe_out: GridSpec::for_group(&g, 4.0, 21).unwrap(),
            residual_bound: 0.05,
        };
        let rows = reproduce_check(&g, &mut pair, &probes, &s, "t").unwrap();
        assert_eq!(rows.len(), 1 + 2 * 3);
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
        assert_eq!(pair.history().len(), 3 * 4);
        assert!(pair.normalizer() < 0.0);
        let short = ReproduceSettings { widenings: 6, ..s };
        assert!(matches!(short.windows(), Err(Error::Config(_))));
    }
}
