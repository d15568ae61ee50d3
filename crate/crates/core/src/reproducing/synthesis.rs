use super::pair::{PairMode, ReproducingPair};
use crate::conv::{convolve, Field};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::numeric::BlockSum;

/// `sum_l f * K^(l)_t` at every scale node of a pair between `eps` and
/// `B`. Partial sums over narrower windows reuse the stored fields.
#[derive(Clone, Debug)]
pub struct SynthesisFields {
    mode: PairMode,
    /// Spacing of the nodes in `log t` (continuous mode).
    step: f64,
    scales: Vec<f64>,
    fields: Vec<SampledFunction>,
}

fn close(a: f64, b: f64) -> bool {
    (a / b - 1.0).abs() < 1e-9
}

/// Scale nodes of `pair` in `[eps, big_b]`, increasing.
fn scale_nodes(pair: &ReproducingPair, eps: f64, big_b: f64) -> Result<(Vec<f64>, f64)> {
    if !(eps > 0.0 && eps < big_b && big_b.is_finite()) {
        return Err(Error::invalid(format!("need 0 < eps < B, got eps = {eps}, B = {big_b}")));
    }
    let lb = (1.0 / pair.b()).ln();
    match pair.mode() {
        PairMode::Continuous => {
            let step = lb / pair.u_subdiv() as f64;
            let n = (big_b / eps).ln() / step;
            if (n - n.round()).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "B / eps = {} is not a power of b^(-1/{})",
                    big_b / eps,
                    pair.u_subdiv()
                )));
            }
            let n = n.round() as usize;
            Ok(((0..=n).map(|k| eps * (k as f64 * step).exp()).collect(), step))
        }
        PairMode::Discrete => {
            // t = b^j with eps <= t <= B
            let lo = (big_b.ln() / -lb - 1e-9).ceil() as i64;
            let hi = (eps.ln() / -lb + 1e-9).floor() as i64;
            let nodes: Vec<f64> = (lo..=hi).rev().map(|j| pair.b().powi(j as i32)).collect();
            if nodes.is_empty() {
                return Err(Error::invalid(format!("no b^j in [{eps}, {big_b}]")));
            }
            Ok((nodes, lb))
        }
    }
}

impl SynthesisFields {
    pub fn compute(g: &GroupSpec, pair: &ReproducingPair, f: Field<'_>, eps: f64, big_b: f64, out: &GridSpec) -> Result<Self> {
        let (scales, step) = scale_nodes(pair, eps, big_b)?;
        let mut fields = Vec::with_capacity(scales.len());
        for &t in &scales {
            let mut acc: Option<SampledFunction> = None;
            for k in pair.kernels() {
                let c = convolve(g, f, Field::kernel(k, t), out)?;
                acc = Some(match acc {
                    None => c,
                    Some(a) => {
                        let v = a.values().iter().zip(c.values()).map(|(x, y)| x + y).collect();
                        SampledFunction::new(out.clone(), v, "pair sum")?
                    }
                });
            }
            fields.push(acc.expect("pairs are nonempty").with_provenance(format!("sum_l f*K_{t}")));
        }
        Ok(Self {
            mode: pair.mode(),
            step,
            scales,
            fields,
        })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn fields(&self) -> &[SampledFunction] {
        &self.fields
    }

    /// Unnormalized synthesis over the stored nodes in `[eps, B]`: the log
    /// trapezoid rule in continuous mode, a plain sum in discrete mode.
    pub fn sum(&self, eps: f64, big_b: f64) -> Result<SampledFunction> {
        let keep: Vec<usize> = (0..self.scales.len())
            .filter(|&i| self.scales[i] >= eps * (1.0 - 1e-9) && self.scales[i] <= big_b * (1.0 + 1e-9))
            .collect();
        if keep.is_empty() {
            return Err(Error::invalid(format!("no stored scale in [{eps}, {big_b}]")));
        }
        if self.mode == PairMode::Continuous && !(close(self.scales[keep[0]], eps) && close(self.scales[keep[keep.len() - 1]], big_b)) {
            return Err(Error::invalid(format!("[{eps}, {big_b}] does not end on stored scales")));
        }
        let grid = self.fields[0].grid().clone();
        let mut acc = vec![0.0; grid.len()];
        let last = keep.len() - 1;
        for (pos, &i) in keep.iter().enumerate() {
            let w = match self.mode {
                PairMode::Discrete => 1.0,
                PairMode::Continuous if keep.len() == 1 => 0.0,
                PairMode::Continuous if pos == 0 || pos == last => 0.5 * self.step,
                PairMode::Continuous => self.step,
            };
            for (a, v) in acc.iter_mut().zip(self.fields[i].values()) {
                *a += w * v;
            }
        }
        SampledFunction::new(grid, acc, format!("S on [{eps}, {big_b}]"))
    }
}

/// `c * sum_l int_eps^B f * phi^(l)_t * eta^(l)_t dt/t` on `out` (a sum over
/// `b^j in [eps, B]` in discrete mode).
pub fn truncated_synthesis(
    g: &GroupSpec,
    pair: &ReproducingPair,
    f: Field<'_>,
    eps: f64,
    big_b: f64,
    out: &GridSpec,
) -> Result<SampledFunction> {
    let s = SynthesisFields::compute(g, pair, f, eps, big_b, out)?.sum(eps, big_b)?;
    Ok(s.scaled(pair.normalizer()))
}

/// `f` at the nodes of `out`.
pub fn sample_field(g: &GroupSpec, f: Field<'_>, out: &GridSpec) -> Result<SampledFunction> {
    out.sample(|x| f.eval(g, x), "f")
}

fn inner(a: &SampledFunction, b: &SampledFunction) -> f64 {
    let mut acc = BlockSum::new();
    for ((w, x), y) in a.grid().weights().iter().zip(a.values()).zip(b.values()) {
        acc.add(w * x * y);
    }
    acc.total()
}

/// Least-squares `c` minimizing `sum_i ||c S_i - f_i||_2^2` on the grid.
pub fn fit_normalizer_from(unnormalized: &[SampledFunction], targets: &[SampledFunction]) -> Result<f64> {
    if unnormalized.len() != targets.len() || unnormalized.is_empty() {
        return Err(Error::invalid("one synthesis per probe is required"));
    }
    let (mut num, mut den, mut tgt) = (0.0, 0.0, 0.0);
    for (s, f) in unnormalized.iter().zip(targets) {
        if s.grid() != f.grid() {
            return Err(Error::invalid("synthesis and probe live on different grids"));
        }
        num += inner(s, f);
        den += inner(s, s);
        tgt += inner(f, f);
    }
    if !(den > 1e-24 * tgt) {
        return Err(Error::DegeneratePair(format!("synthesis energy {den:e} against probe energy {tgt:e}")));
    }
    Ok(num / den)
}

/// Fits and stores the normalizer of `pair` on a probe family of at least
/// three functions, using the synthesis over `[eps, B]`.
pub fn fit_normalizer(
    g: &GroupSpec,
    pair: &mut ReproducingPair,
    probes: &[Field<'_>],
    eps: f64,
    big_b: f64,
    out: &GridSpec,
) -> Result<f64> {
    if probes.len() < 3 {
        return Err(Error::invalid("the probe family needs at least three members"));
    }
    let mut s = Vec::with_capacity(probes.len());
    let mut t = Vec::with_capacity(probes.len());
    for p in probes {
        s.push(SynthesisFields::compute(g, pair, *p, eps, big_b, out)?.sum(eps, big_b)?);
        t.push(sample_field(g, *p, out)?);
    }
    let c = fit_normalizer_from(&s, &t)?;
    pair.set_normalizer(c);
    Ok(c)
}

/// `||s - f||_inf / ||f||_inf`.
pub fn relative_sup_error(s: &SampledFunction, f: &SampledFunction) -> f64 {
    let num = s.values().iter().zip(f.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    num / f.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::MultiIndex;
    use crate::kernels::{bump, bump_at, dgauss, KernelSpec};

    fn setup() -> (GroupSpec, ReproducingPair, GridSpec, Vec<KernelSpec>) {
        let g = GroupSpec::abelian(1).unwrap();
        let phi = dgauss(&g, &MultiIndex(vec![1])).unwrap();
        let pair = ReproducingPair::new(&g, vec![phi.clone()], vec![phi], PairMode::Continuous, 0.0).unwrap();
        let out = GridSpec::new(vec![4.0], vec![41]).unwrap();
        let probes = [bump(&g), bump_at(&g, 0.8).unwrap(), bump_at(&g, 1.25).unwrap()]
            .into_iter()
            .map(|k| k.with_quad_points(81).unwrap())
            .collect();
        (g, pair, out, probes)
    }

    fn fit(g: &GroupSpec, pair: &mut ReproducingPair, probes: &[KernelSpec], out: &GridSpec) -> Result<f64> {
        let fields: Vec<Field> = probes.iter().map(|p| Field::kernel(p, 1.0)).collect();
        fit_normalizer(g, pair, &fields, 1.0 / 32.0, 32.0, out)
    }

    #[test]
    fn zero_and_linearity() {
        let (g, pair, out, probes) = setup();
        let zero = |_: &[f64]| 0.0;
        let grid = GridSpec::new(vec![4.0], vec![41]).unwrap();
        let s = truncated_synthesis(&g, &pair, Field::func(&zero, &grid), 0.25, 4.0, &out).unwrap();
        assert!(s.values().iter().all(|v| *v == 0.0));

        let (a, b) = (&probes[0], &probes[1]);
        let combo = |x: &[f64]| 2.0 * a.eval(x) - 3.0 * b.eval(x);
        let grid = a.quad_grid().clone();
        let lhs = truncated_synthesis(&g, &pair, Field::func(&combo, &grid), 0.25, 4.0, &out).unwrap();
        let sa = truncated_synthesis(&g, &pair, Field::func(&|x: &[f64]| a.eval(x), &grid), 0.25, 4.0, &out).unwrap();
        let sb = truncated_synthesis(&g, &pair, Field::func(&|x: &[f64]| b.eval(x), &grid), 0.25, 4.0, &out).unwrap();
        for ((l, x), y) in lhs.values().iter().zip(sa.values()).zip(sb.values()) {
            assert!((l - (2.0 * x - 3.0 * y)).abs() < 1e-12 * lhs.max_abs());
        }
    }

    #[test]
    fn fitted_pair_reproduces_and_rescales() {
        let (g, mut pair, out, probes) = setup();
        let c = fit(&g, &mut pair, &probes, &out).unwrap();
        // phi * phi has a nonpositive transform for odd phi
        assert!(c.is_finite() && c < 0.0);
        // residuals shrink as the window widens
        let f = Field::kernel(&probes[0], 1.0);
        let fields = SynthesisFields::compute(&g, &pair, f, 1.0 / 32.0, 32.0, &out).unwrap();
        let target = sample_field(&g, f, &out).unwrap();
        let res: Vec<f64> = (2..=5)
            .map(|k| {
                let e = 2f64.powi(-k);
                relative_sup_error(&fields.sum(e, 1.0 / e).unwrap().scaled(c), &target)
            })
            .collect();
        assert!(res.windows(2).all(|w| w[1] <= w[0] * 1.05), "{res:?}");
        assert!(res[3] < 0.05, "{res:?}");

        // a pair already normalized refits to 1, a scaled one to 1/lambda
        let mut unit = pair.scaled_phis(c);
        let c1 = fit(&g, &mut unit, &probes, &out).unwrap();
        assert!((c1 - 1.0).abs() < 0.05, "{c1}");
        let mut three = pair.scaled_phis(3.0);
        let c3 = fit(&g, &mut three, &probes, &out).unwrap();
        assert!((c3 * 3.0 / c - 1.0).abs() < 1e-6, "{c3} {c}");
        assert_eq!(three.normalizer(), c3);
    }

    #[test]
    fn degenerate_and_invalid_windows() {
        let (g, pair, out, probes) = setup();
        let mut dead = pair.scaled_phis(0.0);
        assert!(matches!(fit(&g, &mut dead, &probes, &out), Err(Error::DegeneratePair(_))));
        let fields: Vec<Field> = probes.iter().take(2).map(|p| Field::kernel(p, 1.0)).collect();
        let mut p2 = pair.clone();
        assert!(fit_normalizer(&g, &mut p2, &fields, 0.25, 4.0, &out).is_err());
        let f = Field::kernel(&probes[0], 1.0);
        assert!(truncated_synthesis(&g, &pair, f, 0.25, 3.0, &out).is_err());
        assert!(truncated_synthesis(&g, &pair, f, 4.0, 0.25, &out).is_err());
    }

    #[test]
    fn discrete_mode_sums_dyadic_scales() {
        let (g, pair, out, probes) = setup();
        let disc = pair.with_mode(PairMode::Discrete);
        let f = Field::kernel(&probes[0], 1.0);
        let fields = SynthesisFields::compute(&g, &disc, f, 0.2, 5.0, &out).unwrap();
        assert_eq!(fields.scales(), &[0.25, 0.5, 1.0, 2.0, 4.0]);
        let s = fields.sum(0.2, 5.0).unwrap();
        let direct: Vec<f64> = fields.fields().iter().fold(vec![0.0; out.len()], |mut acc, f| {
            for (a, v) in acc.iter_mut().zip(f.values()) {
                *a += v;
            }
            acc
        });
        for (a, b) in s.values().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
