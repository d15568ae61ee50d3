//! Norm-equivalence band: `ratio(f) = ||g_phi(f)||_p / ||M f||_p` over a
//! family of dilated and translated atoms, with `M` the grand maximal
//! surrogate over a normalized dictionary.

use super::family::TestFunction;
use super::report::ReportRow;
use crate::conv::{convolve, dictionary_members, g_function, np_for, Field, ScaleGrid};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::kernels::KernelSpec;

#[derive(Clone, Debug)]
pub struct EquivalenceSettings {
    pub ps: Vec<f64>,
    /// Scales of the g-function.
    pub g_scales: ScaleGrid,
    /// Scales of the grand maximal surrogate.
    pub dictionary_scales: Vec<f64>,
    /// Output grid of an undilated member; a member dilated by `s` uses it
    /// dilated by `s`.
    pub out: GridSpec,
    /// Quadrature nodes per axis of the dictionary kernels.
    pub dictionary_points: usize,
    /// Largest accepted `max ratio / min ratio`.
    pub band_bound: f64,
    /// Largest accepted `|ratio(T_2 f) / ratio(f) - 1|`.
    pub drift_bound: f64,
}

/// Family member together with the dilation of its output grid.
#[derive(Clone, Debug)]
pub struct Member {
    pub f: TestFunction,
    pub grid_dilation: f64,
}

/// Dictionary members with their seminorms for each `p`.
struct Dictionary {
    kernels: Vec<KernelSpec>,
    /// `norms[p][k] = ||Phi_k||_(N_p)`.
    norms: Vec<Vec<f64>>,
}

impl Dictionary {
    fn new(g: &GroupSpec, ps: &[f64], points: usize) -> Result<Self> {
        let mut kernels = dictionary_members(g)
            .into_iter()
            .map(|k| k.with_quad_points(points))
            .collect::<Result<Vec<_>>>()?;
        let mut norms = Vec::with_capacity(ps.len());
        for &p in ps {
            let order = np_for(g, p)?;
            let row = kernels
                .iter_mut()
                .map(|k| {
                    let s = k.seminorm(g, order)?;
                    if !(s > 0.0 && s.is_finite()) {
                        return Err(Error::InvalidDictionary(format!("{} has seminorm {s}", k.name())));
                    }
                    Ok(s)
                })
                .collect::<Result<Vec<f64>>>()?;
            norms.push(row);
        }
        Ok(Self { kernels, norms })
    }
}

/// `ratio(f)` for every `p`, on `out`.
fn ratios(g: &GroupSpec, f: &TestFunction, phi: &KernelSpec, dict: &Dictionary, s: &EquivalenceSettings, out: &GridSpec) -> Result<Vec<f64>> {
    f.with_field(g, |field| {
        let gf = g_function(g, field, phi, &s.g_scales, out)?;
        // sup over scales per dictionary kernel; the normalization only
        // rescales these
        let mut sups = Vec::with_capacity(dict.kernels.len());
        for k in &dict.kernels {
            let mut best = vec![0.0f64; out.len()];
            for &t in &s.dictionary_scales {
                let c = convolve(g, field, Field::kernel(k, t), out)?;
                for (b, v) in best.iter_mut().zip(c.values()) {
                    *b = b.max(v.abs());
                }
            }
            sups.push(best);
        }
        let mut out_ratios = Vec::with_capacity(s.ps.len());
        for (pi, &p) in s.ps.iter().enumerate() {
            let surrogate: Vec<f64> = (0..out.len())
                .map(|i| sups.iter().zip(&dict.norms[pi]).map(|(v, n)| v[i] / n).fold(0.0, f64::max))
                .collect();
            let m = SampledFunction::new(out.clone(), surrogate, "grand maximal surrogate")?.lp_norm(p, None);
            if !(m > 0.0) {
                return Err(Error::DegenerateFamily(format!("grand maximal surrogate of {} vanishes", f.name)));
            }
            out_ratios.push(gf.lp_norm(p, None) / m);
        }
        Ok(out_ratios)
    })
}

/// One ratio row per member and `p`, a band row per `p`, and a drift row
/// per `p` comparing members `drift_pair.0` and `drift_pair.1`, each on its
/// own dilated grid.
pub fn equivalence_band(
    g: &GroupSpec,
    phi: &KernelSpec,
    members: &[Member],
    drift_pair: Option<(usize, usize)>,
    s: &EquivalenceSettings,
    experiment: &str,
) -> Result<Vec<ReportRow>> {
    if members.is_empty() {
        return Err(Error::DegenerateFamily("the test family is empty".into()));
    }
    if let Some((a, b)) = drift_pair {
        if a >= members.len() || b >= members.len() {
            return Err(Error::Config(format!("drift pair ({a}, {b}) is outside the family of {}", members.len())));
        }
    }
    if s.ps.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        return Err(Error::Config(format!("Hardy space runs need 0 < p <= 1, got {:?}", s.ps)));
    }
    let dict = Dictionary::new(g, &s.ps, s.dictionary_points)?;
    let mut rows = Vec::new();
    let mut per_p: Vec<Vec<f64>> = vec![Vec::new(); s.ps.len()];
    for m in members {
        let out = s.out.dilated(g, m.grid_dilation);
        let r = ratios(g, &m.f, phi, &dict, s, &out)?;
        for (pi, &v) in r.iter().enumerate() {
            per_p[pi].push(v);
            rows.push(
                ReportRow::new(
                    experiment,
                    "square-function-vs-hardy-norm",
                    format!("||g(f)||_p / ||M f||_p; f = {}; p = {}", m.f.name, s.ps[pi]),
                    v,
                    1.0,
                )
                .with_constant(v)
                .judged("ratio finite and positive", f64::NAN, v.is_finite() && v > 0.0),
            );
        }
    }
    for (pi, vals) in per_p.iter().enumerate() {
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        rows.push(
            ReportRow::new(
                experiment,
                "square-function-vs-hardy-norm",
                format!("band over {} members; p = {}", vals.len(), s.ps[pi]),
                hi,
                lo,
            )
            .at_most("max ratio / min ratio", hi / lo, s.band_bound),
        );
    }
    if let Some((i0, i1)) = drift_pair {
        let (f0, f1) = (&members[i0].f, &members[i1].f);
        for (pi, vals) in per_p.iter().enumerate() {
            let (x, y) = (&vals[i0], &vals[i1]);
            rows.push(
                ReportRow::new(
                    experiment,
                    "square-function-vs-hardy-norm",
                    format!("dilation drift {} vs {}; p = {}", f1.name, f0.name, s.ps[pi]),
                    *y,
                    *x,
                )
                .at_most("|ratio drift|", (y / x - 1.0).abs(), s.drift_bound),
            );
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_by_name, HeatConfig};

    #[test]
    fn abelian_band_is_narrow_and_scale_free() {
        let g = GroupSpec::abelian(1).unwrap();
        let heat = HeatConfig::default();
        let phi = kernel_by_name(&g, "dgauss:2", &heat).unwrap().with_quad_points(41).unwrap();
        let atom = kernel_by_name(&g, "dgauss:3", &heat).unwrap();
        let f0 = TestFunction::new(&g, atom.clone(), None, 41).unwrap();
        let f1 = TestFunction::new(&g, kernel_by_name(&g, "dgauss:3@0.5", &heat).unwrap(), None, 41).unwrap();
        let louder = TestFunction::new(&g, atom.scaled(7.0), None, 41).unwrap();
        let members = vec![
            Member { f: f0, grid_dilation: 1.0 },
            Member { f: TestFunction::new(&g, atom, Some(vec![0.5]), 41).unwrap(), grid_dilation: 1.0 },
            Member { f: f1, grid_dilation: 0.5 },
        ];
        let s = EquivalenceSettings {
            ps: vec![2.0 / 3.0, 1.0],
            g_scales: ScaleGrid::dyadic(4, 2).unwrap(),
            dictionary_scales: ScaleGrid::dyadic(4, 1).unwrap().nodes(),
            out: GridSpec::for_group(&g, 6.0, 61).unwrap(),
            dictionary_points: 41,
            band_bound: 10.0,
            drift_bound: 0.2,
        };
        let rows = equivalence_band(&g, &phi, &members, Some((0, 2)), &s, "t").unwrap();
        assert_eq!(rows.len(), 6 + 2 + 2);
        for r in &rows {
            assert!(r.pass, "{r:?}");
        }
        // ratios are invariant under f -> 7 f
        let scaled = equivalence_band(&g, &phi, &[Member { f: louder, grid_dilation: 1.0 }], None, &s, "t").unwrap();
        for (a, b) in scaled.iter().zip(&rows).take(2) {
            assert!((a.lhs / b.lhs - 1.0).abs() < 1e-10);
        }
        assert!(matches!(equivalence_band(&g, &phi, &members, Some((0, 3)), &s, "t"), Err(Error::Config(_))));
        let bad = EquivalenceSettings { ps: vec![1.5], ..s };
        assert!(matches!(equivalence_band(&g, &phi, &members, None, &bad, "t"), Err(Error::Config(_))));
    }
}
