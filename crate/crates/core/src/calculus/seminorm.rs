//! The weighted derivative seminorm
//! `||f||_(N) = sup_{|I| <= N, x} (1 + rho(x))^{(N+1)(gamma+1)} |Y^I f(x)|`,
//! sampled over a probe grid.

use super::derivative::{invariant_derivative, step_for_order, Side};
use super::multiindex::MultiIndex;
use super::poly::{InvariantFields, PolyGauss};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::group::GroupSpec;

/// Every multi-index of order at most `order`.
pub fn indices_up_to_order(n: usize, order: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() == n {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for i in 0..=left {
            cur.push(i);
            rec(n, left - i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, order, &mut Vec::with_capacity(n), &mut out);
    out.sort_by_key(|i| (i.order(), i.0.clone()));
    out
}

fn weight_exponent(g: &GroupSpec, order: u32) -> f64 {
    (order as f64 + 1.0) * (g.gamma() + 1.0)
}

/// Takes the weighted sup over all probe nodes and fails when it sits on the
/// outer face of the probe grid, where the sup over the whole group cannot
/// be trusted.
fn weighted_sup<E>(g: &GroupSpec, order: u32, probe: &GridSpec, mut eval: E) -> Result<f64>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    let expo = weight_exponent(g, order);
    let mut p = vec![0.0; g.dim()];
    let (mut inner, mut shell) = (0.0f64, 0.0f64);
    for idx in 0..probe.len() {
        probe.node_into(idx, &mut p);
        let v = eval(&p)?;
        let w = (1.0 + g.hom_norm(&p)).powf(expo) * v;
        if !w.is_finite() {
            return Err(Error::NotSchwartz(format!("weighted derivative overflows at {p:?}")));
        }
        if probe.is_boundary(idx) {
            shell = shell.max(w);
        } else {
            inner = inner.max(w);
        }
    }
    if shell > 0.0 && shell >= inner {
        return Err(Error::NotSchwartz(format!(
            "weighted sup {shell:e} reached on the probe boundary (interior {inner:e})"
        )));
    }
    Ok(inner.max(shell))
}

/// Sampled seminorm of a black-box function with finite-difference
/// derivatives. Cost grows like `4^N` per node; keep probe grids small.
pub fn schwartz_seminorm<F>(g: &GroupSpec, f: F, order: u32, probe: &GridSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let idx = indices_up_to_order(g.dim(), order);
    weighted_sup(g, order, probe, |p| {
        let mut m = 0.0f64;
        for i in &idx {
            let d = invariant_derivative(g, &f, i, p, Side::Right, step_for_order(i.order()))?;
            m = m.max(d.abs());
        }
        Ok(m)
    })
}

/// Sampled seminorm of a polynomial-times-Gaussian with exact derivatives.
pub fn polygauss_seminorm(g: &GroupSpec, f: &PolyGauss, order: u32, probe: &GridSpec) -> Result<f64> {
    let fields = InvariantFields::new(g);
    let derivs: Vec<PolyGauss> = indices_up_to_order(g.dim(), order)
        .iter()
        .map(|i| f.right_pow(&fields, i))
        .collect();
    weighted_sup(g, order, probe, |p| {
        Ok(derivs.iter().fold(0.0f64, |m, d| m.max(d.eval(p).abs())))
    })
}

/// Probe grid used when none is configured: base radius 6, 25 nodes per axis
/// (capped for higher dimensions).
pub fn default_probe(g: &GroupSpec) -> Result<GridSpec> {
    let pts = match g.dim() {
        1 => 201,
        2 => 61,
        3 => 25,
        _ => 9,
    };
    GridSpec::for_group(g, 6.0, pts)
}
