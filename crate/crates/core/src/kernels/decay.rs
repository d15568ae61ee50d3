//! Correlation decay `C(eta, psi, t, L) = int (1 + rho(x))^L |eta * psi_t(x)| dx`
//! and the class tests built on its slopes in `log t`.

use std::io::Write;

use serde::Serialize;

use super::spec::KernelSpec;
use crate::calculus::HomogeneityLattice;
use crate::conv::{convolve, Field};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::group::GroupSpec;
use crate::numeric::{log_log_slope, BlockSum};

/// Share of `int |kappa|` a kernel may keep outside its effective box.
const EFFECTIVE_TOL: f64 = 1e-7;

/// Slack on fitted slopes when reading off class membership.
pub const SLOPE_TOL: f64 = 0.3;

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub c: f64,
    /// Power law through `C(1)` with the predicted exponent.
    pub bound: f64,
    /// `sup_x |eta * psi_t(x)| (1 + rho(x)/t)^{gamma+1}`.
    pub pointwise: f64,
    /// Share of the integrand on the outer layer of the output grid.
    pub tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayTable {
    pub eta: String,
    pub psi: String,
    pub l: f64,
    pub rows: Vec<DecayRow>,
    /// `-(a_bar(eta) - L)`, the predicted slope for `t >= 1`.
    pub expected_large: f64,
    /// `b_bar(psi)`, the predicted slope for `t <= 1`.
    pub expected_small: f64,
    pub slope_large: Option<f64>,
    pub slope_small: Option<f64>,
}

impl DecayTable {
    /// Empirical membership in `C^(1)_{a,L}`: `t^a C` stays bounded for
    /// `t >= 1`, read as `slope_large <= -a + SLOPE_TOL`.
    pub fn in_c1(&self, a: f64) -> Option<bool> {
        self.slope_large.map(|s| s <= -a + SLOPE_TOL)
    }

    /// Empirical membership in `C^(2)_{b,L}`: `t^{-b} C` stays bounded for
    /// `t <= 1`.
    pub fn in_c2(&self, b: f64) -> Option<bool> {
        self.slope_small.map(|s| s >= b - SLOPE_TOL)
    }

    pub fn in_cab(&self, a: f64, b: f64) -> Option<bool> {
        match (self.in_c1(a), self.in_c2(b)) {
            (Some(x), Some(y)) => Some(x && y),
            _ => None,
        }
    }

    fn verdicts(&self) -> String {
        let show = |v: Option<bool>| match v {
            Some(true) => "yes",
            Some(false) => "no",
            None => "n/a",
        };
        let a = -self.expected_large;
        let b = self.expected_small;
        format!(
            "C1(a={a}):{};C2(b={b}):{};Cab:{}",
            show(self.in_c1(a)),
            show(self.in_c2(b)),
            show(self.in_cab(a, b))
        )
    }

    /// CSV with columns `t,C,bound,verdicts`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "C", "bound", "verdicts"])?;
        let verdicts = self.verdicts();
        for r in &self.rows {
            out.write_record([format!("{:e}", r.t), format!("{:e}", r.c), format!("{:e}", r.bound), verdicts.clone()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Half-widths per axis outside which `|kappa|` carries at most
/// `EFFECTIVE_TOL` of its mass.
pub fn effective_extents(k: &KernelSpec) -> Vec<f64> {
    let grid = k.quad_grid();
    let n = grid.dim();
    let w = grid.weights();
    let vals = k.quad_values();
    let mut multi = vec![0usize; n];
    let mut out = Vec::with_capacity(n);
    for axis in 0..n {
        let count = grid.counts()[axis];
        let mut per_index = vec![0.0; count];
        for (i, (wi, v)) in w.iter().zip(&vals).enumerate() {
            grid.unflatten(i, &mut multi);
            per_index[multi[axis]] += wi * v.abs();
        }
        let total: f64 = per_index.iter().sum();
        let mid = count / 2;
        // shrink symmetrically while the discarded mass stays small
        let mut keep = mid;
        let mut dropped = 0.0;
        while keep > 1 {
            let d = per_index[mid - keep] + per_index[mid + keep];
            if dropped + d > EFFECTIVE_TOL * total {
                break;
            }
            dropped += d;
            keep -= 1;
        }
        out.push(grid.axis_coord(axis, mid + keep));
    }
    out
}

/// Box containing `{x y : x in box a, y in box b}`.
pub fn product_extents(g: &GroupSpec, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    for p in g.structure_polys() {
        for term in &p.terms {
            let mut v = term.coeff.abs();
            for (k, &pw) in term.x_powers.iter().enumerate() {
                v *= a[k].powi(pw as i32);
            }
            for (k, &pw) in term.y_powers.iter().enumerate() {
                v *= b[k].powi(pw as i32);
            }
            e[p.k - 1] += v;
        }
    }
    e
}

/// One row of the decay table: `C(eta, psi, t, L)` on an output grid with
/// `points` nodes per axis covering the product of the effective boxes.
pub fn corr_value(g: &GroupSpec, eta: &KernelSpec, psi: &KernelSpec, t: f64, l: f64, points: usize) -> Result<DecayRow> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("scale must be positive, got {t}")));
    }
    let ea = effective_extents(eta);
    let eb: Vec<f64> = effective_extents(psi)
        .iter()
        .zip(g.dilation_factors(t))
        .map(|(e, s)| e * s)
        .collect();
    let out = GridSpec::new(product_extents(g, &ea, &eb), vec![points; g.dim()])?;
    let field = convolve(g, Field::kernel(eta, 1.0), Field::kernel(psi, t), &out)?;
    let w = out.weights();
    let mut x = vec![0.0; g.dim()];
    let (mut total, mut shell) = (BlockSum::new(), BlockSum::new());
    let mut pointwise = 0.0f64;
    let m = g.gamma() + 1.0;
    for (i, v) in field.values().iter().enumerate() {
        out.node_into(i, &mut x);
        let r = g.hom_norm(&x);
        let c = w[i] * (1.0 + r).powf(l) * v.abs();
        total.add(c);
        if out.is_boundary(i) {
            shell.add(c);
        }
        pointwise = pointwise.max(v.abs() * (1.0 + r / t).powf(m));
    }
    let c = total.total();
    let tail = if c > 0.0 { shell.total() / c } else { 0.0 };
    Ok(DecayRow {
        t,
        c,
        bound: f64::NAN,
        pointwise,
        tail,
    })
}

/// Decay table over `scales` with slope fits on `t >= 1` and `t <= 1`.
/// A row whose tail share exceeds `tail_tol` is an error.
pub fn corr_decay(
    g: &GroupSpec,
    eta: &KernelSpec,
    psi: &KernelSpec,
    l: f64,
    scales: &[f64],
    points: usize,
    tail_tol: f64,
) -> Result<DecayTable> {
    if scales.is_empty() || scales.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("scales must be positive"));
    }
    let top = eta.moment_order().max(psi.moment_order()).max(0.0) + g.exponents().iter().cloned().fold(1.0, f64::max) + 1.0;
    let lattice = HomogeneityLattice::new(g, top)?;
    let a_eta = lattice.a_bar(eta.moment_order())?;
    let b_psi = lattice.a_bar(psi.moment_order())?;
    let mut rows = Vec::with_capacity(scales.len());
    for &t in scales {
        let row = corr_value(g, eta, psi, t, l, points)?;
        if row.tail > tail_tol {
            return Err(Error::GridTooSmall(format!(
                "{:.2e} of C({}, {}, {t}) sits on the grid boundary",
                row.tail,
                eta.name(),
                psi.name()
            )));
        }
        rows.push(row);
    }
    let expected_large = -(a_eta - l);
    let expected_small = b_psi;
    // anchor the bound at the row closest to t = 1
    let anchor = rows
        .iter()
        .min_by(|a, b| a.t.ln().abs().total_cmp(&b.t.ln().abs()))
        .map(|r| (r.t, r.c))
        .unwrap_or((1.0, 0.0));
    for r in &mut rows {
        let e = if r.t >= 1.0 { expected_large } else { expected_small };
        r.bound = anchor.1 * (r.t / anchor.0).powf(e);
    }
    let fit = |keep: &dyn Fn(f64) -> bool| -> Option<f64> {
        let (ts, cs): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| keep(r.t) && r.c > 0.0).map(|r| (r.t, r.c)).unzip();
        if ts.len() >= 2 {
            log_log_slope(&ts, &cs).ok()
        } else {
            None
        }
    };
    let slope_large = fit(&|t| t >= 1.0);
    let slope_small = fit(&|t| t <= 1.0);
    Ok(DecayTable {
        eta: eta.name().to_string(),
        psi: psi.name().to_string(),
        l,
        rows,
        expected_large,
        expected_small,
        slope_large,
        slope_small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::MultiIndex;
    use crate::kernels::{bump, bump_at, vanishing_moment_kernel};

    #[test]
    fn abelian_slopes() {
        // a narrow eta keeps t >= 1 in the asymptotic regime, a wide one t <= 1
        let g = GroupSpec::abelian(2).unwrap();
        let narrow = bump_at(&g, 0.25).unwrap();
        let b = bump(&g);
        let eta = vanishing_moment_kernel(&g, &narrow, &MultiIndex(vec![2, 0])).unwrap();
        let psi = vanishing_moment_kernel(&g, &b, &MultiIndex(vec![0, 1])).unwrap();
        let table = corr_decay(&g, &eta, &psi, 0.0, &[1.0, 2.0, 4.0, 8.0, 16.0], 41, 1e-3).unwrap();
        let sl = table.slope_large.unwrap();
        assert_eq!(table.expected_large, -2.0);
        assert!((sl + 2.0).abs() < 0.3, "{sl}");
        assert_eq!(table.in_c1(2.0), Some(true));

        let psi = vanishing_moment_kernel(&g, &narrow, &MultiIndex(vec![0, 1])).unwrap();
        let table = corr_decay(&g, &b, &psi, 0.0, &[0.125, 0.25, 0.5, 1.0], 41, 1e-3).unwrap();
        let ss = table.slope_small.unwrap();
        assert_eq!(table.expected_small, 1.0);
        assert!((ss - 1.0).abs() < 0.3, "{ss}");
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,C,bound,verdicts"));
    }

    #[test]
    fn plain_bump_is_positive() {
        let g = GroupSpec::heisenberg();
        let b = bump(&g).with_quad_points(21).unwrap();
        let row = corr_value(&g, &b, &b, 1.0, 0.0, 21).unwrap();
        assert!(row.c > 0.0 && row.c.is_finite());
        // int |b * b| = (int b)^2 for a positive bump
        assert!((row.c - b.integral().powi(2)).abs() < 1e-3 * row.c, "{} {}", row.c, b.integral().powi(2));
    }

    #[test]
    fn product_box_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        let e = product_extents(&g, &[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(e[0], 5.0);
        assert_eq!(e[1], 7.0);
        // 3 + 6 + (1*5 + 2*4)/2
        assert!((e[2] - 15.5).abs() < 1e-12);
    }
}
