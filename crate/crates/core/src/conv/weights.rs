//! Weights, weighted norms and sampled Muckenhoupt constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::{GroupSpec, PolarQuadrature};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    One,
    /// `rho(x)^alpha`.
    RhoPower { alpha: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    /// The `p` of the `A_p` class the weight is meant to belong to.
    pub p_class: Option<f64>,
}

/// Sub-cells per axis when a singular node is replaced by its cell mean.
const CELL_SUBDIV: usize = 8;

impl WeightSpec {
    pub fn one() -> Self {
        Self { kind: WeightKind::One, p_class: None }
    }

    pub fn rho_power(alpha: f64, p_class: Option<f64>) -> Self {
        Self {
            kind: WeightKind::RhoPower { alpha },
            p_class,
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            WeightKind::One => "1".into(),
            WeightKind::RhoPower { alpha } => format!("rho^{alpha}"),
        }
    }

    /// Pointwise value; infinite at the origin for negative powers.
    pub fn eval(&self, g: &GroupSpec, x: &[f64]) -> f64 {
        match self.kind {
            WeightKind::One => 1.0,
            WeightKind::RhoPower { alpha } => g.hom_norm(x).powf(alpha),
        }
    }

    /// Node values for quadrature. A node where the weight is singular gets
    /// the mean of the weight over its grid cell instead.
    pub fn on_grid(&self, g: &GroupSpec, grid: &GridSpec) -> Result<Vec<f64>> {
        let n = grid.dim();
        let mut x = vec![0.0; n];
        let mut out = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            grid.node_into(i, &mut x);
            let mut v = self.eval(g, &x);
            if !v.is_finite() {
                v = self.cell_mean(g, grid, &x);
            }
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::numeric("weight", format!("weight {v} at {x:?}")));
            }
            out.push(v);
        }
        Ok(out)
    }

    fn cell_mean(&self, g: &GroupSpec, grid: &GridSpec, centre: &[f64]) -> f64 {
        let n = grid.dim();
        let total = CELL_SUBDIV.pow(n as u32);
        let mut p = vec![0.0; n];
        let mut acc = 0.0;
        for k in 0..total {
            let mut r = k;
            for (axis, pv) in p.iter_mut().enumerate() {
                let m = r % CELL_SUBDIV;
                r /= CELL_SUBDIV;
                let h = grid.spacing(axis);
                *pv = centre[axis] + h * ((m as f64 + 0.5) / CELL_SUBDIV as f64 - 0.5);
            }
            acc += self.eval(g, &p);
        }
        acc / total as f64
    }
}

/// `(int |f|^p w)^{1/p}` by the trapezoid rule.
pub fn weighted_lp_norm(g: &GroupSpec, f: &SampledFunction, w: &WeightSpec, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::invalid(format!("p must be positive, got {p}")));
    }
    match w.kind {
        WeightKind::One => Ok(f.lp_norm(p, None)),
        _ => {
            let vals = w.on_grid(g, f.grid())?;
            Ok(f.lp_norm(p, Some(&vals)))
        }
    }
}

/// Sampled `sup_B (avg_B w)(avg_B w^{-1/(p-1)})^{p-1}` over the balls
/// `B(c, r) = c A_r B(0, 1)`, with the averages taken by polar quadrature.
pub fn ap_constant(g: &GroupSpec, w: &WeightSpec, p: f64, centres: &[Vec<f64>], radii: &[f64]) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!("A_p needs p > 1, got {p}")));
    }
    if centres.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.is_empty() {
        return Err(Error::invalid("need centres and positive radii"));
    }
    let q = PolarQuadrature::new(g, 8, 1.0, 4)?;
    let n = g.dim();
    let mut ball = Vec::new();
    let mut weights = Vec::new();
    for (th, sw) in q.sphere_nodes().iter().zip(q.sphere_weights()) {
        for (s, rw) in q.radial_nodes().iter().zip(q.radial_weights()) {
            ball.push(g.dilate(*s, th)?);
            weights.push(sw * rw);
        }
    }
    let mass: f64 = weights.iter().sum();
    let dual = -1.0 / (p - 1.0);
    let mut worst = 0.0f64;
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    for c in centres {
        if c.len() != n {
            return Err(Error::invalid("centre dimension mismatch"));
        }
        for &r in radii {
            let (mut a, mut b) = (0.0, 0.0);
            for (zb, wt) in ball.iter().zip(&weights) {
                g.dilate_into(r, zb, &mut z);
                g.mul_into(c, &z, &mut y);
                let v = w.eval(g, &y);
                a += wt * v;
                b += wt * v.powf(dual);
            }
            let ratio = (a / mass) * (b / mass).powf(p - 1.0);
            if !ratio.is_finite() {
                return Err(Error::numeric("ap_constant", format!("ball ({c:?}, {r}) gives {ratio}")));
            }
            worst = worst.max(ratio);
        }
    }
    Ok(worst)
}
