//! Polar coordinates adapted to the dilations: every `x != 0` is uniquely
//! `A_t theta` with `t = rho(x)` and `|theta| = 1`, and
//! `dx = t^{gamma-1} omega(theta) dS(theta) dt` with `omega(theta) = sum a_k theta_k^2`.

use super::GroupSpec;
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, unit_ball_volume, BlockSum};

/// Nodes per radial Gauss-Legendre panel.
const RADIAL_ORDER: usize = 8;

/// Tensor quadrature over `(0, R] x S^{n-1}` for the measure `dx`.
#[derive(Clone, Debug)]
pub struct PolarQuadrature {
    sphere_nodes: Vec<Vec<f64>>,
    /// `omega(theta) dS(theta)` per sphere node.
    sphere_weights: Vec<f64>,
    radial_nodes: Vec<f64>,
    /// `t^{gamma-1} dt` per radial node.
    radial_weights: Vec<f64>,
    gamma: f64,
}

impl PolarQuadrature {
    /// `angular` Gauss-Legendre nodes per polar angle (the azimuth gets
    /// `2 * angular` equispaced nodes); the radial interval `(0, radius]` is
    /// split into `panels` equal Gauss-Legendre panels.
    pub fn new(g: &GroupSpec, angular: usize, radius: f64, panels: usize) -> Result<Self> {
        if angular < 2 || panels < 1 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(
                "polar quadrature needs angular >= 2, panels >= 1 and radius > 0",
            ));
        }
        let (sphere_nodes, mut sphere_weights) = sphere_rule(g.dim(), angular);
        for (w, th) in sphere_weights.iter_mut().zip(&sphere_nodes) {
            let omega: f64 = th.iter().zip(g.exponents()).map(|(v, a)| a * v * v).sum();
            *w *= omega;
        }
        let (gx, gw) = gauss_legendre(RADIAL_ORDER);
        let mut radial_nodes = Vec::new();
        let mut radial_weights = Vec::new();
        let gamma = g.gamma();
        let width = radius / panels as f64;
        for p in 0..panels {
            let (lo, hi) = (p as f64 * width, (p + 1) as f64 * width);
            let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
            for (x, w) in gx.iter().zip(&gw) {
                let t = mid + half * x;
                radial_nodes.push(t);
                radial_weights.push(half * w * t.powf(gamma - 1.0));
            }
        }
        Ok(Self {
            sphere_nodes,
            sphere_weights,
            radial_nodes,
            radial_weights,
            gamma,
        })
    }

    pub fn sphere_nodes(&self) -> &[Vec<f64>] {
        &self.sphere_nodes
    }

    pub fn sphere_weights(&self) -> &[f64] {
        &self.sphere_weights
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// The rule's value for the Lebesgue measure of the unit ball,
    /// `(1/gamma) * sum(sphere_weights)`; exact answer is the Euclidean
    /// unit-ball volume because `rho <= 1` iff `|x| <= 1`.
    pub fn unit_ball_measure(&self) -> f64 {
        self.sphere_weights.iter().sum::<f64>() / self.gamma
    }

    /// Relative gap between [`Self::unit_ball_measure`] and the exact volume.
    pub fn unit_ball_defect(&self) -> f64 {
        let v = unit_ball_volume(self.sphere_nodes[0].len());
        (self.unit_ball_measure() - v).abs() / v
    }
}

/// Product rule on `S^{n-1}` in hyperspherical angles; weights are `dS`.
fn sphere_rule(n: usize, angular: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 1 {
        return (vec![vec![-1.0], vec![1.0]], vec![1.0, 1.0]);
    }
    let (gx, gw) = gauss_legendre(angular);
    let polar: Vec<(f64, f64)> = gx
        .iter()
        .zip(&gw)
        .map(|(x, w)| (0.5 * std::f64::consts::PI * (x + 1.0), 0.5 * std::f64::consts::PI * w))
        .collect();
    let m = 2 * angular;
    let dphi = 2.0 * std::f64::consts::PI / m as f64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    // the first n-2 angles lie in [0, pi], the last one in [0, 2 pi)
    let mut idx = vec![0usize; n - 2];
    loop {
        let mut prefix = vec![0.0; n];
        let mut s = 1.0;
        let mut w = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            let (phi, wk) = polar[k];
            prefix[i] = s * phi.cos();
            // sin^{n-2-i} phi is the surface factor of the i-th angle
            w *= wk * phi.sin().powi((n - 2 - i) as i32);
            s *= phi.sin();
        }
        for a in 0..m {
            let phi = (a as f64 + 0.5) * dphi;
            let mut th = prefix.clone();
            th[n - 2] = s * phi.cos();
            th[n - 1] = s * phi.sin();
            nodes.push(th);
            weights.push(w * dphi);
        }
        // advance the odometer over the polar angles
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < angular {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    (nodes, weights)
}

/// `int f(x) dx` over `rho(x) <= R` through `f(A_t theta) t^{gamma-1} omega dS dt`.
pub fn polar_integrate<F>(g: &GroupSpec, f: F, q: &PolarQuadrature) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = g.dim();
    let mut x = vec![0.0; n];
    let mut acc = BlockSum::new();
    for (t, wt) in q.radial_nodes.iter().zip(&q.radial_weights) {
        let factors = g.dilation_factors(*t);
        for (th, ws) in q.sphere_nodes.iter().zip(&q.sphere_weights) {
            for k in 0..n {
                x[k] = factors[k] * th[k];
            }
            let v = f(&x);
            if !v.is_finite() {
                return Err(Error::numeric(format!("polar node {x:?}"), "non-finite integrand"));
            }
            acc.add(wt * ws * v);
        }
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_weights_give_unit_ball_volume() {
        for g in [
            GroupSpec::abelian(1).unwrap(),
            GroupSpec::abelian(2).unwrap(),
            GroupSpec::abelian(3).unwrap(),
            GroupSpec::heisenberg(),
        ] {
            let q = PolarQuadrature::new(&g, 16, 8.0, 20).unwrap();
            assert!(q.unit_ball_defect() < 1e-8, "{} {}", g.name(), q.unit_ball_defect());
            assert!(q.sphere_weights().iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn gaussian_in_the_plane() {
        let g = GroupSpec::abelian(2).unwrap();
        let q = PolarQuadrature::new(&g, 8, 10.0, 30).unwrap();
        let v = polar_integrate(&g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp(), &q).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn heisenberg_gaussian_matches_closed_form() {
        // int exp(-x1^2 - x2^2 - x3^2) = pi^{3/2}
        let g = GroupSpec::heisenberg();
        let q = PolarQuadrature::new(&g, 24, 6.0, 30).unwrap();
        let v = polar_integrate(&g, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp(), &q).unwrap();
        let exact = std::f64::consts::PI.powf(1.5);
        assert!((v - exact).abs() / exact < 1e-6, "{v} vs {exact}");
    }

    #[test]
    fn zero_integrand() {
        let g = GroupSpec::heisenberg();
        let q = PolarQuadrature::new(&g, 4, 1.0, 2).unwrap();
        assert_eq!(polar_integrate(&g, |_| 0.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_is_reported() {
        let g = GroupSpec::abelian(2).unwrap();
        let q = PolarQuadrature::new(&g, 4, 1.0, 2).unwrap();
        assert!(matches!(
            polar_integrate(&g, |_| f64::NAN, &q),
            Err(Error::NumericFailure { .. })
        ));
    }
}
