//! Numerical checks of the group axioms, and the empirical quasi-triangle
//! constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::GroupSpec;
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Multiplier applied to the sampled quasi-triangle constant.
pub const C0_MARGIN: f64 = 1.05;

/// Axiom defects above this are treated as a malformed law.
const HARD_ALGEBRA_DEFECT: f64 = 1e-9;
const HARD_HAAR_DEFECT: f64 = 1e-2;

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub group: String,
    pub samples: usize,
    pub associativity_defect: f64,
    pub identity_defect: f64,
    pub inverse_defect: f64,
    /// `A_t(xy)` against `(A_t x)(A_t y)`, and `A_s A_t` against `A_{st}`.
    pub automorphism_defect: f64,
    /// `|int f(ay) dy - int f(y) dy| / int |f|`, worst over left and right
    /// translates of a Gaussian.
    pub haar_defect: f64,
    /// `max rho(xy) / (rho(x) + rho(y))` over the samples.
    pub c0_hat: f64,
    /// The constant stored on the group: `max(1, c0_hat * margin)`.
    pub c0: f64,
}

/// `|a - b|_inf / max(1, |a|_inf)`.
pub fn relative_defect(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..=half)).collect()
}

/// A point with log-uniform homogeneous size in `[1e-3, 1e3]` and a random
/// direction, so products mix very different scales.
fn random_scaled_point(g: &GroupSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = g.dim();
    let mut th: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let r = th.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    th.iter_mut().for_each(|v| *v /= r);
    let s = 10f64.powf(rng.gen_range(-3.0..=3.0));
    let mut out = vec![0.0; n];
    g.dilate_into(s, &th, &mut out);
    out
}

/// Checks associativity, identity, inverse, the dilation automorphism and
/// Haar invariance on random samples, estimates the quasi-triangle constant
/// and stores it on `g`.
pub fn validate_group(g: &mut GroupSpec, sample_count: usize, seed: u64) -> Result<ValidationReport> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be at least 1"));
    }
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = vec![0.0; n];
    let (mut assoc, mut ident, mut inv, mut auto) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut c0_hat = 0.0f64;
    let (mut xy, mut yz, mut l, mut r) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..sample_count {
        let x = random_point(&mut rng, n, 5.0);
        let y = random_point(&mut rng, n, 5.0);
        let z = random_point(&mut rng, n, 5.0);
        g.mul_into(&x, &y, &mut xy);
        g.mul_into(&y, &z, &mut yz);
        g.mul_into(&xy, &z, &mut l);
        g.mul_into(&x, &yz, &mut r);
        assoc = assoc.max(relative_defect(&l, &r));

        g.mul_into(&x, &zero, &mut l);
        g.mul_into(&zero, &x, &mut r);
        ident = ident.max(relative_defect(&x, &l)).max(relative_defect(&x, &r));

        let xi = GroupSpec::inverse(&x);
        g.mul_into(&x, &xi, &mut l);
        g.mul_into(&xi, &x, &mut r);
        inv = inv.max(relative_defect(&zero, &l)).max(relative_defect(&zero, &r));

        let t = rng.gen_range(0.25..=4.0);
        let s = rng.gen_range(0.25..=4.0);
        let (mut ax, mut ay, mut axy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        g.dilate_into(t, &x, &mut ax);
        g.dilate_into(t, &y, &mut ay);
        g.dilate_into(t, &xy, &mut axy);
        g.mul_into(&ax, &ay, &mut l);
        auto = auto.max(relative_defect(&axy, &l));
        let mut ast = vec![0.0; n];
        g.dilate_into(s, &ax, &mut ast);
        g.dilate_into(s * t, &x, &mut r);
        auto = auto.max(relative_defect(&r, &ast));

        let xs = random_scaled_point(g, &mut rng);
        // y close to the inverse of x makes the correction terms dominate
        let ys = if rng.gen_bool(0.5) {
            random_scaled_point(g, &mut rng)
        } else {
            let mut p = GroupSpec::inverse(&xs);
            let e = random_scaled_point(g, &mut rng);
            p.iter_mut().zip(&e).for_each(|(a, b)| *a += 1e-2 * b);
            p
        };
        g.mul_into(&xs, &ys, &mut l);
        let denom = g.hom_norm(&xs) + g.hom_norm(&ys);
        if denom > 0.0 {
            c0_hat = c0_hat.max(g.hom_norm(&l) / denom);
        }
    }
    let haar = haar_defect(g, &mut rng)?;
    if assoc > HARD_ALGEBRA_DEFECT || ident > HARD_ALGEBRA_DEFECT || inv > HARD_ALGEBRA_DEFECT {
        return Err(Error::GroupSpecInvalid(format!(
            "group law defects too large: associativity {assoc:e}, identity {ident:e}, inverse {inv:e}"
        )));
    }
    if auto > HARD_ALGEBRA_DEFECT {
        return Err(Error::GroupSpecInvalid(format!(
            "dilations are not automorphisms: defect {auto:e}"
        )));
    }
    if haar > HARD_HAAR_DEFECT {
        return Err(Error::GroupSpecInvalid(format!(
            "Lebesgue measure is not translation invariant: defect {haar:e}"
        )));
    }
    let c0 = (c0_hat * C0_MARGIN).max(1.0);
    g.set_c0(c0)?;
    Ok(ValidationReport {
        group: g.name().to_string(),
        samples: sample_count,
        associativity_defect: assoc,
        identity_defect: ident,
        inverse_defect: inv,
        automorphism_defect: auto,
        haar_defect: haar,
        c0_hat,
        c0,
    })
}

/// Nodes per axis so that the Haar check stays near 33^3 grid nodes.
fn haar_points(n: usize) -> usize {
    let p = (35_937f64.powf(1.0 / n as f64).floor() as usize).clamp(5, 201);
    if p % 2 == 0 {
        p - 1
    } else {
        p
    }
}

fn haar_defect(g: &GroupSpec, rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = g.dim();
    // abelian laws do not shear, so a wider box costs no resolution there
    let radius = if g.is_abelian() { 8.0 } else { 4.0 };
    let grid = GridSpec::for_group(g, radius, haar_points(n))?;
    // Gaussian widened along the higher layers so it stays resolved on the
    // anisotropic grid: exp(-sum (x_k / 2^{a_k - 1})^2)
    let inv_width: Vec<f64> = g.exponents().iter().map(|a| 0.5f64.powf(a - 1.0)).collect();
    let gauss = |p: &[f64]| {
        (-p.iter().zip(&inv_width).map(|(v, s)| (v * s) * (v * s)).sum::<f64>()).exp()
    };
    let base = grid.integrate(gauss)?;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let a = random_point(rng, n, 1.0);
        let left = grid.integrate(|y| {
            let mut z = vec![0.0; n];
            g.mul_into(&a, y, &mut z);
            gauss(&z)
        })?;
        let right = grid.integrate(|y| {
            let mut z = vec![0.0; n];
            g.mul_into(y, &a, &mut z);
            gauss(&z)
        })?;
        worst = worst.max((left - base).abs() / base).max((right - base).abs() / base);
    }
    Ok(worst)
}
