//! Homogeneous groups on R^n with diagonal dilations.
//!
//! A group is described by its dilation exponents `1 = a_1 <= ... <= a_n` and
//! a polynomial law `z_k = x_k + y_k + R_k(x, y)`, where every monomial
//! `c x^I y^J` of `R_k` is homogeneous of degree `a_k` and only involves
//! coordinates below `k`. The identity is the origin and `x^{-1} = -x`.

mod polar;
mod validate;

pub use polar::{polar_integrate, PolarQuadrature};
pub use validate::{validate_group, ValidationReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A group element in exponential-free Euclidean coordinates.
pub type Point = Vec<f64>;

/// One monomial `coeff * x^I * y^J` of a structure polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureTerm {
    pub coeff: f64,
    #[serde(rename = "I")]
    pub x_powers: Vec<u32>,
    #[serde(rename = "J")]
    pub y_powers: Vec<u32>,
}

/// The correction polynomial `R_k` of coordinate `k` (1-based, `k >= 2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructurePoly {
    pub k: usize,
    pub terms: Vec<StructureTerm>,
}

/// JSON document form of a group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub exponents: Vec<f64>,
    #[serde(default)]
    pub structure_polys: Vec<StructurePoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
}

#[derive(Clone, Debug)]
struct CompiledTerm {
    target: usize,
    coeff: f64,
    x: Vec<(usize, i32)>,
    y: Vec<(usize, i32)>,
}

/// How the homogeneous norm is evaluated. `General` is the bracketed
/// Newton/bisection solve of `|A_{1/t} x| = 1`; the other two are exact
/// closed forms of the same equation for special exponent patterns.
#[derive(Clone, Copy, Debug, PartialEq)]
enum NormSolver {
    /// every exponent equals `a`: rho = |x|^(1/a)
    Uniform(f64),
    /// exponents take the values `a` and `2a` only: a quadratic in t^(2a)
    TwoLevel(f64),
    General,
}

/// A homogeneous group with diagonal dilations.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    name: String,
    exponents: Vec<f64>,
    structure: Vec<StructurePoly>,
    terms: Vec<CompiledTerm>,
    gamma: f64,
    c0: f64,
    solver: NormSolver,
}

const EXPONENT_TOL: f64 = 1e-12;

impl GroupSpec {
    /// Builds and validates a group from exponents and structure polynomials.
    pub fn new(
        name: impl Into<String>,
        exponents: Vec<f64>,
        structure: Vec<StructurePoly>,
    ) -> Result<Self> {
        let n = exponents.len();
        if n == 0 {
            return Err(Error::GroupSpecInvalid("dimension must be at least 1".into()));
        }
        if (exponents[0] - 1.0).abs() > EXPONENT_TOL {
            return Err(Error::GroupSpecInvalid("first exponent must equal 1".into()));
        }
        if exponents.windows(2).any(|w| w[1] < w[0]) || exponents.iter().any(|a| !a.is_finite()) {
            return Err(Error::GroupSpecInvalid(
                "exponents must be finite and nondecreasing".into(),
            ));
        }
        let mut terms = Vec::new();
        let mut seen = vec![false; n];
        for poly in &structure {
            if poly.k < 2 || poly.k > n {
                return Err(Error::GroupSpecInvalid(format!(
                    "structure polynomial for coordinate {} outside 2..={n}",
                    poly.k
                )));
            }
            if std::mem::replace(&mut seen[poly.k - 1], true) {
                return Err(Error::GroupSpecInvalid(format!(
                    "duplicate structure polynomial for coordinate {}",
                    poly.k
                )));
            }
            let target = poly.k - 1;
            for term in &poly.terms {
                if term.x_powers.len() != n || term.y_powers.len() != n {
                    return Err(Error::GroupSpecInvalid(format!(
                        "term multi-indices must have length {n}"
                    )));
                }
                let deg = |p: &[u32]| -> f64 {
                    p.iter().zip(&exponents).map(|(&i, a)| i as f64 * a).sum()
                };
                if term.x_powers.iter().all(|&p| p == 0) || term.y_powers.iter().all(|&p| p == 0) {
                    return Err(Error::GroupSpecInvalid(
                        "structure terms need |I| != 0 and |J| != 0".into(),
                    ));
                }
                let lower_only = |p: &[u32]| p.iter().enumerate().all(|(i, &e)| e == 0 || i < target);
                if !lower_only(&term.x_powers) || !lower_only(&term.y_powers) {
                    return Err(Error::GroupSpecInvalid(format!(
                        "R_{} may only involve coordinates below {}",
                        poly.k, poly.k
                    )));
                }
                let total = deg(&term.x_powers) + deg(&term.y_powers);
                if (total - exponents[target]).abs() > 1e-9 {
                    return Err(Error::GroupSpecInvalid(format!(
                        "term in R_{} has homogeneous degree {total}, expected {}",
                        poly.k, exponents[target]
                    )));
                }
                let sparse = |p: &[u32]| -> Vec<(usize, i32)> {
                    p.iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (i, e as i32))
                        .collect()
                };
                terms.push(CompiledTerm {
                    target,
                    coeff: term.coeff,
                    x: sparse(&term.x_powers),
                    y: sparse(&term.y_powers),
                });
            }
        }
        terms.sort_by_key(|t| t.target);
        let gamma = exponents.iter().sum();
        let solver = pick_solver(&exponents);
        Ok(Self {
            name: name.into(),
            exponents,
            structure,
            terms,
            gamma,
            c0: 1.0,
            solver,
        })
    }

    /// The abelian group R^n with isotropic dilations.
    pub fn abelian(n: usize) -> Result<Self> {
        Self::new(format!("abelian:{n}"), vec![1.0; n], Vec::new())
    }

    /// The Heisenberg group H_1 on R^3 with
    /// `(x)(y) = (x1+y1, x2+y2, x3+y3+(x1 y2 - x2 y1)/2)`.
    pub fn heisenberg() -> Self {
        let term = |coeff: f64, x: [u32; 3], y: [u32; 3]| StructureTerm {
            coeff,
            x_powers: x.to_vec(),
            y_powers: y.to_vec(),
        };
        Self::new(
            "heisenberg",
            vec![1.0, 1.0, 2.0],
            vec![StructurePoly {
                k: 3,
                terms: vec![
                    term(0.5, [1, 0, 0], [0, 1, 0]),
                    term(-0.5, [0, 1, 0], [1, 0, 0]),
                ],
            }],
        )
        .expect("built-in Heisenberg law is valid")
    }

    /// Resolves a built-in by name: `abelian:<n>` or `heisenberg`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "heisenberg" | "h1" => Ok(Self::heisenberg()),
            _ => {
                if let Some(n) = name.strip_prefix("abelian:") {
                    let n: usize = n
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad dimension in {name:?}")))?;
                    Self::abelian(n)
                } else {
                    Err(Error::invalid(format!("unknown group {name:?}")))
                }
            }
        }
    }

    pub fn from_doc(doc: GroupDoc) -> Result<Self> {
        if doc.exponents.len() != doc.n {
            return Err(Error::GroupSpecInvalid(format!(
                "n = {} but {} exponents given",
                doc.n,
                doc.exponents.len()
            )));
        }
        let mut g = Self::new(
            doc.name.unwrap_or_else(|| "custom".into()),
            doc.exponents,
            doc.structure_polys,
        )?;
        if let Some(c0) = doc.c0 {
            g.set_c0(c0)?;
        }
        Ok(g)
    }

    pub fn to_doc(&self) -> GroupDoc {
        GroupDoc {
            name: Some(self.name.clone()),
            n: self.dim(),
            exponents: self.exponents.clone(),
            structure_polys: self.structure.clone(),
            c0: Some(self.c0),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn structure_polys(&self) -> &[StructurePoly] {
        &self.structure
    }

    /// Homogeneous dimension, the sum of the exponents.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Quasi-triangle constant for the homogeneous norm.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn set_c0(&mut self, c0: f64) -> Result<()> {
        if !(c0 >= 1.0) || !c0.is_finite() {
            return Err(Error::invalid(format!("c0 must be finite and >= 1, got {c0}")));
        }
        self.c0 = c0;
        Ok(())
    }

    pub fn is_abelian(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_dim(&self, x: &[f64], what: &str) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "{what} has dimension {}, group has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Group product `x y`.
    pub fn multiply(&self, x: &[f64], y: &[f64]) -> Result<Point> {
        self.check_dim(x, "left factor")?;
        self.check_dim(y, "right factor")?;
        let mut z = vec![0.0; self.dim()];
        self.mul_into(x, y, &mut z);
        Ok(z)
    }

    /// Unchecked product written into `out`. The correction terms only read
    /// coordinates of `x` and `y`, so `out` may not alias either input.
    #[inline]
    pub fn mul_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        debug_assert!(x.len() == self.dim() && y.len() == self.dim() && out.len() == self.dim());
        for k in 0..out.len() {
            out[k] = x[k] + y[k];
        }
        for t in &self.terms {
            let mut v = t.coeff;
            for &(i, p) in &t.x {
                v *= pow_small(x[i], p);
            }
            for &(i, p) in &t.y {
                v *= pow_small(y[i], p);
            }
            out[t.target] += v;
        }
    }

    /// `x^{-1} y`, the quantity entering balls and Peetre weights.
    #[inline]
    pub fn left_div_into(&self, x: &[f64], y: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        for (s, v) in scratch.iter_mut().zip(x) {
            *s = -v;
        }
        self.mul_into(scratch, y, out);
    }

    /// `x y^{-1}`.
    #[inline]
    pub fn right_div_into(&self, x: &[f64], y: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        for (s, v) in scratch.iter_mut().zip(y) {
            *s = -v;
        }
        self.mul_into(x, scratch, out);
    }

    /// Inverse element, `-x`.
    pub fn inverse(x: &[f64]) -> Point {
        x.iter().map(|v| -v).collect()
    }

    /// Dilation `A_t x = (t^{a_1} x_1, ..., t^{a_n} x_n)`.
    pub fn dilate(&self, t: f64, x: &[f64]) -> Result<Point> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("dilation parameter must be positive, got {t}")));
        }
        self.check_dim(x, "point")?;
        let mut out = vec![0.0; self.dim()];
        self.dilate_into(t, x, &mut out);
        Ok(out)
    }

    #[inline]
    pub fn dilate_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        for ((o, v), a) in out.iter_mut().zip(x).zip(&self.exponents) {
            *o = v * pow_exponent(t, *a);
        }
    }

    /// The per-coordinate factors `t^{a_k}`; handy for hot loops.
    pub fn dilation_factors(&self, t: f64) -> Vec<f64> {
        self.exponents.iter().map(|a| pow_exponent(t, *a)).collect()
    }

    /// Homogeneous norm: the unique `t > 0` with `|A_{1/t} x| = 1`, and 0 at
    /// the origin.
    #[inline]
    pub fn hom_norm(&self, x: &[f64]) -> f64 {
        match self.solver {
            NormSolver::Uniform(a) => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if a == 1.0 {
                    r2.sqrt()
                } else {
                    r2.powf(0.5 / a)
                }
            }
            NormSolver::TwoLevel(a) => {
                let (mut lo, mut hi) = (0.0, 0.0);
                for (v, e) in x.iter().zip(&self.exponents) {
                    if (*e - a).abs() <= EXPONENT_TOL {
                        lo += v * v;
                    } else {
                        hi += v * v;
                    }
                }
                if lo == 0.0 && hi == 0.0 {
                    return 0.0;
                }
                // u = t^{2a} solves u^2 - lo u - hi = 0
                // both summands are nonnegative, so no cancellation
                let u = 0.5 * (lo + (lo * lo + 4.0 * hi).sqrt());
                if a == 1.0 {
                    u.sqrt()
                } else {
                    u.powf(0.5 / a)
                }
            }
            NormSolver::General => self.hom_norm_solve(x),
        }
    }

    /// The general root solve, exposed so the closed forms can be checked
    /// against it.
    pub fn hom_norm_solve(&self, x: &[f64]) -> f64 {
        let mut t_lo = 0.0f64;
        for (v, a) in x.iter().zip(&self.exponents) {
            if *v != 0.0 {
                t_lo = t_lo.max(v.abs().powf(1.0 / a));
            }
        }
        if t_lo == 0.0 {
            return 0.0;
        }
        // phi(t) = sum x_k^2 t^{-2 a_k} is decreasing; phi(t_lo) >= 1 and
        // phi(t_lo sqrt(n)) <= 1 because every a_k >= 1.
        let phi = |s: f64| -> (f64, f64) {
            // value and derivative with respect to s = ln t
            let mut v = 0.0;
            let mut d = 0.0;
            for (x, a) in x.iter().zip(&self.exponents) {
                if *x != 0.0 {
                    let term = x * x * (-2.0 * a * s).exp();
                    v += term;
                    d -= 2.0 * a * term;
                }
            }
            (v, d)
        };
        let mut lo = t_lo.ln();
        let mut hi = lo + 0.5 * (self.dim() as f64).ln();
        if hi == lo {
            return t_lo;
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (v, d) = phi(s);
            let f = v.ln();
            if f > 0.0 {
                lo = s;
            } else {
                hi = s;
            }
            let step = f / (d / v);
            let mut next = s - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) || hi - lo <= 1e-15 * (1.0 + s.abs()) {
                s = next;
                break;
            }
            s = next;
        }
        s.exp()
    }
}

fn pick_solver(exponents: &[f64]) -> NormSolver {
    let a = exponents[0];
    if exponents.iter().all(|e| (e - a).abs() <= EXPONENT_TOL) {
        return NormSolver::Uniform(a);
    }
    if exponents
        .iter()
        .all(|e| (e - a).abs() <= EXPONENT_TOL || (e - 2.0 * a).abs() <= EXPONENT_TOL)
    {
        return NormSolver::TwoLevel(a);
    }
    NormSolver::General
}

#[inline]
fn pow_small(v: f64, p: i32) -> f64 {
    match p {
        1 => v,
        2 => v * v,
        3 => v * v * v,
        _ => v.powi(p),
    }
}

#[inline]
pub(crate) fn pow_exponent(t: f64, a: f64) -> f64 {
    if a == 1.0 {
        t
    } else if a == 2.0 {
        t * t
    } else {
        t.powf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_product() {
        let g = GroupSpec::heisenberg();
        assert_eq!(g.multiply(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), vec![1.0, 1.0, 0.5]);
        let a = g.multiply(&g.multiply(&[1., 2., 0.], &[3., 4., 0.]).unwrap(), &[5., 6., 0.]).unwrap();
        let b = g.multiply(&[1., 2., 0.], &g.multiply(&[3., 4., 0.], &[5., 6., 0.]).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(g.multiply(&[1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn dilation_and_norm() {
        let g = GroupSpec::heisenberg();
        assert_eq!(g.dilate(2.0, &[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 2.0, 4.0]);
        assert!(g.dilate(0.0, &[1.0, 1.0, 1.0]).is_err());
        assert_eq!(g.hom_norm(&[0.0, 0.0, 4.0]), 2.0);
        assert_eq!(g.hom_norm(&[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(g.hom_norm(&[0.0; 3]), 0.0);
    }

    #[test]
    fn closed_forms_match_general_solve() {
        let g = GroupSpec::heisenberg();
        let a = GroupSpec::abelian(3).unwrap();
        for x in [[0.3, -1.2, 7.0], [1e-4, 2e-4, 5e3], [-2.0, 0.5, -1e-6]] {
            let (c, s) = (g.hom_norm(&x), g.hom_norm_solve(&x));
            assert!((c - s).abs() <= 1e-12 * c, "{c} {s}");
            let (c, s) = (a.hom_norm(&x), a.hom_norm_solve(&x));
            assert!((c - s).abs() <= 1e-12 * c, "{c} {s}");
        }
    }

    #[test]
    fn general_solver_on_three_levels() {
        let g = GroupSpec::new("filiform", vec![1.0, 1.5, 3.0], Vec::new()).unwrap();
        let x = [0.7, -0.2, 1.9];
        let r = g.hom_norm(&x);
        let back: f64 = x
            .iter()
            .zip(g.exponents())
            .map(|(v, a)| (v / r.powf(*a)).powi(2))
            .sum();
        assert!((back - 1.0).abs() < 1e-12);
        let r3 = g.hom_norm(&g.dilate(3.0, &x).unwrap());
        assert!((r3 / r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = GroupSpec::heisenberg();
        let back = GroupSpec::from_json(&g.to_json().unwrap()).unwrap();
        let x = [0.4, -0.1, 2.0];
        let y = [1.0, 0.3, -0.5];
        assert_eq!(g.multiply(&x, &y).unwrap(), back.multiply(&x, &y).unwrap());
        let doc = r#"{"n": 2, "exponents": [1, 1], "structure_polys": []}"#;
        assert!(GroupSpec::from_json(doc).unwrap().is_abelian());
    }

    #[test]
    fn malformed_laws_are_rejected() {
        let term = StructureTerm { coeff: 1.0, x_powers: vec![1, 0, 0], y_powers: vec![1, 0, 0] };
        let bad_degree = StructurePoly { k: 3, terms: vec![StructureTerm { y_powers: vec![0, 0, 1], ..term.clone() }] };
        assert!(GroupSpec::new("x", vec![1.0, 1.0, 2.0], vec![bad_degree]).is_err());
        assert!(GroupSpec::new("x", vec![2.0, 2.0], Vec::new()).is_err());
        assert!(GroupSpec::new("x", vec![1.0, 2.0, 1.0], Vec::new()).is_err());
        let ok = StructurePoly { k: 3, terms: vec![term] };
        assert!(GroupSpec::new("x", vec![1.0, 1.0, 2.0], vec![ok]).is_ok());
        assert!(GroupSpec::builtin("abelian:x").is_err());
        assert_eq!(GroupSpec::builtin("abelian:4").unwrap().gamma(), 4.0);
    }
}
