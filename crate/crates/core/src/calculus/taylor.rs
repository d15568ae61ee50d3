//! Homogeneous Taylor polynomials.
//!
//! The left polynomial of `f` at `x` of degree `a` is the `P` with
//! `X^I P(0) = X^I f(x)` for every `a(I) <= a`; it approximates `y -> f(xy)`.
//! The right one uses `Y^I` and approximates `y -> f(yx)`.

use super::derivative::{invariant_derivative, step_for_order, Side};
use super::lattice::HomogeneityLattice;
use super::multiindex::MultiIndex;
use super::poly::{InvariantFields, Polynomial};
use crate::error::{Error, Result};
use crate::group::{GroupSpec, Point};
use crate::numeric::solve_dense;

#[derive(Clone, Debug)]
pub struct TaylorPoly {
    base: Point,
    side: Side,
    degree: f64,
    poly: Polynomial,
}

impl TaylorPoly {
    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn hom_degree(&self) -> f64 {
        self.degree
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    /// Coefficients `c_K` of `P(y) = sum c_K y^K`.
    pub fn coeffs(&self) -> Vec<(MultiIndex, f64)> {
        self.poly
            .terms()
            .map(|(k, c)| (MultiIndex(k.clone()), *c))
            .collect()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.poly.eval(y)
    }

    /// `f(xy) - P(y)` (left) or `f(yx) - P(y)` (right).
    pub fn remainder<F>(&self, g: &GroupSpec, f: F, y: &[f64]) -> f64
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut p = vec![0.0; g.dim()];
        match self.side {
            Side::Left => g.mul_into(&self.base, y, &mut p),
            Side::Right => g.mul_into(y, &self.base, &mut p),
        }
        f(&p) - self.eval(y)
    }
}

/// Taylor polynomial from finite-difference derivatives of `f`.
pub fn taylor_poly<F>(g: &GroupSpec, f: F, x: &[f64], a: f64, side: Side) -> Result<TaylorPoly>
where
    F: Fn(&[f64]) -> f64,
{
    taylor_poly_from(g, x, a, side, |i| {
        invariant_derivative(g, &f, i, x, side, step_for_order(i.order()))
    })
}

/// Taylor polynomial from supplied derivative values `X^I f(x)` (or `Y^I`).
pub fn taylor_poly_from<D>(g: &GroupSpec, x: &[f64], a: f64, side: Side, derivs: D) -> Result<TaylorPoly>
where
    D: Fn(&MultiIndex) -> Result<f64>,
{
    let lattice = HomogeneityLattice::new(g, a.max(0.0))?;
    if !lattice.contains(a) {
        return Err(Error::invalid(format!("{a} is not a homogeneous degree of {}", g.name())));
    }
    let n = g.dim();
    let fields = InvariantFields::new(g);
    let all = MultiIndex::up_to_degree(g, a);
    let mut poly = Polynomial::zero(n);
    // X^I y^K (0) vanishes unless a(I) = a(K), so the system splits into
    // one block per homogeneous degree
    let mut start = 0;
    while start < all.len() {
        let d = all[start].hom_degree(g);
        let end = start
            + all[start..]
                .iter()
                .take_while(|i| (i.hom_degree(g) - d).abs() < 1e-9)
                .count();
        let block = &all[start..end];
        let zero = vec![0.0; n];
        let mut m = vec![vec![0.0; block.len()]; block.len()];
        let mut rhs = Vec::with_capacity(block.len());
        for (r, i) in block.iter().enumerate() {
            for (c, k) in block.iter().enumerate() {
                let mono = Polynomial::monomial(n, &k.0, 1.0);
                let d = match side {
                    Side::Left => fields.left_pow(i, &mono),
                    Side::Right => fields.right_pow(i, &mono),
                };
                m[r][c] = d.eval(&zero);
            }
            rhs.push(derivs(i)?);
        }
        let sol = solve_dense(m, rhs).ok_or_else(|| {
            Error::DegenerateLattice(format!("singular Taylor block at degree {d}"))
        })?;
        for (k, c) in block.iter().zip(sol) {
            poly.add_term(k.0.clone(), c);
        }
        start = end;
    }
    Ok(TaylorPoly {
        base: x.to_vec(),
        side,
        degree: a,
        poly,
    })
}
