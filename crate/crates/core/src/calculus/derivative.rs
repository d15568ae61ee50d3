//! Invariant derivatives of black-box functions by nested central
//! differences along the curves `x (t e_j)` and `(t e_j) x`.

use serde::{Deserialize, Serialize};

use super::multiindex::MultiIndex;
use crate::error::{Error, Result};
use crate::group::GroupSpec;

/// Base step of the difference stencils.
pub const FD_STEP: f64 = 1e-3;

/// Which family of invariant fields: `X_j` (left) or `Y_j` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Step used for a derivative of the given total order. Each nesting level
/// divides rounding noise by `h`, so the step grows for orders above 2.
pub fn step_for_order(order: u32) -> f64 {
    FD_STEP * 2f64.powi(order.saturating_sub(2) as i32)
}

/// `X^I f(x)`.
pub fn left_derivative<F>(g: &GroupSpec, f: F, i: &MultiIndex, x: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    invariant_derivative(g, &f, i, x, Side::Left, step_for_order(i.order()))
}

/// `Y^I f(x)`.
pub fn right_derivative<F>(g: &GroupSpec, f: F, i: &MultiIndex, x: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    invariant_derivative(g, &f, i, x, Side::Right, step_for_order(i.order()))
}

/// Nested fourth-order central differences; the factors are applied in the
/// order of `X^I = X_1^{i_1} ... X_n^{i_n}`, outermost first.
pub fn invariant_derivative(
    g: &GroupSpec,
    f: &dyn Fn(&[f64]) -> f64,
    i: &MultiIndex,
    x: &[f64],
    side: Side,
    h: f64,
) -> Result<f64> {
    if i.dim() != g.dim() || x.len() != g.dim() {
        return Err(Error::invalid("multi-index and point must match the group dimension"));
    }
    let seq = i.factor_sequence();
    let v = nested(g, f, &seq, x, side, h);
    if !v.is_finite() {
        return Err(Error::numeric(format!("{x:?}"), format!("non-finite derivative of order {i}")));
    }
    Ok(v)
}

const STENCIL: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

fn nested(g: &GroupSpec, f: &dyn Fn(&[f64]) -> f64, seq: &[usize], x: &[f64], side: Side, h: f64) -> f64 {
    let Some((&j, rest)) = seq.split_first() else {
        return f(x);
    };
    let n = g.dim();
    let mut e = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut acc = 0.0;
    for (s, c) in STENCIL {
        e[j] = s * h;
        match side {
            Side::Left => g.mul_into(x, &e, &mut p),
            Side::Right => g.mul_into(&e, x, &mut p),
        }
        acc += c * nested(g, f, rest, &p, side, h);
    }
    acc / (12.0 * h)
}

/// `(X_1^2 + X_2^2) f(x)` on a group whose first layer has two coordinates.
pub fn sublaplacian<F>(g: &GroupSpec, f: F, x: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let n = g.dim();
    let first_layer = g.exponents().iter().take_while(|a| **a == 1.0).count();
    if n < 2 || first_layer != 2 {
        return Err(Error::invalid("the sub-Laplacian needs exactly two degree-one coordinates"));
    }
    let mut acc = 0.0;
    for j in 0..2 {
        let mut i = MultiIndex::zero(n);
        i.0[j] = 2;
        acc += left_derivative(g, &f, &i, x)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_derivatives_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        let x = [0.7, -1.3, 2.0];
        let d = left_derivative(&g, |p| p[2], &MultiIndex(vec![1, 0, 0]), &x).unwrap();
        assert!((d - 0.65).abs() < 1e-10);
        let d = left_derivative(&g, |p| p[0], &MultiIndex(vec![1, 0, 0]), &x).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
        let d = right_derivative(&g, |p| p[2], &MultiIndex(vec![0, 1, 0]), &x).unwrap();
        assert!((d - (-0.35)).abs() < 1e-10);
    }

    #[test]
    fn sublaplacian_examples() {
        let g = GroupSpec::heisenberg();
        let x = [0.4, 0.1, -0.3];
        assert!((sublaplacian(&g, |p| p[0] * p[0], &x).unwrap() - 2.0).abs() < 1e-7);
        assert!(sublaplacian(&g, |p| p[2], &x).unwrap().abs() < 1e-7);
        assert!(sublaplacian(&g, |_| 3.0, &x).unwrap().abs() < 1e-9);
        assert!(sublaplacian(&GroupSpec::abelian(3).unwrap(), |_| 0.0, &x).is_err());
    }

    #[test]
    fn dilation_covariance() {
        // X_j(f o A_s)(x) = s^{a_j} (X_j f)(A_s x)
        let g = GroupSpec::heisenberg();
        let f = |p: &[f64]| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])).exp() * (1.0 + p[2]);
        let s = 1.7;
        let x = [0.3, -0.2, 0.25];
        for j in 0..3 {
            let i = MultiIndex::unit(3, j);
            let lhs = left_derivative(&g, |p| f(&g.dilate(s, p).unwrap()), &i, &x).unwrap();
            let rhs = s.powf(g.exponents()[j]) * left_derivative(&g, f, &i, &g.dilate(s, &x).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-6 * rhs.abs().max(1e-3), "{j}: {lhs} {rhs}");
        }
    }
}
