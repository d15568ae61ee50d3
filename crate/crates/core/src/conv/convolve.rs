//! Direct quadrature of `F*G(x) = int F(x y^{-1}) G(y) dy`.
//!
//! One side supplies quadrature nodes and weighted values, the other is
//! evaluated at the translated points. With `G` as quadrature side the sum
//! is `sum_i w_i G(y_i) F(x y_i^{-1})`; with `F` it is
//! `sum_i w_i F(y_i) G(y_i^{-1} x)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::kernels::{KernelBody, KernelSpec};
use crate::numeric::BlockSum;

/// Thread-safe evaluator.
pub type Evaluator<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// One factor of a convolution.
#[derive(Clone, Copy)]
pub enum Field<'a> {
    /// `kappa_t`; integrated on the kernel's grid dilated by `t`.
    Kernel(&'a KernelSpec, f64),
    /// Samples, interpolated multilinearly and zero off the grid.
    Sampled(&'a SampledFunction),
    /// Exact evaluator together with a grid carrying its mass.
    Func(Evaluator<'a>, &'a GridSpec),
}

/// Which factor supplies the quadrature nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadSide {
    /// The factor whose grid spacing is finest relative to the other
    /// factor's.
    Auto,
    Left,
    Right,
}

#[derive(Clone, Copy, Debug)]
pub struct ConvOptions {
    pub side: QuadSide,
    /// Nodes with `|w v|` below `prune * max |w v|` are skipped.
    pub prune: f64,
    /// Largest share of `sum |w v|` allowed on the outer layer of the
    /// quadrature grid.
    pub tail_tol: f64,
}

impl Default for ConvOptions {
    fn default() -> Self {
        Self {
            side: QuadSide::Auto,
            prune: 1e-16,
            tail_tol: 1e-3,
        }
    }
}

impl<'a> Field<'a> {
    pub fn kernel(k: &'a KernelSpec, t: f64) -> Self {
        Field::Kernel(k, t)
    }

    pub fn sampled(f: &'a SampledFunction) -> Self {
        Field::Sampled(f)
    }

    pub fn func(f: Evaluator<'a>, grid: &'a GridSpec) -> Self {
        Field::Func(f, grid)
    }

    pub fn dim(&self) -> usize {
        match self {
            Field::Kernel(k, _) => k.dim(),
            Field::Sampled(s) => s.grid().dim(),
            Field::Func(_, g) => g.dim(),
        }
    }

    /// Volume of the region carrying the field's mass.
    pub fn support_volume(&self, g: &GroupSpec) -> f64 {
        match self {
            Field::Kernel(k, t) => k.quad_grid().volume() * t.powf(g.gamma()),
            Field::Sampled(s) => s.grid().volume(),
            Field::Func(_, grid) => grid.volume(),
        }
    }

    /// Grid spacings, dilated for kernels. A kernel's evaluation grid is
    /// its sample grid, its quadrature grid may be coarser.
    fn spacings(&self, g: &GroupSpec, as_quad: bool) -> Vec<f64> {
        let (grid, t) = match self {
            Field::Kernel(k, t) => match (k.body(), as_quad) {
                (KernelBody::Sampled(s), false) => (s.grid(), *t),
                _ => (k.quad_grid(), *t),
            },
            Field::Sampled(s) => (s.grid(), 1.0),
            Field::Func(_, grid) => (*grid, 1.0),
        };
        let f = g.dilation_factors(t);
        (0..grid.dim()).map(|i| grid.spacing(i) * f[i]).collect()
    }

    /// Worst ratio of this field's quadrature spacing to the spacing on
    /// which `other` is resolved. Smaller is the better quadrature side.
    fn resolution_against(&self, g: &GroupSpec, other: &Field<'_>) -> f64 {
        let q = self.spacings(g, true);
        let e = other.spacings(g, false);
        q.iter().zip(&e).map(|(a, b)| a / b).fold(0.0, f64::max)
    }

    /// Pointwise value.
    pub fn eval(&self, g: &GroupSpec, x: &[f64]) -> f64 {
        self.evaluator(g).eval(x, &mut vec![0.0; x.len()])
    }

    fn evaluator(&self, g: &GroupSpec) -> Eval<'a> {
        match *self {
            Field::Kernel(k, t) => Eval::Kernel {
                k,
                inv: g.dilation_factors(1.0 / t),
                amp: t.powf(-g.gamma()),
            },
            Field::Sampled(s) => Eval::Sampled(s),
            Field::Func(f, _) => Eval::Func(f),
        }
    }

    fn quadrature(&self, g: &GroupSpec, opts: &ConvOptions) -> Result<Quad> {
        let (grid, wv, scale): (GridSpec, Vec<f64>, Option<f64>) = match self {
            Field::Kernel(k, t) => {
                // A_t z carries weight t^gamma w_z and value t^{-gamma} kappa(z)
                let grid = k.quad_grid().clone();
                let w = grid.weights();
                let v = k.quad_values();
                (grid, w.iter().zip(&v).map(|(a, b)| a * b).collect(), Some(*t))
            }
            Field::Sampled(s) => {
                let w = s.grid().weights();
                (s.grid().clone(), w.iter().zip(s.values()).map(|(a, b)| a * b).collect(), None)
            }
            Field::Func(f, grid) => {
                let w = grid.weights();
                let mut x = vec![0.0; grid.dim()];
                let mut wv = Vec::with_capacity(grid.len());
                for (i, wi) in w.iter().enumerate() {
                    grid.node_into(i, &mut x);
                    let v = f(&x);
                    if !v.is_finite() {
                        return Err(Error::numeric("convolve", format!("non-finite value at {x:?}")));
                    }
                    wv.push(wi * v);
                }
                ((*grid).clone(), wv, None)
            }
        };
        let n = grid.dim();
        let (mut total, mut shell) = (BlockSum::new(), BlockSum::new());
        let mut max = 0.0f64;
        for (i, v) in wv.iter().enumerate() {
            total.add(v.abs());
            if grid.is_boundary(i) {
                shell.add(v.abs());
            }
            max = max.max(v.abs());
        }
        let (total, shell) = (total.total(), shell.total());
        if total > 0.0 && shell > opts.tail_tol * total {
            return Err(Error::GridTooSmall(format!(
                "{:.2e} of the quadrature mass sits on the grid boundary",
                shell / total
            )));
        }
        let factors = scale.map(|t| g.dilation_factors(t));
        let cut = opts.prune * max;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut x = vec![0.0; n];
        for (i, v) in wv.iter().enumerate() {
            if v.abs() <= cut || *v == 0.0 {
                continue;
            }
            grid.node_into(i, &mut x);
            if let Some(f) = &factors {
                for (a, s) in x.iter_mut().zip(f) {
                    *a *= s;
                }
            }
            nodes.extend_from_slice(&x);
            weights.push(*v);
        }
        Ok(Quad { dim: n, nodes, weights })
    }
}

struct Quad {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

enum Eval<'a> {
    Kernel { k: &'a KernelSpec, inv: Vec<f64>, amp: f64 },
    Sampled(&'a SampledFunction),
    Func(Evaluator<'a>),
}

impl Eval<'_> {
    #[inline]
    fn eval(&self, p: &[f64], buf: &mut [f64]) -> f64 {
        match self {
            Eval::Kernel { k, inv, amp } => {
                for ((b, v), s) in buf.iter_mut().zip(p).zip(inv) {
                    *b = v * s;
                }
                match k.body() {
                    KernelBody::PolyGauss(pg) => amp * pg.eval(buf),
                    KernelBody::Sampled(s) => amp * s.interpolate_cubic(buf),
                }
            }
            Eval::Sampled(s) => s.interpolate(p),
            Eval::Func(f) => f(p),
        }
    }
}

/// `F*G` at the nodes of `out`.
pub fn convolve(g: &GroupSpec, f: Field<'_>, h: Field<'_>, out: &GridSpec) -> Result<SampledFunction> {
    convolve_with(g, f, h, out, &ConvOptions::default())
}

pub fn convolve_with(
    g: &GroupSpec,
    f: Field<'_>,
    h: Field<'_>,
    out: &GridSpec,
    opts: &ConvOptions,
) -> Result<SampledFunction> {
    let n = g.dim();
    if f.dim() != n || h.dim() != n || out.dim() != n {
        return Err(Error::invalid("convolution factors and output grid must match the group dimension"));
    }
    let left_quad = match opts.side {
        QuadSide::Left => true,
        QuadSide::Right => false,
        QuadSide::Auto => f.resolution_against(g, &h) <= h.resolution_against(g, &f),
    };
    let (quad, other) = if left_quad {
        (f.quadrature(g, opts)?, h.evaluator(g))
    } else {
        (h.quadrature(g, opts)?, f.evaluator(g))
    };
    let values: Vec<f64> = (0..out.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]),
            |(x, neg, p, buf), idx| {
                out.node_into(idx, x);
                let mut acc = BlockSum::new();
                for (y, w) in quad.nodes.chunks_exact(quad.dim).zip(&quad.weights) {
                    for (s, v) in neg.iter_mut().zip(y) {
                        *s = -v;
                    }
                    if left_quad {
                        // G(y^{-1} x)
                        g.mul_into(neg, x, p);
                    } else {
                        // F(x y^{-1})
                        g.mul_into(x, neg, p);
                    }
                    let v = other.eval(p, buf);
                    if v != 0.0 {
                        acc.add(w * v);
                    }
                }
                acc.total()
            },
        )
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::numeric("convolve", format!("non-finite result at node {i}")));
    }
    SampledFunction::new(out.clone(), values, "convolution")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{InvariantFields, MultiIndex, PolyGauss, Polynomial};

    fn gaussian(name: &str, w: Vec<f64>) -> KernelSpec {
        KernelSpec::polygauss(name, PolyGauss::gaussian(w), -1.0, "")
    }

    #[test]
    fn near_delta_reproduces() {
        let g = GroupSpec::heisenberg();
        let f = |x: &[f64]| (-(0.5 * x[0] * x[0] + 0.3 * x[1] * x[1] + 0.1 * x[2] * x[2])).exp() * (1.0 + 0.2 * x[0]);
        let fgrid = GridSpec::new(vec![9.0, 9.0, 18.0], vec![33, 33, 33]).unwrap();
        let pg = PolyGauss::gaussian(vec![1.0, 1.0, 1.0]);
        let k = gaussian("d", vec![1.0, 1.0, 1.0]).scaled(1.0 / pg.integral());
        let out = GridSpec::new(vec![2.0, 2.0, 3.0], vec![5, 5, 5]).unwrap();
        let c = convolve(&g, Field::func(&f, &fgrid), Field::kernel(&k, 0.02), &out).unwrap();
        let mut x = vec![0.0; 3];
        let mut gap = 0.0f64;
        for (i, v) in c.values().iter().enumerate() {
            out.node_into(i, &mut x);
            gap = gap.max((v - f(&x)).abs());
        }
        assert!(gap < 0.02, "{gap}");
    }

    #[test]
    fn abelian_commutes_and_gaussians_compose() {
        let g = GroupSpec::abelian(2).unwrap();
        let a = gaussian("a", vec![1.0, 2.0]);
        let b = gaussian("b", vec![0.5, 1.0]);
        let out = GridSpec::new(vec![3.0, 3.0], vec![13, 13]).unwrap();
        let ab = convolve(&g, Field::kernel(&a, 1.0), Field::kernel(&b, 1.0), &out).unwrap();
        let ba = convolve(&g, Field::kernel(&b, 1.0), Field::kernel(&a, 1.0), &out).unwrap();
        let mut x = vec![0.0; 2];
        for i in 0..out.len() {
            out.node_into(i, &mut x);
            assert!((ab.values()[i] - ba.values()[i]).abs() < 1e-10);
            // exp(-w1 x^2) * exp(-w2 x^2) = pi/(w1+w2)^{1/2} ... per axis
            let axis = |w1: f64, w2: f64, t: f64| {
                (std::f64::consts::PI / (w1 + w2)).sqrt() * (-(w1 * w2 / (w1 + w2)) * t * t).exp()
            };
            let exact = axis(1.0, 0.5, x[0]) * axis(2.0, 1.0, x[1]);
            assert!((ab.values()[i] - exact).abs() < 1e-8, "{} {exact}", ab.values()[i]);
        }
    }

    fn conv_at(g: &GroupSpec, f: &KernelSpec, h: &KernelSpec, x: &[f64]) -> f64 {
        let q = h.quad_grid();
        let w = q.weights();
        let (mut y, mut z) = (vec![0.0; 3], vec![0.0; 3]);
        let mut acc = 0.0;
        for i in 0..q.len() {
            q.node_into(i, &mut y);
            let yi: Vec<f64> = y.iter().map(|v| -v).collect();
            g.mul_into(x, &yi, &mut z);
            acc += w[i] * f.eval(&z) * h.eval(&y);
        }
        acc
    }

    #[test]
    fn derivatives_move_through_convolution() {
        // X_1 (f * h) = f * (X_1 h)
        let g = GroupSpec::heisenberg();
        let fields = InvariantFields::new(&g);
        let fpg = PolyGauss::new(Polynomial::variable(3, 1).add(&Polynomial::constant(3, 1.0)), vec![1.0, 0.7, 0.4]);
        let hpg = PolyGauss::gaussian(vec![0.8, 1.0, 0.5]);
        let f = KernelSpec::polygauss("f", fpg, -1.0, "");
        let h = KernelSpec::polygauss("h", hpg.clone(), -1.0, "");
        let xh = KernelSpec::polygauss("X1 h", hpg.left_derivative(&fields, 0), -1.0, "");
        for p in [[0.3, -0.2, 0.5], [-0.7, 0.4, -0.1], [0.0, 0.9, 1.2]] {
            let rhs = conv_at(&g, &f, &xh, &p);
            let lhs = crate::calculus::left_derivative(&g, |x: &[f64]| conv_at(&g, &f, &h, x), &MultiIndex::unit(3, 0), &p).unwrap();
            assert!((lhs - rhs).abs() < 1e-3 * rhs.abs().max(1e-3), "{lhs} {rhs}");
        }
    }

    #[test]
    fn engine_matches_direct_sum_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        let a = gaussian("a", vec![1.0, 0.5, 0.3]);
        let b = KernelSpec::polygauss(
            "b",
            PolyGauss::new(Polynomial::variable(3, 0), vec![0.7, 1.0, 0.6]),
            -1.0,
            "",
        );
        let out = GridSpec::new(vec![2.0, 2.0, 3.0], vec![3, 3, 3]).unwrap();
        for side in [QuadSide::Left, QuadSide::Right] {
            let opts = ConvOptions { side, ..ConvOptions::default() };
            let c = convolve_with(&g, Field::kernel(&a, 1.0), Field::kernel(&b, 1.0), &out, &opts).unwrap();
            // Direct Cartesian sum on b's grid as an oracle.
            let q = b.quad_grid();
            let w = q.weights();
            let mut x = vec![0.0; 3];
            let mut y = vec![0.0; 3];
            let mut z = vec![0.0; 3];
            for i in 0..out.len() {
                out.node_into(i, &mut x);
                let mut acc = 0.0;
                for k in 0..q.len() {
                    q.node_into(k, &mut y);
                    let yi: Vec<f64> = y.iter().map(|v| -v).collect();
                    g.mul_into(&x, &yi, &mut z);
                    acc += w[k] * a.eval(&z) * b.eval(&y);
                }
                assert!((c.values()[i] - acc).abs() < 1e-6 * (1.0 + acc.abs()), "{side:?} {} {acc}", c.values()[i]);
            }
        }
    }

    #[test]
    fn boundary_mass_is_reported() {
        let g = GroupSpec::abelian(2).unwrap();
        let f = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp();
        let small = GridSpec::new(vec![2.0, 2.0], vec![9, 9]).unwrap();
        let k = gaussian("k", vec![1.0, 1.0]);
        let out = GridSpec::new(vec![1.0, 1.0], vec![3, 3]).unwrap();
        let opts = ConvOptions { side: QuadSide::Left, ..ConvOptions::default() };
        let r = convolve_with(&g, Field::func(&f, &small), Field::kernel(&k, 1.0), &out, &opts);
        assert!(matches!(r, Err(Error::GridTooSmall(_))));
    }
}
