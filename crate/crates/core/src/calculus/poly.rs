//! Exact polynomials, the invariant vector fields acting on them, and the
//! polynomial-times-Gaussian functions that are closed under those fields.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use super::multiindex::{hom_degree, MultiIndex};
use crate::group::GroupSpec;

/// A real polynomial in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::monomial(n, &vec![0; n], c)
    }

    pub fn monomial(n: usize, powers: &[u32], c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(powers.to_vec(), c);
        p
    }

    /// `x_k` (0-based).
    pub fn variable(n: usize, k: usize) -> Self {
        Self::monomial(n, &MultiIndex::unit(n, k).0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, powers: &[u32]) -> f64 {
        self.terms.get(powers).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, powers: Vec<u32>, c: f64) {
        debug_assert_eq!(powers.len(), self.n);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(powers) {
            Entry::Occupied(mut o) => {
                let v = *o.get() + c;
                if v == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let k: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(k, x * y);
            }
        }
        out
    }

    /// `d/dx_k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            if a[k] > 0 {
                let mut b = a.clone();
                b[k] -= 1;
                out.add_term(b, c * a[k] as f64);
            }
        }
        out
    }

    /// Highest `a(I)` among the terms, `None` for the zero polynomial.
    pub fn hom_degree(&self, g: &GroupSpec) -> Option<f64> {
        self.terms
            .keys()
            .map(|k| hom_degree(g.exponents(), k))
            .fold(None, |m, d| Some(m.map_or(d, |m: f64| m.max(d))))
    }

    /// Drops terms with `|c| <= tol * max|c|`.
    pub fn pruned(&self, tol: f64) -> Self {
        let m = self.terms.values().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(_, v)| v.abs() > tol * m)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (a, c) in &self.terms {
            let mut v = *c;
            for (xi, &p) in x.iter().zip(a) {
                if p > 0 {
                    v *= xi.powi(p as i32);
                }
            }
            acc += v;
        }
        acc
    }

    /// Substitutes polynomials for the variables: `p(q_1, ..., q_n)`.
    pub fn compose(&self, subs: &[Polynomial]) -> Self {
        let m = subs[0].n;
        let mut out = Self::zero(m);
        for (a, c) in &self.terms {
            let mut term = Self::constant(m, *c);
            for (k, &p) in a.iter().enumerate() {
                for _ in 0..p {
                    term = term.mul(&subs[k]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Flattened form for fast repeated evaluation.
    pub fn compile(&self) -> CompiledPoly {
        let max_pow = self
            .terms
            .keys()
            .flat_map(|k| k.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        CompiledPoly {
            n: self.n,
            max_pow,
            coeffs: self.terms.values().copied().collect(),
            powers: self
                .terms
                .keys()
                .flat_map(|k| k.iter().map(|&p| p as u8))
                .collect(),
        }
    }
}

/// A polynomial laid out for evaluation in hot loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    n: usize,
    max_pow: usize,
    coeffs: Vec<f64>,
    powers: Vec<u8>,
}

impl CompiledPoly {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.max_pow == 0 {
            return self.coeffs.iter().sum();
        }
        // table[k * (max_pow + 1) + p] = x_k^p
        let stride = self.max_pow + 1;
        let mut table = [0.0f64; 128];
        let small = self.n * stride <= table.len();
        let mut heap;
        let t: &mut [f64] = if small {
            &mut table[..self.n * stride]
        } else {
            heap = vec![0.0; self.n * stride];
            &mut heap
        };
        for k in 0..self.n {
            let mut v = 1.0;
            for p in 0..stride {
                t[k * stride + p] = v;
                v *= x[k];
            }
        }
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut v = *c;
            let pw = &self.powers[i * self.n..(i + 1) * self.n];
            for k in 0..self.n {
                v *= t[k * stride + pw[k] as usize];
            }
            acc += v;
        }
        acc
    }
}

/// Coefficients of the left- and right-invariant fields:
/// `X_j = sum_k left[j][k] d/dx_k`, `Y_j = sum_k right[j][k] d/dx_k`.
#[derive(Clone, Debug)]
pub struct InvariantFields {
    n: usize,
    left: Vec<Vec<(usize, Polynomial)>>,
    right: Vec<Vec<(usize, Polynomial)>>,
}

impl InvariantFields {
    pub fn new(g: &GroupSpec) -> Self {
        let n = g.dim();
        let mut left: Vec<Vec<(usize, Polynomial)>> = Vec::with_capacity(n);
        let mut right: Vec<Vec<(usize, Polynomial)>> = Vec::with_capacity(n);
        for j in 0..n {
            let unit = MultiIndex::unit(n, j).0;
            let mut lj = vec![(j, Polynomial::constant(n, 1.0))];
            let mut rj = vec![(j, Polynomial::constant(n, 1.0))];
            for poly in g.structure_polys() {
                let k = poly.k - 1;
                let mut lc = Polynomial::zero(n);
                let mut rc = Polynomial::zero(n);
                for t in &poly.terms {
                    // d/dt R_k(x, t e_j) at t = 0 keeps the terms with J = e_j
                    if t.y_powers == unit {
                        lc.add_term(t.x_powers.clone(), t.coeff);
                    }
                    // d/dt R_k(t e_j, x) at t = 0 keeps the terms with I = e_j
                    if t.x_powers == unit {
                        rc.add_term(t.y_powers.clone(), t.coeff);
                    }
                }
                if !lc.is_zero() {
                    lj.push((k, lc));
                }
                if !rc.is_zero() {
                    rj.push((k, rc));
                }
            }
            left.push(lj);
            right.push(rj);
        }
        Self { n, left, right }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn left_coeffs(&self, j: usize) -> &[(usize, Polynomial)] {
        &self.left[j]
    }

    pub fn right_coeffs(&self, j: usize) -> &[(usize, Polynomial)] {
        &self.right[j]
    }

    fn apply(field: &[(usize, Polynomial)], p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(p.dim());
        for (k, c) in field {
            let d = p.partial(*k);
            if !d.is_zero() {
                out = out.add(&c.mul(&d));
            }
        }
        out
    }

    /// `X_j p`.
    pub fn left(&self, j: usize, p: &Polynomial) -> Polynomial {
        Self::apply(&self.left[j], p)
    }

    /// `Y_j p`.
    pub fn right(&self, j: usize, p: &Polynomial) -> Polynomial {
        Self::apply(&self.right[j], p)
    }

    /// `X^I p = X_1^{i_1} ... X_n^{i_n} p`.
    pub fn left_pow(&self, i: &MultiIndex, p: &Polynomial) -> Polynomial {
        let mut out = p.clone();
        for j in i.factor_sequence().into_iter().rev() {
            out = self.left(j, &out);
        }
        out
    }

    /// `Y^I p`.
    pub fn right_pow(&self, i: &MultiIndex, p: &Polynomial) -> Polynomial {
        let mut out = p.clone();
        for j in i.factor_sequence().into_iter().rev() {
            out = self.right(j, &out);
        }
        out
    }
}

/// `P(x) exp(-sum_k w_k x_k^2)` with all `w_k > 0`.
#[derive(Clone, Debug)]
pub struct PolyGauss {
    poly: Polynomial,
    widths: Vec<f64>,
    compiled: CompiledPoly,
}

impl PolyGauss {
    pub fn new(poly: Polynomial, widths: Vec<f64>) -> Self {
        assert_eq!(poly.dim(), widths.len());
        assert!(widths.iter().all(|w| *w > 0.0), "Gaussian weights must be positive");
        let compiled = poly.compile();
        Self {
            poly,
            widths,
            compiled,
        }
    }

    /// `exp(-sum w_k x_k^2)`.
    pub fn gaussian(widths: Vec<f64>) -> Self {
        Self::new(Polynomial::constant(widths.len(), 1.0), widths)
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn dim(&self) -> usize {
        self.widths.len()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let q: f64 = x.iter().zip(&self.widths).map(|(v, w)| w * v * v).sum();
        if q > 745.0 {
            return 0.0;
        }
        self.compiled.eval(x) * (-q).exp()
    }

    fn quadratic(&self) -> Polynomial {
        let n = self.dim();
        let mut q = Polynomial::zero(n);
        for (k, w) in self.widths.iter().enumerate() {
            let mut e = vec![0; n];
            e[k] = 2;
            q.add_term(e, *w);
        }
        q
    }

    /// `X_j(P e^{-q}) = (X_j P - P X_j q) e^{-q}`.
    pub fn left_derivative(&self, f: &InvariantFields, j: usize) -> Self {
        let q = self.quadratic();
        let p = f.left(j, &self.poly).sub(&self.poly.mul(&f.left(j, &q)));
        Self::new(p, self.widths.clone())
    }

    pub fn right_derivative(&self, f: &InvariantFields, j: usize) -> Self {
        let q = self.quadratic();
        let p = f.right(j, &self.poly).sub(&self.poly.mul(&f.right(j, &q)));
        Self::new(p, self.widths.clone())
    }

    pub fn left_pow(&self, f: &InvariantFields, i: &MultiIndex) -> Self {
        let mut out = self.clone();
        for j in i.factor_sequence().into_iter().rev() {
            out = out.left_derivative(f, j);
        }
        out
    }

    pub fn right_pow(&self, f: &InvariantFields, i: &MultiIndex) -> Self {
        let mut out = self.clone();
        for j in i.factor_sequence().into_iter().rev() {
            out = out.right_derivative(f, j);
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.poly.scale(s), self.widths.clone())
    }

    /// `P(x) x^J e^{-q}` integrated over `R^n`, exactly.
    pub fn moment(&self, j: &[u32]) -> f64 {
        let mut acc = 0.0;
        for (a, c) in self.poly.terms() {
            let mut v = *c;
            for k in 0..self.dim() {
                v *= gaussian_moment(a[k] + j[k], self.widths[k]);
                if v == 0.0 {
                    break;
                }
            }
            acc += v;
        }
        acc
    }

    pub fn integral(&self) -> f64 {
        self.moment(&vec![0; self.dim()])
    }
}

/// `int x^m exp(-w x^2) dx` over the real line.
pub fn gaussian_moment(m: u32, w: f64) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    // Gamma((m+1)/2) / w^{(m+1)/2} with Gamma(1/2) = sqrt(pi) and the
    // recurrence Gamma(s+1) = s Gamma(s)
    let mut g = std::f64::consts::PI.sqrt();
    let mut s = 0.5;
    for _ in 0..m / 2 {
        g *= s;
        s += 1.0;
    }
    g / w.powf((m as f64 + 1.0) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> (GroupSpec, InvariantFields) {
        let g = GroupSpec::heisenberg();
        let f = InvariantFields::new(&g);
        (g, f)
    }

    #[test]
    fn heisenberg_fields_on_coordinates() {
        let (_, f) = h1();
        let x3 = Polynomial::variable(3, 2);
        // X1 x3 = -x2/2, X2 x3 = x1/2, Y1 x3 = x2/2
        assert_eq!(f.left(0, &x3), Polynomial::variable(3, 1).scale(-0.5));
        assert_eq!(f.left(1, &x3), Polynomial::variable(3, 0).scale(0.5));
        assert_eq!(f.right(0, &x3), Polynomial::variable(3, 1).scale(0.5));
        let x1sq = Polynomial::monomial(3, &[2, 0, 0], 1.0);
        let two = f.left_pow(&MultiIndex(vec![2, 0, 0]), &x1sq);
        assert_eq!(two, Polynomial::constant(3, 2.0));
    }

    #[test]
    fn fields_commute_correctly() {
        // [X1, X2] = X3 on H1
        let (_, f) = h1();
        let p = Polynomial::monomial(3, &[1, 2, 1], 1.0).add(&Polynomial::monomial(3, &[0, 0, 2], 3.0));
        let a = f.left(0, &f.left(1, &p)).sub(&f.left(1, &f.left(0, &p)));
        assert_eq!(a, f.left(2, &p));
    }

    #[test]
    fn compiled_matches_plain() {
        let p = Polynomial::monomial(3, &[3, 1, 0], 2.0).add(&Polynomial::monomial(3, &[0, 0, 4], -1.5));
        let c = p.compile();
        let x = [0.3, -1.1, 0.7];
        assert!((c.eval(&x) - p.eval(&x)).abs() < 1e-14);
    }

    #[test]
    fn polygauss_derivative_matches_finite_difference() {
        let (g, f) = h1();
        let b = PolyGauss::new(Polynomial::monomial(3, &[1, 0, 0], 1.0), vec![1.0, 0.5, 0.25]);
        let d = b.left_derivative(&f, 0);
        let x = [0.2, -0.4, 0.9];
        let h = 1e-5;
        let step = |t: f64| b.eval(&g.multiply(&x, &[t, 0.0, 0.0]).unwrap());
        let fd = (step(h) - step(-h)) / (2.0 * h);
        assert!((d.eval(&x) - fd).abs() < 1e-8);
    }

    #[test]
    fn exact_moments() {
        assert!((gaussian_moment(0, 1.0) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gaussian_moment(2, 1.0) - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(gaussian_moment(3, 2.0), 0.0);
        let (_, f) = h1();
        let b = PolyGauss::gaussian(vec![1.0, 1.0, 1.0]);
        // derivatives of Schwartz functions have zero integral
        assert!(b.left_pow(&f, &MultiIndex(vec![1, 1, 0])).integral().abs() < 1e-14);
    }
}
