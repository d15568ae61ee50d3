use std::collections::BTreeMap;
use std::sync::Arc;

use crate::calculus::{polygauss_seminorm, schwartz_seminorm, default_probe, PolyGauss};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::numeric::BlockSum;

use super::moments::MomentCertificate;

/// Trapezoid nodes per axis on the default grid of a closed-form kernel.
pub const DEFAULT_KERNEL_POINTS: usize = 33;

/// How a kernel is evaluated.
#[derive(Clone, Debug)]
pub enum KernelBody {
    /// Closed form with exact invariant derivatives.
    PolyGauss(PolyGauss),
    /// Grid values, multilinear in between and zero outside the grid.
    Sampled(Arc<SampledFunction>),
}

/// A kernel on the group together with what is known about it.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    name: String,
    body: KernelBody,
    /// `alpha` such that the kernel annihilates `P_alpha`; `-1` for none.
    moment_order: f64,
    decay_note: String,
    seminorms: BTreeMap<u32, f64>,
    certificate: Option<MomentCertificate>,
    quad: GridSpec,
}

impl KernelSpec {
    /// Closed-form kernel; its quadrature grid covers `w_k x_k^2 <= 36` on
    /// each axis.
    pub fn polygauss(name: impl Into<String>, f: PolyGauss, moment_order: f64, decay_note: impl Into<String>) -> Self {
        let quad = polygauss_grid(&f, DEFAULT_KERNEL_POINTS);
        Self {
            name: name.into(),
            body: KernelBody::PolyGauss(f),
            moment_order,
            decay_note: decay_note.into(),
            seminorms: BTreeMap::new(),
            certificate: None,
            quad,
        }
    }

    /// Kernel given by samples; quadrature happens on the sample grid.
    pub fn sampled(
        name: impl Into<String>,
        f: SampledFunction,
        moment_order: f64,
        decay_note: impl Into<String>,
    ) -> Self {
        let quad = f.grid().clone();
        Self {
            name: name.into(),
            body: KernelBody::Sampled(Arc::new(f)),
            moment_order,
            decay_note: decay_note.into(),
            seminorms: BTreeMap::new(),
            certificate: None,
            quad,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn body(&self) -> &KernelBody {
        &self.body
    }

    pub fn as_polygauss(&self) -> Option<&PolyGauss> {
        match &self.body {
            KernelBody::PolyGauss(p) => Some(p),
            KernelBody::Sampled(_) => None,
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledFunction> {
        match &self.body {
            KernelBody::Sampled(s) => Some(s),
            KernelBody::PolyGauss(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn moment_order(&self) -> f64 {
        self.moment_order
    }

    pub fn decay_note(&self) -> &str {
        &self.decay_note
    }

    pub fn certificate(&self) -> Option<&MomentCertificate> {
        self.certificate.as_ref()
    }

    pub(crate) fn set_certificate(&mut self, c: MomentCertificate) {
        self.certificate = Some(c);
    }

    pub fn quad_grid(&self) -> &GridSpec {
        &self.quad
    }

    /// Replaces the quadrature grid. A sampled kernel is interpolated at
    /// the new nodes, so a sub-lattice of its sample grid keeps exact values.
    pub fn with_quad_grid(mut self, grid: GridSpec) -> Result<Self> {
        if grid.dim() != self.dim() {
            return Err(Error::invalid("quadrature grid dimension mismatch"));
        }
        self.quad = grid;
        Ok(self)
    }

    /// Uses `points` nodes per axis on the default grid of a closed-form
    /// kernel.
    pub fn with_quad_points(self, points: usize) -> Result<Self> {
        match &self.body {
            KernelBody::PolyGauss(p) => {
                let grid = polygauss_grid(p, points);
                self.with_quad_grid(grid)
            }
            KernelBody::Sampled(s) => {
                let grid = s.grid().with_counts(vec![points; self.dim()])?;
                self.with_quad_grid(grid)
            }
        }
    }

    /// Integrates a sampled kernel on every `stride`-th sample node.
    pub fn with_quad_stride(self, stride: usize) -> Result<Self> {
        let grid = match &self.body {
            KernelBody::Sampled(s) => s.coarsened(stride)?.grid().clone(),
            KernelBody::PolyGauss(_) => return Err(Error::invalid("quadrature strides apply to sampled kernels")),
        };
        self.with_quad_grid(grid)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.body {
            KernelBody::PolyGauss(p) => p.eval(x),
            KernelBody::Sampled(s) => s.interpolate_cubic(x),
        }
    }

    /// `kappa_t(x) = t^{-gamma} kappa(A_{1/t} x)`.
    pub fn eval_dilated(&self, g: &GroupSpec, t: f64, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        g.dilate_into(1.0 / t, x, &mut y);
        t.powf(-g.gamma()) * self.eval(&y)
    }

    /// Values at the quadrature nodes.
    pub fn quad_values(&self) -> Vec<f64> {
        match &self.body {
            KernelBody::Sampled(s) if s.grid() == &self.quad => s.values().to_vec(),
            KernelBody::Sampled(s) => {
                let mut x = vec![0.0; self.dim()];
                (0..self.quad.len())
                    .map(|i| {
                        self.quad.node_into(i, &mut x);
                        s.interpolate_cubic(&x)
                    })
                    .collect()
            }
            KernelBody::PolyGauss(p) => {
                let mut x = vec![0.0; self.dim()];
                (0..self.quad.len())
                    .map(|i| {
                        self.quad.node_into(i, &mut x);
                        p.eval(&x)
                    })
                    .collect()
            }
        }
    }

    /// `int kappa`: exact for closed forms, trapezoid for samples.
    pub fn integral(&self) -> f64 {
        match &self.body {
            KernelBody::PolyGauss(p) => p.integral(),
            KernelBody::Sampled(s) => s.integral(),
        }
    }

    /// `int |kappa|` on the quadrature grid.
    pub fn l1_norm(&self) -> f64 {
        let mut acc = BlockSum::new();
        for (w, v) in self.quad.weights().iter().zip(self.quad_values()) {
            acc.add(w * v.abs());
        }
        acc.total()
    }

    /// `s * kappa`, keeping metadata; cached seminorms scale along.
    pub fn scaled(&self, s: f64) -> Self {
        let body = match &self.body {
            KernelBody::PolyGauss(p) => KernelBody::PolyGauss(p.scaled(s)),
            KernelBody::Sampled(f) => KernelBody::Sampled(Arc::new(f.scaled(s))),
        };
        Self {
            name: self.name.clone(),
            body,
            moment_order: self.moment_order,
            decay_note: self.decay_note.clone(),
            seminorms: self.seminorms.iter().map(|(k, v)| (*k, v * s.abs())).collect(),
            certificate: self.certificate.clone(),
            quad: self.quad.clone(),
        }
    }

    /// `||kappa||_(N)`, computed on the default probe grid once and cached.
    pub fn seminorm(&mut self, g: &GroupSpec, order: u32) -> Result<f64> {
        if let Some(v) = self.seminorms.get(&order) {
            return Ok(*v);
        }
        let probe = default_probe(g)?;
        let v = match &self.body {
            KernelBody::PolyGauss(p) => polygauss_seminorm(g, p, order, &probe)?,
            KernelBody::Sampled(s) => {
                let s = s.clone();
                schwartz_seminorm(g, |x| s.interpolate_cubic(x), order, &probe)?
            }
        };
        self.seminorms.insert(order, v);
        Ok(v)
    }

    pub fn cached_seminorm(&self, order: u32) -> Option<f64> {
        self.seminorms.get(&order).copied()
    }

    /// Samples the kernel on a grid.
    pub fn sample(&self, grid: &GridSpec) -> Result<SampledFunction> {
        grid.sample(|x| self.eval(x), self.name.clone())
    }
}

/// `x -> t^{-gamma} kappa(A_{1/t} x)` as an evaluator.
pub fn dilate_kernel<'a>(g: &'a GroupSpec, kappa: &'a KernelSpec, t: f64) -> Result<impl Fn(&[f64]) -> f64 + 'a> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("dilation parameter must be positive, got {t}")));
    }
    let inv = g.dilation_factors(1.0 / t);
    let amp = t.powf(-g.gamma());
    Ok(move |x: &[f64]| {
        let y: Vec<f64> = x.iter().zip(&inv).map(|(v, s)| v * s).collect();
        amp * kappa.eval(&y)
    })
}

/// Grid with half-extent `6 / sqrt(w_k)` on axis `k`.
pub fn polygauss_grid(f: &PolyGauss, points: usize) -> GridSpec {
    let extents = f.widths().iter().map(|w| 6.0 / w.sqrt()).collect();
    GridSpec::new(extents, vec![points; f.dim()]).expect("positive widths give a valid grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Polynomial;

    fn bump() -> KernelSpec {
        KernelSpec::polygauss("bump", PolyGauss::gaussian(vec![1.0, 1.0, 0.5]), -1.0, "gaussian")
    }

    #[test]
    fn dilation_preserves_mass() {
        let g = GroupSpec::heisenberg();
        let k = bump();
        let m = k.integral();
        for t in [0.5, 2.0] {
            let kt = dilate_kernel(&g, &k, t).unwrap();
            let grid = k.quad_grid().dilated(&g, t);
            let v = grid.integrate(&kt).unwrap();
            assert!((v - m).abs() < 1e-6 * m, "{t}: {v} {m}");
        }
        let k1 = dilate_kernel(&g, &k, 1.0).unwrap();
        assert_eq!(k1(&[0.2, 0.1, 0.3]), k.eval(&[0.2, 0.1, 0.3]));
        assert!(dilate_kernel(&g, &k, 0.0).is_err());
    }

    #[test]
    fn sup_scales_like_t_to_minus_gamma() {
        let g = GroupSpec::heisenberg();
        let k = bump();
        let kt = dilate_kernel(&g, &k, 2.0).unwrap();
        assert!((kt(&[0.0; 3]) - k.eval(&[0.0; 3]) / 16.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_integral_matches_exact() {
        let k = KernelSpec::polygauss(
            "x1sq",
            PolyGauss::new(Polynomial::monomial(3, &[2, 0, 0], 1.0), vec![1.0, 2.0, 0.5]),
            -1.0,
            "",
        );
        let trap: f64 = k.quad_grid().weights().iter().zip(k.quad_values()).map(|(w, v)| w * v).sum();
        assert!((trap - k.integral()).abs() < 1e-10 * k.integral());
    }

    #[test]
    fn seminorm_is_cached_and_scales() {
        let g = GroupSpec::heisenberg();
        let mut k = bump();
        let a = k.seminorm(&g, 1).unwrap();
        assert_eq!(k.cached_seminorm(1), Some(a));
        let s = k.scaled(2.0);
        assert_eq!(s.cached_seminorm(1), Some(2.0 * a));
    }
}
