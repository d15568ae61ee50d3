use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conv::{convolve, Field};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::group::GroupSpec;
use crate::kernels::{effective_extents, heat_family, heat_family_at, product_extents, HeatConfig, KernelSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// `int_0^inf ... dt/t`, discretized on a geometric grid in `t`.
    Continuous,
    /// `sum_j ...` at `t = b^j`.
    Discrete,
}

/// One residual measurement `||S f - f||_inf / ||f||_inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub eps: f64,
    pub big_b: f64,
    pub probe: String,
    pub residual: f64,
}

/// What a pair serializes to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairManifest {
    pub phis: Vec<String>,
    pub etas: Vec<String>,
    pub mode: PairMode,
    pub b: f64,
    pub u_subdiv: usize,
    pub normalizer: f64,
    pub residual_history: Vec<ResidualRecord>,
}

/// Lists `phi^(l)`, `eta^(l)` with the pair kernels `K^(l) = phi^(l) * eta^(l)`.
/// Since dilations are automorphisms, `phi_t * eta_t = (K)_t`, so synthesis
/// convolves with one kernel per scale.
#[derive(Clone, Debug)]
pub struct ReproducingPair {
    phis: Vec<KernelSpec>,
    etas: Vec<KernelSpec>,
    kernels: Vec<KernelSpec>,
    mode: PairMode,
    b: f64,
    u_subdiv: usize,
    normalizer: f64,
    history: Vec<ResidualRecord>,
}

/// Node count per axis of a generic pair kernel.
pub const PAIR_POINTS: usize = 25;

/// `phi * eta` sampled on a box containing the product of their effective
/// supports, with `points` nodes per axis.
pub fn pair_kernel(g: &GroupSpec, phi: &KernelSpec, eta: &KernelSpec, points: usize) -> Result<KernelSpec> {
    let ext = product_extents(g, &effective_extents(phi), &effective_extents(eta));
    let grid = GridSpec::new(ext, vec![points; g.dim()])?;
    let k = convolve(g, Field::kernel(phi, 1.0), Field::kernel(eta, 1.0), &grid)?;
    let order = phi.moment_order().max(eta.moment_order());
    Ok(KernelSpec::sampled(format!("{}*{}", phi.name(), eta.name()), k, order, "pair kernel"))
}

impl ReproducingPair {
    /// A pair whose kernels are computed by direct convolution. Every `phi`
    /// must have zero mass and every `eta` moment order at least `d`.
    pub fn new(g: &GroupSpec, phis: Vec<KernelSpec>, etas: Vec<KernelSpec>, mode: PairMode, d: f64) -> Result<Self> {
        Self::check(&phis, &etas, d)?;
        let kernels = phis
            .iter()
            .zip(&etas)
            .map(|(p, e)| pair_kernel(g, p, e, PAIR_POINTS))
            .collect::<Result<Vec<_>>>()?;
        Self::from_kernels(phis, etas, kernels, mode)
    }

    /// A pair with precomputed kernels `K^(l)`.
    pub fn from_kernels(phis: Vec<KernelSpec>, etas: Vec<KernelSpec>, kernels: Vec<KernelSpec>, mode: PairMode) -> Result<Self> {
        if kernels.len() != phis.len() {
            return Err(Error::invalid("one pair kernel per (phi, eta) is required"));
        }
        Ok(Self {
            phis,
            etas,
            kernels,
            mode,
            b: 0.5,
            u_subdiv: 4,
            normalizer: 1.0,
            history: Vec::new(),
        })
    }

    /// The heat pair `(phi^(j), phi^(k))` on the Heisenberg group. Its kernel
    /// is `phi^(j) * phi^(k) = d^{j+k}/dt^{j+k} h(., t)` at `t = 2`, sampled
    /// twice as finely as it is integrated.
    pub fn heat(g: &GroupSpec, j: u32, k: u32, cfg: &HeatConfig) -> Result<Self> {
        let phi = heat_family(g, j, cfg)?;
        let eta = heat_family(g, k, cfg)?;
        Self::check(std::slice::from_ref(&phi), std::slice::from_ref(&eta), 0.0)?;
        let fine = HeatConfig {
            kernel_counts: cfg.pair_counts.clone(),
            ..cfg.clone()
        };
        let kernel = heat_family_at(g, j + k, 2.0, &fine)?
            .with_quad_stride(2)?
            .with_name(format!("heat:{j}*heat:{k}"));
        Self::from_kernels(vec![phi], vec![eta], vec![kernel], PairMode::Continuous)
    }

    fn check(phis: &[KernelSpec], etas: &[KernelSpec], d: f64) -> Result<()> {
        if phis.is_empty() || phis.len() != etas.len() {
            return Err(Error::invalid("phi and eta lists must be nonempty and of equal length"));
        }
        for p in phis {
            let m = p.integral();
            if m.abs() > 1e-3 * p.l1_norm() {
                return Err(Error::invalid(format!("int {} = {m:e} is not zero", p.name())));
            }
        }
        for e in etas {
            if e.moment_order() < d {
                return Err(Error::invalid(format!(
                    "{} has moment order {} below the required {d}",
                    e.name(),
                    e.moment_order()
                )));
            }
        }
        Ok(())
    }

    pub fn with_scales(mut self, b: f64, u_subdiv: usize) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) || u_subdiv == 0 {
            return Err(Error::invalid("b must lie in (0, 1) and u_subdiv be positive"));
        }
        self.b = b;
        self.u_subdiv = u_subdiv;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: PairMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn phis(&self) -> &[KernelSpec] {
        &self.phis
    }

    pub fn etas(&self) -> &[KernelSpec] {
        &self.etas
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    pub fn mode(&self) -> PairMode {
        self.mode
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn u_subdiv(&self) -> usize {
        self.u_subdiv
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn set_normalizer(&mut self, c: f64) {
        self.normalizer = c;
    }

    pub fn history(&self) -> &[ResidualRecord] {
        &self.history
    }

    pub fn record(&mut self, r: ResidualRecord) {
        self.history.push(r);
    }

    /// `phi^(l)` multiplied by `s`; the pair kernels scale along.
    pub fn scaled_phis(&self, s: f64) -> Self {
        Self {
            phis: self.phis.iter().map(|p| p.scaled(s)).collect(),
            kernels: self.kernels.iter().map(|k| k.scaled(s)).collect(),
            history: Vec::new(),
            ..self.clone()
        }
    }

    pub fn manifest(&self) -> PairManifest {
        PairManifest {
            phis: self.phis.iter().map(|k| k.name().to_string()).collect(),
            etas: self.etas.iter().map(|k| k.name().to_string()).collect(),
            mode: self.mode,
            b: self.b,
            u_subdiv: self.u_subdiv,
            normalizer: self.normalizer,
            residual_history: self.history.clone(),
        }
    }

    pub fn write_manifest(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest())?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
