//! Littlewood-Paley operators built on cached fields `f * kappa_t`.

use rayon::prelude::*;

use super::convolve::{convolve_with, ConvOptions, Field};
use super::scale::ScaleGrid;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::kernels::KernelSpec;

/// `f * kappa_t` on one output grid for a list of scales, with the weights
/// of `dt/t`. The g-function, area integral, discrete square function and
/// Peetre stages all read these fields.
#[derive(Clone, Debug)]
pub struct ScaleFields {
    kernel: String,
    scales: Vec<f64>,
    weights: Vec<f64>,
    grid: GridSpec,
    fields: Vec<SampledFunction>,
}

impl ScaleFields {
    pub fn compute(g: &GroupSpec, f: Field<'_>, kappa: &KernelSpec, scales: &ScaleGrid, out: &GridSpec) -> Result<Self> {
        Self::at_nodes(g, f, kappa, &scales.nodes(), &scales.weights(), out)
    }

    /// Fields at arbitrary scales `ts` with quadrature weights `ws`.
    pub fn at_nodes(
        g: &GroupSpec,
        f: Field<'_>,
        kappa: &KernelSpec,
        ts: &[f64],
        ws: &[f64],
        out: &GridSpec,
    ) -> Result<Self> {
        Self::at_nodes_with(g, f, kappa, ts, ws, out, &ConvOptions::default())
    }

    pub fn at_nodes_with(
        g: &GroupSpec,
        f: Field<'_>,
        kappa: &KernelSpec,
        ts: &[f64],
        ws: &[f64],
        out: &GridSpec,
        opts: &ConvOptions,
    ) -> Result<Self> {
        if ts.len() != ws.len() || ts.is_empty() {
            return Err(Error::invalid("scales and weights must be nonempty and of equal length"));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) || ts[0] <= 0.0 {
            return Err(Error::invalid("scales must be positive and increasing"));
        }
        let fields = ts
            .iter()
            .map(|&t| {
                convolve_with(g, f, Field::kernel(kappa, t), out, opts)
                    .map(|c| c.with_provenance(format!("f*{}_{t}", kappa.name())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernel: kappa.name().to_string(),
            scales: ts.to_vec(),
            weights: ws.to_vec(),
            grid: out.clone(),
            fields,
        })
    }

    /// Assembles fields computed elsewhere.
    pub fn from_parts(kernel: impl Into<String>, scales: Vec<f64>, weights: Vec<f64>, fields: Vec<SampledFunction>) -> Result<Self> {
        if scales.len() != weights.len() || scales.len() != fields.len() || fields.is_empty() {
            return Err(Error::invalid("scale, weight and field counts differ"));
        }
        let grid = fields[0].grid().clone();
        if fields.iter().any(|f| f.grid() != &grid) {
            return Err(Error::invalid("fields live on different grids"));
        }
        Ok(Self {
            kernel: kernel.into(),
            scales,
            weights,
            grid,
            fields,
        })
    }

    pub fn kernel(&self) -> &str {
        &self.kernel
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn fields(&self) -> &[SampledFunction] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Keeps the scales in `[t_min, t_max]`, re-weighting the ends with
    /// half trapezoid weights.
    pub fn restricted(&self, t_min: f64, t_max: f64) -> Result<Self> {
        let keep: Vec<usize> = (0..self.scales.len())
            .filter(|&i| self.scales[i] >= t_min * (1.0 - 1e-12) && self.scales[i] <= t_max * (1.0 + 1e-12))
            .collect();
        if keep.is_empty() {
            return Err(Error::invalid(format!("no scales in [{t_min}, {t_max}]")));
        }
        let mut weights: Vec<f64> = keep.iter().map(|&i| self.weights[i]).collect();
        let last = weights.len() - 1;
        if keep.len() > 1 {
            let (a, b) = (keep[0], keep[last]);
            weights[0] = 0.5 * (self.scales[a + 1] / self.scales[a]).ln();
            weights[last] = 0.5 * (self.scales[b] / self.scales[b - 1]).ln();
        }
        Ok(Self {
            kernel: self.kernel.clone(),
            scales: keep.iter().map(|&i| self.scales[i]).collect(),
            weights,
            grid: self.grid.clone(),
            fields: keep.iter().map(|&i| self.fields[i].clone()).collect(),
        })
    }

    /// `(sum_t w_t |F_t|^2)^{1/2}`.
    pub fn g_function(&self) -> SampledFunction {
        let mut acc = vec![0.0; self.grid.len()];
        for (f, w) in self.fields.iter().zip(&self.weights) {
            for (a, v) in acc.iter_mut().zip(f.values()) {
                *a += w * v * v;
            }
        }
        let values = acc.into_iter().map(f64::sqrt).collect();
        SampledFunction::new(self.grid.clone(), values, format!("g_{}", self.kernel)).expect("finite")
    }

    /// `(sum_t |F_t|^q)^{1/q}` over all stored scales, ignoring weights.
    pub fn lq_sum(&self, q: f64) -> Result<SampledFunction> {
        if !(q > 0.0) {
            return Err(Error::invalid(format!("q must be positive, got {q}")));
        }
        let mut acc = vec![0.0; self.grid.len()];
        for f in &self.fields {
            for (a, v) in acc.iter_mut().zip(f.values()) {
                *a += v.abs().powf(q);
            }
        }
        let values = acc.into_iter().map(|v| v.powf(1.0 / q)).collect();
        SampledFunction::new(self.grid.clone(), values, format!("Delta^{q}_{}", self.kernel))
    }

    /// `(sum_t w_t t^{-gamma} sum_{rho(x^{-1} y) < t} w_y |F_t(y)|^2)^{1/2}`
    /// with `y` running over the output grid.
    pub fn area_integral(&self, g: &GroupSpec) -> SampledFunction {
        let n = g.dim();
        let len = self.grid.len();
        let ns = self.scales.len();
        let gamma = g.gamma();
        let wy = self.grid.weights();
        // suffix[y][k] = sum_{j >= k} w_j t_j^{-gamma} |F_j(y)|^2
        let mut suffix = vec![0.0; len * (ns + 1)];
        for y in 0..len {
            let row = &mut suffix[y * (ns + 1)..(y + 1) * (ns + 1)];
            for k in (0..ns).rev() {
                let v = self.fields[k].values()[y];
                row[k] = row[k + 1] + self.weights[k] * self.scales[k].powf(-gamma) * v * v;
            }
        }
        let nodes = self.grid.nodes_flat();
        let values: Vec<f64> = (0..len)
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![0.0; n]),
                |(scratch, d), x| {
                    let xs = &nodes[x * n..(x + 1) * n];
                    let mut acc = 0.0;
                    for y in 0..len {
                        g.left_div_into(xs, &nodes[y * n..(y + 1) * n], scratch, d);
                        let r = g.hom_norm(d);
                        // first scale with t > r
                        let k = self.scales.partition_point(|t| *t <= r);
                        acc += wy[y] * suffix[y * (ns + 1) + k];
                    }
                    acc.sqrt()
                },
            )
            .collect();
        SampledFunction::new(self.grid.clone(), values, format!("S_{}", self.kernel)).expect("finite")
    }
}

/// `g_kappa(f)` on `out`.
pub fn g_function(g: &GroupSpec, f: Field<'_>, kappa: &KernelSpec, scales: &ScaleGrid, out: &GridSpec) -> Result<SampledFunction> {
    Ok(ScaleFields::compute(g, f, kappa, scales, out)?.g_function())
}

/// Lusin area integral `S_kappa(f)` on `out`.
pub fn area_integral(g: &GroupSpec, f: Field<'_>, kappa: &KernelSpec, scales: &ScaleGrid, out: &GridSpec) -> Result<SampledFunction> {
    Ok(ScaleFields::compute(g, f, kappa, scales, out)?.area_integral(g))
}

/// `(sum_{j_min <= j <= j_max} |f * kappa_{b^j}|^q)^{1/q}` on `out`.
pub fn discrete_square(
    g: &GroupSpec,
    f: Field<'_>,
    kappa: &KernelSpec,
    b: f64,
    q: f64,
    j_range: (i32, i32),
    out: &GridSpec,
) -> Result<SampledFunction> {
    let grid = ScaleGrid::new(b, j_range.0, j_range.1, 1)?;
    let ts = grid.dyadic_nodes();
    let ws = vec![1.0; ts.len()];
    ScaleFields::at_nodes(g, f, kappa, &ts, &ws, out)?.lq_sum(q)
}
