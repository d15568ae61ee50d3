//! Anisotropic Cartesian grids with trapezoid weights, and functions sampled
//! on them.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::numeric::BlockSum;

/// A grid symmetric about the origin: axis `k` has `counts[k]` (odd) equally
/// spaced nodes on `[-extents[k], extents[k]]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    extents: Vec<f64>,
    counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(extents: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if extents.is_empty() || extents.len() != counts.len() {
            return Err(Error::invalid("grid extents and counts must be nonempty and paired"));
        }
        if extents.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid("grid extents must be positive"));
        }
        if counts.iter().any(|c| *c < 3 || c % 2 == 0) {
            return Err(Error::invalid("grid counts must be odd and at least 3"));
        }
        Ok(Self { extents, counts })
    }

    /// Extents `E_k = R^{a_k}` for base radius `R`, `points` nodes per axis.
    pub fn for_group(g: &GroupSpec, radius: f64, points: usize) -> Result<Self> {
        let extents = g.exponents().iter().map(|a| radius.powf(*a)).collect();
        Self::new(extents, vec![points; g.dim()])
    }

    /// Grid with the same node count and extents scaled by `t^{a_k}`, so that
    /// its nodes are exactly `A_t` of the original nodes.
    pub fn dilated(&self, g: &GroupSpec, t: f64) -> Self {
        let f = g.dilation_factors(t);
        Self {
            extents: self.extents.iter().zip(&f).map(|(e, s)| e * s).collect(),
            counts: self.counts.clone(),
        }
    }

    /// Same extents, node count per axis changed to `counts`.
    pub fn with_counts(&self, counts: Vec<usize>) -> Result<Self> {
        Self::new(self.extents.clone(), counts)
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.extents[axis] / (self.counts[axis] - 1) as f64
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        -self.extents[axis] + i as f64 * self.spacing(axis)
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.counts[axis]).map(|i| self.axis_coord(axis, i)).collect()
    }

    /// Product of the extents; used to decide which side of a convolution is
    /// the narrower one.
    pub fn volume(&self) -> f64 {
        self.extents.iter().map(|e| 2.0 * e).product()
    }

    /// Multi-index of flat node `idx` (row-major, axis 0 slowest).
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            out[k] = idx % self.counts[k];
            idx /= self.counts[k];
        }
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.counts)
            .fold(0, |acc, (i, c)| acc * c + i)
    }

    /// Coordinates of flat node `idx`.
    pub fn node_into(&self, mut idx: usize, out: &mut [f64]) {
        for k in (0..self.dim()).rev() {
            let i = idx % self.counts[k];
            idx /= self.counts[k];
            out[k] = self.axis_coord(k, i);
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.node_into(idx, &mut p);
        p
    }

    /// All nodes, flattened row-major into one vector of length `len * dim`.
    pub fn nodes_flat(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; self.len() * n];
        for (idx, chunk) in out.chunks_mut(n).enumerate() {
            self.node_into(idx, chunk);
        }
        out
    }

    /// Trapezoid weights, one per node.
    pub fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = (0..self.dim())
            .map(|k| {
                let h = self.spacing(k);
                (0..self.counts[k])
                    .map(|i| if i == 0 || i + 1 == self.counts[k] { 0.5 * h } else { h })
                    .collect()
            })
            .collect();
        let mut multi = vec![0; self.dim()];
        (0..self.len())
            .map(|idx| {
                self.unflatten(idx, &mut multi);
                multi.iter().enumerate().map(|(k, &i)| per_axis[k][i]).product()
            })
            .collect()
    }

    /// True when node `idx` lies on the outer face of the grid.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let mut multi = vec![0; self.dim()];
        self.unflatten(idx, &mut multi);
        multi
            .iter()
            .zip(&self.counts)
            .any(|(i, c)| *i == 0 || *i + 1 == *c)
    }

    /// Trapezoid integral of an evaluator over the grid.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        let w = self.weights();
        let mut p = vec![0.0; self.dim()];
        let mut acc = BlockSum::new();
        for (idx, wi) in w.iter().enumerate() {
            self.node_into(idx, &mut p);
            let v = f(&p);
            if !v.is_finite() {
                return Err(Error::numeric(format!("grid node {p:?}"), "non-finite integrand"));
            }
            acc.add(wi * v);
        }
        Ok(acc.total())
    }

    /// Samples an evaluator at every node.
    pub fn sample<F>(&self, f: F, provenance: impl Into<String>) -> Result<SampledFunction>
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut p = vec![0.0; self.dim()];
        let mut values = Vec::with_capacity(self.len());
        for idx in 0..self.len() {
            self.node_into(idx, &mut p);
            let v = f(&p);
            if !v.is_finite() {
                return Err(Error::numeric(format!("grid node {p:?}"), "non-finite sample"));
            }
            values.push(v);
        }
        SampledFunction::new(self.clone(), values, provenance)
    }
}

/// Values of a function on a [`GridSpec`].
#[derive(Clone, Debug)]
pub struct SampledFunction {
    grid: GridSpec,
    values: Vec<f64>,
    provenance: String,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("node {:?}", grid.node(i)), "non-finite value"));
        }
        Ok(Self {
            grid,
            values,
            provenance: provenance.into(),
        })
    }

    pub fn zeros(grid: GridSpec, provenance: impl Into<String>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
            provenance: provenance.into(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn with_provenance(mut self, p: impl Into<String>) -> Self {
        self.provenance = p.into();
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// Trapezoid integral of the samples.
    pub fn integral(&self) -> f64 {
        let mut acc = BlockSum::new();
        for (w, v) in self.grid.weights().iter().zip(&self.values) {
            acc.add(w * v);
        }
        acc.total()
    }

    /// `(sum w |f|^p)^{1/p}`, optionally against a weight evaluated at nodes.
    pub fn lp_norm(&self, p: f64, weight: Option<&[f64]>) -> f64 {
        let w = self.grid.weights();
        let mut acc = BlockSum::new();
        for (i, v) in self.values.iter().enumerate() {
            let ww = weight.map_or(1.0, |wt| wt[i]);
            acc.add(w[i] * ww * v.abs().powf(p));
        }
        acc.total().powf(1.0 / p)
    }

    /// Fraction of the `L^1` mass carried by the outermost layer of nodes.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let w = self.grid.weights();
        let mut total = BlockSum::new();
        let mut shell = BlockSum::new();
        for (i, v) in self.values.iter().enumerate() {
            let m = w[i] * v.abs();
            total.add(m);
            if self.grid.is_boundary(i) {
                shell.add(m);
            }
        }
        let t = total.total();
        if t == 0.0 {
            0.0
        } else {
            shell.total() / t
        }
    }

    /// Multilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.grid.dim();
        debug_assert_eq!(x.len(), n);
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        assert!(n <= 8, "interpolation supports up to 8 dimensions");
        for k in 0..n {
            let h = self.grid.spacing(k);
            let s = (x[k] + self.grid.extents[k]) / h;
            let last = self.grid.counts[k] - 1;
            if !(s >= 0.0) || s > last as f64 {
                return 0.0;
            }
            let i = (s.floor() as usize).min(last - 1);
            base[k] = i;
            frac[k] = s - i as f64;
        }
        // strides for row-major layout
        let mut strides = [0usize; 8];
        let mut st = 1;
        for k in (0..n).rev() {
            strides[k] = st;
            st *= self.grid.counts[k];
        }
        let origin: usize = (0..n).map(|k| base[k] * strides[k]).sum();
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut off = origin;
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    off += strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.values[off];
            }
        }
        acc
    }

    /// Tensor cubic Lagrange interpolation on the four nodes around `x` per
    /// axis, zero off the grid. Axes with fewer than four nodes fall back
    /// to multilinear.
    pub fn interpolate_cubic(&self, x: &[f64]) -> f64 {
        let n = self.grid.dim();
        debug_assert_eq!(x.len(), n);
        assert!(n <= 8, "interpolation supports up to 8 dimensions");
        if self.grid.counts.iter().any(|&c| c < 4) {
            return self.interpolate(x);
        }
        let mut base = [0usize; 8];
        let mut wts = [[0.0f64; 4]; 8];
        for k in 0..n {
            let h = self.grid.spacing(k);
            let s = (x[k] + self.grid.extents[k]) / h;
            let last = self.grid.counts[k] - 1;
            if !(s >= 0.0) || s > last as f64 {
                return 0.0;
            }
            let i = (s.floor() as usize).clamp(1, last - 2);
            let u = s - i as f64;
            base[k] = i - 1;
            wts[k] = [
                -u * (u - 1.0) * (u - 2.0) / 6.0,
                (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
                -(u + 1.0) * u * (u - 2.0) / 2.0,
                (u + 1.0) * u * (u - 1.0) / 6.0,
            ];
        }
        let mut strides = [0usize; 8];
        let mut st = 1;
        for k in (0..n).rev() {
            strides[k] = st;
            st *= self.grid.counts[k];
        }
        let origin: usize = (0..n).map(|k| base[k] * strides[k]).sum();
        if n == 3 {
            let mut acc = 0.0;
            for (a, wa) in wts[0].iter().enumerate() {
                let mut plane = 0.0;
                for (b, wb) in wts[1].iter().enumerate() {
                    let row = &self.values[origin + a * strides[0] + b * strides[1]..][..4];
                    let line = wts[2][0] * row[0] + wts[2][1] * row[1] + wts[2][2] * row[2] + wts[2][3] * row[3];
                    plane += wb * line;
                }
                acc += wa * plane;
            }
            return acc;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << (2 * n)) {
            let mut w = 1.0;
            let mut off = origin;
            for k in 0..n {
                let d = (corner >> (2 * k)) & 3;
                w *= wts[k][d];
                off += d * strides[k];
            }
            acc += w * self.values[off];
        }
        acc
    }

    /// Keeps every `stride`-th node per axis. The counts stay odd because
    /// `stride` must divide `count - 1`.
    pub fn coarsened(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.grid.counts.iter().any(|c| (c - 1) % stride != 0) {
            return Err(Error::invalid(format!("stride {stride} does not divide the grid")));
        }
        let counts: Vec<usize> = self.grid.counts.iter().map(|c| (c - 1) / stride + 1).collect();
        let grid = GridSpec::new(self.grid.extents.clone(), counts)?;
        let mut multi = vec![0; grid.dim()];
        let values = (0..grid.len())
            .map(|idx| {
                grid.unflatten(idx, &mut multi);
                multi.iter_mut().for_each(|m| *m *= stride);
                self.values[self.grid.flatten(&multi)]
            })
            .collect();
        Self::new(grid, values, self.provenance.clone())
    }

    /// CSV with one row per node: coordinates `x1..xn` then `value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.grid.dim();
        let mut header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        header.push("value".into());
        wr.write_record(&header)?;
        let mut p = vec![0.0; n];
        for (idx, v) in self.values.iter().enumerate() {
            self.grid.node_into(idx, &mut p);
            let mut row: Vec<String> = p.iter().map(|c| format!("{c:.17e}")).collect();
            row.push(format!("{v:.17e}"));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Raw binary layout, little endian: magic `HGLP`, `u32` dimension `n`,
    /// `n` x `u64` node counts, `n` x `f64` half extents, then the values as
    /// `f64` in row-major order (axis 0 slowest).
    pub fn write_raw<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"HGLP")?;
        w.write_all(&(self.grid.dim() as u32).to_le_bytes())?;
        for c in &self.grid.counts {
            w.write_all(&(*c as u64).to_le_bytes())?;
        }
        for e in &self.grid.extents {
            w.write_all(&e.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_raw<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"HGLP" {
            return Err(Error::invalid("not a raw sampled-field file"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        if n == 0 || n > 8 {
            return Err(Error::invalid(format!("unsupported dimension {n}")));
        }
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            counts.push(u64::from_le_bytes(b8) as usize);
        }
        let mut extents = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            extents.push(f64::from_le_bytes(b8));
        }
        let grid = GridSpec::new(extents, counts)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        Self::new(grid, values, "raw")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let g = GridSpec::new(vec![2.0, 3.0], vec![9, 13]).unwrap();
        let f = |x: &[f64]| 1.0 + x[0] - 2.0 * x[0].powi(3) + x[0] * x[1].powi(2) - 0.5 * x[1].powi(3);
        let s = g.sample(f, "cubic").unwrap();
        for p in [[0.13, -0.71], [1.9, 2.95], [-1.99, 0.4]] {
            assert!((s.interpolate_cubic(&p) - f(&p)).abs() < 1e-10);
        }
        assert_eq!(s.interpolate_cubic(&[2.1, 0.0]), 0.0);
        let g = GridSpec::new(vec![1.0, 2.0, 3.0], vec![5, 9, 7]).unwrap();
        let f = |x: &[f64]| x[0].powi(3) - x[0] * x[1] * x[2] + 2.0 * x[2].powi(2) - x[1];
        let s = g.sample(f, "cubic").unwrap();
        for p in [[0.3, -1.1, 2.9], [-0.99, 1.7, -0.2]] {
            assert!((s.interpolate_cubic(&p) - f(&p)).abs() < 1e-10);
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_volume() {
        let g = GridSpec::new(vec![1.0, 2.0, 3.0], vec![5, 7, 9]).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 48.0).abs() < 1e-12);
    }

    #[test]
    fn flatten_round_trip() {
        let g = GridSpec::new(vec![1.0, 1.0], vec![3, 5]).unwrap();
        let mut m = vec![0; 2];
        for idx in 0..g.len() {
            g.unflatten(idx, &mut m);
            assert_eq!(g.flatten(&m), idx);
        }
        assert_eq!(g.node(0), vec![-1.0, -1.0]);
        assert_eq!(g.node(g.len() - 1), vec![1.0, 1.0]);
    }

    #[test]
    fn interpolation_reproduces_multilinear_functions() {
        let g = GridSpec::new(vec![1.0, 2.0], vec![5, 9]).unwrap();
        let f = |p: &[f64]| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1];
        let s = g.sample(f, "test").unwrap();
        for x in [[0.13, -1.7], [0.99, 1.99], [-0.5, 0.25]] {
            assert!((s.interpolate(&x) - f(&x)).abs() < 1e-13);
        }
        assert_eq!(s.interpolate(&[1.5, 0.0]), 0.0);
    }

    #[test]
    fn rejects_even_counts() {
        assert!(GridSpec::new(vec![1.0], vec![4]).is_err());
    }

    #[test]
    fn coarsening_keeps_nodes() {
        let g = GridSpec::new(vec![1.0, 1.0], vec![9, 5]).unwrap();
        let s = g.sample(|p| p[0] + 10.0 * p[1], "c").unwrap();
        let c = s.coarsened(2).unwrap();
        assert_eq!(c.grid().counts(), &[5, 3]);
        for idx in 0..c.grid().len() {
            let p = c.grid().node(idx);
            assert!((c.values()[idx] - (p[0] + 10.0 * p[1])).abs() < 1e-14);
        }
    }

    #[test]
    fn raw_round_trip() {
        let g = GridSpec::new(vec![1.0, 4.0], vec![3, 5]).unwrap();
        let s = g.sample(|p| p[0] * p[1] + 0.25, "r").unwrap();
        let mut buf = Vec::new();
        s.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 16 + 16 + 8 * 15);
        let back = SampledFunction::read_raw(&buf[..]).unwrap();
        assert_eq!(back.values(), s.values());
        assert_eq!(back.grid(), s.grid());
    }
}
