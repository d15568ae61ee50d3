//! Peetre, Hardy-Littlewood and grand maximal functions on grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::convolve::{convolve, Field};
use crate::calculus::{Polynomial, PolyGauss};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;
use crate::kernels::{bump_widths, KernelSpec};

/// Parameters of `F**_{N,R}(x) = sup_y |F(x y^{-1})| / (1 + R rho(y))^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalParams {
    pub n: f64,
    pub r_scale: f64,
    /// `r` with `N = gamma / r`, when the exponent was derived that way.
    pub r: Option<f64>,
    /// Largest `rho(y)` searched; `None` uses the largest ball inside the
    /// grid.
    pub search_extent: Option<f64>,
}

impl MaximalParams {
    pub fn new(n: f64, r_scale: f64) -> Result<Self> {
        if !(n > 0.0) || !(r_scale > 0.0) {
            return Err(Error::invalid(format!("N = {n} and R = {r_scale} must be positive")));
        }
        Ok(Self {
            n,
            r_scale,
            r: None,
            search_extent: None,
        })
    }

    /// `N = gamma / r`.
    pub fn from_r(g: &GroupSpec, r: f64, r_scale: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("r must be positive, got {r}")));
        }
        let mut p = Self::new(g.gamma() / r, r_scale)?;
        p.r = Some(r);
        Ok(p)
    }

    pub fn with_extent(mut self, extent: f64) -> Self {
        self.search_extent = Some(extent);
        self
    }
}

/// Radius of the largest `rho`-ball about the origin inside the grid box.
pub fn inscribed_radius(g: &GroupSpec, grid: &GridSpec) -> f64 {
    (0..grid.dim())
        .map(|k| {
            let mut e = vec![0.0; grid.dim()];
            e[k] = grid.extents()[k];
            g.hom_norm(&e)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug)]
pub struct PeetreResult {
    pub field: SampledFunction,
    /// `(1 + R extent)^{-N} sup |F|`: the most a point outside the search
    /// region could add.
    pub truncation_bound: f64,
    pub extent: f64,
}

/// `F**_{N,R}` at the nodes of `F`'s grid, with the sup over grid nodes
/// `z = x y^{-1}` with `rho(y) <= extent`.
pub fn peetre_max(g: &GroupSpec, f: &SampledFunction, params: &MaximalParams) -> Result<PeetreResult> {
    if !(params.n > 0.0) || !(params.r_scale > 0.0) {
        return Err(Error::invalid("Peetre parameters must be positive"));
    }
    let grid = f.grid();
    let n = grid.dim();
    let extent = params.search_extent.unwrap_or_else(|| inscribed_radius(g, grid));
    let nodes = grid.nodes_flat();
    // candidates by decreasing |F|, so the scan stops once |F(z)| cannot
    // beat the current best
    let mut order: Vec<usize> = (0..grid.len()).filter(|&i| f.values()[i] != 0.0).collect();
    order.sort_by(|&a, &b| f.values()[b].abs().total_cmp(&f.values()[a].abs()));
    let abs: Vec<f64> = order.iter().map(|&i| f.values()[i].abs()).collect();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(scratch, y), x| {
                let xs = &nodes[x * n..(x + 1) * n];
                let mut best = 0.0f64;
                for (&z, &fz) in order.iter().zip(&abs) {
                    if fz <= best {
                        break;
                    }
                    // y = z^{-1} x
                    g.left_div_into(&nodes[z * n..(z + 1) * n], xs, scratch, y);
                    let r = g.hom_norm(y);
                    if r > extent {
                        continue;
                    }
                    let v = fz / (1.0 + params.r_scale * r).powf(params.n);
                    best = best.max(v);
                }
                best
            },
        )
        .collect();
    let field = SampledFunction::new(grid.clone(), values, format!("{}**", f.provenance()))?;
    Ok(PeetreResult {
        field,
        truncation_bound: (1.0 + params.r_scale * extent).powf(-params.n) * f.max_abs(),
        extent,
    })
}

/// Radii of the balls in the Hardy-Littlewood sup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HlRadii {
    /// Every distance between grid nodes, so every distinct discrete ball.
    All,
    List(Vec<f64>),
}

/// Sorted neighbour lists of every node, reusable across functions on the
/// same grid.
#[derive(Clone, Debug)]
pub struct HlOperator {
    grid: GridSpec,
    /// For each centre, node indices by increasing distance.
    order: Vec<u32>,
    /// For each centre, prefix lengths that close a ball.
    cuts: Vec<u32>,
    cut_start: Vec<usize>,
    weights: Vec<f64>,
}

impl HlOperator {
    /// Balls `B(c, r) = {y : rho(c^{-1} y) <= r}` with centres at the grid
    /// nodes.
    pub fn new(g: &GroupSpec, grid: &GridSpec, radii: &HlRadii) -> Result<Self> {
        let len = grid.len();
        if len > u32::MAX as usize {
            return Err(Error::invalid("grid too large for the Hardy-Littlewood operator"));
        }
        if let HlRadii::List(r) = radii {
            if r.is_empty() || r.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::invalid("radii must be positive"));
            }
        }
        let n = grid.dim();
        let nodes = grid.nodes_flat();
        let per_centre: Vec<(Vec<u32>, Vec<u32>)> = (0..len)
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![0.0; n]),
                |(scratch, d), c| {
                    let cs = &nodes[c * n..(c + 1) * n];
                    let mut dist: Vec<(f64, u32)> = (0..len)
                        .map(|y| {
                            g.left_div_into(cs, &nodes[y * n..(y + 1) * n], scratch, d);
                            (g.hom_norm(d), y as u32)
                        })
                        .collect();
                    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let cuts = match radii {
                        // close a ball after each group of equal distances
                        HlRadii::All => {
                            let mut cuts = Vec::new();
                            for i in 0..len {
                                let last = i + 1 == len || dist[i + 1].0 > dist[i].0 * (1.0 + 1e-12) + 1e-300;
                                if last {
                                    cuts.push((i + 1) as u32);
                                }
                            }
                            cuts
                        }
                        HlRadii::List(rs) => {
                            let mut rs = rs.clone();
                            rs.sort_by(f64::total_cmp);
                            let mut cuts: Vec<u32> = rs
                                .iter()
                                .map(|r| dist.partition_point(|(v, _)| *v <= r * (1.0 + 1e-12)) as u32)
                                .filter(|&k| k > 0)
                                .collect();
                            cuts.dedup();
                            cuts
                        }
                    };
                    (dist.into_iter().map(|(_, y)| y).collect(), cuts)
                },
            )
            .collect();
        let mut order = Vec::with_capacity(len * len);
        let mut cuts = Vec::new();
        let mut cut_start = Vec::with_capacity(len + 1);
        for (o, c) in per_centre {
            order.extend(o);
            cut_start.push(cuts.len());
            cuts.extend(c);
        }
        cut_start.push(cuts.len());
        Ok(Self {
            grid: grid.clone(),
            order,
            cuts,
            cut_start,
            weights: grid.weights(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `M f(x) = sup_{B containing x} (sum_B w |f|) / (sum_B w)`.
    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if f.grid() != &self.grid {
            return Err(Error::invalid("function is not sampled on the operator's grid"));
        }
        let len = self.grid.len();
        let vals = f.values();
        let mut out = vec![0.0f64; len];
        let mut avgs = Vec::new();
        for c in 0..len {
            let order = &self.order[c * len..(c + 1) * len];
            let cuts = &self.cuts[self.cut_start[c]..self.cut_start[c + 1]];
            if cuts.is_empty() {
                continue;
            }
            avgs.clear();
            let (mut sw, mut sm, mut pos) = (0.0, 0.0, 0usize);
            for &cut in cuts {
                while pos < cut as usize {
                    let y = order[pos] as usize;
                    sw += self.weights[y] * vals[y].abs();
                    sm += self.weights[y];
                    pos += 1;
                }
                avgs.push(sw / sm);
            }
            // the best ball containing the k-th ring is any ball from k on
            for k in (0..avgs.len().saturating_sub(1)).rev() {
                avgs[k] = avgs[k].max(avgs[k + 1]);
            }
            let mut start = 0usize;
            for (k, &cut) in cuts.iter().enumerate() {
                for &y in &order[start..cut as usize] {
                    let y = y as usize;
                    if avgs[k] > out[y] {
                        out[y] = avgs[k];
                    }
                }
                start = cut as usize;
            }
        }
        SampledFunction::new(self.grid.clone(), out, format!("M {}", f.provenance()))
    }
}

/// Hardy-Littlewood maximal function of `f` on its own grid.
pub fn hl_maximal(g: &GroupSpec, f: &SampledFunction, radii: &HlRadii) -> Result<SampledFunction> {
    HlOperator::new(g, f.grid(), radii)?.apply(f)
}

/// The eight test functions of the grand maximal surrogate before
/// normalization: the bump, coordinate-modulated bumps, a Mexican hat and
/// an oscillating Hermite profile.
pub fn dictionary_members(g: &GroupSpec) -> Vec<KernelSpec> {
    let n = g.dim();
    let w = bump_widths(g);
    let var = |k: usize| Polynomial::variable(n, k);
    let one = Polynomial::constant(n, 1.0);
    let sq = |k: usize| var(k).mul(&var(k));
    let mut polys: Vec<(String, Polynomial)> = vec![("bump".into(), one.clone())];
    for k in 0..n.min(3) {
        polys.push((format!("x{} bump", k + 1), var(k)));
    }
    let mut r2 = Polynomial::zero(n);
    for k in 0..n {
        r2 = r2.add(&sq(k).scale(w[k]));
    }
    polys.push(("hat".into(), one.sub(&r2)));
    // H_4(s) = 16 s^4 - 48 s^2 + 12 with s = sqrt(w_0) x_1
    let s2 = sq(0).scale(w[0]);
    let h4 = s2.mul(&s2).scale(16.0).sub(&s2.scale(48.0)).add(&Polynomial::constant(n, 12.0)).scale(1.0 / 12.0);
    polys.push(("hermite4".into(), h4));
    if n >= 2 {
        polys.push(("x1 x2 bump".into(), var(0).mul(&var(1))));
        polys.push(("(x1^2 - x2^2) bump".into(), sq(0).sub(&sq(1))));
        if n == 2 {
            // H_4 in the second coordinate keeps the count at eight
            let t2 = sq(1).scale(w[1]);
            let h = t2.mul(&t2).scale(16.0).sub(&t2.scale(48.0)).add(&Polynomial::constant(n, 12.0)).scale(1.0 / 12.0);
            polys.push(("hermite4 x2".into(), h));
        }
    } else {
        polys.push(("x1^2 bump".into(), sq(0)));
        polys.push(("x1^3 bump".into(), sq(0).mul(&var(0))));
        polys.push(("x1^4 bump".into(), sq(0).mul(&sq(0))));
        polys.push(("x1^5 bump".into(), sq(0).mul(&sq(0)).mul(&var(0))));
    }
    polys.truncate(8);
    polys
        .into_iter()
        .map(|(name, p)| KernelSpec::polygauss(name, PolyGauss::new(p, w.clone()), -1.0, "gaussian"))
        .collect()
}

/// Dictionary members scaled to `||Phi||_(N) = 1`.
pub fn normalized_dictionary(g: &GroupSpec, order: u32) -> Result<Vec<KernelSpec>> {
    dictionary_members(g)
        .into_iter()
        .map(|mut k| {
            let s = k.seminorm(g, order)?;
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidDictionary(format!("{} has seminorm {s}", k.name())));
            }
            Ok(k.scaled(1.0 / s))
        })
        .collect()
}

/// `sup_{Phi, t} |f * Phi_t|` over a finite dictionary and scale list; a
/// lower bound for the grand maximal function.
pub fn grand_maximal(
    g: &GroupSpec,
    f: Field<'_>,
    dictionary: &[KernelSpec],
    order: u32,
    scales: &[f64],
    out: &GridSpec,
) -> Result<SampledFunction> {
    if dictionary.is_empty() || scales.is_empty() {
        return Err(Error::InvalidDictionary("empty dictionary or scale list".into()));
    }
    for k in dictionary {
        match k.cached_seminorm(order) {
            Some(s) if s <= 1.0 + 1e-9 => {}
            Some(s) => {
                return Err(Error::InvalidDictionary(format!("{} has ||.||_({order}) = {s} > 1", k.name())));
            }
            None => {
                return Err(Error::InvalidDictionary(format!("{} carries no ||.||_({order}) bound", k.name())));
            }
        }
    }
    let mut best = vec![0.0f64; out.len()];
    for k in dictionary {
        for &t in scales {
            let c = convolve(g, f, Field::kernel(k, t), out)?;
            for (b, v) in best.iter_mut().zip(c.values()) {
                *b = b.max(v.abs());
            }
        }
    }
    SampledFunction::new(out.clone(), best, "grand maximal surrogate")
}
