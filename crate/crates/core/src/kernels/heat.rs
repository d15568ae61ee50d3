//! Heat kernel of the sub-Laplacian on the Heisenberg group by explicit time
//! stepping on a Cartesian grid, and the kernels `phi^(j) = d^j/dt^j h(., t)`
//! at `t = 1`.
//!
//! The vector fields `X_1 = d1 - (x2/2) d3` and `X_2 = d2 + (x1/2) d3` are
//! discretized with fourth-order antisymmetric differences, so the discrete
//! `X_1^2 + X_2^2` is symmetric and nonpositive; time stepping is classical
//! Runge-Kutta.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::spec::KernelSpec;
use crate::calculus::HomogeneityLattice;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::group::GroupSpec;

/// Where the heat family takes its values from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatSource {
    /// The closed form, sampled on the kernel grid.
    ClosedForm,
    /// The time-stepping solver, thinned by `stride`.
    Stepped,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatConfig {
    pub source: HeatSource,
    /// Half extents of the solver grid.
    pub extents: Vec<f64>,
    /// Odd node counts of the solver grid.
    pub counts: Vec<usize>,
    /// Start time of the stepping, where the closed form seeds the solver.
    pub t0: f64,
    /// Fixed time step; `None` takes `safety` times the stability limit.
    pub dt: Option<f64>,
    pub safety: f64,
    /// Every `stride`-th solver node is kept in stepped kernels.
    pub stride: usize,
    /// Allowed drift of `int h(., 1)` from 1.
    pub mass_tol: f64,
    /// Half extents of the closed-form kernel grid at `t = 1`; other times
    /// dilate it.
    pub kernel_extents: Vec<f64>,
    pub kernel_counts: Vec<usize>,
    /// Sample counts of pair kernels `phi^(j) * phi^(k)`; quadrature uses
    /// every second node.
    pub pair_counts: Vec<usize>,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            source: HeatSource::ClosedForm,
            extents: vec![6.0, 6.0, 10.0],
            counts: vec![49, 49, 81],
            t0: 0.7,
            dt: None,
            safety: 0.9,
            stride: 2,
            mass_tol: 1e-3,
            kernel_extents: vec![7.0, 7.0, 10.0],
            kernel_counts: vec![33, 33, 41],
            pair_counts: vec![49, 49, 81],
        }
    }
}

/// `h(., t)` for the requested times, plus solver diagnostics.
#[derive(Clone, Debug)]
pub struct HeatSolution {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub snapshots: Vec<SampledFunction>,
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    /// `int h(., t)` per snapshot.
    pub masses: Vec<f64>,
    /// `||d_t h - L h||_inf / ||h||_inf` at `t = 1` with `L h` from a
    /// sixth-order discretization and `d_t h` from the stepped solution.
    pub residual: f64,
}

impl HeatSolution {
    pub fn at(&self, t: f64) -> Option<&SampledFunction> {
        self.times
            .iter()
            .position(|s| (s - t).abs() < 1e-12)
            .map(|i| &self.snapshots[i])
    }
}

pub(crate) fn require_heisenberg(g: &GroupSpec) -> Result<()> {
    let h = GroupSpec::heisenberg();
    let ok = g.dim() == 3
        && g.exponents() == h.exponents()
        && [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, -0.7, 1.1]].iter().all(|x| {
            [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [-0.4, 0.2, 0.5]]
                .iter()
                .all(|y| g.multiply(x, y).ok() == h.multiply(x, y).ok())
        });
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("the heat family is implemented for the Heisenberg group only"))
    }
}

/// Antisymmetric central first-derivative weights at offsets `1, 2, ...`.
const D4: &[f64] = &[8.0 / 12.0, -1.0 / 12.0];
const D6: &[f64] = &[45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D8: &[f64] = &[4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Largest value of `sum_k 2 c_k sin(k theta)` over `theta`.
fn symbol_max(d: &[f64]) -> f64 {
    (0..=2000)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / 2000.0;
            d.iter().enumerate().map(|(k, c)| 2.0 * c * ((k + 1) as f64 * th).sin()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `X_1 = d1 - (x2/2) d3` and `X_2 = d2 + (x1/2) d3` discretized with
/// antisymmetric central differences; values within the stencil width of
/// the boundary are set to zero. Each coefficient is constant along the
/// axes its field differentiates, so the discrete `X_j` are antisymmetric
/// and `X_1^2 + X_2^2` is symmetric and nonpositive.
struct Stencil {
    n: [usize; 3],
    s: [usize; 3],
    h: [f64; 3],
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl Stencil {
    fn new(grid: &GridSpec) -> Self {
        let c = grid.counts();
        Self {
            n: [c[0], c[1], c[2]],
            s: [c[1] * c[2], c[2], 1],
            h: [grid.spacing(0), grid.spacing(1), grid.spacing(2)],
            x1: grid.axis_coords(0),
            x2: grid.axis_coords(1),
        }
    }

    /// Upper bound on the spectral radius of the discrete sub-Laplacian.
    fn spectral_bound(&self, d: &[f64]) -> f64 {
        let m = symbol_max(d);
        let [h1, h2, h3] = self.h;
        let m1 = self.x1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let m2 = self.x2.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        (m / h1 + 0.5 * m2 * m / h3).powi(2) + (m / h2 + 0.5 * m1 * m / h3).powi(2)
    }

    /// `out = X_j u` for `j` in `{0, 1}`.
    fn field(&self, j: usize, d: &[f64], u: &[f64], out: &mut [f64]) {
        let r = d.len();
        let [n1, n2, n3] = self.n;
        let [s1, s2, s3] = self.s;
        let (sj, hj) = (self.s[j], self.h[j]);
        let h3 = self.h[2];
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in r..n1 - r {
            for k2 in r..n2 - r {
                let c = if j == 0 { -0.5 * self.x2[k2] } else { 0.5 * self.x1[i] } / h3;
                let base = i * s1 + k2 * s2;
                for k in r..n3 - r {
                    let p = base + k * s3;
                    let mut dj = 0.0;
                    let mut d3 = 0.0;
                    for (o, w) in d.iter().enumerate() {
                        let o = o + 1;
                        dj += w * (u[p + o * sj] - u[p - o * sj]);
                        d3 += w * (u[p + o * s3] - u[p - o * s3]);
                    }
                    out[p] = dj / hj + c * d3;
                }
            }
        }
    }

    /// `out = (X_1^2 + X_2^2) u`.
    fn apply(&self, d: &[f64], u: &[f64], out: &mut [f64], scratch: &mut [Vec<f64>; 2]) {
        let [a, b] = scratch;
        self.field(0, d, u, a);
        self.field(0, d, a, b);
        out.copy_from_slice(b);
        self.field(1, d, u, a);
        self.field(1, d, a, b);
        for (o, v) in out.iter_mut().zip(b.iter()) {
            *o += v;
        }
    }
}

/// Trapezoid nodes in `tau` for the closed form at time `t` and `|x3| <= z_max`.
fn tau_nodes(t: f64, z_max: f64) -> (f64, usize) {
    // tau / sinh(tau) is below 1e-17 past tau = 45
    let step = (0.02f64).min(0.25 * t / z_max.max(1e-9));
    (step, (45.0 / step).ceil() as usize)
}

/// `tau / sinh(tau) exp(-r2 tau coth(tau) / (4 t))` on the trapezoid nodes,
/// end weights included.
fn radial_profile(r2: f64, t: f64, step: f64, count: usize) -> Vec<f64> {
    (0..=count)
        .map(|k| {
            let tau = k as f64 * step;
            let (ratio, tc) = if tau == 0.0 { (1.0, 1.0) } else { (tau / tau.sinh(), tau / tau.tanh()) };
            let w = if k == 0 || k == count { 0.5 } else { 1.0 };
            w * ratio * (-r2 * tc / (4.0 * t)).exp()
        })
        .collect()
}

fn closed_form_sum(profile: &[f64], z: f64, t: f64, step: f64) -> f64 {
    // cos(k theta) by rotating (cos, sin)
    let (sn, cs) = (step * z / t).sin_cos();
    let (mut c, mut s) = (1.0, 0.0);
    let mut acc = 0.0;
    for p in profile {
        acc += p * c;
        (c, s) = (c * cs - s * sn, s * cs + c * sn);
    }
    // the integrand is even in tau
    2.0 * acc * step / (8.0 * std::f64::consts::PI * std::f64::consts::PI * t * t)
}

/// The heat kernel of `X_1^2 + X_2^2` in closed form,
/// `h_t(x) = (8 pi^2 t^2)^{-1} int tau/sinh(tau) exp(-|x'|^2 tau coth(tau)/(4t)) cos(tau x3/t) dtau`
/// with `|x'|^2 = x1^2 + x2^2`; evaluated by the trapezoid rule.
pub fn heat_closed_form(x: &[f64], t: f64) -> f64 {
    let (step, count) = tau_nodes(t, x[2].abs());
    let profile = radial_profile(x[0] * x[0] + x[1] * x[1], t, step, count);
    closed_form_sum(&profile, x[2], t, step)
}

/// The closed form sampled on a three-dimensional grid, sharing the
/// `tau` profile between nodes with equal `x1^2 + x2^2` and using the
/// symmetry in `x3`.
fn closed_form_on_grid(grid: &GridSpec, t: f64) -> Vec<f64> {
    let c = grid.counts();
    let (h1, h2) = (grid.spacing(0), grid.spacing(1));
    let (m1, m2, m3) = (c[0] as i64 / 2, c[1] as i64 / 2, c[2] as i64 / 2);
    let z: Vec<f64> = (0..=m3).map(|k| k as f64 * grid.spacing(2)).collect();
    let (step, count) = tau_nodes(t, z[z.len() - 1]);
    let swap = (h1 - h2).abs() < 1e-14 * h1;
    let mut cache: HashMap<(i64, i64), Vec<f64>> = HashMap::new();
    let mut out = vec![0.0; grid.len()];
    for i in 0..c[0] {
        for j in 0..c[1] {
            let (a, b) = ((i as i64 - m1).abs(), (j as i64 - m2).abs());
            let key = if swap && b < a { (b, a) } else { (a, b) };
            let column = cache.entry(key).or_insert_with(|| {
                let (x, y) = (a as f64 * h1, b as f64 * h2);
                let profile = radial_profile(x * x + y * y, t, step, count);
                z.iter().map(|z| closed_form_sum(&profile, *z, t, step)).collect()
            });
            let base = (i * c[1] + j) * c[2];
            for k in 0..c[2] {
                out[base + k] = column[(k as i64 - m3).unsigned_abs() as usize];
            }
        }
    }
    out
}

/// Weights of the central difference for the `j`-th derivative on the
/// nodes `-m..=m` (unit spacing), by Fornberg's recursion.
fn central_weights(j: usize, m: usize) -> Vec<f64> {
    let xs: Vec<f64> = (-(m as i64)..=m as i64).map(|k| k as f64).collect();
    let n = xs.len();
    let mut c = vec![vec![0.0; j + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        for v in 0..i {
            let c3 = xs[i] - xs[v];
            c2 *= c3;
            for k in (0..=j.min(i)).rev() {
                let prev_i = if k > 0 { c[i - 1][k - 1] } else { 0.0 };
                if v == i - 1 {
                    c[i][k] = c1 * (k as f64 * prev_i - xs[i - 1] * c[i - 1][k]) / c2;
                }
                let prev_v = if k > 0 { c[v][k - 1] } else { 0.0 };
                c[v][k] = (xs[i] * c[v][k] - k as f64 * prev_v) / c3;
            }
        }
        c1 = c2;
    }
    // expansion point is 0
    c.iter().map(|row| row[j]).collect()
}

/// `d^j/dt^j h(., t)` at `t = s` from the closed form, sampled on `grid`.
/// Time derivatives use a central difference of step `s / 20` and order
/// at least four.
pub fn heat_derivative_on_grid(grid: &GridSpec, j: u32, s: f64) -> Result<SampledFunction> {
    if grid.dim() != 3 || !(s > 0.0) {
        return Err(Error::invalid("the closed form needs a 3-dimensional grid and s > 0"));
    }
    let values = if j == 0 {
        closed_form_on_grid(grid, s)
    } else {
        let m = (j as usize + 1) / 2 + 2;
        let dt = s / 20.0;
        let w = central_weights(j as usize, m);
        let mut acc = vec![0.0; grid.len()];
        for (k, wk) in w.iter().enumerate() {
            if *wk == 0.0 {
                continue;
            }
            let t = s + (k as f64 - m as f64) * dt;
            for (a, v) in acc.iter_mut().zip(closed_form_on_grid(grid, t)) {
                *a += wk * v;
            }
        }
        let scale = dt.powi(j as i32);
        acc.iter_mut().for_each(|v| *v /= scale);
        acc
    };
    SampledFunction::new(grid.clone(), values, format!("d^{j}/dt^{j} h(., {s})"))
}

/// Runs the heat equation from the closed form at `t0` and
/// records `h(., t)` at each requested time (all must exceed `t0`).
pub fn heat_kernel(g: &GroupSpec, cfg: &HeatConfig, times: &[f64]) -> Result<HeatSolution> {
    require_heisenberg(g)?;
    let grid = GridSpec::new(cfg.extents.clone(), cfg.counts.clone())?;
    if grid.counts().iter().any(|c| *c < 9) {
        return Err(Error::invalid("the heat grid needs at least 9 nodes per axis"));
    }
    let st = Stencil::new(&grid);
    // RK4 is stable on the negative real axis up to |lambda dt| = 2.78
    let limit = 2.78 / st.spectral_bound(D6);
    let dt = match cfg.dt {
        Some(dt) if dt > limit => {
            return Err(Error::UnstableStep(format!(
                "dt = {dt:e} exceeds the explicit stability limit {limit:e}"
            )))
        }
        Some(dt) => dt,
        None => cfg.safety * limit,
    };
    let t0 = cfg.t0;
    let mut times = times.to_vec();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if times.is_empty() || times[0] <= t0 {
        return Err(Error::invalid(format!("snapshot times must exceed t0 = {t0}")));
    }
    // residual needs h at 1 - tau and 1 + tau
    let tau = 2.0 * dt;
    let mut wanted: Vec<f64> = times.clone();
    wanted.extend([1.0 - tau, 1.0, 1.0 + tau]);
    wanted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    wanted.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut u = closed_form_on_grid(&grid, t0);
    let w = grid.weights();
    let m: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
    u.iter_mut().for_each(|v| *v /= m);

    let len = u.len();
    let mut scratch = [vec![0.0; len], vec![0.0; len]];
    let mut k = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut stage = vec![0.0; len];
    let mut t = t0;
    let mut steps = 0;
    let mut snaps: Vec<(f64, Vec<f64>)> = Vec::new();
    for target in wanted {
        let n = ((target - t) / dt).ceil().max(0.0) as usize;
        if n > 0 {
            let step = (target - t) / n as f64;
            for _ in 0..n {
                st.apply(D6, &u, &mut k[0], &mut scratch);
                for (c, frac) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
                    for ((s, a), b) in stage.iter_mut().zip(&u).zip(&k[c - 1]) {
                        *s = a + frac * step * b;
                    }
                    let (_, rest) = k.split_at_mut(c);
                    st.apply(D6, &stage, &mut rest[0], &mut scratch);
                }
                for (i, a) in u.iter_mut().enumerate() {
                    *a += step / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
                }
            }
            steps += n;
        }
        t = target;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::UnstableStep(format!("solution blew up before t = {target}")));
        }
        snaps.push((t, u.clone()));
    }
    let find = |s: f64| snaps.iter().find(|(t, _)| (t - s).abs() < 1e-12).map(|(_, v)| v);
    let (before, now, after) = (find(1.0 - tau).unwrap(), find(1.0).unwrap(), find(1.0 + tau).unwrap());
    let mut l6 = vec![0.0; len];
    st.apply(D8, now, &mut l6, &mut scratch);
    let hmax = now.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // the sixth-order operator is exact only six nodes away from the edge
    let margin = 2 * D8.len();
    let mut multi = [0usize; 3];
    let mut worst = 0.0f64;
    for i in 0..len {
        grid.unflatten(i, &mut multi);
        if multi.iter().zip(grid.counts()).any(|(m, c)| *m < margin || *m + margin >= *c) {
            continue;
        }
        let e = ((after[i] - before[i]) / (2.0 * tau) - l6[i]).abs();
        worst = worst.max(e);
    }
    let residual = worst / hmax;

    let mut snapshots = Vec::new();
    let mut masses = Vec::new();
    for s in &times {
        let v = find(*s).unwrap().clone();
        let sf = SampledFunction::new(grid.clone(), v, format!("heat kernel at t = {s}"))?;
        let mass = sf.integral();
        if (mass - 1.0).abs() > cfg.mass_tol {
            return Err(Error::SolverFailure(format!(
                "heat mass drifted to {mass} at t = {s}; enlarge the grid"
            )));
        }
        masses.push(mass);
        snapshots.push(sf);
    }
    Ok(HeatSolution {
        grid,
        times,
        snapshots,
        t0,
        dt,
        steps,
        masses,
        residual,
    })
}

/// Applies `X_1^2 + X_2^2` `j` times with the fourth-order discretization.
/// Values within four nodes of the boundary are not meaningful.
pub fn sublaplacian_power(f: &SampledFunction, j: u32) -> Result<SampledFunction> {
    let grid = f.grid().clone();
    if grid.dim() != 3 {
        return Err(Error::invalid("the grid sub-Laplacian acts on 3-dimensional grids"));
    }
    let st = Stencil::new(&grid);
    let mut u = f.values().to_vec();
    let mut out = vec![0.0; u.len()];
    let mut scratch = [vec![0.0; u.len()], vec![0.0; u.len()]];
    for _ in 0..j {
        st.apply(D4, &u, &mut out, &mut scratch);
        std::mem::swap(&mut u, &mut out);
    }
    SampledFunction::new(grid, u, format!("L^{j} {}", f.provenance()))
}

/// `phi^(j) = (X_1^2 + X_2^2)^j h(., 1)` from the configured source.
pub fn heat_family(g: &GroupSpec, j: u32, cfg: &HeatConfig) -> Result<KernelSpec> {
    heat_family_at(g, j, 1.0, cfg)
}

/// `(X_1^2 + X_2^2)^j h(., s)` from the configured source.
pub fn heat_family_at(g: &GroupSpec, j: u32, s: f64, cfg: &HeatConfig) -> Result<KernelSpec> {
    match cfg.source {
        HeatSource::Stepped => {
            let sol = heat_kernel(g, cfg, &[s])?;
            heat_family_from(g, &sol, j, s, cfg.stride)
        }
        HeatSource::ClosedForm => {
            require_heisenberg(g)?;
            if j == 0 {
                return Err(Error::invalid("the heat family starts at j = 1"));
            }
            let base = GridSpec::new(cfg.kernel_extents.clone(), cfg.kernel_counts.clone())?;
            let grid = base.dilated(g, s.sqrt());
            let phi = heat_derivative_on_grid(&grid, j, s)?;
            finish_family(g, phi, j, s)
        }
    }
}

/// `(X_1^2 + X_2^2)^j h(., s)` from an existing solution.
pub fn heat_family_from(g: &GroupSpec, sol: &HeatSolution, j: u32, s: f64, stride: usize) -> Result<KernelSpec> {
    if j == 0 {
        return Err(Error::invalid("the heat family starts at j = 1"));
    }
    let h = sol
        .at(s)
        .ok_or_else(|| Error::invalid(format!("no heat snapshot at t = {s}")))?;
    let phi = sublaplacian_power(h, j)?.coarsened(stride)?;
    finish_family(g, phi, j, s)
}

fn finish_family(g: &GroupSpec, phi: SampledFunction, j: u32, s: f64) -> Result<KernelSpec> {
    let mass = phi.integral();
    let l1 = phi.lp_norm(1.0, None);
    if mass.abs() > 1e-3 * l1 {
        return Err(Error::SolverFailure(format!(
            "int phi^({j}) = {mass:e} is not zero against int |phi| = {l1:e} at t = {s}"
        )));
    }
    // int L^j h P = int h L^j P = 0 whenever a(P) < 2j
    let order = HomogeneityLattice::new(g, 2.0 * j as f64)?.below(2.0 * j as f64);
    let name = if s == 1.0 { format!("heat:{j}") } else { format!("heat:{j}@{s}") };
    Ok(KernelSpec::sampled(name, phi, order, "heat kernel derivative, Gaussian decay"))
}
