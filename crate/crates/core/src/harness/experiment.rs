//! Config-driven dispatch of the checks.

use super::config::{ExperimentConfig, ExperimentKind, FuzzKind};
use super::equivalence::{equivalence_band, EquivalenceSettings, Member};
use super::family::{build_family, TestFunction};
use super::fuzz::inequality_fuzz;
use super::peetre::{peetre_domination_check, PeetreSettings};
use super::report::{Report, ReportRow};
use super::reproduce::{reproduce_check, ReproduceSettings};
use super::scaling::scaling_identities;
use crate::conv::{ScaleGrid, WeightSpec};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::group::{validate_group, GroupSpec, ValidationReport};
use crate::kernels::{heat_family, kernel_by_name, HeatConfig, KernelBody, KernelSpec};
use crate::reproducing::{PairMode, ReproducingPair};

/// Samples used to validate the group before every run.
pub const VALIDATION_SAMPLES: usize = 10_000;

/// Largest accepted defect of the group axioms.
pub const AXIOM_TOL: f64 = 1e-12;

/// Quadrature nodes per axis for closed-form kernels and test functions.
pub fn quad_points(g: &GroupSpec) -> usize {
    if g.dim() >= 3 {
        17
    } else {
        41
    }
}

/// Quadrature nodes per axis for reproducing probes.
fn probe_points(g: &GroupSpec) -> usize {
    if g.dim() >= 3 {
        25
    } else {
        81
    }
}

/// Thins the quadrature grid of a kernel used as a convolution factor.
pub fn prepare_kernel(g: &GroupSpec, k: KernelSpec) -> Result<KernelSpec> {
    match k.body() {
        KernelBody::PolyGauss(_) => k.with_quad_points(quad_points(g)),
        KernelBody::Sampled(_) if g.dim() >= 3 => k.with_quad_stride(2),
        KernelBody::Sampled(_) => Ok(k),
    }
}

/// `heat:j,k` or `name|name` as `(phi, eta)`. The second heat factor is
/// sampled on the finer pair grid, which high orders need.
pub fn pair_by_name(g: &GroupSpec, name: &str) -> Result<(KernelSpec, KernelSpec)> {
    let heat = HeatConfig::default();
    if let Some(rest) = name.trim().strip_prefix("heat:") {
        let (j, k) = parse_heat_pair(name, rest)?;
        let fine = HeatConfig {
            kernel_counts: heat.pair_counts.clone(),
            ..heat.clone()
        };
        return Ok((heat_family(g, j, &heat)?, heat_family(g, k, &fine)?));
    }
    match name.split_once('|') {
        Some((a, b)) => Ok((kernel_by_name(g, a, &heat)?, kernel_by_name(g, b, &heat)?)),
        None => Err(Error::Config(format!("pair {name:?} is neither heat:j,k nor phi|eta"))),
    }
}

fn parse_heat_pair(name: &str, rest: &str) -> Result<(u32, u32)> {
    let bad = || Error::Config(format!("bad heat pair {name:?}; expected heat:j,k"));
    let (a, b) = rest.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// The reproducing pair named `name`, on scales `b = 1/2` with
/// `u_subdiv` nodes per octave.
pub fn reproducing_pair_by_name(g: &GroupSpec, name: &str, u_subdiv: usize) -> Result<ReproducingPair> {
    let pair = match name.trim().strip_prefix("heat:") {
        Some(rest) => {
            let (j, k) = parse_heat_pair(name, rest)?;
            ReproducingPair::heat(g, j, k, &HeatConfig::default())?
        }
        None => {
            let (phi, eta) = pair_by_name(g, name)?;
            ReproducingPair::new(g, vec![phi], vec![eta], PairMode::Continuous, 0.0)?
        }
    };
    pair.with_scales(0.5, u_subdiv)
}

/// `dgauss:3,0,...,0`: an atom with vanishing moments up to degree two.
pub fn default_atom(g: &GroupSpec) -> String {
    let mut parts = vec!["3".to_string()];
    parts.extend(std::iter::repeat("0".to_string()).take(g.dim() - 1));
    format!("dgauss:{}", parts.join(","))
}

fn default_derivative(g: &GroupSpec) -> String {
    let mut parts = vec!["1".to_string()];
    parts.extend(std::iter::repeat("0".to_string()).take(g.dim() - 1));
    format!("dgauss:{}", parts.join(","))
}

/// Rows of a group validation: axiom defects and the quasi-triangle
/// constant.
pub fn validation_rows(rep: &ValidationReport, experiment: &str) -> Vec<ReportRow> {
    let algebra = rep
        .associativity_defect
        .max(rep.identity_defect)
        .max(rep.inverse_defect)
        .max(rep.automorphism_defect);
    vec![
        ReportRow::new(
            experiment,
            "group-axioms",
            format!("worst algebraic defect over {} samples on {}", rep.samples, rep.group),
            algebra,
            AXIOM_TOL,
        )
        .at_most("defect", algebra, AXIOM_TOL),
        ReportRow::new(experiment, "quasi-triangle-constant", format!("sampled c0 on {}", rep.group), rep.c0_hat, 1.0)
            .with_constant(rep.c0)
            .judged("c0 finite", f64::NAN, rep.c0.is_finite()),
    ]
}

/// Runs `cfg` after validating it and the group. The result depends only
/// on the config, including its seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut g = cfg.group_spec()?;
    let validation = validate_group(&mut g, VALIDATION_SAMPLES, cfg.seed)?;
    let id = cfg.id.as_str();
    let mut report = Report::default();
    match cfg.kind {
        ExperimentKind::Smoke => {
            report.extend(validation_rows(&validation, id));
            let n = cfg.samples.unwrap_or(20_000);
            report.push(inequality_fuzz(&g, FuzzKind::E4, n, cfg.seed, id)?);
            report.push(inequality_fuzz(&g, FuzzKind::Nesting, n, cfg.seed, id)?);
            report.extend(scaling_identities(&g, &[0.5, 2.0], cfg.grid.radius, cfg.grid.points, cfg.seed, id)?);
        }
        ExperimentKind::Fuzz => {
            let kind = cfg.fuzz.ok_or_else(|| Error::Config("fuzz runs need a fuzz kind".into()))?;
            report.push(inequality_fuzz(&g, kind, cfg.samples.unwrap_or(10_000), cfg.seed, id)?);
        }
        ExperimentKind::Scaling => {
            report.extend(scaling_identities(&g, &[0.5, 2.0], cfg.grid.radius, cfg.grid.points, cfg.seed, id)?);
        }
        ExperimentKind::Peetre => report.extend(run_peetre(&g, cfg)?),
        ExperimentKind::Equivalence => report.extend(run_equivalence(&g, cfg)?),
        ExperimentKind::Reproduce => report.extend(run_reproduce(&g, cfg)?),
    }
    Ok(report)
}

fn dyadic(cfg: &ExperimentConfig, per_octave: usize) -> Result<ScaleGrid> {
    ScaleGrid::dyadic(cfg.scales.octaves, per_octave).map_err(|e| Error::Config(e.to_string()))
}

fn run_peetre(g: &GroupSpec, cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let heat = HeatConfig::default();
    let psi_name = cfg.kernels.first().cloned().unwrap_or_else(|| default_derivative(g));
    let psi = prepare_kernel(g, kernel_by_name(g, &psi_name, &heat)?)?;
    let (phi, eta) = pair_by_name(g, cfg.pair.as_deref().unwrap_or("heat:1,5"))?;
    let phi = prepare_kernel(g, phi)?;
    let base = cfg.family.base.clone().unwrap_or_else(|| "bump".into());
    let family = build_family(g, &base, &cfg.family.dilations, &cfg.family.translates, quad_points(g), &heat)?;
    let grids = vec![
        GridSpec::for_group(g, cfg.grid.radius, cfg.grid.points)?,
        GridSpec::for_group(g, cfg.grid.radius, cfg.grid.refined_points())?,
    ];
    let weights = if cfg.weights.is_empty() { vec![WeightSpec::one()] } else { cfg.weights.clone() };
    let ps = if cfg.p.is_empty() { vec![2.0] } else { cfg.p.clone() };
    let mut rows = Vec::new();
    for p in ps {
        let s = PeetreSettings {
            n: cfg.peetre_exponent(g)?,
            r: cfg.r.unwrap_or(1.0),
            q: cfg.q.unwrap_or(2.0),
            p,
            weights: weights.clone(),
            scales: dyadic(cfg, cfg.scales.per_octave)?,
            grids: grids.clone(),
        };
        rows.extend(peetre_domination_check(g, &psi, &phi, &eta, &family, &s, &cfg.id)?);
    }
    Ok(rows)
}

fn run_equivalence(g: &GroupSpec, cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let heat = HeatConfig::default();
    let phi_name = cfg.kernels.first().cloned().unwrap_or_else(|| "heat:1".into());
    let phi = prepare_kernel(g, kernel_by_name(g, &phi_name, &heat)?)?;
    let base = cfg.family.base.clone().unwrap_or_else(|| default_atom(g));
    let qp = quad_points(g);
    let named = |s: f64| -> Result<TestFunction> {
        let name = if s == 1.0 { base.clone() } else { format!("{base}@{s}") };
        TestFunction::new(g, kernel_by_name(g, &name, &heat)?, None, qp)
    };
    // T_2 f is a multiple of the atom dilated by 1/2; both must be members
    let mut dilations = cfg.family.dilations.clone();
    for s in [1.0, 0.5] {
        if !dilations.contains(&s) {
            dilations.push(s);
        }
    }
    let mut members = Vec::new();
    for &s in &dilations {
        members.push(Member {
            f: named(s)?,
            grid_dilation: s,
        });
    }
    let find = |s: f64| dilations.iter().position(|d| *d == s).unwrap_or(0);
    let drift = (find(1.0), find(0.5));
    let atom = kernel_by_name(g, &base, &heat)?;
    for x0 in &cfg.family.translates {
        members.push(Member {
            f: TestFunction::new(g, atom.clone(), Some(x0.clone()), qp)?,
            grid_dilation: 1.0,
        });
    }
    let s = EquivalenceSettings {
        ps: cfg.p.clone(),
        g_scales: dyadic(cfg, cfg.scales.per_octave)?,
        dictionary_scales: dyadic(cfg, 1)?.nodes(),
        out: GridSpec::for_group(g, cfg.grid.radius, cfg.grid.points)?,
        dictionary_points: qp,
        band_bound: cfg.threshold.unwrap_or(10.0),
        drift_bound: 0.2,
    };
    equivalence_band(g, &phi, &members, Some(drift), &s, &cfg.id)
}

fn run_reproduce(g: &GroupSpec, cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let heat = HeatConfig::default();
    let mut pair = reproducing_pair_by_name(g, cfg.pair.as_deref().unwrap_or("heat:1,1"), cfg.scales.per_octave)?;
    let base = cfg.family.base.clone().unwrap_or_else(|| "bump".into());
    let probes = cfg
        .family
        .dilations
        .iter()
        .map(|&s| {
            let name = if s == 1.0 { base.clone() } else { format!("{base}@{s}") };
            kernel_by_name(g, &name, &heat)?.with_quad_points(probe_points(g))
        })
        .collect::<Result<Vec<_>>>()?;
    // the other probes use about half the node count
    let half = (cfg.grid.points - 1) / 2 + 1;
    let coarse = if half % 2 == 0 { half + 1 } else { half };
    let s = ReproduceSettings {
        eps: 2f64.powi(-cfg.scales.octaves),
        big_b: 2f64.powi(cfg.scales.octaves),
        widenings: 3,
        out: GridSpec::for_group(g, cfg.grid.radius, cfg.grid.points)?,
        probe_out: GridSpec::for_group(g, cfg.grid.radius, coarse.max(3))?,
        residual_bound: cfg.threshold.unwrap_or(0.05),
    };
    reproduce_check(g, &mut pair, &probes, &s, &cfg.id)
}
