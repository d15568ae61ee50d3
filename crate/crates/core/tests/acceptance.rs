//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Pass criterion numbers as arguments to run a subset, for
//! example `cargo test --release --test acceptance -- 1 5`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hglp::calculus::{MultiIndex, PolyGauss, Polynomial};
use hglp::conv::{g_function, Field, ScaleGrid};
use hglp::group::{polar_integrate, validate_group, PolarQuadrature};
use hglp::harness::{inequality_fuzz, run_experiment, scaling_identities, ExperimentConfig, FuzzKind, Report};
use hglp::kernels::{bump, bump_at, corr_decay, vanishing_moment_kernel, KernelSpec};
use hglp::{GridSpec, GroupSpec, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn config(name: &str) -> Result<ExperimentConfig> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    ExperimentConfig::load(path)
}

fn report_outcome(report: &Report, elapsed: Duration, secs: u64) -> Outcome {
    let failed: Vec<String> = report.rows.iter().filter(|r| !r.pass).map(|r| format!("{} [{}]", r.quantity, r.criterion)).collect();
    let detail = if failed.is_empty() {
        format!("{}; {:.1} s (limit {secs} s)", report.summary(), elapsed.as_secs_f64())
    } else {
        format!("{}; failing: {}", report.summary(), failed.join(" | "))
    };
    Outcome::new(failed.is_empty() && within(elapsed, secs), detail)
}

fn axioms() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for name in ["heisenberg", "abelian:3"] {
        let mut g = GroupSpec::builtin(name)?;
        let r = validate_group(&mut g, 10_000, 1)?;
        worst = worst
            .max(r.associativity_defect)
            .max(r.identity_defect)
            .max(r.inverse_defect)
            .max(r.automorphism_defect);
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst <= 1e-12 && within(elapsed, 1),
        format!("worst defect {worst:.2e} on heisenberg and abelian:3; {:.3} s", elapsed.as_secs_f64()),
    ))
}

fn norm() -> Result<Outcome> {
    let start = Instant::now();
    let mut g = GroupSpec::heisenberg();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut homogeneity, mut symmetric) = (0.0f64, true);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let t = 10f64.powf(rng.gen_range(-2.0..2.0));
        let r = g.hom_norm(&x);
        let rt = g.hom_norm(&g.dilate(t, &x)?);
        homogeneity = homogeneity.max((rt - t * r).abs() / (t * r));
        symmetric &= g.hom_norm(&GroupSpec::inverse(&x)) == r;
    }
    let c0_hat = validate_group(&mut g, 10_000, 2)?.c0_hat;
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        homogeneity <= 1e-9 && symmetric && c0_hat.is_finite() && c0_hat <= 4.0 && within(elapsed, 5),
        format!(
            "homogeneity {homogeneity:.2e}; inverse symmetry exact: {symmetric}; c0_hat {c0_hat:.4}; {:.2} s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn polar() -> Result<Outcome> {
    let start = Instant::now();
    let g = GroupSpec::heisenberg();
    let q = PolarQuadrature::new(&g, 24, 6.0, 30)?;
    let cart = GridSpec::new(vec![6.0; 3], vec![33; 3])?;
    let integrands: [(&str, Box<dyn Fn(&[f64]) -> f64>); 3] = [
        ("gaussian", Box::new(|x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp())),
        ("exp(-2 rho^2)", Box::new(move |x: &[f64]| (-2.0 * GroupSpec::heisenberg().hom_norm(x).powi(2)).exp())),
        (
            "(1 + x1^2 + |x3|) gaussian",
            Box::new(|x: &[f64]| (1.0 + x[0] * x[0] + x[2].abs()) * (-x.iter().map(|v| v * v).sum::<f64>()).exp()),
        ),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, f) in &integrands {
        let a = polar_integrate(&g, f, &q)?;
        let b = cart.integrate(f)?;
        let gap = (a - b).abs() / b.abs();
        worst = worst.max(gap);
        parts.push(format!("{name} {gap:.1e}"));
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst <= 0.02 && within(elapsed, 30),
        format!("gaps {}; {:.2} s", parts.join(", "), elapsed.as_secs_f64()),
    ))
}

fn scaling() -> Result<Outcome> {
    let start = Instant::now();
    let mut report = Report::default();
    for name in ["heisenberg", "abelian:2"] {
        let g = GroupSpec::builtin(name)?;
        report.extend(scaling_identities(&g, &[0.5, 2.0], 2.5, 9, 1, name)?);
    }
    Ok(report_outcome(&report, start.elapsed(), 120))
}

fn fuzz() -> Result<Outcome> {
    let mut g = GroupSpec::heisenberg();
    validate_group(&mut g, 10_000, 7)?;
    let start = Instant::now();
    let row = inequality_fuzz(&g, FuzzKind::E4, 1_000_000, 7, "acceptance")?;
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        row.pass && within(elapsed, 10),
        format!("{}; {} ; {:.2} s", row.quantity, row.criterion, elapsed.as_secs_f64()),
    ))
}

fn decay() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, points, tol) in [("abelian:2", 41, 0.3), ("heisenberg", 17, 0.5)] {
        let g = GroupSpec::builtin(name)?;
        let n = g.dim();
        let axis = |k: usize, order: u32| {
            let mut j = vec![0; n];
            j[k] = order;
            MultiIndex(j)
        };
        // a narrow eta keeps t >= 1 asymptotic, a narrow psi keeps t <= 1
        let (narrow, wide) = (bump_at(&g, 0.25)?, bump(&g));
        let eta = vanishing_moment_kernel(&g, &narrow, &axis(0, 2))?;
        let psi = vanishing_moment_kernel(&g, &wide, &axis(1, 1))?;
        let large = corr_decay(&g, &eta, &psi, 0.0, &[1.0, 2.0, 4.0, 8.0, 16.0], points, 1e-3)?;
        let psi = vanishing_moment_kernel(&g, &narrow, &axis(1, 1))?;
        let small = corr_decay(&g, &wide, &psi, 0.0, &[0.125, 0.25, 0.5, 1.0], points, 1e-3)?;
        let sl = large.slope_large.unwrap_or(f64::NAN);
        let ss = small.slope_small.unwrap_or(f64::NAN);
        pass &= (sl - large.expected_large).abs() <= tol && (ss - small.expected_small).abs() <= 0.5;
        parts.push(format!(
            "{name}: large {sl:.3} vs {} (tol {tol}), small {ss:.3} vs {}",
            large.expected_large, small.expected_small
        ));
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        pass && within(elapsed, 300),
        format!("{}; {:.1} s", parts.join("; "), elapsed.as_secs_f64()),
    ))
}

fn reproduce() -> Result<Outcome> {
    let start = Instant::now();
    let report = run_experiment(&config("reproduce.json")?)?;
    Ok(report_outcome(&report, start.elapsed(), 600))
}

/// `J_0(x) = pi^{-1} int_0^pi cos(x sin theta) dtheta`, by the midpoint rule,
/// which is spectrally accurate for this periodic integrand.
fn bessel_j0(x: f64) -> f64 {
    let m = 256;
    let h = std::f64::consts::PI / m as f64;
    (0..m).map(|k| (x * ((k as f64 + 0.5) * h).sin()).cos()).sum::<f64>() / m as f64
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `c = int_0^inf |k^(r)|^2 dr / r` for a radial kernel on the plane, with
/// the Fourier transform taken as a Hankel transform of the profile.
fn radial_constant(profile: impl Fn(f64) -> f64 + Copy) -> f64 {
    let hankel = |rho: f64| 2.0 * std::f64::consts::PI * simpson(0.0, 7.0, 1400, |r| profile(r) * bessel_j0(2.0 * std::f64::consts::PI * rho * r) * r);
    simpson((1e-3f64).ln(), 3f64.ln(), 600, |u| hankel(u.exp()).powi(2))
}

fn abelian_g() -> Result<Outcome> {
    let start = Instant::now();
    let g = GroupSpec::abelian(2)?;
    // kappa = Laplacian of exp(-|x|^2), radial with vanishing mean
    let profile = |r: f64| (4.0 * r * r - 4.0) * (-r * r).exp();
    let mut p = Polynomial::constant(2, -4.0);
    p.add_term(vec![2, 0], 4.0);
    p.add_term(vec![0, 2], 4.0);
    let kappa = KernelSpec::polygauss("laplacian-gaussian", PolyGauss::new(p, vec![1.0, 1.0]), 1.0, "gaussian").with_quad_points(41)?;
    let expected = radial_constant(profile).sqrt();
    let out = GridSpec::for_group(&g, 10.0, 81)?;
    let gf = g_function(&g, Field::kernel(&kappa, 1.0), &kappa, &ScaleGrid::dyadic(4, 4)?, &out)?;
    let f_norm = out.integrate(|x| kappa.eval(x).powi(2))?.sqrt();
    let ratio = gf.lp_norm(2.0, None) / f_norm;
    let gap = (ratio / expected - 1.0).abs();
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        gap <= 0.02 && within(elapsed, 120),
        format!("||g(f)||_2/||f||_2 = {ratio:.5}, radial oracle sqrt(c) = {expected:.5}, gap {gap:.1e}; {:.1} s", elapsed.as_secs_f64()),
    ))
}

fn peetre() -> Result<Outcome> {
    let start = Instant::now();
    let report = run_experiment(&config("peetre.json")?)?;
    Ok(report_outcome(&report, start.elapsed(), 900))
}

fn equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let report = run_experiment(&config("equivalence.json")?)?;
    Ok(report_outcome(&report, start.elapsed(), 1200))
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let checks: [(&str, Check); 10] = [
        ("group axioms", axioms),
        ("homogeneous norm", norm),
        ("polar measure", polar),
        ("scaling identities", scaling),
        ("elementary inequality fuzz", fuzz),
        ("correlation decay slopes", decay),
        ("reproducing residual", reproduce),
        ("abelian g-function identity", abelian_g),
        ("Peetre constants", peetre),
        ("norm-equivalence band", equivalence),
    ];
    // libtest flags such as --nocapture may be forwarded; keep only numbers
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        if !outcome.pass {
            failures += 1;
        }
        println!("{} {n:>2} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
