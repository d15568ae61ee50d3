//! Kernels addressable by name: `bump`, `dgauss:J` and `heat:j`. A suffix
//! `@s` on `bump` and `dgauss:J` dilates the underlying bump by `s`.

use super::heat::{heat_family, HeatConfig};
use super::moments::{certify, vanishing_moment_kernel};
use super::spec::KernelSpec;
use crate::calculus::{MultiIndex, PolyGauss};
use crate::error::{Error, Result};
use crate::group::GroupSpec;

/// Widths of the standard bump `exp(-sum w_k x_k^2)`, `w_k = 4^{1 - a_k}`.
pub fn bump_widths(g: &GroupSpec) -> Vec<f64> {
    g.exponents().iter().map(|a| 0.25f64.powf(a - 1.0)).collect()
}

/// The standard Gaussian bump; no vanishing moments.
pub fn bump(g: &GroupSpec) -> KernelSpec {
    KernelSpec::polygauss("bump", PolyGauss::gaussian(bump_widths(g)), -1.0, "gaussian")
}

/// The standard bump dilated by `s`, up to normalization:
/// `exp(-sum w_k s^{-2 a_k} x_k^2)`.
pub fn bump_at(g: &GroupSpec, s: f64) -> Result<KernelSpec> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Config(format!("bump scale must be positive, got {s}")));
    }
    if s == 1.0 {
        return Ok(bump(g));
    }
    let w = bump_widths(g)
        .iter()
        .zip(g.exponents())
        .map(|(w, a)| w * s.powf(-2.0 * a))
        .collect();
    Ok(KernelSpec::polygauss(format!("bump@{s}"), PolyGauss::gaussian(w), -1.0, "gaussian"))
}

/// `X^J bump`, certified.
pub fn dgauss(g: &GroupSpec, j: &MultiIndex) -> Result<KernelSpec> {
    dgauss_at(g, j, 1.0)
}

/// `X^J` applied to the bump dilated by `s`, certified.
pub fn dgauss_at(g: &GroupSpec, j: &MultiIndex, s: f64) -> Result<KernelSpec> {
    let name = if s == 1.0 { format!("dgauss:{}", join(j)) } else { format!("dgauss:{}@{s}", join(j)) };
    vanishing_moment_kernel(g, &bump_at(g, s)?, j).map(|k| k.with_name(name))
}

fn join(j: &MultiIndex) -> String {
    j.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `J` in `dgauss:J`, written `1,0,2`.
pub fn parse_multi_index(g: &GroupSpec, s: &str) -> Result<MultiIndex> {
    let parts: std::result::Result<Vec<u32>, _> = s.split(',').map(|p| p.trim().parse::<u32>()).collect();
    let parts = parts.map_err(|_| Error::Config(format!("bad multi-index {s:?}")))?;
    if parts.len() != g.dim() {
        return Err(Error::Config(format!(
            "multi-index {s:?} has {} entries, the group has dimension {}",
            parts.len(),
            g.dim()
        )));
    }
    Ok(MultiIndex(parts))
}

/// Looks a kernel up by name. Unknown names are configuration errors.
pub fn kernel_by_name(g: &GroupSpec, name: &str, heat: &HeatConfig) -> Result<KernelSpec> {
    let name = name.trim();
    let (base, scale) = match name.split_once('@') {
        Some((b, s)) if !name.starts_with("heat:") => {
            let s: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad scale in {name:?}")))?;
            (b, s)
        }
        _ => (name, 1.0),
    };
    if base == "bump" {
        return certify(g, bump_at(g, scale)?);
    }
    if let Some(rest) = base.strip_prefix("dgauss:") {
        let j = parse_multi_index(g, rest)?;
        return dgauss_at(g, &j, scale);
    }
    if let Some(rest) = name.strip_prefix("heat:") {
        let j: u32 = rest
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad heat index in {name:?}")))?;
        return heat_family(g, j, heat);
    }
    Err(Error::Config(format!("unknown kernel {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        let g = GroupSpec::heisenberg();
        let cfg = HeatConfig::default();
        assert_eq!(kernel_by_name(&g, "bump", &cfg).unwrap().moment_order(), -1.0);
        let d = kernel_by_name(&g, "dgauss:0,0,1", &cfg).unwrap();
        assert_eq!(d.name(), "dgauss:0,0,1");
        assert_eq!(d.moment_order(), 1.0);
        assert!(matches!(kernel_by_name(&g, "dgauss:1,0", &cfg), Err(Error::Config(_))));
        assert!(matches!(kernel_by_name(&g, "wavelet", &cfg), Err(Error::Config(_))));
        assert!(matches!(kernel_by_name(&g, "heat:x", &cfg), Err(Error::Config(_))));
        let narrow = kernel_by_name(&g, "dgauss:1,0,0@0.25", &cfg).unwrap();
        assert_eq!(narrow.name(), "dgauss:1,0,0@0.25");
        // w_3 = 1/4 * 0.25^{-4}
        let b = kernel_by_name(&g, "bump@0.25", &cfg).unwrap();
        assert_eq!(b.as_polygauss().unwrap().widths(), &[16.0, 16.0, 64.0]);
        assert!(matches!(kernel_by_name(&g, "bump@-1", &cfg), Err(Error::Config(_))));
    }
}
