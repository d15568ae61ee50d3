use super::pair::pair_kernel;
use crate::calculus::{HomogeneityLattice, MultiIndex};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::kernels::{certify, vanishing_moment_kernel, KernelSpec};

/// `U^(l) = u^(l) * v^(l)` with `u`, `v` annihilating `P_A`.
#[derive(Clone, Debug)]
pub struct FactorizedFamily {
    pub order: f64,
    pub us: Vec<KernelSpec>,
    pub vs: Vec<KernelSpec>,
    pub big_us: Vec<KernelSpec>,
}

/// For each base bump, `u = X_1^m psi` and `v = X_2^m psi` with `m` the
/// least integer above `A` (on one-dimensional groups both use `X_1`), and
/// `U = u * v` sampled with `points` nodes per axis. All three are
/// certified on `P_A`.
pub fn factorized_family(g: &GroupSpec, a: f64, bases: &[KernelSpec], points: usize) -> Result<FactorizedFamily> {
    let lattice = HomogeneityLattice::new(g, a.max(0.0) + 1.0)?;
    if !lattice.contains(a) {
        return Err(Error::invalid(format!("A = {a} is not a homogeneity value of the group")));
    }
    if bases.is_empty() {
        return Err(Error::invalid("at least one base bump is required"));
    }
    let n = g.dim();
    let m = a.floor() as u32 + 1;
    let mut ju = vec![0u32; n];
    ju[0] = m;
    let mut jv = vec![0u32; n];
    jv[if n > 1 { 1 } else { 0 }] = m;
    let (mut us, mut vs, mut big_us) = (Vec::new(), Vec::new(), Vec::new());
    for psi in bases {
        let u = vanishing_moment_kernel(g, psi, &MultiIndex(ju.clone()))?.with_quad_points(points)?;
        let v = vanishing_moment_kernel(g, psi, &MultiIndex(jv.clone()))?;
        for k in [&u, &v] {
            if k.moment_order() < a {
                return Err(Error::MomentCertificationFailed(format!(
                    "{} only annihilates P_{}",
                    k.name(),
                    k.moment_order()
                )));
            }
        }
        let big = pair_kernel(g, &u, &v, points)?;
        let big = KernelSpec::sampled(format!("U[{}]", psi.name()), big.as_sampled().expect("sampled").clone(), a, "u * v");
        big_us.push(certify(g, big)?);
        us.push(u);
        vs.push(v);
    }
    Ok(FactorizedFamily { order: a, us, vs, big_us })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{bump, moment};

    #[test]
    fn order_zero_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        let fam = factorized_family(&g, 0.0, &[bump(&g)], 17).unwrap();
        let (u, v, big) = (&fam.us[0], &fam.vs[0], &fam.big_us[0]);
        for k in [u, v, big] {
            assert!(k.moment_order() >= 0.0);
            assert!(k.integral().abs() < 1e-6 * k.l1_norm(), "{} {}", k.name(), k.integral());
        }
        // mass of U is the product of the masses of u and v
        assert!((big.integral() - u.integral() * v.integral()).abs() < 1e-6 * big.l1_norm());
        assert!(big.certificate().is_some());
    }

    #[test]
    fn higher_order_moments_vanish() {
        let g = GroupSpec::abelian(1).unwrap();
        let fam = factorized_family(&g, 1.0, &[bump(&g)], 41).unwrap();
        let big = &fam.big_us[0];
        for j in 0..=1u32 {
            let m = moment(big, &crate::calculus::MultiIndex(vec![j]), big.quad_grid()).unwrap();
            assert!(m.abs() < 1e-6 * big.l1_norm(), "{j}: {m}");
        }
    }

    #[test]
    fn off_lattice_order_fails() {
        let g = GroupSpec::heisenberg();
        assert!(factorized_family(&g, 0.5, &[bump(&g)], 17).is_err());
        assert!(factorized_family(&g, 0.0, &[], 17).is_err());
    }
}
