//! Polynomial moments of kernels and certificates of vanishing moments.

use serde::Serialize;

use super::spec::KernelSpec;
use crate::calculus::{HomogeneityLattice, InvariantFields, MultiIndex};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::group::GroupSpec;
use crate::numeric::BlockSum;

/// Relative tolerance of moment certificates.
pub const MOMENT_TOL: f64 = 1e-6;

/// Share of `int |kappa x^J|` allowed on the outer layer of the grid.
pub const TAIL_TOL: f64 = 1e-6;

/// Record of a quadrature check that a kernel annihilates `P_order`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentCertificate {
    pub order: f64,
    pub tolerance: f64,
    /// `(J, int kappa x^J, int |kappa x^J|)` for every checked monomial.
    pub moments: Vec<(MultiIndex, f64, f64)>,
    /// Largest `|int kappa x^J| / int |kappa x^J|`.
    pub worst_ratio: f64,
}

struct MomentValue {
    value: f64,
    abs: f64,
    shell: f64,
}

fn moment_parts(k: &KernelSpec, j: &MultiIndex, quad: &GridSpec) -> Result<MomentValue> {
    if j.dim() != quad.dim() {
        return Err(Error::invalid("multi-index dimension does not match the kernel"));
    }
    let w = quad.weights();
    let mut x = vec![0.0; quad.dim()];
    let (mut value, mut abs, mut shell) = (BlockSum::new(), BlockSum::new(), BlockSum::new());
    let same_grid = quad == k.quad_grid();
    let cached = if same_grid { Some(k.quad_values()) } else { None };
    for i in 0..quad.len() {
        quad.node_into(i, &mut x);
        let kv = match &cached {
            Some(v) => v[i],
            None => k.eval(&x),
        };
        let mono: f64 = x.iter().zip(&j.0).map(|(v, &p)| v.powi(p as i32)).product();
        let v = w[i] * kv * mono;
        value.add(v);
        abs.add(v.abs());
        if quad.is_boundary(i) {
            shell.add(v.abs());
        }
    }
    Ok(MomentValue {
        value: value.total(),
        abs: abs.total(),
        shell: shell.total(),
    })
}

/// `int kappa(x) x^J dx` by the trapezoid rule on `quad`.
pub fn moment(k: &KernelSpec, j: &MultiIndex, quad: &GridSpec) -> Result<f64> {
    let m = moment_parts(k, j, quad)?;
    if m.abs > 0.0 && m.shell > TAIL_TOL * m.abs {
        return Err(Error::GridTooSmall(format!(
            "{:.2e} of the mass of {} x^{j} sits on the grid boundary",
            m.shell / m.abs,
            k.name()
        )));
    }
    Ok(m.value)
}

/// Checks `int kappa x^J = 0` for every `a(J) <= order` on the kernel's own
/// quadrature grid.
pub fn certify_moments(g: &GroupSpec, k: &KernelSpec, order: f64) -> Result<MomentCertificate> {
    let quad = k.quad_grid().clone();
    let mut moments = Vec::new();
    let mut worst = 0.0f64;
    if order >= 0.0 {
        for j in MultiIndex::up_to_degree(g, order) {
            let m = moment_parts(k, &j, &quad)?;
            if m.abs > 0.0 && m.shell > TAIL_TOL * m.abs {
                return Err(Error::GridTooSmall(format!(
                    "moment x^{j} of {} is not contained in its grid",
                    k.name()
                )));
            }
            let ratio = if m.abs > 0.0 { m.value.abs() / m.abs } else { 0.0 };
            worst = worst.max(ratio);
            if ratio > MOMENT_TOL {
                return Err(Error::MomentCertificationFailed(format!(
                    "{}: moment x^{j} = {:.3e} ({ratio:.2e} of its absolute size)",
                    k.name(),
                    m.value
                )));
            }
            moments.push((j, m.value, m.abs));
        }
    }
    Ok(MomentCertificate {
        order,
        tolerance: MOMENT_TOL,
        moments,
        worst_ratio: worst,
    })
}

/// `X^J psi` for a closed-form `psi`, with moment order the largest lattice
/// value below `a(J)`, certified by quadrature.
pub fn vanishing_moment_kernel(g: &GroupSpec, psi: &KernelSpec, j: &MultiIndex) -> Result<KernelSpec> {
    let base = psi
        .as_polygauss()
        .ok_or_else(|| Error::invalid("vanishing-moment kernels need a closed-form base"))?;
    let a = j.hom_degree(g);
    if a < 1.0 - 1e-12 {
        return Err(Error::invalid(format!("a(J) = {a} must be at least 1")));
    }
    let fields = InvariantFields::new(g);
    let body = base.left_pow(&fields, j);
    let m = psi.moment_order();
    let lattice = HomogeneityLattice::new(g, a + m.max(0.0) + 1.0)?;
    // int (X^J psi) P = +-int psi X^J P, and a(X^J P) <= a(P) - a(J)
    let mut order = lattice.below(a);
    if m >= 0.0 {
        order = order.max(lattice.below(m + a + 1e-6));
    }
    let mut k = KernelSpec::polygauss(format!("X^{j} {}", psi.name()), body, order, psi.decay_note().to_string())
        .with_quad_grid(psi.quad_grid().clone())?;
    let cert = certify_moments(g, &k, order)?;
    k.set_certificate(cert);
    Ok(k)
}

/// Certifies the declared moment order of a kernel and stores the
/// certificate on it.
pub fn certify(g: &GroupSpec, mut k: KernelSpec) -> Result<KernelSpec> {
    let cert = certify_moments(g, &k, k.moment_order())?;
    k.set_certificate(cert);
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{PolyGauss, Polynomial};

    fn bump(g: &GroupSpec) -> KernelSpec {
        let w = g.exponents().iter().map(|a| if *a > 1.0 { 0.5 } else { 1.0 }).collect();
        KernelSpec::polygauss("bump", PolyGauss::gaussian(w), -1.0, "gaussian")
    }

    #[test]
    fn first_derivative_has_zero_mass() {
        let g = GroupSpec::heisenberg();
        let k = vanishing_moment_kernel(&g, &bump(&g), &MultiIndex(vec![1, 0, 0])).unwrap();
        assert_eq!(k.moment_order(), 0.0);
        assert!(moment(&k, &MultiIndex::zero(3), k.quad_grid()).unwrap().abs() < 1e-8);
        // x1 is not annihilated
        assert!(moment(&k, &MultiIndex(vec![1, 0, 0]), k.quad_grid()).unwrap().abs() > 1e-3);
    }

    #[test]
    fn odd_symmetry_kills_odd_moments() {
        let g = GroupSpec::heisenberg();
        let b = bump(&g);
        assert!(moment(&b, &MultiIndex(vec![1, 0, 0]), b.quad_grid()).unwrap().abs() < 1e-14);
        let m0 = moment(&b, &MultiIndex::zero(3), b.quad_grid()).unwrap();
        assert!((m0 - b.integral()).abs() < 1e-9 * m0);
    }

    #[test]
    fn degree_five_derivative_annihilates_p4() {
        let g = GroupSpec::heisenberg();
        let k = vanishing_moment_kernel(&g, &bump(&g), &MultiIndex(vec![1, 0, 2])).unwrap();
        assert_eq!(k.moment_order(), 4.0);
        let cert = k.certificate().unwrap();
        assert!(cert.worst_ratio < MOMENT_TOL);
        assert_eq!(cert.moments.len(), MultiIndex::up_to_degree(&g, 4.0).len());
    }

    #[test]
    fn nested_derivatives() {
        let g = GroupSpec::heisenberg();
        let once = vanishing_moment_kernel(&g, &bump(&g), &MultiIndex(vec![0, 1, 0])).unwrap();
        let twice = vanishing_moment_kernel(&g, &once, &MultiIndex(vec![1, 0, 0])).unwrap();
        assert_eq!(twice.moment_order(), 1.0);
    }

    #[test]
    fn false_claims_are_rejected() {
        let g = GroupSpec::abelian(2).unwrap();
        let k = KernelSpec::polygauss("g", PolyGauss::new(Polynomial::constant(2, 1.0), vec![1.0, 1.0]), 0.0, "");
        assert!(matches!(certify(&g, k), Err(Error::MomentCertificationFailed(_))));
    }

    #[test]
    fn small_grid_is_detected() {
        let g = GroupSpec::abelian(2).unwrap();
        let k = bump(&g);
        let tiny = GridSpec::new(vec![1.0, 1.0], vec![11, 11]).unwrap();
        assert!(matches!(moment(&k, &MultiIndex::zero(2), &tiny), Err(Error::GridTooSmall(_))));
    }
}
