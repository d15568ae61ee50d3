//! Multi-index bookkeeping, invariant derivatives, homogeneous Taylor
//! polynomials and the weighted derivative seminorm.

mod derivative;
mod lattice;
mod multiindex;
mod poly;
mod seminorm;
mod taylor;

pub use derivative::{
    invariant_derivative, left_derivative, right_derivative, step_for_order, sublaplacian, Side, FD_STEP,
};
pub use lattice::{a_bar, HomogeneityLattice};
pub use multiindex::{hom_degree_of as hom_degree, MultiIndex};
pub use poly::{gaussian_moment, CompiledPoly, InvariantFields, PolyGauss, Polynomial};
pub use seminorm::{default_probe, indices_up_to_order, polygauss_seminorm, schwartz_seminorm};
pub use taylor::{taylor_poly, taylor_poly_from, TaylorPoly};
