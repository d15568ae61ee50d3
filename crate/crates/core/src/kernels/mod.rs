//! Kernels: closed-form bumps and their invariant derivatives, the heat
//! family on the Heisenberg group, moments, and correlation decay.

mod decay;
mod heat;
mod moments;
mod registry;
mod spec;

pub use decay::{corr_decay, corr_value, effective_extents, product_extents, DecayRow, DecayTable, SLOPE_TOL};
pub use heat::{heat_closed_form, heat_derivative_on_grid, heat_family, heat_family_at, heat_family_from, heat_kernel, sublaplacian_power, HeatConfig, HeatSolution, HeatSource};
pub use moments::{certify, certify_moments, moment, vanishing_moment_kernel, MomentCertificate, MOMENT_TOL, TAIL_TOL};
pub use registry::{bump, bump_at, bump_widths, dgauss, dgauss_at, kernel_by_name, parse_multi_index};
pub use spec::{dilate_kernel, polygauss_grid, KernelBody, KernelSpec, DEFAULT_KERNEL_POINTS};
