//! Calderón reproducing pairs: pair kernels `phi * eta`, truncated
//! synthesis, normalizer fitting, the tail kernel and factorized families.

mod factor;
mod pair;
mod synthesis;
mod tail;

pub use factor::{factorized_family, FactorizedFamily};
pub use pair::{pair_kernel, PairManifest, PairMode, ReproducingPair, ResidualRecord};
pub use synthesis::{fit_normalizer, fit_normalizer_from, relative_sup_error, sample_field, truncated_synthesis, SynthesisFields};
pub use tail::tail_kernel;
