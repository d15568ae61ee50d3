//! Convolution engine and the operators built on it: Littlewood-Paley
//! square functions, maximal functions, the scaling operator and weights.

mod convolve;
mod lp;
mod maximal;
mod scale;
mod scaling;
mod weights;

pub use convolve::{convolve, convolve_with, ConvOptions, Evaluator, Field, QuadSide};
pub use lp::{area_integral, discrete_square, g_function, ScaleFields};
pub use maximal::{
    dictionary_members, grand_maximal, hl_maximal, inscribed_radius, normalized_dictionary, peetre_max, HlOperator,
    HlRadii, MaximalParams, PeetreResult,
};
pub use scale::ScaleGrid;
pub use scaling::{scale_fn, scale_sampled};
pub use weights::{ap_constant, weighted_lp_norm, WeightKind, WeightSpec};

use crate::calculus::HomogeneityLattice;
use crate::error::{Error, Result};
use crate::group::GroupSpec;

/// `N_p = min {N in N_0 : N >= min {a in Delta : a > gamma (1/p - 1)}}`.
pub fn np_for(g: &GroupSpec, p: f64) -> Result<u32> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1], got {p}")));
    }
    let threshold = g.gamma() * (1.0 / p - 1.0);
    let top = threshold + g.exponents().iter().cloned().fold(1.0, f64::max) + 1.0;
    let a = HomogeneityLattice::new(g, top)?.a_bar(threshold)?;
    Ok((a - 1e-9).ceil().max(0.0) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn np_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        assert_eq!(np_for(&g, 1.0).unwrap(), 1);
        assert_eq!(np_for(&g, 2.0 / 3.0).unwrap(), 3);
        assert_eq!(np_for(&g, 0.5).unwrap(), 5);
        assert!(np_for(&g, 1.5).is_err());
    }

    #[test]
    fn np_with_fractional_exponents() {
        // Delta = {0, 1, 1.5, 2, 2.5, 3, ...} and gamma = 2.5
        let g = GroupSpec::new("frac", vec![1.0, 1.5], Vec::new()).unwrap();
        assert_eq!(np_for(&g, 0.5).unwrap(), 3);
        assert_eq!(np_for(&g, 1.0).unwrap(), 1);
        assert_eq!(np_for(&g, 2.0 / 3.0).unwrap(), 2);
    }
}
