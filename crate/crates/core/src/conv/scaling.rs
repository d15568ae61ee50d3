//! The scaling operator `(T_t f)(x) = f(A_t x)`.

use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::group::GroupSpec;

/// `T_t f` for samples: the same values on the grid dilated by `1/t`, whose
/// nodes `A_{1/t} x_i` satisfy `T_t f(A_{1/t} x_i) = f(x_i)`.
pub fn scale_sampled(g: &GroupSpec, t: f64, f: &SampledFunction) -> Result<SampledFunction> {
    check(t)?;
    SampledFunction::new(f.grid().dilated(g, 1.0 / t), f.values().to_vec(), format!("T_{t} {}", f.provenance()))
}

/// `T_t f` for an evaluator.
pub fn scale_fn<'a, F>(g: &GroupSpec, t: f64, f: F) -> Result<impl Fn(&[f64]) -> f64 + Sync + 'a>
where
    F: Fn(&[f64]) -> f64 + Sync + 'a,
{
    check(t)?;
    let factors = g.dilation_factors(t);
    Ok(move |x: &[f64]| {
        let y: Vec<f64> = x.iter().zip(&factors).map(|(v, s)| v * s).collect();
        f(&y)
    })
}

fn check(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("scaling parameter must be positive, got {t}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn identity_and_reparametrization() {
        let g = GroupSpec::heisenberg();
        let grid = GridSpec::for_group(&g, 2.0, 5).unwrap();
        let f = grid.sample(|x| x[0] + x[1] * x[2], "f").unwrap();
        let same = scale_sampled(&g, 1.0, &f).unwrap();
        assert_eq!(same.values(), f.values());
        assert_eq!(same.grid(), f.grid());
        let t = 2.0;
        let tf = scale_sampled(&g, t, &f).unwrap();
        let h = scale_fn(&g, t, |x: &[f64]| x[0] + x[1] * x[2]).unwrap();
        let mut x = vec![0.0; 3];
        for i in 0..tf.grid().len() {
            tf.grid().node_into(i, &mut x);
            assert!((tf.values()[i] - h(&x)).abs() < 1e-12);
        }
        assert!(scale_sampled(&g, -1.0, &f).is_err());
    }
}
