use crate::error::{Error, Result};
use crate::group::GroupSpec;

const TOL: f64 = 1e-9;

/// The homogeneous degrees `{a(I)}` up to a cutoff, sorted.
#[derive(Clone, Debug)]
pub struct HomogeneityLattice {
    group: String,
    cutoff: f64,
    values: Vec<f64>,
}

impl HomogeneityLattice {
    pub fn new(g: &GroupSpec, cutoff: f64) -> Result<Self> {
        if !(cutoff >= 0.0) || !cutoff.is_finite() {
            return Err(Error::invalid(format!("lattice cutoff must be >= 0, got {cutoff}")));
        }
        let mut gens: Vec<f64> = g.exponents().to_vec();
        gens.dedup_by(|a, b| (*a - *b).abs() <= TOL);
        let mut values = vec![0.0];
        // every sum of generators below the cutoff, grown one generator at a time
        let mut frontier = vec![0.0];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for v in &frontier {
                for a in &gens {
                    let w = v + a;
                    if w <= cutoff + TOL && !values.iter().any(|u: &f64| (u - w).abs() <= TOL) {
                        values.push(w);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self {
            group: g.name().to_string(),
            cutoff,
            values,
        })
    }

    pub fn group(&self) -> &str {
        &self.group
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, a: f64) -> bool {
        self.values.iter().any(|v| (v - a).abs() <= TOL)
    }

    /// `min {c in Delta : c > a}`.
    pub fn a_bar(&self, a: f64) -> Result<f64> {
        match self.values.iter().find(|&&v| v > a + TOL) {
            Some(v) => Ok(*v),
            None => Err(Error::LatticeTooSmall(format!(
                "no lattice value above {a} below cutoff {}",
                self.cutoff
            ))),
        }
    }

    /// `max {c in Delta : c < a}`; `-1` when `a <= 0`, the convention for
    /// "no vanishing moments".
    pub fn below(&self, a: f64) -> f64 {
        self.values
            .iter()
            .rev()
            .find(|&&v| v < a - TOL)
            .copied()
            .unwrap_or(-1.0)
    }
}

/// Free-function form of [`HomogeneityLattice::a_bar`].
pub fn a_bar(lat: &HomogeneityLattice, a: f64) -> Result<f64> {
    lat.a_bar(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_exponents_give_integers() {
        let lat = HomogeneityLattice::new(&GroupSpec::heisenberg(), 6.0).unwrap();
        assert_eq!(lat.values(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(lat.a_bar(3.0).unwrap(), 4.0);
        assert_eq!(lat.a_bar(0.0).unwrap(), 1.0);
        assert_eq!(lat.a_bar(-1.0).unwrap(), 0.0);
        assert!(matches!(lat.a_bar(6.0), Err(Error::LatticeTooSmall(_))));
    }

    #[test]
    fn fractional_exponents() {
        let g = GroupSpec::new("frac", vec![1.0, 1.5], Vec::new()).unwrap();
        let lat = HomogeneityLattice::new(&g, 4.0).unwrap();
        assert!((lat.a_bar(1.0).unwrap() - 1.5).abs() < 1e-12);
        assert!(lat.contains(2.5) && !lat.contains(0.5));
        assert_eq!(lat.below(1.5), 1.0);
        assert_eq!(lat.below(0.0), -1.0);
    }
}
