use std::fmt;

use serde::{Deserialize, Serialize};

use crate::group::GroupSpec;

/// A multi-index `I = (i_1, ..., i_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `e_j` (0-based `j`).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = vec![0; n];
        v[j] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|I|`, the order.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `a(I) = sum a_k i_k`.
    pub fn hom_degree(&self, g: &GroupSpec) -> f64 {
        hom_degree(g.exponents(), &self.0)
    }

    /// `I' = (i_n, ..., i_1)`.
    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&i| i == 0)
    }

    /// The derivative indices in the order they act: `X^I = X_1^{i_1} ... X_n^{i_n}`
    /// applies `X_n` first, so the returned list starts with the outermost
    /// factor `X_1`.
    pub fn factor_sequence(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order() as usize);
        for (j, &i) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat(j).take(i as usize));
        }
        out
    }

    /// Every multi-index with `a(I) <= cutoff`, sorted by `a(I)` and then
    /// lexicographically.
    pub fn up_to_degree(g: &GroupSpec, cutoff: f64) -> Vec<Self> {
        let a = g.exponents();
        let mut out = Vec::new();
        let mut cur = vec![0u32; a.len()];
        enumerate(a, cutoff + 1e-9, 0, 0.0, &mut cur, &mut out);
        out.sort_by(|x, y| {
            hom_degree(a, &x.0)
                .partial_cmp(&hom_degree(a, &y.0))
                .unwrap()
                .then_with(|| x.0.cmp(&y.0))
        });
        out
    }
}

fn enumerate(a: &[f64], cutoff: f64, k: usize, deg: f64, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if k == a.len() {
        out.push(MultiIndex(cur.clone()));
        return;
    }
    let mut i = 0;
    while deg + i as f64 * a[k] <= cutoff {
        cur[k] = i;
        enumerate(a, cutoff, k + 1, deg + i as f64 * a[k], cur, out);
        i += 1;
    }
    cur[k] = 0;
}

pub(crate) fn hom_degree(a: &[f64], i: &[u32]) -> f64 {
    a.iter().zip(i).map(|(a, &i)| a * i as f64).sum()
}

/// Free-function form of [`MultiIndex::hom_degree`].
pub fn hom_degree_of(g: &GroupSpec, i: &MultiIndex) -> f64 {
    i.hom_degree(g)
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_on_heisenberg() {
        let g = GroupSpec::heisenberg();
        assert_eq!(MultiIndex(vec![2, 1, 0]).hom_degree(&g), 3.0);
        assert_eq!(MultiIndex::zero(3).hom_degree(&g), 0.0);
        assert_eq!(MultiIndex(vec![0, 0, 2]).hom_degree(&g), 4.0);
        assert_eq!(MultiIndex(vec![0, 0, 2]).order(), 2);
    }

    #[test]
    fn reversal_is_an_involution() {
        let i = MultiIndex(vec![3, 0, 1]);
        assert_eq!(i.reversed(), MultiIndex(vec![1, 0, 3]));
        assert_eq!(i.reversed().reversed(), i);
    }

    #[test]
    fn enumeration_is_sorted_and_complete() {
        let g = GroupSpec::heisenberg();
        let all = MultiIndex::up_to_degree(&g, 2.0);
        // degree 0: 1, degree 1: 2, degree 2: x1^2, x1x2, x2^2, x3
        assert_eq!(all.len(), 7);
        assert!(all.windows(2).all(|w| w[0].hom_degree(&g) <= w[1].hom_degree(&g)));
        assert_eq!(MultiIndex(vec![1, 2, 0]).factor_sequence(), vec![0, 1, 1]);
    }
}
