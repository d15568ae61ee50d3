use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric nodes `t = u b^j` on `[b^{j_max}, b^{j_min}]` with `u_subdiv`
/// nodes per factor `1/b`, and trapezoid weights for `dt/t` in `log t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    b: f64,
    j_min: i32,
    j_max: i32,
    u_subdiv: usize,
}

impl ScaleGrid {
    pub fn new(b: f64, j_min: i32, j_max: i32, u_subdiv: usize) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::invalid(format!("b must lie in (0, 1), got {b}")));
        }
        if j_min > j_max {
            return Err(Error::invalid("j_min must not exceed j_max"));
        }
        if u_subdiv == 0 {
            return Err(Error::invalid("u_subdiv must be positive"));
        }
        Ok(Self { b, j_min, j_max, u_subdiv })
    }

    /// `t` from `2^{-k}` to `2^k` with `per_octave` nodes per doubling.
    pub fn dyadic(k: i32, per_octave: usize) -> Result<Self> {
        Self::new(0.5, -k, k, per_octave)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn u_subdiv(&self) -> usize {
        self.u_subdiv
    }

    pub fn t_min(&self) -> f64 {
        self.b.powi(self.j_max)
    }

    pub fn t_max(&self) -> f64 {
        self.b.powi(self.j_min)
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min) as usize * self.u_subdiv + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes in increasing order.
    pub fn nodes(&self) -> Vec<f64> {
        let step = (1.0 / self.b).ln() / self.u_subdiv as f64;
        let lo = self.t_min().ln();
        (0..self.len()).map(|k| (lo + k as f64 * step).exp()).collect()
    }

    /// Trapezoid weights in `log t`; they sum to `log(t_max / t_min)`.
    pub fn weights(&self) -> Vec<f64> {
        let step = (1.0 / self.b).ln() / self.u_subdiv as f64;
        let n = self.len();
        if n == 1 {
            return vec![0.0];
        }
        (0..n)
            .map(|k| if k == 0 || k + 1 == n { 0.5 * step } else { step })
            .collect()
    }

    /// The nodes `b^j`, `j = j_min..=j_max`, in increasing order of `t`.
    pub fn dyadic_nodes(&self) -> Vec<f64> {
        (self.j_min..=self.j_max).rev().map(|j| self.b.powi(j)).collect()
    }

    /// Index of the node equal to `t`, if any.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.nodes().iter().position(|s| (s / t - 1.0).abs() < 1e-9)
    }

    /// The sub-grid with `t` in `[b^{j_max'}, b^{j_min'}]`; its nodes are a
    /// subset of this grid's nodes.
    pub fn restricted(&self, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min < self.j_min || j_max > self.j_max {
            return Err(Error::invalid("restricted range must lie inside the scale grid"));
        }
        Self::new(self.b, j_min, j_max, self.u_subdiv)
    }
}
