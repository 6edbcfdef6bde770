//! Uniform symmetric meshes and sampled field states.
//!
//! Every grid has an odd number of nodes so that `x = 0` is a node; the
//! impurity lives there and all interface stencils are anchored on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh on `[-L, L]` with a node pinned at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    node_count: usize,
    spacing: f64,
    zero_index: usize,
}

impl Grid1D {
    /// Builds the grid `x_i = -L + i dx`, `dx = 2L / (N - 1)`.
    pub fn new(half_width: f64, node_count: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if node_count < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 nodes, got {node_count}"
            )));
        }
        if node_count.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "node count {node_count} is even: no node at the origin"
            )));
        }
        let spacing = 2.0 * half_width / (node_count - 1) as f64;
        Ok(Self {
            half_width,
            node_count,
            spacing,
            zero_index: (node_count - 1) / 2,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.node_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.spacing
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    /// Node coordinate. Computed relative to the origin node so that the
    /// mesh is exactly symmetric and `x(zero_index) == 0.0`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.zero_index as f64) * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.node_count {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.node_count).map(|i| f(self.x(i))).collect()
    }

    /// Composite trapezoid rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.node_count);
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.spacing * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    /// Trapezoid inner product `sum w_i a_i b_i`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.node_count);
        debug_assert_eq!(b.len(), self.node_count);
        let n = a.len();
        let inner: f64 = (1..n - 1).map(|i| a[i] * b[i]).sum();
        self.spacing * (inner + 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]))
    }

    pub fn l2_norm_sq(&self, values: &[f64]) -> f64 {
        self.inner(values, values)
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        self.l2_norm_sq(values).sqrt()
    }

    /// First derivative: centered differences in the interior and
    /// second-order one-sided stencils at the two boundary nodes.
    pub fn gradient(&self, values: &[f64]) -> Vec<f64> {
        let n = values.len();
        debug_assert_eq!(n, self.node_count);
        let h = self.spacing;
        let mut out = vec![0.0; n];
        if n == 3 {
            // Too few nodes for 3-point one-sided stencils at both ends.
            let d = (values[2] - values[0]) / (2.0 * h);
            out.fill(d);
            return out;
        }
        out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
        out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
        for i in 1..n - 1 {
            out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
        }
        out
    }

    /// Second-order one-sided derivatives `(u_x(0-), u_x(0+))` at the origin node.
    pub fn one_sided_at_zero(&self, values: &[f64]) -> (f64, f64) {
        let z = self.zero_index;
        let h = self.spacing;
        if z < 2 {
            // Three-node grid: fall back to first-order differences.
            return (
                (values[z] - values[z - 1]) / h,
                (values[z + 1] - values[z]) / h,
            );
        }
        let left = (3.0 * values[z] - 4.0 * values[z - 1] + values[z - 2]) / (2.0 * h);
        let right = (-3.0 * values[z] + 4.0 * values[z + 1] - values[z + 2]) / (2.0 * h);
        (left, right)
    }

    pub(crate) fn check_len(&self, what: &str, len: usize) -> Result<()> {
        if len != self.node_count {
            return Err(Error::GridMismatch(format!(
                "{what} has {len} samples, grid has {} nodes",
                self.node_count
            )));
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "grids differ: (L={}, N={}) vs (L={}, N={})",
                self.half_width, self.node_count, other.half_width, other.node_count
            )));
        }
        Ok(())
    }
}

/// Sampled pair `(u, u_t)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    grid: Grid1D,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn new(grid: Grid1D, u1: Vec<f64>, u2: Vec<f64>, time: f64) -> Result<Self> {
        grid.check_len("u1", u1.len())?;
        grid.check_len("u2", u2.len())?;
        let state = Self { grid, u1, u2, time };
        state.check_finite()?;
        Ok(state)
    }

    /// Static profile with zero velocity.
    pub fn from_profile(grid: Grid1D, u1: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, u1, vec![0.0; n], 0.0)
    }

    pub fn zeros(grid: &Grid1D) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            u1: vec![0.0; n],
            u2: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|v| v.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidField(format!(
                "non-finite sample at t = {}",
                self.time
            )));
        }
        Ok(())
    }

    /// Value of `u1` at the origin node.
    pub fn u1_at_zero(&self) -> f64 {
        self.u1[self.grid.zero_index()]
    }
}
