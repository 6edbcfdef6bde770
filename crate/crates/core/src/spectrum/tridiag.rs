//! Symmetric tridiagonal eigen-machinery: Sturm-sequence bisection for
//! eigenvalues and inverse iteration for eigenvectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal
/// `off` (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of
    /// `A - x I` via the LDL^T pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let (lo, hi) = self.gershgorin();
        let tiny = f64::MIN_POSITIVE.sqrt() * (hi - lo).abs().max(1.0);
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 {
                self.off[i - 1] * self.off[i - 1]
            } else {
                0.0
            };
            d = self.diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solves `(A - shift I) x = rhs` by Gaussian elimination with partial
    /// pivoting (the tridiagonal LU of LAPACK `gttrf`).
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            let d = self.diag[0] - shift;
            return vec![rhs[0] / if d == 0.0 { f64::EPSILON } else { d }];
        }
        let (lo, hi) = self.gershgorin();
        let guard = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        // Rows are stored as three bands (main, first and second super-diagonal).
        let mut dl: Vec<f64> = self.off.clone();
        let mut d: Vec<f64> = self.diag.iter().map(|a| a - shift).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut piv = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = guard;
                }
                let l = dl[i] / d[i];
                dl[i] = l;
                d[i + 1] -= l * du[i];
            } else {
                let l = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = l;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - l * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -l;
                }
                piv[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = guard;
        }
        let mut x = rhs.to_vec();
        for i in 0..n - 1 {
            if piv[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= dl[i] * x[i];
        }
        x[n - 1] /= d[n - 1];
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        x
    }

    /// Inverse iteration at `lambda`, orthogonalized against `previous`.
    /// Returns a Euclidean-unit vector.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let shift = lambda + 1e-13 * scale;
        // Deterministic, non-symmetric start so no eigenvector is missed by parity.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.731).sin())
            .collect();
        for _ in 0..6 {
            for p in previous {
                let c: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(p).for_each(|(a, b)| *a -= c * b);
            }
            let mut w = self.solve_shifted(shift, &v);
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NonConvergence(format!(
                    "inverse iteration broke down at lambda = {lambda}"
                )));
            }
            w.iter_mut().for_each(|a| *a /= norm);
            v = w;
        }
        // Final projection; near-degenerate clusters leak back in the solve.
        for p in previous {
            let c: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(a, b)| *a -= c * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn dirichlet_laplacian_eigenvalues() {
        let n = 50;
        let a = laplacian(n);
        for j in 0..5 {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((a.eigenvalue(j) - exact).abs() < 1e-13);
        }
        assert_eq!(a.count_below(0.0), 0);
        assert_eq!(a.count_below(4.0), n);
    }

    #[test]
    fn pivoted_solve_is_accurate_for_indefinite_shifts() {
        let a = SymTridiagonal::new(
            vec![1.0, -3.0, 0.5, 2.0, 0.0, 1.0],
            vec![2.0, 1.0, -1.0, 0.3, 4.0],
        );
        let rhs = vec![1.0, 2.0, -1.0, 0.5, 3.0, -2.0];
        for shift in [0.0, 0.7, -2.2] {
            let x = a.solve_shifted(shift, &rhs);
            let ax = a.apply(&x);
            for i in 0..rhs.len() {
                assert!((ax[i] - shift * x[i] - rhs[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_iteration_residual() {
        let n = 200;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + ((i as f64) * 0.1).cos()).collect();
        let a = SymTridiagonal::new(diag, vec![-1.0; n - 1]);
        let mut found: Vec<Vec<f64>> = Vec::new();
        for j in 0..3 {
            let l = a.eigenvalue(j);
            let v = a.eigenvector(l, &found).unwrap();
            let av = a.apply(&v);
            let r: f64 = av
                .iter()
                .zip(&v)
                .map(|(p, q)| (p - l * q).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r < 1e-10, "j = {j}: {r}");
            for p in &found {
                let c: f64 = p.iter().zip(&v).map(|(x, y)| x * y).sum();
                assert!(c.abs() < 1e-8);
            }
            found.push(v);
        }
    }
}
