//! Tridiagonal systems by Thomas elimination.

use crate::error::{Error, Result};

/// LU factors of a fixed tridiagonal matrix, reusable across right-hand sides.
///
/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Clone, Debug)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    /// Modified super-diagonal `c'_i`.
    upper_mod: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl TridiagonalLu {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() != n || upper.len() != n {
            return Err(Error::InvalidParams(
                "tridiagonal bands must be non-empty and of equal length".into(),
            ));
        }
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let l = if i == 0 { 0.0 } else { lower[i] };
            let pivot = diag[i] - l * prev_c;
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::InvalidParams(format!("singular pivot at row {i}")));
            }
            inv_pivot[i] = 1.0 / pivot;
            prev_c = if i + 1 < n {
                upper[i] * inv_pivot[i]
            } else {
                0.0
            };
            upper_mod[i] = prev_c;
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n, "right-hand side has the wrong length");
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}
