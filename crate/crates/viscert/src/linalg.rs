//! Minimal dense Cholesky for the GP Gram systems: packed lower-triangular
//! storage, incremental row append, forward/backward solves.

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L L^T`, packed row-major:
/// entry `(i, j)` for `j <= i` lives at `i (i+1) / 2 + j`.
#[derive(Debug, Clone, Default)]
pub(crate) struct CholFactor {
    n: usize,
    l: Vec<f64>,
}

impl CholFactor {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (i + 1) / 2 + j]
    }

    /// Factor a dense symmetric positive-definite matrix given row-major.
    pub fn factor(a: &[f64], n: usize, jitter: f64) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut l = vec![0.0f64; n * (n + 1) / 2];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                if i == j {
                    s += jitter;
                }
                for k in 0..j {
                    s -= l[i * (i + 1) / 2 + k] * l[j * (j + 1) / 2 + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Factorization {
                            pivot: i,
                            jitter,
                            n,
                        });
                    }
                    l[i * (i + 1) / 2 + j] = s.sqrt();
                } else {
                    l[i * (i + 1) / 2 + j] = s / l[j * (j + 1) / 2 + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Extend `A` by one symmetric row/column: `col` holds the off-diagonal
    /// entries (length `n`), `diag` the new diagonal (jitter included by the
    /// caller). O(n^2).
    pub fn append(&mut self, col: &[f64], diag: f64) -> Result<()> {
        debug_assert_eq!(col.len(), self.n);
        let b = self.solve_lower(col);
        let d2 = diag - b.iter().map(|v| v * v).sum::<f64>();
        // Guard against a numerically singular extension, not just d2 <= 0.
        if !(d2.is_finite() && d2 > diag.abs() * 1e-12) {
            return Err(Error::Factorization {
                pivot: self.n,
                jitter: 0.0,
                n: self.n + 1,
            });
        }
        self.l.extend_from_slice(&b);
        self.l.push(d2.sqrt());
        self.n += 1;
        Ok(())
    }

    /// `L^{-1} b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.at(i, j) * x[j];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }

    /// `(L L^T)^{-1} b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = self.solve_lower(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.at(j, i) * x[j];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }

    /// Sum of log diagonal entries, `0.5 * ln det A`.
    pub fn half_log_det(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i).ln()).sum()
    }
}
