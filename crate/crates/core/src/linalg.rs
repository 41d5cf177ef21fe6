//! Small symmetric matrices and the cyclic Jacobi eigensolver.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sweep cap for [`SymMatrix::eigen`].
pub const MAX_SWEEPS: usize = 100;

/// Symmetric `dim x dim` matrix holding only its lower triangle, so
/// `get(i, j) == get(j, i)` by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    dim: usize,
    lower: Vec<T>,
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl<T: Clone + Zero> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            lower: vec![T::zero(); dim * (dim + 1) / 2],
        }
    }

    /// Builds from `f(i, j)`, evaluated for `i >= j` only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut lower = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        Self { dim, lower }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i].clone() } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.lower[tri(i, j)].clone()
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.lower[tri(i, j)] = v;
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix {
            dim: self.dim,
            lower: self.lower.iter().map(f).collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Eigen-decomposition with eigenvalues in decreasing order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl SymMatrix<f64> {
    /// Builds from a dense square matrix, averaging `(a_ij + a_ji) / 2`.
    pub fn symmetrized(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        Ok(Self::from_fn(dim, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += a[i][j] * a[i][j];
            }
        }
        (2.0 * s).sqrt()
    }

    /// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops
    /// below `tol`. Each eigenvalue is then within `tol` of a diagonal entry.
    pub fn eigen(&self, tol: f64) -> Result<Eigen> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let n = self.dim;
        let mut a = self.to_rows();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();

        let mut sweeps = 0;
        loop {
            let off = Self::off_diagonal_norm(&a);
            if off < tol {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    sweeps,
                    off_norm: off,
                });
            }
            sweeps += 1;
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let (app, aqq) = (a[p][p], a[q][q]);
                    // Negligible against both diagonal entries: annihilate.
                    let g = 100.0 * apq.abs();
                    if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                        a[p][q] = 0.0;
                        a[q][p] = 0.0;
                        continue;
                    }
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for row in a.iter_mut() {
                        let (kp, kq) = (row[p], row[q]);
                        row[p] = c * kp - s * kq;
                        row[q] = s * kp + c * kq;
                    }
                    for k in 0..n {
                        let (pk, qk) = (a[p][k], a[q][k]);
                        a[p][k] = c * pk - s * qk;
                        a[q][k] = s * pk + c * qk;
                    }
                    a[p][q] = 0.0;
                    a[q][p] = 0.0;
                    for row in v.iter_mut() {
                        let (kp, kq) = (row[p], row[q]);
                        row[p] = c * kp - s * kq;
                        row[q] = s * kp + c * kq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
        Ok(Eigen {
            values: order.iter().map(|&k| a[k][k]).collect(),
            vectors: order
                .iter()
                .map(|&k| (0..n).map(|i| v[i][k]).collect())
                .collect(),
            sweeps,
        })
    }
}

/// Largest eigenvalue of `m`, within `tol`.
pub fn max_eigenvalue(m: &SymMatrix<f64>, tol: f64) -> Result<f64> {
    Ok(m.eigen(tol)?.values.first().copied().unwrap_or(0.0))
}
