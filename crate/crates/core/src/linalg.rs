//! Tridiagonal storage and direct solvers.

use std::io::Write;

use thiserror::Error;

use crate::scalar::Real;

/// Pivots smaller than this fraction of the row scale count as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular operator: pivot {pivot:e} at row {row} below tolerance (row scale {scale:e})")]
    Singular { row: usize, pivot: f64, scale: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Square tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiag<T> {
    /// Entries `(i + 1, i)`.
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    /// Entries `(i, i + 1)`.
    pub upper: Vec<T>,
}

impl<T: Real> Tridiag<T> {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Tridiag {
            lower: vec![T::zero(); off],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); off],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `v` to entry `(i, j)`, where `|i - j| <= 1`.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        match (i, j) {
            _ if i == j => self.diag[i] = self.diag[i] + v,
            _ if j == i + 1 => self.upper[i] = self.upper[i] + v,
            _ if i == j + 1 => self.lower[j] = self.lower[j] + v,
            _ => panic!("entry ({i}, {j}) outside the band"),
        }
    }

    /// Adds the symmetric 2×2 block `k·[[1,-1],[-1,1]]` on rows `i, i+1`.
    pub fn add_coupling(&mut self, i: usize, k: T) {
        self.diag[i] = self.diag[i] + k;
        self.diag[i + 1] = self.diag[i + 1] + k;
        self.upper[i] = self.upper[i] - k;
        self.lower[i] = self.lower[i] - k;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(x.len(), n, "matvec dimension");
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s = s + self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s = s + self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// `self + diag(d)`.
    pub fn plus_diagonal(&self, d: &[T]) -> Self {
        let mut out = self.clone();
        for (a, &b) in out.diag.iter_mut().zip(d) {
            *a = *a + b;
        }
        out
    }

    /// Largest absolute entry of `A - Aᵀ`.
    pub fn asymmetry(&self) -> T {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(T::zero(), |m, (l, u)| m.max((*l - *u).abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.dim())
            .map(|i| self.row_scale(i, |v| v.abs(), |a, b| a + b))
            .fold(T::zero(), T::max)
    }

    fn row_scale(&self, i: usize, f: impl Fn(T) -> T, op: impl Fn(T, T) -> T) -> T {
        let mut s = f(self.diag[i]);
        if i > 0 {
            s = op(s, f(self.lower[i - 1]));
        }
        if i + 1 < self.dim() {
            s = op(s, f(self.upper[i]));
        }
        s
    }

    fn row_max(&self, i: usize) -> T {
        self.row_scale(i, |v| v.abs(), T::max)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<TridiagLu<T>, LinalgError> {
        let n = self.dim();
        let mut dl = self.lower.clone();
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] = d[i + 1] - fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for (i, &p) in d.iter().enumerate() {
            let mut scale = self.row_max(i);
            if i + 1 < n {
                scale = scale.max(self.row_max(i + 1));
            }
            if !(p.abs() > T::lit(PIVOT_TOLERANCE) * scale) {
                return Err(LinalgError::Singular {
                    row: i,
                    pivot: p.as_f64(),
                    scale: scale.as_f64(),
                });
            }
        }
        Ok(TridiagLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    /// Symmetric `LDLᵀ` factorization that succeeds only for positive
    /// definite matrices (every pivot above the tolerance).
    pub fn ldl_positive(&self) -> Result<Ldl<T>, LinalgError> {
        let n = self.dim();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut p = self.diag[i];
            if i > 0 {
                p = p - l[i - 1] * self.upper[i - 1];
            }
            let scale = self.row_max(i);
            if !(p > T::lit(PIVOT_TOLERANCE) * scale) {
                return Err(LinalgError::Singular {
                    row: i,
                    pivot: p.as_f64(),
                    scale: scale.as_f64(),
                });
            }
            d.push(p);
            if i + 1 < n {
                l.push(self.upper[i] / p);
            }
        }
        Ok(Ldl { d, l })
    }

    /// Writes the nonzero entries as `row col value` lines.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.dim();
        for i in 0..n {
            if i > 0 && self.lower[i - 1] != T::zero() {
                writeln!(out, "{} {} {:e}", i, i - 1, self.lower[i - 1])?;
            }
            if self.diag[i] != T::zero() {
                writeln!(out, "{} {} {:e}", i, i, self.diag[i])?;
            }
            if i + 1 < n && self.upper[i] != T::zero() {
                writeln!(out, "{} {} {:e}", i, i + 1, self.upper[i])?;
            }
        }
        Ok(())
    }
}

/// Factors produced by [`Tridiag::lu`].
#[derive(Clone, Debug)]
pub struct TridiagLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagLu<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut b = rhs.to_vec();
        let n = b.len();
        assert_eq!(n, self.d.len(), "rhs dimension");
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

/// Factors produced by [`Tridiag::ldl_positive`].
#[derive(Clone, Debug)]
pub struct Ldl<T> {
    d: Vec<T>,
    l: Vec<T>,
}

impl<T: Real> Ldl<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        let n = x.len();
        assert_eq!(n, self.d.len(), "rhs dimension");
        for i in 1..n {
            x[i] = x[i] - self.l[i - 1] * x[i - 1];
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi = *xi / *di;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] = x[i] - self.l[i] * x[i + 1];
        }
        x
    }
}
