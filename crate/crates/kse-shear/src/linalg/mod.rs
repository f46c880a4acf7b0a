//! Dense complex linear algebra kernels sized for mode-operator work
//! (matrices up to a few thousand rows): multiplication, LU factorization
//! in dense and banded form, the matrix exponential, and residual-certified
//! extreme singular values.

mod expm;
mod extremes;
mod lu;

pub use expm::expm;
pub use extremes::{largest_singular_value, smallest_singular_value, SvEstimate};
pub use lu::{BandedLu, DenseLu, Factorized};

use num_complex::Complex64;
use rayon::prelude::*;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::default(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Maximum column absolute sum.
    pub fn norm_1(&self) -> f64 {
        let mut sums = vec![0.0f64; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i).iter().enumerate() {
                sums[j] += v.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: Complex64) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * *b;
        }
    }

    pub fn add_scaled_identity(&mut self, s: Complex64) {
        for i in 0..self.n {
            self[(i, i)] += s;
        }
    }

    /// `self * other`, row-parallel above a size threshold. Each output row
    /// is accumulated in a fixed order, so the result does not depend on
    /// the number of worker threads.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        let body = |i: usize, orow: &mut [Complex64]| {
            let arow = self.row(i);
            for k in 0..n {
                let a = arow[k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                for (o, b) in orow.iter_mut().zip(brow.iter()) {
                    *o += a * *b;
                }
            }
        };
        if n >= 128 {
            out.data
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(i, orow)| body(i, orow));
        } else {
            for (i, orow) in out.data.chunks_mut(n).enumerate() {
                body(i, orow);
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = Complex64::default();
                for (a, x) in self.row(i).iter().zip(v.iter()) {
                    acc += a * x;
                }
                acc
            })
            .collect()
    }

    pub fn matvec_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = vec![Complex64::default(); self.n];
        for i in 0..self.n {
            let vi = v[i].conj();
            for (o, a) in out.iter_mut().zip(self.row(i).iter()) {
                *o += (a * vi).conj();
            }
        }
        out
    }

    /// `self - i*lambda*I`.
    pub fn shifted_imag(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.add_scaled_identity(Complex64::new(0.0, -lambda));
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn vec_dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}
