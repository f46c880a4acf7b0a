//! One-dimensional periodic profiles in y (the `k = 0` restriction of
//! [`super::SpectralField2D`], and the home of `u(y)` samples and
//! `psi = d/dy <phi>`). Same coefficient convention as the 2-D fields.

use super::fft;
use crate::error::{KseError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Profile1D {
    l2: f64,
    coeffs: Vec<Complex64>,
}

impl Profile1D {
    pub fn zeros(l2: f64, ny: usize) -> Self {
        Self {
            l2,
            coeffs: vec![Complex64::default(); ny],
        }
    }

    /// Forward transform of real samples on the uniform y grid.
    pub fn from_samples(l2: f64, samples: &[f64]) -> Self {
        let ny = samples.len();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::fft1(&mut buf, true);
        let scale = 1.0 / ny as f64;
        for c in &mut buf {
            *c *= scale;
        }
        let mut p = Self { l2, coeffs: buf };
        p.enforce_hermitian();
        p
    }

    pub fn from_coeffs(l2: f64, coeffs: Vec<Complex64>) -> Self {
        Self { l2, coeffs }
    }

    /// Inverse transform to real samples.
    pub fn values(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft::fft1(&mut buf, false);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn ny(&self) -> usize {
        self.coeffs.len()
    }

    pub fn l2_period(&self) -> f64 {
        self.l2
    }

    pub fn eta(&self, j: i64) -> f64 {
        2.0 * PI * j as f64 / self.l2
    }

    pub fn j_of_iy(&self, iy: usize) -> i64 {
        let n = self.coeffs.len();
        if iy < n / 2 {
            iy as i64
        } else {
            iy as i64 - n as i64
        }
    }

    pub fn iy_of_j(&self, j: i64) -> usize {
        j.rem_euclid(self.coeffs.len() as i64) as usize
    }

    pub fn coeff(&self, j: i64) -> Complex64 {
        self.coeffs[self.iy_of_j(j)]
    }

    pub fn set_coeff(&mut self, j: i64, value: Complex64) {
        let iy = self.iy_of_j(j);
        self.coeffs[iy] = value;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn enforce_hermitian(&mut self) {
        let n = self.coeffs.len();
        for iy in 0..n {
            let my = (n - iy) % n;
            if iy < my {
                let avg = 0.5 * (self.coeffs[iy] + self.coeffs[my].conj());
                self.coeffs[iy] = avg;
                self.coeffs[my] = avg.conj();
            } else if iy == my {
                self.coeffs[iy] = Complex64::new(self.coeffs[iy].re, 0.0);
            }
        }
    }

    /// Spectral derivative of the given order.
    pub fn derivative(&self, order: u32) -> Result<Self> {
        if order > 4 {
            return Err(KseError::InvalidInput(format!(
                "derivative order {order} exceeds 4"
            )));
        }
        let mut out = self.clone();
        for iy in 0..out.coeffs.len() {
            let j = out.j_of_iy(iy);
            let iw = Complex64::new(0.0, out.eta(j));
            out.coeffs[iy] *= iw.powu(order);
        }
        Ok(out)
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, y: f64) -> f64 {
        let mut acc = Complex64::default();
        for iy in 0..self.coeffs.len() {
            let j = self.j_of_iy(iy);
            acc += self.coeffs[iy] * Complex64::new(0.0, self.eta(j) * y).exp();
        }
        acc.re
    }

    /// Evaluate the q-th derivative of the interpolant at a point.
    pub fn eval_derivative_at(&self, y: f64, order: u32) -> f64 {
        let mut acc = Complex64::default();
        for iy in 0..self.coeffs.len() {
            let j = self.j_of_iy(iy);
            let iw = Complex64::new(0.0, self.eta(j));
            acc += self.coeffs[iy] * iw.powu(order) * Complex64::new(0.0, self.eta(j) * y).exp();
        }
        acc.re
    }

    /// `L2 * sum w(eta_j) |c_j|^2`, ordered accumulation.
    pub fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for iy in 0..self.coeffs.len() {
            let j = self.j_of_iy(iy);
            acc += w(self.eta(j)) * self.coeffs[iy].norm_sqr();
        }
        self.l2 * acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_energy(|_| 1.0).sqrt()
    }

    pub fn min_max(&self) -> (f64, f64) {
        let vals = self.values();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in vals {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Energy fraction above |j| > cut.
    pub fn tail_fraction(&self, cut: i64) -> f64 {
        let mut tail = 0.0;
        let mut total = 0.0;
        for iy in 0..self.coeffs.len() {
            let e = self.coeffs[iy].norm_sqr();
            total += e;
            if self.j_of_iy(iy).abs() > cut {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Smallest truncation J whose tail (in max-modulus) is below `tol`
    /// relative to the largest coefficient, or `None` if never.
    pub fn resolved_truncation(&self, tol: f64) -> Option<usize> {
        let peak = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        if peak == 0.0 {
            return Some(0);
        }
        let half = self.coeffs.len() / 2;
        let mut required = 0usize;
        for iy in 0..self.coeffs.len() {
            let j = self.j_of_iy(iy).unsigned_abs() as usize;
            if self.coeffs[iy].norm() > tol * peak && j > required {
                required = j;
            }
        }
        if required >= half {
            None
        } else {
            Some(required)
        }
    }
}
