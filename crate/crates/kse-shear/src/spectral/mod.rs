//! Real-to-complex spectral representation of periodic fields on
//! `[0, L1) x [0, L2)`.
//!
//! Coefficients follow the Fourier-series convention
//! `f(x, y) = sum_{k,j} c(k,j) exp(i (kappa_k x + eta_j y))`, i.e. the
//! forward transform carries the `1/(Nx*Ny)` normalization and the inverse
//! is a plain unnormalized sum. With this convention Parseval reads
//! `||f||^2_{L2} = L1*L2 * sum |c|^2`, and a unit cosine has coefficients
//! `1/2` at the `(+-1, 0)` modes. Checkpoint files store coefficients in
//! exactly this convention, which keeps golden files portable.
//!
//! The logical index space is always the full lattice
//! `k in [-Nx/2, Nx/2), j in [-Ny/2, Ny/2)`; storage uses the standard DFT
//! layout (nonnegative frequencies first).

mod fft;
pub mod checkpoint;
mod profile;

pub use profile::Profile1D;

use crate::error::{KseError, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Differentiation axis for [`SpectralField2D::derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis2 {
    X,
    Y,
}

/// Periodic rectangle `[0, L1) x [0, L2)` with even mode counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    l1: f64,
    l2: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, l1: f64, l2: f64) -> Result<Self> {
        if nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(KseError::InvalidGrid(format!(
                "mode counts must be even and >= 8, got {nx} x {ny}"
            )));
        }
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(KseError::InvalidGrid(format!(
                "periods must be positive, got L1 = {l1}, L2 = {l2}"
            )));
        }
        Ok(Self { nx, ny, l1, l2 })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn l1(&self) -> f64 {
        self.l1
    }
    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// Horizontal wavenumber `kappa(k) = 2 pi k / L1`.
    pub fn kappa(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.l1
    }

    /// Vertical wavenumber `eta(j) = 2 pi j / L2`.
    pub fn eta(&self, j: i64) -> f64 {
        2.0 * PI * j as f64 / self.l2
    }

    /// Physical x sample points.
    pub fn x_points(&self) -> Vec<f64> {
        (0..self.nx).map(|i| i as f64 * self.l1 / self.nx as f64).collect()
    }

    /// Physical y sample points.
    pub fn y_points(&self) -> Vec<f64> {
        (0..self.ny).map(|i| i as f64 * self.l2 / self.ny as f64).collect()
    }

    /// Signed mode index for a storage index (DFT layout).
    pub fn k_of_ix(&self, ix: usize) -> i64 {
        signed_mode(ix, self.nx)
    }
    pub fn j_of_iy(&self, iy: usize) -> i64 {
        signed_mode(iy, self.ny)
    }

    pub fn ix_of_k(&self, k: i64) -> usize {
        storage_index(k, self.nx)
    }
    pub fn iy_of_j(&self, j: i64) -> usize {
        storage_index(j, self.ny)
    }

    /// Largest retained |k| under the 2/3 rule, strict variant: the cutoff
    /// `kc` is the largest integer with `3*kc < Nx`, so that quadratic
    /// products of retained modes cannot alias back onto retained modes
    /// (including the marginal `2kc -> -kc` wraparound when `3 | Nx`).
    pub fn dealias_kx(&self) -> i64 {
        ((self.nx - 1) / 3) as i64
    }
    pub fn dealias_ky(&self) -> i64 {
        ((self.ny - 1) / 3) as i64
    }

    /// Largest |kappa| representable on the grid.
    pub fn kappa_max(&self) -> f64 {
        2.0 * PI * (self.nx as f64 / 2.0) / self.l1
    }

    pub fn cell_area(&self) -> f64 {
        (self.l1 / self.nx as f64) * (self.l2 / self.ny as f64)
    }
}

fn signed_mode(ix: usize, n: usize) -> i64 {
    if ix < n / 2 {
        ix as i64
    } else {
        ix as i64 - n as i64
    }
}

fn storage_index(k: i64, n: usize) -> usize {
    let n = n as i64;
    debug_assert!(k >= -n / 2 && k < n / 2);
    k.rem_euclid(n) as usize
}

/// Fourier coefficients of a real scalar field on a [`Grid2D`].
#[derive(Debug, Clone)]
pub struct SpectralField2D {
    grid: Grid2D,
    /// Row-major `nx x ny`; row index is the x-mode, column the y-mode.
    coeffs: Array2<Complex64>,
}

impl SpectralField2D {
    /// Zero field.
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            coeffs: Array2::zeros((grid.nx, grid.ny)),
        }
    }

    /// Forward transform of real physical samples (shape `nx x ny`).
    pub fn forward(grid: Grid2D, samples: &Array2<f64>) -> Result<Self> {
        if samples.dim() != (grid.nx, grid.ny) {
            return Err(KseError::DimensionMismatch {
                expected: (grid.nx, grid.ny),
                got: samples.dim(),
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::fft2(&mut buf, grid.nx, grid.ny, true);
        let scale = 1.0 / (grid.nx * grid.ny) as f64;
        for c in &mut buf {
            *c *= scale;
        }
        let coeffs = Array2::from_shape_vec((grid.nx, grid.ny), buf).expect("shape");
        let mut field = Self { grid, coeffs };
        // Symmetrize away the O(eps) asymmetry of the complex transform so
        // the Hermitian invariant holds exactly.
        field.enforce_hermitian();
        Ok(field)
    }

    /// Inverse transform to real physical samples.
    pub fn inverse(&self) -> Array2<f64> {
        let mut buf: Vec<Complex64> = self.coeffs.iter().copied().collect();
        fft::fft2(&mut buf, self.grid.nx, self.grid.ny, false);
        Array2::from_shape_vec(
            (self.grid.nx, self.grid.ny),
            buf.into_iter().map(|c| c.re).collect(),
        )
        .expect("shape")
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeff(&self, k: i64, j: i64) -> Complex64 {
        self.coeffs[[self.grid.ix_of_k(k), self.grid.iy_of_j(j)]]
    }

    pub fn set_coeff(&mut self, k: i64, j: i64, value: Complex64) {
        self.coeffs[[self.grid.ix_of_k(k), self.grid.iy_of_j(j)]] = value;
    }

    /// Raw coefficient storage (DFT layout).
    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.coeffs
    }

    pub fn from_coeffs(grid: Grid2D, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != (grid.nx, grid.ny) {
            return Err(KseError::DimensionMismatch {
                expected: (grid.nx, grid.ny),
                got: coeffs.dim(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    /// Project onto real fields: `c(-k,-j) = conj(c(k,j))` (indices mod N,
    /// so Nyquist rows pair with themselves).
    pub fn enforce_hermitian(&mut self) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for ix in 0..nx {
            let mx = (nx - ix) % nx;
            for iy in 0..ny {
                let my = (ny - iy) % ny;
                if (ix, iy) < (mx, my) {
                    let a = self.coeffs[[ix, iy]];
                    let b = self.coeffs[[mx, my]];
                    let avg = 0.5 * (a + b.conj());
                    self.coeffs[[ix, iy]] = avg;
                    self.coeffs[[mx, my]] = avg.conj();
                } else if (ix, iy) == (mx, my) {
                    self.coeffs[[ix, iy]] = Complex64::new(self.coeffs[[ix, iy]].re, 0.0);
                }
            }
        }
    }

    /// Largest Hermitian-symmetry violation, for invariant checks.
    pub fn hermitian_defect(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut worst = 0.0f64;
        for ix in 0..nx {
            let mx = (nx - ix) % nx;
            for iy in 0..ny {
                let my = (ny - iy) % ny;
                let d = (self.coeffs[[ix, iy]] - self.coeffs[[mx, my]].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Multiply every coefficient by `f(kappa_k, eta_j)`.
    pub fn apply_symbol(&self, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut out = self.clone();
        for ((ix, iy), c) in out.coeffs.indexed_iter_mut() {
            let kappa = self.grid.kappa(self.grid.k_of_ix(ix));
            let eta = self.grid.eta(self.grid.j_of_iy(iy));
            *c *= f(kappa, eta);
        }
        out
    }

    /// Spectral derivative of the given order (`order <= 4`) along an axis.
    pub fn derivative(&self, axis: Axis2, order: u32) -> Result<Self> {
        if order > 4 {
            return Err(KseError::InvalidInput(format!(
                "derivative order {order} exceeds 4"
            )));
        }
        Ok(self.apply_symbol(|kappa, eta| {
            let w = match axis {
                Axis2::X => kappa,
                Axis2::Y => eta,
            };
            Complex64::new(0.0, w).powu(order)
        }))
    }

    /// `Delta f`: symbol `-(kappa^2 + eta^2)`.
    pub fn laplacian(&self) -> Self {
        self.apply_symbol(|kappa, eta| Complex64::new(-(kappa * kappa + eta * eta), 0.0))
    }

    /// `Delta^2 f`: symbol `(kappa^2 + eta^2)^2`.
    pub fn bilaplacian(&self) -> Self {
        self.apply_symbol(|kappa, eta| {
            let q2 = kappa * kappa + eta * eta;
            Complex64::new(q2 * q2, 0.0)
        })
    }

    /// Zero all modes above the dealias cutoff (strict 2/3 rule).
    pub fn dealias(&mut self) {
        let (kcx, kcy) = (self.grid.dealias_kx(), self.grid.dealias_ky());
        for ((ix, iy), c) in self.coeffs.indexed_iter_mut() {
            if self.grid.k_of_ix(ix).abs() > kcx || self.grid.j_of_iy(iy).abs() > kcy {
                *c = Complex64::default();
            }
        }
    }

    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias();
        out
    }

    /// Energy fraction carried above the dealias cutoff.
    pub fn tail_fraction(&self) -> f64 {
        let (kcx, kcy) = (self.grid.dealias_kx(), self.grid.dealias_ky());
        let mut tail = 0.0;
        let mut total = 0.0;
        for ((ix, iy), c) in self.coeffs.indexed_iter() {
            let e = c.norm_sqr();
            total += e;
            if self.grid.k_of_ix(ix).abs() > kcx || self.grid.j_of_iy(iy).abs() > kcy {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    /// Dealiased pointwise product (strict 2/3 rule applied to both inputs
    /// and to the result, so the result equals the exact spectral
    /// convolution restricted to retained modes).
    pub fn dealiased_product(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(KseError::GridMismatch);
        }
        let a = self.dealiased();
        let b = other.dealiased();
        let pa = a.inverse();
        let pb = b.inverse();
        let prod = &pa * &pb;
        let mut out = Self::forward(self.grid, &prod)?;
        out.dealias();
        Ok(out)
    }

    /// Split into the x-average (kernel component) and the fluctuation.
    ///
    /// The two parts are L2-orthogonal and reconstruct the field exactly:
    /// the mean part is the `k = 0` column, the fluctuation everything else.
    pub fn decompose(&self) -> (Profile1D, SpectralField2D) {
        let iy_all: Vec<Complex64> = (0..self.grid.ny).map(|iy| self.coeffs[[0, iy]]).collect();
        let mean = Profile1D::from_coeffs(self.grid.l2, iy_all);
        let mut fluct = self.clone();
        for iy in 0..self.grid.ny {
            fluct.coeffs[[0, iy]] = Complex64::default();
        }
        (mean, fluct)
    }

    /// Rebuild a field from its kernel and fluctuation parts.
    pub fn recompose(mean: &Profile1D, fluct: &SpectralField2D) -> Result<SpectralField2D> {
        if mean.ny() != fluct.grid.ny {
            return Err(KseError::GridMismatch);
        }
        let mut out = fluct.clone();
        for iy in 0..out.grid.ny {
            out.coeffs[[0, iy]] += mean.coeffs()[iy];
        }
        Ok(out)
    }

    /// `L1*L2 * sum w(kappa, eta) |c|^2` with deterministic ordered accumulation.
    pub fn weighted_energy(&self, w: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for ((ix, iy), c) in self.coeffs.indexed_iter() {
            let kappa = self.grid.kappa(self.grid.k_of_ix(ix));
            let eta = self.grid.eta(self.grid.j_of_iy(iy));
            acc += w(kappa, eta) * c.norm_sqr();
        }
        self.grid.l1 * self.grid.l2 * acc
    }

    /// Physical-space L2 norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_energy(|_, _| 1.0).sqrt()
    }

    /// `int |grad f|^2` via Parseval.
    pub fn grad_sq_integral(&self) -> f64 {
        self.weighted_energy(|kappa, eta| kappa * kappa + eta * eta)
    }

    /// `||Delta f||^2_{L2}` via Parseval.
    pub fn laplacian_sq_integral(&self) -> f64 {
        self.weighted_energy(|kappa, eta| {
            let q2 = kappa * kappa + eta * eta;
            q2 * q2
        })
    }

    /// Domain mean (the `(0,0)` coefficient).
    pub fn mean(&self) -> f64 {
        self.coeffs[[0, 0]].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Elementwise linear combination `self + s * other`.
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += s * *b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
    }
}
