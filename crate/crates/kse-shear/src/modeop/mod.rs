//! The mode-localized operator `H_{nu,k} = nu Delta_k^2 + i kappa u(y)`
//! on truncated y-Fourier space, with `Delta_k = -kappa^2 + d^2/dy^2`,
//! and the quantities built on it: the pseudospectral bound
//! `Psi(H) = inf { ||(H - i lambda) g|| : lambda real, ||g|| = 1 }`,
//! semigroup norms `||exp(-t H)||`, threshold-crossing decay rates, and
//! log-log scaling fits.
//!
//! Wavenumber dictionary: the operator is parameterized by the physical
//! horizontal wavenumber `kappa = 2 pi k / L1`, where `k` is the integer
//! mode index of the solver grid. A unit-period torus therefore has
//! `kappa = k` and the two conventions coincide.

use crate::error::{KseError, Result};
use crate::linalg::{
    expm, largest_singular_value, smallest_singular_value, BandedLu, CMat, DenseLu, Factorized,
};
use crate::shear::ShearProfile;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Which dissipation symbol multiplies `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatorVariant {
    /// `nu Delta_k^2 + i kappa u`: diagonal `nu (kappa^2 + eta_j^2)^2`.
    Full,
    /// `nu d_y^4 + i kappa u`: diagonal `nu eta_j^4`.
    Hypoelliptic,
}

impl OperatorVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorVariant::Full => "full",
            OperatorVariant::Hypoelliptic => "hypoelliptic",
        }
    }
}

impl std::str::FromStr for OperatorVariant {
    type Err = KseError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(OperatorVariant::Full),
            "hypoelliptic" => Ok(OperatorVariant::Hypoelliptic),
            other => Err(KseError::InvalidInput(format!(
                "unknown operator variant `{other}`"
            ))),
        }
    }
}

/// Dense assembly of `H_{nu,k}` truncated to y-modes `|j| <= J`.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    nu: f64,
    kappa: f64,
    variant: OperatorVariant,
    j_trunc: usize,
    l2: f64,
    profile_label: String,
    u_min: f64,
    u_max: f64,
    /// Half-bandwidth of the shear convolution matrix (0 for constants).
    bandwidth: usize,
    matrix: CMat,
}

/// Tolerance below which a Fourier coefficient of `u` counts as absent,
/// relative to the largest one.
const BAND_TOL: f64 = 1e-13;

/// Use banded factorizations when the convolution bandwidth is this small.
const BANDED_LIMIT: usize = 48;

/// Certification target for the inverse-iteration singular values.
const SV_TOL: f64 = 1e-13;
const SV_MAXIT: usize = 600;

impl ModeOperator {
    /// Assemble the operator. The profile must be spectrally resolved at
    /// the truncation: coefficients of `u` beyond `J` must be negligible.
    pub fn assemble(
        nu: f64,
        kappa: f64,
        profile: &ShearProfile,
        j_trunc: usize,
        variant: OperatorVariant,
    ) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(KseError::InvalidInput(format!("nu must be positive, got {nu}")));
        }
        if kappa == 0.0 {
            return Err(KseError::InvalidInput(
                "kappa must be nonzero (the k = 0 column has no advection)".into(),
            ));
        }
        let samples = profile.samples();
        let required = samples.resolved_truncation(1e-12);
        match required {
            Some(j) if j <= j_trunc => {}
            Some(j) => {
                return Err(KseError::UnresolvedProfile(format!(
                    "profile `{}` needs J >= {j}, got {j_trunc}",
                    profile.label()
                )))
            }
            None => {
                return Err(KseError::UnresolvedProfile(format!(
                    "profile `{}` is not resolved on its own grid",
                    profile.label()
                )))
            }
        }
        let l2 = profile.l2_period();
        let n = 2 * j_trunc + 1;
        let peak = (0..samples.ny())
            .map(|iy| samples.coeffs()[iy].norm())
            .fold(0.0f64, f64::max);
        let uhat = |d: i64| -> Complex64 {
            if d.unsigned_abs() as usize > samples.ny() / 2 {
                Complex64::default()
            } else {
                samples.coeff(d)
            }
        };
        let mut bandwidth = 0usize;
        for d in 1..=(2 * j_trunc as i64) {
            if uhat(d).norm() > BAND_TOL * peak || uhat(-d).norm() > BAND_TOL * peak {
                bandwidth = d as usize;
            }
        }
        let eta = |j: i64| 2.0 * PI * j as f64 / l2;
        let diag = |j: i64| -> f64 {
            match variant {
                OperatorVariant::Full => {
                    let q2 = kappa * kappa + eta(j) * eta(j);
                    nu * q2 * q2
                }
                OperatorVariant::Hypoelliptic => nu * eta(j).powi(4),
            }
        };
        let jt = j_trunc as i64;
        let matrix = CMat::from_fn(n, |r, c| {
            let j = r as i64 - jt;
            let l = c as i64 - jt;
            let mut v = Complex64::new(0.0, kappa) * uhat(j - l);
            if r == c {
                v += diag(j);
            }
            v
        });
        let (u_min, u_max) = profile.min_max();
        Ok(Self {
            nu,
            kappa,
            variant,
            j_trunc,
            l2,
            profile_label: profile.label().to_string(),
            u_min,
            u_max,
            bandwidth,
            matrix,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn j_trunc(&self) -> usize {
        self.j_trunc
    }
    pub fn l2_period(&self) -> f64 {
        self.l2
    }
    pub fn variant(&self) -> OperatorVariant {
        self.variant
    }
    pub fn profile_label(&self) -> &str {
        &self.profile_label
    }
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
    pub fn dimension(&self) -> usize {
        self.matrix.n()
    }

    /// Trivial upper bound on Psi from the constant-in-y trial mode:
    /// `Psi <= nu kappa^4 + |kappa| osc(u) / 2`.
    pub fn psi_upper_bound(&self) -> f64 {
        let osc = self.u_max - self.u_min;
        let base = match self.variant {
            OperatorVariant::Full => self.nu * self.kappa.powi(4),
            OperatorVariant::Hypoelliptic => 0.0,
        };
        base + 0.5 * self.kappa.abs() * osc
    }

    fn factor_shifted(&self, lambda: f64) -> Factorized {
        let n = self.matrix.n();
        if self.bandwidth <= BANDED_LIMIT {
            let b = self.bandwidth;
            let shift = Complex64::new(0.0, -lambda);
            Factorized::Banded(BandedLu::factor(n, b, b, |i, j| {
                let mut v = self.matrix[(i, j)];
                if i == j {
                    v += shift;
                }
                v
            }))
        } else {
            Factorized::Dense(DenseLu::factor(&self.matrix.shifted_imag(lambda)))
        }
    }

    /// Smallest singular value of `H - i lambda` at this truncation.
    pub fn resolvent_min_sv(&self, lambda: f64) -> f64 {
        let fact = self.factor_shifted(lambda);
        smallest_singular_value(&fact, self.matrix.n(), SV_TOL, SV_MAXIT).value
    }

    /// Minimize `sigma_min(H - i lambda)` over real `lambda`.
    ///
    /// Dense scan over the padded interval
    /// `[kappa min u - 2 nu kappa^4 - 1, kappa max u + 2 nu kappa^4 + 1]`
    /// followed by golden-section refinement around every grid-local
    /// minimum; the map is continuous (1-Lipschitz) but not assumed
    /// unimodal. Outside the padded window the distance to the numerical
    /// range grows linearly, so the scan is self-certifying.
    pub fn psi(&self, search_tol: f64) -> Result<PsiResult> {
        if !(search_tol > 0.0) {
            return Err(KseError::InvalidInput("searchTol must be positive".into()));
        }
        let pad = 2.0 * self.nu * self.kappa.powi(4) + 1.0;
        let (a, b) = (
            (self.kappa * self.u_min).min(self.kappa * self.u_max) - pad,
            (self.kappa * self.u_min).max(self.kappa * self.u_max) + pad,
        );
        let npts = 512usize;
        let lambdas: Vec<f64> = (0..npts)
            .map(|i| a + (b - a) * i as f64 / (npts - 1) as f64)
            .collect();
        use rayon::prelude::*;
        let sigmas: Vec<f64> = lambdas
            .par_iter()
            .map(|&l| self.resolvent_min_sv(l))
            .collect();
        let mut evaluations = npts;
        let mut best = (sigmas[0], lambdas[0]);
        for i in 0..npts {
            if sigmas[i] < best.0 {
                best = (sigmas[i], lambdas[i]);
            }
        }
        // Refine every interior grid-local minimum (and the two ends).
        let mut brackets: Vec<(f64, f64)> = Vec::new();
        for i in 0..npts {
            let is_min = (i == 0 || sigmas[i] <= sigmas[i - 1])
                && (i + 1 == npts || sigmas[i] <= sigmas[i + 1]);
            if is_min {
                let lo = if i == 0 { lambdas[0] } else { lambdas[i - 1] };
                let hi = if i + 1 == npts {
                    lambdas[npts - 1]
                } else {
                    lambdas[i + 1]
                };
                brackets.push((lo, hi));
            }
        }
        let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
        let refined: Vec<(f64, f64, usize)> = brackets
            .par_iter()
            .map(|&(mut lo, mut hi)| {
                let mut evals = 0usize;
                let mut x1 = hi - inv_phi * (hi - lo);
                let mut x2 = lo + inv_phi * (hi - lo);
                let mut f1 = self.resolvent_min_sv(x1);
                let mut f2 = self.resolvent_min_sv(x2);
                evals += 2;
                while hi - lo > search_tol && evals < 200 {
                    if f1 <= f2 {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - inv_phi * (hi - lo);
                        f1 = self.resolvent_min_sv(x1);
                    } else {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + inv_phi * (hi - lo);
                        f2 = self.resolvent_min_sv(x2);
                    }
                    evals += 1;
                }
                if f1 <= f2 {
                    (f1, x1, evals)
                } else {
                    (f2, x2, evals)
                }
            })
            .collect();
        for (f, x, e) in refined {
            evaluations += e;
            if f < best.0 {
                best = (f, x);
            }
        }
        Ok(PsiResult {
            psi: best.0,
            argmin_lambda: best.1,
            evaluations,
        })
    }

    /// Operator 2-norm of `exp(-t H)` by scaling-and-squaring followed by
    /// a certified largest singular value. Exactly 1 at `t = 0`.
    pub fn semigroup_norm(&self, t: f64) -> Result<SemigroupNorm> {
        if !(t >= 0.0) {
            return Err(KseError::InvalidInput(format!("t must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(SemigroupNorm {
                norm: 1.0,
                underflow: false,
            });
        }
        let mut scaled = self.matrix.clone();
        scaled.scale(Complex64::new(-t, 0.0));
        let e = expm(&scaled);
        let est = largest_singular_value(&e, 1e-11, SV_MAXIT);
        if !est.value.is_finite() || est.value < 1e-290 {
            return Ok(SemigroupNorm {
                norm: 0.0,
                underflow: true,
            });
        }
        Ok(SemigroupNorm {
            norm: est.value,
            underflow: false,
        })
    }

    /// Decay rate from the first time the semigroup norm crosses a
    /// threshold: `-log(threshold) / t*`. The norm of a contraction
    /// semigroup is nonincreasing in `t`, so bracketing plus bisection is
    /// exact up to the time tolerance.
    pub fn measured_decay_rate(&self, threshold: f64) -> Result<DecayRate> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(KseError::InvalidInput(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        const T_CAP: f64 = 1e8;
        let norm_at = |t: f64| -> Result<f64> { Ok(self.semigroup_norm(t)?.norm) };
        let mut t_hi = 1.0;
        let mut n_hi = norm_at(t_hi)?;
        while n_hi > threshold {
            t_hi *= 2.0;
            if t_hi > T_CAP {
                return Err(KseError::InvalidInput(format!(
                    "semigroup norm never reached {threshold} within t <= {T_CAP} \
                     (kappa ~ 0 degeneracy?)"
                )));
            }
            n_hi = norm_at(t_hi)?;
        }
        let mut t_lo = t_hi;
        loop {
            t_lo *= 0.5;
            if t_lo < 1e-12 {
                break;
            }
            if norm_at(t_lo)? > threshold {
                break;
            }
        }
        for _ in 0..25 {
            let mid = 0.5 * (t_lo + t_hi);
            if norm_at(mid)? > threshold {
                t_lo = mid;
            } else {
                t_hi = mid;
            }
        }
        let t_star = 0.5 * (t_lo + t_hi);
        Ok(DecayRate {
            rate: -threshold.ln() / t_star,
            t_star,
            threshold,
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PsiResult {
    pub psi: f64,
    pub argmin_lambda: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SemigroupNorm {
    pub norm: f64,
    pub underflow: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayRate {
    pub rate: f64,
    pub t_star: f64,
    pub threshold: f64,
}

/// One row of a decay sweep: everything needed for scaling fits and the
/// Gearhart-Pruss audit.
#[derive(Debug, Clone, Serialize)]
pub struct DecayMeasurement {
    pub variant: String,
    pub profile: String,
    pub m_eff: usize,
    pub nu: f64,
    pub kappa: f64,
    pub j_trunc: usize,
    pub psi: f64,
    pub argmin_lambda: f64,
    pub rate_threshold: f64,
    pub measured_rate: f64,
    /// min over audited times of `exp(-t psi + pi/2) + tol - ||exp(-tH)||`.
    pub gp_margin: f64,
    /// Set only when doubling J moved psi by less than 1e-6 relative.
    pub j_converged: bool,
    /// Times at which the semigroup norm was audited.
    pub gp_times: Vec<f64>,
    pub search_tol: f64,
}

/// Result of a log-log scaling fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub max_rel_residual: f64,
    pub points: usize,
}

/// Which quantity to fit and which variable is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitQuantity {
    Psi,
    MeasuredRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptVariable {
    Nu,
    Kappa,
}

/// Least-squares line fit on log-log data: `y ~ prefactor * x^exponent`.
pub fn fit_scaling(
    measurements: &[DecayMeasurement],
    quantity: FitQuantity,
    swept: SweptVariable,
) -> Result<ScalingFit> {
    let points: Vec<(f64, f64)> = measurements
        .iter()
        .map(|m| {
            let x = match swept {
                SweptVariable::Nu => m.nu,
                SweptVariable::Kappa => m.kappa.abs(),
            };
            let y = match quantity {
                FitQuantity::Psi => m.psi,
                FitQuantity::MeasuredRate => m.measured_rate,
            };
            (x, y)
        })
        .collect();
    fit_power_law(&points)
}

/// `y ~ prefactor * x^exponent` by least squares in log space.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(KseError::FitRefused(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    let mut xmin = f64::INFINITY;
    let mut xmax = 0.0f64;
    for &(x, y) in points {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(KseError::FitRefused(format!(
                "nonpositive datum ({x}, {y}) in log-log fit"
            )));
        }
        xmin = xmin.min(x);
        xmax = xmax.max(x);
    }
    if xmax / xmin < 99.99 {
        return Err(KseError::FitRefused(format!(
            "swept variable spans {:.2} decades, need at least 2",
            (xmax / xmin).log10()
        )));
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    let exponent = (n * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / n;
    let prefactor = intercept.exp();
    let mut max_rel_residual = 0.0f64;
    for &(x, y) in points {
        let fit = prefactor * x.powf(exponent);
        max_rel_residual = max_rel_residual.max((y - fit).abs() / y.abs());
    }
    Ok(ScalingFit {
        exponent,
        prefactor,
        max_rel_residual,
        points: points.len(),
    })
}
