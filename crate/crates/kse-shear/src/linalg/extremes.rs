//! Extreme singular values via Lanczos on a Hermitian operator with
//! residual certificates.
//!
//! Both routines run Lanczos (full reorthogonalization) on `A^H A` or its
//! inverse through LU solves. For a Hermitian operator the Ritz residual
//! `beta_k |s_k|` bounds the eigenvalue error, so the returned
//! `residual_rel` is an honest accuracy certificate rather than a
//! heuristic iteration count; a final explicit residual is evaluated on
//! the converged Ritz vector.

use super::{vec_dot, vec_norm, CMat, Factorized};
use crate::rng::SplitMix64;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct SvEstimate {
    pub value: f64,
    /// Certified relative accuracy of `value` (eigenvalue residual over
    /// the Rayleigh value, halved for the square root).
    pub residual_rel: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn random_unit(n: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.next_symmetric(), rng.next_symmetric()))
        .collect();
    let s = 1.0 / vec_norm(&v);
    for x in &mut v {
        *x *= s;
    }
    v
}

/// Largest eigenvalue of the symmetric tridiagonal (alpha, beta) with the
/// last component of its eigenvector, via Sturm bisection plus tridiagonal
/// inverse iteration.
fn tridiag_top(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], 1.0);
    }
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = beta.get(i.wrapping_sub(1)).copied().unwrap_or(0.0).abs()
            + beta.get(i).copied().unwrap_or(0.0).abs();
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // Count of eigenvalues below x (Sturm sequence on the shifted LDL^T).
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut d = alpha[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for i in 1..k {
            let b2 = beta[i - 1] * beta[i - 1];
            let dd = if d.abs() < 1e-300 { 1e-300 } else { d };
            d = alpha[i] - x - b2 / dd;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut a = lo;
    let mut b = hi + 1e-12 * hi.abs().max(1.0);
    for _ in 0..120 {
        let mid = 0.5 * (a + b);
        if count_below(mid) >= k {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= 1e-15 * b.abs().max(1e-300) {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    // Inverse iteration on (T - theta I) for the eigenvector's last entry.
    let shift = theta * (1.0 + 1e-12) + 1e-300;
    let mut s = vec![1.0f64; k];
    for _ in 0..2 {
        // Thomas solve of (T - shift I) x = s with regularized pivots.
        let mut c = vec![0.0f64; k];
        let mut x = s.clone();
        let mut m = alpha[0] - shift;
        if m.abs() < 1e-280 {
            m = 1e-280;
        }
        c[0] = beta.first().copied().unwrap_or(0.0) / m;
        x[0] /= m;
        for i in 1..k {
            let bi = beta[i - 1];
            let mut denom = alpha[i] - shift - bi * c[i - 1];
            if denom.abs() < 1e-280 {
                denom = 1e-280;
            }
            if i < k - 1 {
                c[i] = beta[i] / denom;
            }
            x[i] = (x[i] - bi * x[i - 1]) / denom;
        }
        for i in (0..k - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        for v in &mut x {
            *v /= norm;
        }
        s = x;
    }
    (theta, s[k - 1].abs())
}

/// Top eigenpair of a Hermitian PSD operator by Lanczos.
/// Returns (theta, certified absolute residual, op applications, converged).
fn hermitian_top(
    n: usize,
    mut op: impl FnMut(&[Complex64]) -> Vec<Complex64>,
    tol: f64,
    max_steps: usize,
) -> (f64, f64, usize, bool) {
    let mut rng = SplitMix64::keyed(0x5eed_cafe, n as u64);
    let mut basis: Vec<Vec<Complex64>> = vec![random_unit(n, &mut rng)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let cap = max_steps.min(n);
    let mut theta = 0.0f64;
    let mut resid = f64::INFINITY;
    for step in 0..cap {
        let v = basis.last().unwrap().clone();
        let mut w = op(&v);
        if !w.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return (f64::INFINITY, f64::INFINITY, step + 1, false);
        }
        let alpha = vec_dot(&v, &w).re;
        alphas.push(alpha);
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for b in &basis {
                let proj = vec_dot(b, &w);
                for (x, y) in w.iter_mut().zip(b.iter()) {
                    *x -= proj * y;
                }
            }
        }
        let beta = vec_norm(&w);
        let (th, last) = tridiag_top(&alphas, &betas);
        theta = th;
        resid = beta * last;
        if theta <= 1e-300 {
            return (0.0, resid, step + 1, true);
        }
        if resid <= 0.5 * tol * theta || beta <= 1e-14 * theta.abs().sqrt().max(1e-150) {
            // Certify with an explicit residual on the Ritz vector.
            let (theta_c, resid_c) = explicit_residual(&basis, &alphas, &betas, &mut op);
            return (theta_c, resid_c, step + 2, resid_c <= tol * theta_c);
        }
        betas.push(beta);
        let mut next = w;
        let s = 1.0 / beta.max(1e-300);
        for x in &mut next {
            *x *= s;
        }
        basis.push(next);
    }
    let (theta_c, resid_c) = explicit_residual(&basis, &alphas, &betas, &mut op);
    if theta_c.is_finite() && theta_c > 0.0 {
        (theta_c, resid_c, cap + 1, resid_c <= tol * theta_c)
    } else {
        (theta, resid, cap, false)
    }
}

/// Assemble the top Ritz vector and measure `||B u - theta u||` directly.
fn explicit_residual(
    basis: &[Vec<Complex64>],
    alphas: &[f64],
    betas: &[f64],
    op: &mut impl FnMut(&[Complex64]) -> Vec<Complex64>,
) -> (f64, f64) {
    let k = alphas.len();
    let n = basis[0].len();
    // Eigenvector of the tridiagonal for its top eigenvalue.
    let (theta, _) = tridiag_top(alphas, betas);
    // Inverse iteration for the full tridiagonal eigenvector.
    let mut s = vec![1.0f64; k];
    {
        let shift = theta * (1.0 + 1e-12) + 1e-300;
        for _ in 0..3 {
            let mut c = vec![0.0f64; k];
            let mut x = s.clone();
            let mut m = alphas[0] - shift;
            if m.abs() < 1e-280 {
                m = 1e-280;
            }
            if k > 1 {
                c[0] = betas[0] / m;
            }
            x[0] /= m;
            for i in 1..k {
                let bi = betas[i - 1];
                let mut denom = alphas[i] - shift - bi * c[i - 1];
                if denom.abs() < 1e-280 {
                    denom = 1e-280;
                }
                if i < k - 1 {
                    c[i] = betas[i] / denom;
                }
                x[i] = (x[i] - bi * x[i - 1]) / denom;
            }
            for i in (0..k.saturating_sub(1)).rev() {
                x[i] -= c[i] * x[i + 1];
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            for v in &mut x {
                *v /= norm;
            }
            s = x;
        }
    }
    let mut u = vec![Complex64::default(); n];
    for (i, b) in basis.iter().enumerate().take(k) {
        let si = s[i];
        for (x, y) in u.iter_mut().zip(b.iter()) {
            *x += si * y;
        }
    }
    let un = vec_norm(&u);
    if un < 1e-300 {
        return (theta, f64::INFINITY);
    }
    for x in &mut u {
        *x /= un;
    }
    let bu = op(&u);
    let theta_r = vec_dot(&u, &bu).re;
    let mut rvec = bu;
    for (x, y) in rvec.iter_mut().zip(u.iter()) {
        *x -= Complex64::new(theta_r, 0.0) * y;
    }
    (theta_r, vec_norm(&rvec))
}

/// Largest singular value of the matrix, certified via `A^H A`.
pub fn largest_singular_value(a: &CMat, tol: f64, max_steps: usize) -> SvEstimate {
    let n = a.n();
    let (theta, resid, its, conv) = hermitian_top(
        n,
        |v| {
            let av = a.matvec(v);
            a.matvec_adjoint(&av)
        },
        tol,
        max_steps,
    );
    if !theta.is_finite() {
        return SvEstimate {
            value: f64::NAN,
            residual_rel: f64::INFINITY,
            iterations: its,
            converged: false,
        };
    }
    if theta <= 0.0 {
        return SvEstimate {
            value: 0.0,
            residual_rel: 0.0,
            iterations: its,
            converged: conv,
        };
    }
    SvEstimate {
        value: theta.sqrt(),
        residual_rel: 0.5 * resid / theta,
        iterations: its,
        converged: conv,
    }
}

/// Smallest singular value via Lanczos on `(A^H A)^{-1}`, given an LU
/// factorization of `A`.
pub fn smallest_singular_value(fact: &Factorized, n: usize, tol: f64, max_steps: usize) -> SvEstimate {
    if fact.is_singular() {
        return SvEstimate {
            value: 0.0,
            residual_rel: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let (theta, resid, its, conv) = hermitian_top(
        n,
        |v| {
            // (A^H A)^{-1} v = A^{-1} A^{-H} v.
            let mut w = v.to_vec();
            fact.solve_adjoint(&mut w);
            fact.solve(&mut w);
            w
        },
        tol,
        max_steps,
    );
    if !theta.is_finite() || theta <= 0.0 {
        // Solves overflowed: numerically singular.
        return SvEstimate {
            value: 0.0,
            residual_rel: 0.0,
            iterations: its,
            converged: true,
        };
    }
    SvEstimate {
        value: 1.0 / theta.sqrt(),
        residual_rel: 0.5 * resid / theta,
        iterations: its,
        converged: conv,
    }
}
