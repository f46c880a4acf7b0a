//! Shared oracles for the integration suites. Everything here is an
//! independent brute-force route: one-sided Jacobi for singular values,
//! an explicit RK4 matrix integrator for the semigroup, and mode-matched
//! field differences for grid-convergence checks.

#![allow(dead_code)]

use kse_shear::linalg::CMat;
use kse_shear::spectral::SpectralField2D;
use num_complex::Complex64;

/// All singular values by one-sided Jacobi (Hestenes) on the columns.
/// Relatively accurate for diagonally graded matrices, which the shifted
/// mode operators are; panics if the sweep fails to converge or the
/// Frobenius identity drifts, so a broken oracle cannot silently pass.
pub fn jacobi_singular_values(a: &CMat) -> Vec<f64> {
    let n = a.n();
    // Column-major copy.
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)]).collect())
        .collect();
    let frob0: f64 = cols
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm_sqr())
        .sum();
    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = 0usize;
        for p in 0..n {
            for q in p + 1..n {
                let (mut app, mut aqq) = (0.0f64, 0.0f64);
                let mut apq = Complex64::default();
                for i in 0..n {
                    app += cols[p][i].norm_sqr();
                    aqq += cols[q][i].norm_sqr();
                    apq += cols[p][i].conj() * cols[q][i];
                }
                if apq.norm() <= 1e-15 * (app * aqq).sqrt() || apq.norm() == 0.0 {
                    continue;
                }
                rotated += 1;
                // De-phase so the coupling is real, then a real rotation.
                let phase = apq / apq.norm();
                let g = apq.norm();
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let vp = cols[p][i];
                    let vq = cols[q][i];
                    // Column q is de-phased by conj(phase) first.
                    let vq = vq * phase.conj();
                    cols[p][i] = c * vp - s * vq;
                    cols[q][i] = (s * vp + c * vq) * phase;
                }
            }
        }
        if rotated == 0 {
            converged = true;
            break;
        }
    }
    assert!(converged, "jacobi SVD oracle failed to converge");
    let frob1: f64 = cols
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm_sqr())
        .sum();
    assert!(
        (frob0 - frob1).abs() <= 1e-10 * frob0,
        "jacobi oracle lost mass: {frob0} -> {frob1}"
    );
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sv
}

pub fn jacobi_min_singular_value(a: &CMat) -> f64 {
    jacobi_singular_values(a)[0]
}

/// `exp(-tA)` by classical RK4 on the matrix ODE `X' = -A X`, an
/// integrator-route oracle independent of the Pade scaling-and-squaring
/// path. Step size from the 1-norm stability bound.
pub fn expm_rk4_oracle(a: &CMat, t: f64) -> CMat {
    let n = a.n();
    assert!(n <= 64, "ODE oracle is for small truncations only");
    let norm = a.norm_1();
    let dt_stab = 1.0 / (norm.max(1e-12) * 2.0);
    let steps = (t / dt_stab).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut x = CMat::identity(n);
    let rhs = |m: &CMat| -> CMat {
        let mut out = a.matmul(m);
        out.scale(Complex64::new(-1.0, 0.0));
        out
    };
    for _ in 0..steps {
        let k1 = rhs(&x);
        let mut x2 = x.clone();
        x2.add_assign_scaled(&k1, Complex64::new(0.5 * dt, 0.0));
        let k2 = rhs(&x2);
        let mut x3 = x.clone();
        x3.add_assign_scaled(&k2, Complex64::new(0.5 * dt, 0.0));
        let k3 = rhs(&x3);
        let mut x4 = x.clone();
        x4.add_assign_scaled(&k3, Complex64::new(dt, 0.0));
        let k4 = rhs(&x4);
        x.add_assign_scaled(&k1, Complex64::new(dt / 6.0, 0.0));
        x.add_assign_scaled(&k2, Complex64::new(dt / 3.0, 0.0));
        x.add_assign_scaled(&k3, Complex64::new(dt / 3.0, 0.0));
        x.add_assign_scaled(&k4, Complex64::new(dt / 6.0, 0.0));
    }
    x
}

/// Operator 2-norm via the Jacobi oracle (largest singular value).
pub fn jacobi_operator_norm(a: &CMat) -> f64 {
    *jacobi_singular_values(a).last().unwrap()
}

/// L2 norm of the difference of two fields on nested grids (the finer
/// grid's extra modes count in full).
pub fn field_l2_difference(coarse: &SpectralField2D, fine: &SpectralField2D) -> f64 {
    let gc = coarse.grid();
    let gf = fine.grid();
    assert!(gf.nx() >= gc.nx() && gf.ny() >= gc.ny());
    assert!((gc.l1() - gf.l1()).abs() < 1e-12 && (gc.l2() - gf.l2()).abs() < 1e-12);
    let mut acc = 0.0f64;
    for ix in 0..gf.nx() {
        let k = gf.k_of_ix(ix);
        for iy in 0..gf.ny() {
            let j = gf.j_of_iy(iy);
            let cf = fine.coeffs()[[ix, iy]];
            let cc = if k >= -(gc.nx() as i64) / 2
                && k < gc.nx() as i64 / 2
                && j >= -(gc.ny() as i64) / 2
                && j < gc.ny() as i64 / 2
            {
                coarse.coeff(k, j)
            } else {
                Complex64::default()
            };
            acc += (cf - cc).norm_sqr();
        }
    }
    (gf.l1() * gf.l2() * acc).sqrt()
}

/// FNV-1a over bytes, hex-encoded; used to pin golden output files.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    format!("{h:016x}")
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            (lo.ln() + (hi.ln() - lo.ln()) * f).exp()
        })
        .collect()
}
