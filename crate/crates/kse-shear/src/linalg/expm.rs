//! Matrix exponential by scaling and squaring with a diagonal Pade core
//! (Higham 2005 degree selection). Chosen over eigendecomposition because
//! the mode operators are non-normal.

use super::{CMat, DenseLu};
use num_complex::Complex64;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

fn pade_coeffs(m: usize) -> Vec<f64> {
    // b_i for the [m/m] approximant, b_m ... b_0 ascending in power index i.
    match m {
        3 => vec![120.0, 60.0, 12.0, 1.0],
        5 => vec![30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => vec![
            17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
        ],
        9 => vec![
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => vec![
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!(),
    }
}

/// Solve `(V - U) X = (V + U)` for the Pade ratio.
fn pade_ratio(u: CMat, v: CMat) -> CMat {
    let n = u.n();
    let mut denom = v.clone();
    denom.add_assign_scaled(&u, Complex64::new(-1.0, 0.0));
    let mut numer = v;
    numer.add_assign_scaled(&u, Complex64::new(1.0, 0.0));
    let lu = DenseLu::factor(&denom);
    let mut out = CMat::zeros(n);
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = numer[(i, j)];
        }
        lu.solve(&mut col);
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

fn pade_low_degree(a: &CMat, m: usize) -> CMat {
    let n = a.n();
    let b = pade_coeffs(m);
    let a2 = a.matmul(a);
    // Even/odd split: U = A * (sum b_{2i+1} A^{2i}), V = sum b_{2i} A^{2i}.
    let mut even = CMat::identity(n);
    even.scale(Complex64::new(b[0], 0.0));
    let mut odd = CMat::identity(n);
    odd.scale(Complex64::new(b[1], 0.0));
    let mut pow = CMat::identity(n);
    for i in 1..=(m / 2) {
        pow = pow.matmul(&a2);
        even.add_assign_scaled(&pow, Complex64::new(b[2 * i], 0.0));
        if 2 * i + 1 <= m {
            odd.add_assign_scaled(&pow, Complex64::new(b[2 * i + 1], 0.0));
        }
    }
    let u = a.matmul(&odd);
    pade_ratio(u, even)
}

fn pade_13(a: &CMat) -> CMat {
    let n = a.n();
    let b = pade_coeffs(13);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let mut w1 = a6.clone();
    w1.scale(Complex64::new(b[13], 0.0));
    w1.add_assign_scaled(&a4, Complex64::new(b[11], 0.0));
    w1.add_assign_scaled(&a2, Complex64::new(b[9], 0.0));
    let mut w2 = a6.clone();
    w2.scale(Complex64::new(b[7], 0.0));
    w2.add_assign_scaled(&a4, Complex64::new(b[5], 0.0));
    w2.add_assign_scaled(&a2, Complex64::new(b[3], 0.0));
    let mut ident = CMat::identity(n);
    ident.scale(Complex64::new(b[1], 0.0));
    w2.add_assign_scaled(&ident, Complex64::new(1.0, 0.0));
    let mut inner = a6.matmul(&w1);
    inner.add_assign_scaled(&w2, Complex64::new(1.0, 0.0));
    let u = a.matmul(&inner);

    let mut z1 = a6.clone();
    z1.scale(Complex64::new(b[12], 0.0));
    z1.add_assign_scaled(&a4, Complex64::new(b[10], 0.0));
    z1.add_assign_scaled(&a2, Complex64::new(b[8], 0.0));
    let mut v = a6.matmul(&z1);
    v.add_assign_scaled(&a6, Complex64::new(b[6], 0.0));
    v.add_assign_scaled(&a4, Complex64::new(b[4], 0.0));
    v.add_assign_scaled(&a2, Complex64::new(b[2], 0.0));
    let mut ident = CMat::identity(n);
    ident.scale(Complex64::new(b[0], 0.0));
    v.add_assign_scaled(&ident, Complex64::new(1.0, 0.0));
    pade_ratio(u, v)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &CMat) -> CMat {
    let norm = a.norm_1();
    if !norm.is_finite() {
        let mut out = CMat::zeros(a.n());
        for v in &mut out.data {
            *v = Complex64::new(f64::NAN, f64::NAN);
        }
        return out;
    }
    if norm <= THETA_3 {
        return pade_low_degree(a, 3);
    }
    if norm <= THETA_5 {
        return pade_low_degree(a, 5);
    }
    if norm <= THETA_7 {
        return pade_low_degree(a, 7);
    }
    if norm <= THETA_9 {
        return pade_low_degree(a, 9);
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let mut scaled = a.clone();
    scaled.scale(Complex64::new(0.5f64.powi(s as i32), 0.0));
    let mut x = pade_13(&scaled);
    for _ in 0..s {
        x = x.matmul(&x);
    }
    x
}
