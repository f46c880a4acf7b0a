//! LU factorization with partial pivoting, dense and banded.
//!
//! Both variants expose `solve` (A x = b) and `solve_adjoint` (A^H x = b)
//! reusing the same factors; the banded form follows the LAPACK `gbtrf`
//! storage with `kl` extra fill rows for pivoting.

use super::CMat;
use num_complex::Complex64;

pub struct DenseLu {
    n: usize,
    /// L (unit diagonal, below) and U (on and above) packed together.
    lu: Vec<Complex64>,
    /// Row swapped with row `j` at step `j`.
    ipiv: Vec<usize>,
    singular: bool,
}

impl DenseLu {
    pub fn factor(a: &CMat) -> Self {
        let n = a.n();
        let mut lu = a.data().to_vec();
        let mut ipiv = vec![0usize; n];
        let mut singular = false;
        for j in 0..n {
            // Pivot search in column j.
            let mut piv = j;
            let mut best = lu[j * n + j].norm();
            for r in j + 1..n {
                let v = lu[r * n + j].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            ipiv[j] = piv;
            if piv != j {
                for c in 0..n {
                    lu.swap(j * n + c, piv * n + c);
                }
            }
            let d = lu[j * n + j];
            if d.norm() == 0.0 {
                singular = true;
                continue;
            }
            for r in j + 1..n {
                let f = lu[r * n + j] / d;
                lu[r * n + j] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for c in j + 1..n {
                    let t = f * lu[j * n + c];
                    lu[r * n + c] -= t;
                }
            }
        }
        Self {
            n,
            lu,
            ipiv,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Smallest |U_jj|, a cheap lower-bound proxy used to spot exact
    /// eigenvalue hits before running inverse iteration.
    pub fn min_pivot(&self) -> f64 {
        (0..self.n)
            .map(|j| self.lu[j * self.n + j].norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
        }
        // L y = P b (unit lower).
        for j in 0..n {
            let bj = b[j];
            if bj.re == 0.0 && bj.im == 0.0 {
                continue;
            }
            for r in j + 1..n {
                let t = self.lu[r * n + j] * bj;
                b[r] -= t;
            }
        }
        // U x = y.
        for j in (0..n).rev() {
            b[j] /= self.lu[j * n + j];
            let bj = b[j];
            for r in 0..j {
                let t = self.lu[r * n + j] * bj;
                b[r] -= t;
            }
        }
    }

    /// Solve `A^H x = b` from the factors of `A = P^T L U`.
    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let n = self.n;
        // U^H z = b (lower triangular with conjugated entries).
        for j in 0..n {
            let mut acc = b[j];
            for r in 0..j {
                acc -= self.lu[r * n + j].conj() * b[r];
            }
            b[j] = acc / self.lu[j * n + j].conj();
        }
        // L^H w = z (unit upper).
        for j in (0..n).rev() {
            let mut acc = b[j];
            for r in j + 1..n {
                acc -= self.lu[r * n + j].conj() * b[r];
            }
            b[j] = acc;
        }
        // x = P^T w: undo the swaps in reverse order.
        for j in (0..n).rev() {
            b.swap(j, self.ipiv[j]);
        }
    }
}

/// Banded LU with partial pivoting, LAPACK `gbtrf`-style storage:
/// `ab[r][j]` holds `A[i][j]` at `r = kl + ku + i - j`, with `kl` fill
/// rows on top for pivoting growth.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// `(2*kl + ku + 1) x n`, row r = band diagonal, column j = matrix column.
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
    singular: bool,
}

impl BandedLu {
    /// Factor a band matrix given through an entry accessor.
    pub fn factor(n: usize, kl: usize, ku: usize, entry: impl Fn(usize, usize) -> Complex64) -> Self {
        let rows = 2 * kl + ku + 1;
        let mut ab = vec![Complex64::default(); rows * n];
        let kuf = kl + ku; // effective upper bandwidth after fill-in
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[(kl + ku + i - j) * n + j] = entry(i, j);
            }
        }
        let mut ipiv = vec![0usize; n];
        let mut singular = false;
        let at = |ab: &Vec<Complex64>, i: usize, j: usize| ab[(kl + ku + i - j) * n + j];
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // Pivot among rows j..=j+km of column j.
            let mut piv = 0usize;
            let mut best = at(&ab, j, j).norm();
            for d in 1..=km {
                let v = at(&ab, j + d, j).norm();
                if v > best {
                    best = v;
                    piv = d;
                }
            }
            ipiv[j] = j + piv;
            let ju = (j + kuf).min(n - 1);
            if piv != 0 {
                // Swap logical rows j and j+piv over columns j..=ju.
                for jj in j..=ju {
                    let ra = (kl + ku + j - jj) * n + jj;
                    let rb = (kl + ku + j + piv - jj) * n + jj;
                    ab.swap(ra, rb);
                }
            }
            let d0 = ab[(kl + ku) * n + j];
            if d0.norm() == 0.0 {
                singular = true;
                continue;
            }
            for i in 1..=km {
                let idx = (kl + ku + i) * n + j;
                ab[idx] /= d0;
            }
            for jj in j + 1..=ju {
                let f = ab[(kl + ku + j - jj) * n + jj];
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                for i in 1..=km {
                    let m = ab[(kl + ku + i) * n + j];
                    let idx = (kl + ku + j + i - jj) * n + jj;
                    ab[idx] -= m * f;
                }
            }
        }
        Self {
            n,
            kl,
            ku,
            ab,
            ipiv,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.n)
            .map(|j| self.ab[(self.kl + self.ku) * self.n + j].norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn u_entry(&self, i: usize, j: usize) -> Complex64 {
        // Valid for j - (kl+ku) <= i <= j.
        self.ab[(self.kl + self.ku + i - j) * self.n + j]
    }

    fn l_entry(&self, i: usize, j: usize) -> Complex64 {
        // Valid for j < i <= j + kl.
        self.ab[(self.kl + self.ku + i - j) * self.n + j]
    }

    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.n;
        let kuf = self.kl + self.ku;
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
            let bj = b[j];
            if bj.re == 0.0 && bj.im == 0.0 {
                continue;
            }
            let km = self.kl.min(n - 1 - j);
            for i in 1..=km {
                let t = self.l_entry(j + i, j) * bj;
                b[j + i] -= t;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.u_entry(j, j);
            let bj = b[j];
            let lo = j.saturating_sub(kuf);
            for r in lo..j {
                let t = self.u_entry(r, j) * bj;
                b[r] -= t;
            }
        }
    }

    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        let n = self.n;
        let kuf = self.kl + self.ku;
        // U^H z = b.
        for j in 0..n {
            let mut acc = b[j];
            let lo = j.saturating_sub(kuf);
            for r in lo..j {
                acc -= self.u_entry(r, j).conj() * b[r];
            }
            b[j] = acc / self.u_entry(j, j).conj();
        }
        // The banded factorization interleaves swaps with multiplier
        // columns (A = P_0 M_0 ... P_{n-1} M_{n-1} U), so the adjoint solve
        // must interleave the conjugated multiplier steps with the swaps.
        for j in (0..n).rev() {
            let mut acc = b[j];
            let km = self.kl.min(n - 1 - j);
            for i in 1..=km {
                acc -= self.l_entry(j + i, j).conj() * b[j + i];
            }
            b[j] = acc;
            b.swap(j, self.ipiv[j]);
        }
    }
}

/// Either factorization behind one interface.
pub enum Factorized {
    Dense(DenseLu),
    Banded(BandedLu),
}

impl Factorized {
    pub fn solve(&self, b: &mut [Complex64]) {
        match self {
            Factorized::Dense(f) => f.solve(b),
            Factorized::Banded(f) => f.solve(b),
        }
    }

    pub fn solve_adjoint(&self, b: &mut [Complex64]) {
        match self {
            Factorized::Dense(f) => f.solve_adjoint(b),
            Factorized::Banded(f) => f.solve_adjoint(b),
        }
    }

    pub fn is_singular(&self) -> bool {
        match self {
            Factorized::Dense(f) => f.is_singular(),
            Factorized::Banded(f) => f.is_singular(),
        }
    }

    pub fn min_pivot(&self) -> f64 {
        match self {
            Factorized::Dense(f) => f.min_pivot(),
            Factorized::Banded(f) => f.min_pivot(),
        }
    }
}
