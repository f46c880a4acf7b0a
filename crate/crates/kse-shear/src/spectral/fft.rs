//! Thin wrapper over rustfft with cached plans.
//!
//! Plans are cached per transform length in a process-wide table. The
//! plan objects are immutable once built, so handing out `Arc` clones to
//! concurrent callers is safe; every call brings its own scratch buffer.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct PlanCache {
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn cache() -> &'static Mutex<PlanCache> {
    static CACHE: OnceLock<Mutex<PlanCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        Mutex::new(PlanCache {
            forward: HashMap::new(),
            inverse: HashMap::new(),
        })
    })
}

fn plan(len: usize, fwd: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = cache().lock().expect("fft plan cache poisoned");
    let map = if fwd {
        &mut guard.forward
    } else {
        &mut guard.inverse
    };
    map.entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if fwd {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Unnormalized forward DFT of each contiguous row of `data` (rows of length `len`).
pub fn fft_rows(data: &mut [Complex64], len: usize, fwd: bool) {
    debug_assert_eq!(data.len() % len, 0);
    let fft = plan(len, fwd);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(len) {
        fft.process_with_scratch(row, &mut scratch);
    }
}

/// In-place square-free transpose of an `nx x ny` row-major matrix into `out`.
pub fn transpose(src: &[Complex64], nx: usize, ny: usize, out: &mut [Complex64]) {
    debug_assert_eq!(src.len(), nx * ny);
    debug_assert_eq!(out.len(), nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            out[j * nx + i] = src[i * ny + j];
        }
    }
}

/// Unnormalized 2-D DFT over a row-major `nx x ny` buffer, both axes.
pub fn fft2(data: &mut Vec<Complex64>, nx: usize, ny: usize, fwd: bool) {
    fft_rows(data, ny, fwd);
    let mut tmp = vec![Complex64::default(); nx * ny];
    transpose(data, nx, ny, &mut tmp);
    fft_rows(&mut tmp, nx, fwd);
    transpose(&tmp, ny, nx, data);
}

/// Unnormalized 1-D DFT of a single buffer.
pub fn fft1(data: &mut [Complex64], fwd: bool) {
    let fft = plan(data.len(), fwd);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
}
