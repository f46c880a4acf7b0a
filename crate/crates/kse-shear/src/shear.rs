//! Shear velocity profiles `u(y)` and the numerical audit of the
//! lower-bound property that drives the pseudospectral estimates: for a
//! profile with critical points of order at most `m`, away from at most
//! `N` bad intervals of radius `delta` the profile stays `c1 (delta/L2)^m`
//! away from any level `lambda`.
//!
//! The audit is a falsification / estimation tool and is grid-accurate
//! only: levels and radii are quantified over finite grids, and sublevel
//! sets are resolved on a fine circular grid that refines itself when
//! component boundaries fall inside a single cell.

use crate::error::{KseError, Result};
use crate::spectral::Profile1D;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// A shear velocity profile with metadata.
#[derive(Debug, Clone)]
pub struct ShearProfile {
    samples: Profile1D,
    declared_order: usize,
    label: String,
}

/// Critical point of `u` with its detected order (smallest `q >= 2` such
/// that the q-th derivative does not vanish there).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub y: f64,
    pub order: usize,
}

impl ShearProfile {
    /// The prototypical family `u(y) = sin(2 pi y / L2)^m`.
    ///
    /// Its critical points have order at most `max(2, m)`: the extrema of
    /// the base sine stay quadratic for every `m`, while the zeros (for
    /// `m >= 2`) have exactly `m - 1` vanishing derivatives.
    pub fn sin_power(m: usize, l2: f64, ny: usize) -> Result<Self> {
        if m < 1 {
            return Err(KseError::InvalidInput("sin_power requires m >= 1".into()));
        }
        let w = 2.0 * PI / l2;
        let samples: Vec<f64> = (0..ny)
            .map(|i| (w * i as f64 * l2 / ny as f64).sin().powi(m as i32))
            .collect();
        Ok(Self {
            samples: Profile1D::from_samples(l2, &samples),
            declared_order: m.max(2),
            label: format!("sin^{m}"),
        })
    }

    /// Constant shear `u == c` (no critical points; the audit fails for it).
    pub fn constant(c: f64, l2: f64, ny: usize) -> Self {
        let samples = vec![c; ny];
        Self {
            samples: Profile1D::from_samples(l2, &samples),
            declared_order: 2,
            label: format!("const({c})"),
        }
    }

    pub fn zero(l2: f64, ny: usize) -> Self {
        let mut p = Self::constant(0.0, l2, ny);
        p.label = "zero".into();
        p
    }

    /// Wrap existing samples (assumed uniform over `[0, L2)`).
    pub fn from_samples(label: &str, l2: f64, samples: &[f64], declared_order: usize) -> Self {
        Self {
            samples: Profile1D::from_samples(l2, samples),
            declared_order,
            label: label.to_string(),
        }
    }

    /// Load `(y, u)` rows sampled uniformly over one period and
    /// spectrally interpolate onto an `ny`-point grid.
    pub fn from_csv_reader<R: std::io::Read>(
        reader: R,
        label: &str,
        ny: usize,
        declared_order: usize,
    ) -> Result<Self> {
        let mut rows: Vec<(f64, f64)> = Vec::new();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        for record in rdr.records() {
            let record = record.map_err(|e| KseError::InvalidInput(format!("csv: {e}")))?;
            if record.len() < 2 {
                return Err(KseError::InvalidInput("csv row needs (y, u)".into()));
            }
            let y: f64 = record[0]
                .trim()
                .parse()
                .map_err(|_| KseError::InvalidInput(format!("bad y value `{}`", &record[0])))?;
            let u: f64 = record[1]
                .trim()
                .parse()
                .map_err(|_| KseError::InvalidInput(format!("bad u value `{}`", &record[1])))?;
            rows.push((y, u));
        }
        if rows.len() < 4 {
            return Err(KseError::InvalidInput(
                "csv profile needs at least 4 samples".into(),
            ));
        }
        let n = rows.len();
        let dy = rows[1].0 - rows[0].0;
        if dy <= 0.0 {
            return Err(KseError::InvalidInput("y column must increase".into()));
        }
        for w in rows.windows(2) {
            if ((w[1].0 - w[0].0) - dy).abs() > 1e-9 * dy.max(1.0) {
                return Err(KseError::InvalidInput(
                    "csv profile must be uniformly sampled in y".into(),
                ));
            }
        }
        let l2 = dy * n as f64;
        let native = Profile1D::from_samples(l2, &rows.iter().map(|r| r.1).collect::<Vec<_>>());
        // Spectral interpolation onto the requested grid.
        let resampled: Vec<f64> = (0..ny)
            .map(|i| native.eval_at(i as f64 * l2 / ny as f64))
            .collect();
        Ok(Self {
            samples: Profile1D::from_samples(l2, &resampled),
            declared_order,
            label: label.to_string(),
        })
    }

    pub fn samples(&self) -> &Profile1D {
        &self.samples
    }

    pub fn l2_period(&self) -> f64 {
        self.samples.l2_period()
    }

    pub fn declared_order(&self) -> usize {
        self.declared_order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.samples.min_max()
    }

    pub fn max_abs(&self) -> f64 {
        let (lo, hi) = self.min_max();
        lo.abs().max(hi.abs())
    }

    /// Oscillation `max u - min u`.
    pub fn osc(&self) -> f64 {
        let (lo, hi) = self.min_max();
        hi - lo
    }

    /// Translate the profile by `shift` in y (exact in coefficient space).
    pub fn translated(&self, shift: f64) -> Self {
        let mut coeffs = self.samples.coeffs().to_vec();
        for (iy, c) in coeffs.iter_mut().enumerate() {
            let j = self.samples.j_of_iy(iy);
            *c *= num_complex::Complex64::new(0.0, -self.samples.eta(j) * shift).exp();
        }
        let mut p = Profile1D::from_coeffs(self.l2_period(), coeffs);
        p.enforce_hermitian();
        Self {
            samples: p,
            declared_order: self.declared_order,
            label: format!("{}+shift", self.label),
        }
    }

    /// Locate the critical points of `u` and their orders.
    ///
    /// Candidates are collected from sign changes of `u'` (odd-multiplicity
    /// zeros) and of `u''` filtered by `|u'| <= tol` (even-multiplicity
    /// zeros of `u'`, e.g. the flat zeros of `sin^3`), then polished by
    /// bisection. Orders come from spectral evaluation of higher
    /// derivatives at the located points.
    pub fn critical_points(&self, tol: f64) -> Result<Vec<CriticalPoint>> {
        let ny = self.samples.ny();
        let tail = self.samples.tail_fraction((ny / 3) as i64);
        if tail > tol {
            return Err(KseError::UnresolvedProfile(format!(
                "spectral tail fraction {tail:.3e} above tolerance {tol:.3e}"
            )));
        }
        let l2 = self.l2_period();
        let scale = self.max_abs().max(1e-12);
        let du = self.samples.derivative(1)?;
        let ddu = self.samples.derivative(2)?;
        let refined = (8 * ny).max(1024);
        let eval = |f: &Profile1D, y: f64| f.eval_at(y);
        let mut candidates: Vec<f64> = Vec::new();
        let grid: Vec<f64> = (0..refined).map(|i| i as f64 * l2 / refined as f64).collect();
        let bisect = |f: &Profile1D, mut a: f64, mut b: f64| -> f64 {
            let mut fa = eval(f, a);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = eval(f, mid);
                if (fa <= 0.0) == (fm <= 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
                if (b - a).abs() < 1e-14 * l2 {
                    break;
                }
            }
            0.5 * (a + b)
        };
        for i in 0..refined {
            let a = grid[i];
            let b = a + l2 / refined as f64;
            let fa = eval(&du, a);
            let fb = eval(&du, b);
            if fa == 0.0 {
                candidates.push(a);
            } else if (fa < 0.0) != (fb < 0.0) {
                candidates.push(bisect(&du, a, b));
            }
            let ga = eval(&ddu, a);
            let gb = eval(&ddu, b);
            if (ga < 0.0) != (gb < 0.0) {
                let y = bisect(&ddu, a, b);
                if eval(&du, y).abs() <= tol * scale {
                    candidates.push(y);
                }
            }
        }
        // Deduplicate on the circle. The dedup window is generous because a
        // multiplicity-p zero of u' is only locatable to ~eps^(1/p) by sign
        // changes; polishing below recovers machine precision.
        candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut points: Vec<f64> = Vec::new();
        for y in candidates {
            let y = y.rem_euclid(l2);
            let dup = points.iter().any(|p| {
                let d = (p - y).abs();
                d.min(l2 - d) < 1e-4 * l2
            });
            if !dup {
                points.push(y);
            }
        }
        let mut out = Vec::new();
        for y0 in points {
            let y = self.polish_critical_point(y0, l2);
            let mut order = None;
            for q in 2..=12u32 {
                if self.samples.eval_derivative_at(y, q).abs() > tol * scale {
                    order = Some(q as usize);
                    break;
                }
            }
            if let Some(order) = order {
                let mut y = y.rem_euclid(l2);
                if l2 - y < 1e-9 * l2 {
                    y = 0.0;
                }
                out.push(CriticalPoint { y, order });
            }
        }
        out.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap());
        Ok(out)
    }

    /// Sharpen a rough critical-point location. A multiplicity-p zero of
    /// u' makes u^(p+1) the first derivative without a zero nearby; u^(p)
    /// then has a simple zero there and bisecting it recovers the position
    /// to machine precision.
    fn polish_critical_point(&self, y0: f64, l2: f64) -> f64 {
        let w = 2e-4 * l2;
        let samples = 64usize;
        for s in 2..=12u32 {
            let mut min_abs = f64::INFINITY;
            let mut max_abs = 0.0f64;
            for i in 0..=samples {
                let y = y0 - w + 2.0 * w * i as f64 / samples as f64;
                let v = self.samples.eval_derivative_at(y, s).abs();
                min_abs = min_abs.min(v);
                max_abs = max_abs.max(v);
            }
            if max_abs > 0.0 && min_abs > 1e-2 * max_abs {
                // u^(s) has no zero in the window: bisect the simple zero
                // of u^(s-1).
                let (mut a, mut b) = (y0 - w, y0 + w);
                let mut fa = self.samples.eval_derivative_at(a, s - 1);
                let fb = self.samples.eval_derivative_at(b, s - 1);
                if (fa < 0.0) == (fb < 0.0) {
                    return y0;
                }
                for _ in 0..90 {
                    let mid = 0.5 * (a + b);
                    let fm = self.samples.eval_derivative_at(mid, s - 1);
                    if (fa <= 0.0) == (fm <= 0.0) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                return 0.5 * (a + b);
            }
        }
        y0
    }
}

/// Options controlling the Assumption audit resolution.
#[derive(Debug, Clone, Serialize)]
pub struct AuditOptions {
    /// Fine-grid size for sublevel-set resolution (refined x2 on demand).
    pub fine_grid: usize,
    /// Maximum number of x2 refinements before giving up.
    pub max_refinements: usize,
    /// Pass requires `min_delta c1(delta) >= stability_fraction * max_delta c1(delta)`:
    /// with the correct exponent the per-delta constants stay comparable,
    /// with a too-small exponent they collapse as delta -> 0.
    pub stability_fraction: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            fine_grid: 4096,
            max_refinements: 4,
            stability_fraction: 0.1,
        }
    }
}

/// Centers found for one `(lambda, delta)` cell.
#[derive(Debug, Clone, Serialize)]
pub struct PointSet {
    pub lambda: f64,
    pub delta: f64,
    pub c: f64,
    pub centers: Vec<f64>,
}

/// Result of the lower-bound audit over a `(lambda, delta)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionAudit {
    pub profile: String,
    pub m: usize,
    pub n_centers: usize,
    pub delta0: f64,
    pub lambda_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub c1_estimate: f64,
    pub worst_lambda: f64,
    pub worst_delta: f64,
    /// Minimum over lambda of the per-cell constant, per delta.
    pub c1_by_delta: Vec<f64>,
    pub stability_ratio: f64,
    pub point_sets: Vec<PointSet>,
    pub pass: bool,
}

/// Default level grid: 400 points across `[min u - 1, max u + 1]`,
/// augmented with the critical values of `u`. The worst levels sit exactly
/// at critical values; an even grid that straddles them by some offset
/// `eps` inflates the per-delta constants by a spurious `sqrt(eps)/delta`
/// branch, so they are pinned explicitly.
pub fn default_lambda_grid(profile: &ShearProfile) -> Vec<f64> {
    let (lo, hi) = profile.min_max();
    let (a, b) = (lo - 1.0, hi + 1.0);
    let n = 400;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect();
    grid.push(lo);
    grid.push(hi);
    if let Ok(points) = profile.critical_points(1e-6) {
        for p in points {
            grid.push(profile.samples().eval_at(p.y));
        }
    }
    grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    grid
}

/// Default radius grid: 16 log-spaced points in `(delta0/100, delta0)`.
pub fn default_delta_grid(delta0: f64) -> Vec<f64> {
    let n = 16;
    let lo = (delta0 / 100.0).ln();
    let hi = delta0.ln();
    (0..n)
        .map(|i| (lo + (hi - lo) * (i as f64 + 0.5) / n as f64).exp())
        .collect()
}

/// Default `delta0`: small enough that `cos(2 pi delta0 / L2) >= 1/2`
/// (i.e. `L2/6`) and that `N` radius-`delta` balls cannot cover the circle
/// (`L2/(4N)`).
pub fn default_delta0(l2: f64, n_centers: usize) -> f64 {
    (l2 / 6.0).min(l2 / (4.0 * n_centers.max(1) as f64))
}

struct CellOutcome {
    c: f64,
    centers: Vec<f64>,
}

/// Circular sublevel components of the piecewise-linear interpolant of
/// `d` through the grid samples: `(down-crossing position, length)`.
/// `None` means the whole circle is below the threshold.
fn pl_components(d: &[f64], l2: f64, thr: f64, count_cap: usize) -> Option<Vec<(f64, f64)>> {
    let g = d.len();
    let h = l2 / g as f64;
    let mut crossings: Vec<(f64, bool)> = Vec::new(); // (position, going_down)
    let mut any_above = false;
    for i in 0..g {
        let a = d[i];
        let b = d[(i + 1) % g];
        if a >= thr {
            any_above = true;
        }
        let below_a = a < thr;
        let below_b = b < thr;
        if below_a != below_b {
            let frac = (thr - a) / (b - a);
            let pos = (i as f64 + frac) * h;
            crossings.push((pos, below_b));
            if crossings.len() > 2 * (count_cap + 2) {
                // More components than we could ever accept.
                return Some(vec![(0.0, f64::INFINITY); count_cap + 1]);
            }
        }
    }
    if crossings.is_empty() {
        return if any_above { Some(Vec::new()) } else { None };
    }
    if crossings.len() % 2 != 0 {
        // A sample sat exactly on the threshold; treat as unresolved-empty.
        return Some(Vec::new());
    }
    let mut comps = Vec::new();
    let first_down = crossings
        .iter()
        .position(|c| c.1)
        .expect("crossings alternate");
    let n = crossings.len();
    let mut idx = first_down;
    loop {
        let (start, down) = crossings[idx];
        debug_assert!(down);
        let (end, _) = crossings[(idx + 1) % n];
        let len = (end - start).rem_euclid(l2);
        comps.push((start, len));
        idx = (idx + 2) % n;
        if idx == first_down {
            break;
        }
    }
    Some(comps)
}

/// Largest `c` such that `{ y : |u(y) - lambda| < c (delta/L2)^m }` splits
/// into at most `n_centers` circular intervals of radius at most `delta`,
/// found by bisection on `c` (the spec treats feasibility as monotone).
fn largest_feasible_c(
    values: &[f64],
    l2: f64,
    lambda: f64,
    delta: f64,
    m: usize,
    n_centers: usize,
) -> CellOutcome {
    let d: Vec<f64> = values.iter().map(|u| (u - lambda).abs()).collect();
    let max_d = d.iter().copied().fold(0.0f64, f64::max);
    let pow = (delta / l2).powi(m as i32);

    let feasible = |thr: f64| -> bool {
        match pl_components(&d, l2, thr, n_centers) {
            None => false,
            Some(comps) => {
                comps.len() <= n_centers && comps.iter().all(|&(_, len)| len <= 2.0 * delta)
            }
        }
    };

    let mut lo = 0.0f64;
    let mut hi = (max_d + 1.0) / pow;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid * pow) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let centers: Vec<f64> = pl_components(&d, l2, lo * pow, n_centers)
        .unwrap_or_default()
        .iter()
        .map(|&(start, len)| (start + 0.5 * len).rem_euclid(l2))
        .collect();
    CellOutcome { c: lo, centers }
}

/// Audit the lower-bound property over the given `(lambda, delta)` grids.
pub fn audit_assumption(
    profile: &ShearProfile,
    m: usize,
    n_centers: usize,
    delta0: f64,
    lambda_grid: &[f64],
    delta_grid: &[f64],
    options: &AuditOptions,
) -> Result<AssumptionAudit> {
    let l2 = profile.l2_period();
    if m == 0 || n_centers == 0 {
        return Err(KseError::InvalidInput("m and N must be positive".into()));
    }
    if !(delta0 > 0.0) || delta0 > l2 / (4.0 * n_centers as f64) + 1e-12 {
        return Err(KseError::InvalidInput(format!(
            "delta0 must lie in (0, L2/(4N)] = (0, {}]",
            l2 / (4.0 * n_centers as f64)
        )));
    }
    if delta_grid.is_empty() || lambda_grid.is_empty() {
        return Err(KseError::InvalidInput("empty audit grid".into()));
    }
    for &d in delta_grid {
        if !(d > 0.0 && d < delta0) {
            return Err(KseError::InvalidInput(format!(
                "delta grid value {d} outside (0, delta0)"
            )));
        }
    }

    // Resolve u on successively finer circular grids via coefficient
    // zero-padding. Each delta needs cell size h <= delta/8 so component
    // boundaries are interpolated from a locally linear graph; a delta too
    // small for the refinement cap is a refinement request.
    let base = options.fine_grid.next_power_of_two();
    let levels: Vec<Vec<f64>> = (0..=options.max_refinements)
        .map(|lvl| {
            let g = base << lvl;
            let mut padded = Profile1D::zeros(l2, g);
            for iy in 0..profile.samples.ny() {
                let j = profile.samples.j_of_iy(iy);
                if (j.unsigned_abs() as usize) < g / 2 {
                    padded.set_coeff(j, profile.samples.coeff(j));
                }
            }
            padded.values()
        })
        .collect();
    let level_for_delta = |delta: f64| -> Result<usize> {
        for (lvl, values) in levels.iter().enumerate() {
            if l2 / values.len() as f64 <= delta / 8.0 {
                return Ok(lvl);
            }
        }
        Err(KseError::RefinementNeeded(format!(
            "delta = {delta} needs more than {} grid cells",
            base << options.max_refinements
        )))
    };
    let delta_levels: Vec<usize> = delta_grid
        .iter()
        .map(|&d| level_for_delta(d))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..lambda_grid.len())
        .flat_map(|i| (0..delta_grid.len()).map(move |j| (i, j)))
        .collect();
    let point_sets: Vec<PointSet> = cells
        .par_iter()
        .map(|&(i, j)| {
            let lambda = lambda_grid[i];
            let delta = delta_grid[j];
            let outcome =
                largest_feasible_c(&levels[delta_levels[j]], l2, lambda, delta, m, n_centers);
            PointSet {
                lambda,
                delta,
                c: outcome.c,
                centers: outcome.centers,
            }
        })
        .collect();

    let mut c1 = f64::INFINITY;
    let (mut worst_lambda, mut worst_delta) = (lambda_grid[0], delta_grid[0]);
    let mut c1_by_delta = vec![f64::INFINITY; delta_grid.len()];
    for (idx, ps) in point_sets.iter().enumerate() {
        let dj = idx % delta_grid.len();
        if ps.c < c1_by_delta[dj] {
            c1_by_delta[dj] = ps.c;
        }
        if ps.c < c1 {
            c1 = ps.c;
            worst_lambda = ps.lambda;
            worst_delta = ps.delta;
        }
    }
    let cmax = c1_by_delta.iter().copied().fold(0.0f64, f64::max);
    let stability_ratio = if cmax > 0.0 { c1 / cmax } else { 0.0 };
    let pass = c1 > 0.0 && stability_ratio >= options.stability_fraction;
    Ok(AssumptionAudit {
        profile: profile.label.clone(),
        m,
        n_centers,
        delta0,
        lambda_grid: lambda_grid.to_vec(),
        delta_grid: delta_grid.to_vec(),
        c1_estimate: c1,
        worst_lambda,
        worst_delta,
        c1_by_delta,
        stability_ratio,
        point_sets,
        pass,
    })
}

/// Audit with the default grids.
pub fn audit_assumption_default(
    profile: &ShearProfile,
    m: usize,
    n_centers: usize,
    options: &AuditOptions,
) -> Result<AssumptionAudit> {
    let delta0 = default_delta0(profile.l2_period(), n_centers);
    audit_assumption(
        profile,
        m,
        n_centers,
        delta0,
        &default_lambda_grid(profile),
        &default_delta_grid(delta0),
        options,
    )
}

/// Largest `delta0` (from a log-spaced candidate list below `L2/(4N)`)
/// whose default-grid audit passes, together with that audit.
pub fn largest_passing_delta0(
    profile: &ShearProfile,
    m: usize,
    n_centers: usize,
    options: &AuditOptions,
) -> Result<Option<(f64, AssumptionAudit)>> {
    let cap = default_delta0(profile.l2_period(), n_centers);
    for i in 0..8 {
        let delta0 = cap * 0.5f64.powi(i);
        let audit = audit_assumption(
            profile,
            m,
            n_centers,
            delta0,
            &default_lambda_grid(profile),
            &default_delta_grid(delta0),
            options,
        )?;
        if audit.pass {
            return Ok(Some((delta0, audit)));
        }
    }
    Ok(None)
}
