//! Trajectory norms and the inequality audits the global-existence
//! argument tracks: exponential decay of the fluctuation with prefactor 8
//! (assumed) or 4 (improved), the dissipation-integral caps 4 and 2, the
//! psi energy bound with its explicitly computable constant, the
//! tau* = 4/lambda contraction, and the mean-decay balance.
//!
//! All norms come from Parseval sums on the spectral state; audits are
//! pure functions of the recorded ledger, so identical ledgers produce
//! identical reports.

use crate::error::{KseError, Result};
use crate::spectral::SpectralField2D;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// One recorded sample of the trajectory norms.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t: f64,
    /// `||phi_neq||_{L2}`.
    pub norm_phi_neq: f64,
    /// Running `nu int_0^t ||Lap phi_neq||^2` (trapezoid).
    pub diss_integral: f64,
    /// `||psi||_{L2_y}` with `psi = d_y <phi>`.
    pub norm_psi: f64,
    /// Running `nu int_0^t ||d_y^2 psi||^2` (trapezoid).
    pub psi_diss_integral: f64,
    /// Domain mean of phi.
    pub phi_bar: f64,
    /// `int |grad phi_neq|^2`.
    pub grad_neq_sq: f64,
}

/// Time series of the norms entering the bootstrap inequalities.
#[derive(Debug, Clone)]
pub struct BootstrapLedger {
    pub nu: f64,
    pub l1: f64,
    pub l2: f64,
    entries: Vec<LedgerEntry>,
    /// Instantaneous integrands at the previous sample (trapezoid state).
    prev_lap_neq_sq: f64,
    prev_psi_lap_sq: f64,
}

impl BootstrapLedger {
    pub fn new(nu: f64, l1: f64, l2: f64) -> Self {
        Self {
            nu,
            l1,
            l2,
            entries: Vec::new(),
            prev_lap_neq_sq: 0.0,
            prev_psi_lap_sq: 0.0,
        }
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Append a sample. Time must increase strictly.
    pub fn record(&mut self, t: f64, phi: &SpectralField2D) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if t <= last.t {
                return Err(KseError::InvalidInput(format!(
                    "non-monotone ledger time {t} after {}",
                    last.t
                )));
            }
        }
        let (mean, fluct) = phi.decompose();
        let norm_phi_neq = fluct.l2_norm();
        let lap_neq_sq = fluct.laplacian_sq_integral();
        let grad_neq_sq = fluct.grad_sq_integral();
        let psi = mean.derivative(1)?;
        let norm_psi = psi.l2_norm();
        let psi_lap_sq = psi.weighted_energy(|eta| eta.powi(4));
        let phi_bar = phi.mean();
        let (diss_integral, psi_diss_integral) = if let Some(last) = self.entries.last() {
            let dt = t - last.t;
            (
                last.diss_integral + 0.5 * self.nu * dt * (self.prev_lap_neq_sq + lap_neq_sq),
                last.psi_diss_integral + 0.5 * self.nu * dt * (self.prev_psi_lap_sq + psi_lap_sq),
            )
        } else {
            (0.0, 0.0)
        };
        self.prev_lap_neq_sq = lap_neq_sq;
        self.prev_psi_lap_sq = psi_lap_sq;
        self.entries.push(LedgerEntry {
            t,
            norm_phi_neq,
            diss_integral,
            norm_psi,
            psi_diss_integral,
            phi_bar,
            grad_neq_sq,
        });
        Ok(())
    }

    pub const CSV_HEADER: &'static str =
        "t,norm_phi_neq,diss_integral,norm_psi,psi_diss_integral,phi_bar,grad_neq_sq";

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                e.t,
                e.norm_phi_neq,
                e.diss_integral,
                e.norm_psi,
                e.psi_diss_integral,
                e.phi_bar,
                e.grad_neq_sq
            )?;
        }
        Ok(())
    }

    /// Read back a ledger CSV (schema validated).
    pub fn read_csv<R: BufRead>(r: &mut R, nu: f64, l1: f64, l2: f64) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| KseError::InvalidInput("empty ledger csv".into()))??;
        if header.trim() != Self::CSV_HEADER {
            return Err(KseError::InvalidInput(format!(
                "ledger csv header mismatch: `{header}`"
            )));
        }
        let mut ledger = Self::new(nu, l1, l2);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| KseError::InvalidInput(format!("bad ledger row `{line}`: {e}")))?;
            if fields.len() != 7 {
                return Err(KseError::InvalidInput(format!(
                    "ledger row has {} fields, want 7",
                    fields.len()
                )));
            }
            ledger.entries.push(LedgerEntry {
                t: fields[0],
                norm_phi_neq: fields[1],
                diss_integral: fields[2],
                norm_psi: fields[3],
                psi_diss_integral: fields[4],
                phi_bar: fields[5],
                grad_neq_sq: fields[6],
            });
        }
        Ok(ledger)
    }

    /// Build a ledger directly from rows (synthetic ledgers in tests).
    pub fn from_entries(nu: f64, l1: f64, l2: f64, entries: Vec<LedgerEntry>) -> Self {
        Self {
            nu,
            l1,
            l2,
            entries,
            prev_lap_neq_sq: 0.0,
            prev_psi_lap_sq: 0.0,
        }
    }
}

/// Per-step energy-identity series: everything needed to check
/// `d/dt (1/2)||phi||^2 = -nu ||Lap phi||^2 + nu ||grad phi||^2 - (nu/2) int |grad phi|^2 phi`.
#[derive(Debug, Clone)]
pub struct EnergySeries {
    pub nu: f64,
    pub entries: Vec<EnergyEntry>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyEntry {
    pub t: f64,
    /// `(1/2) ||phi||^2`.
    pub half_l2_sq: f64,
    /// `||Lap phi||^2`.
    pub lap_sq: f64,
    /// `||grad phi||^2`.
    pub grad_sq: f64,
    /// `<N(phi), phi> = -(nu/2) int |grad phi|^2 phi` (advection is
    /// energy-neutral for a shear).
    pub nonlinear_inner: f64,
}

impl EnergySeries {
    pub fn new(nu: f64) -> Self {
        Self {
            nu,
            entries: Vec::new(),
        }
    }

    pub fn record(&mut self, t: f64, half_l2_sq: f64, lap_sq: f64, grad_sq: f64, nonlinear_inner: f64) {
        self.entries.push(EnergyEntry {
            t,
            half_l2_sq,
            lap_sq,
            grad_sq,
            nonlinear_inner,
        });
    }
}

/// Outcome of one inequality audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub inequality: String,
    pub worst_s: f64,
    pub worst_t: f64,
    /// Ratio of the measured quantity to its allowed bound; pass means
    /// `worst_ratio <= 1 + tolerance`.
    pub worst_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub params: serde_json::Value,
}

const AUDIT_TOL: f64 = 1e-9;

fn report(
    inequality: &str,
    worst_s: f64,
    worst_t: f64,
    worst_ratio: f64,
    tolerance: f64,
    params: serde_json::Value,
) -> AuditReport {
    AuditReport {
        inequality: inequality.into(),
        worst_s,
        worst_t,
        worst_ratio,
        tolerance,
        pass: worst_ratio <= 1.0 + tolerance,
        params,
    }
}

/// Exhaustive pair scan of
/// `||phi_neq(t)|| <= prefactor exp(-lambda (t-s)/divisor) ||phi_neq(s)||`.
/// Prefactor 8 with divisor 4 is the bootstrap assumption, prefactor 4 the
/// improved estimate.
pub fn audit_decay(
    ledger: &BootstrapLedger,
    lambda: f64,
    prefactor: f64,
    rate_divisor: f64,
) -> Result<AuditReport> {
    if !(lambda > 0.0) {
        return Err(KseError::InvalidInput(format!(
            "decay audit needs lambda > 0, got {lambda}"
        )));
    }
    let e = ledger.entries();
    if e.is_empty() {
        return Err(KseError::AuditRefused("empty ledger".into()));
    }
    let logs: Vec<f64> = e.iter().map(|x| x.norm_phi_neq.ln()).collect(); // -inf for zeros
    let log_pref = prefactor.ln();
    let mut worst = f64::NEG_INFINITY;
    let (mut ws, mut wt) = (e[0].t, e[0].t);
    for i in 0..e.len() {
        for j in i..e.len() {
            // log ratio of measured to allowed
            let v = logs[j] - logs[i] + lambda * (e[j].t - e[i].t) / rate_divisor - log_pref;
            if v > worst {
                worst = v;
                ws = e[i].t;
                wt = e[j].t;
            }
        }
    }
    let worst_ratio = if worst == f64::NEG_INFINITY {
        0.0
    } else {
        worst.exp()
    };
    Ok(report(
        "decay",
        ws,
        wt,
        worst_ratio,
        AUDIT_TOL,
        serde_json::json!({"lambda": lambda, "prefactor": prefactor, "rate_divisor": rate_divisor}),
    ))
}

/// Pair scan of `nu int_s^t ||Lap phi_neq||^2 <= cap ||phi_neq(s)||^2`
/// using differences of the running integral. Cap 4 is the bootstrap
/// assumption, cap 2 the improved estimate.
pub fn audit_dissipation(ledger: &BootstrapLedger, cap: f64) -> Result<AuditReport> {
    let e = ledger.entries();
    if e.is_empty() {
        return Err(KseError::AuditRefused("empty ledger".into()));
    }
    let mut worst = 0.0f64;
    let (mut ws, mut wt) = (e[0].t, e[0].t);
    for i in 0..e.len() {
        let denom = cap * e[i].norm_phi_neq * e[i].norm_phi_neq;
        for j in i..e.len() {
            let num = e[j].diss_integral - e[i].diss_integral;
            let ratio = if denom > 0.0 {
                num / denom
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > worst {
                worst = ratio;
                ws = e[i].t;
                wt = e[j].t;
            }
        }
    }
    Ok(report(
        "dissipation",
        ws,
        wt,
        worst,
        AUDIT_TOL,
        serde_json::json!({"cap": cap}),
    ))
}

/// The explicitly computable psi-energy constant:
/// `C1 = 16 C exp(16 C n0^{8/3}) n0^{8/3} + exp(16 C n0^{8/3}) psi0^2`
/// with `n0 = ||phi_neq(0)||`, `psi0 = ||psi(0)||`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct C1Value {
    pub value: f64,
    pub saturated: bool,
}

pub fn compute_c1(norm_phi_neq0: f64, norm_psi0: f64, c: f64) -> Result<C1Value> {
    if !(c > 0.0) {
        return Err(KseError::InvalidInput(format!(
            "compute_c1 needs C > 0, got {c}"
        )));
    }
    let p = norm_phi_neq0.powf(8.0 / 3.0);
    let expo = 16.0 * c * p;
    if expo > 700.0 {
        return Ok(C1Value {
            value: f64::MAX,
            saturated: true,
        });
    }
    let e = expo.exp();
    Ok(C1Value {
        value: 16.0 * c * e * p + e * norm_psi0 * norm_psi0,
        saturated: false,
    })
}

/// Smallest generic constant `C` for which the psi bound
/// `||psi(t)||^2 + nu int ||d_y^2 psi||^2 <= C1(n0, psi0, C)` holds along
/// the whole ledger. The torus interpolation constants are never stated in
/// the source material, so the audit extracts the empirically sufficient
/// one instead of hard-coding ground truth.
pub fn empirical_c1_constant(ledger: &BootstrapLedger) -> Result<f64> {
    let e = ledger.entries();
    if e.is_empty() {
        return Err(KseError::AuditRefused("empty ledger".into()));
    }
    let n0 = e[0].norm_phi_neq;
    let psi0 = e[0].norm_psi;
    let target = e
        .iter()
        .map(|x| x.norm_psi * x.norm_psi + x.psi_diss_integral)
        .fold(0.0f64, f64::max);
    let holds = |c: f64| -> bool {
        match compute_c1(n0, psi0, c) {
            Ok(v) => v.value >= target,
            Err(_) => false,
        }
    };
    let mut hi = 1.0f64;
    let mut tries = 0;
    while !holds(hi) {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(KseError::AuditRefused(
                "no finite C satisfies the psi bound".into(),
            ));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Reports for the fixed-horizon contraction `tau* = 4/lambda`:
/// `||phi_neq(s + tau*)|| <= e^{-1} ||phi_neq(s)||` plus the sqrt(2)
/// short-time growth cap on `[s, s + tau*]`.
#[derive(Debug, Clone, Serialize)]
pub struct TauStarReport {
    pub tau_star: f64,
    /// None when the trajectory is shorter than tau* (growth cap only).
    pub contraction: Option<AuditReport>,
    pub growth_cap: AuditReport,
}

pub fn tau_star_contraction(ledger: &BootstrapLedger, lambda: f64) -> Result<TauStarReport> {
    if !(lambda > 0.0) {
        return Err(KseError::InvalidInput("lambda must be positive".into()));
    }
    let e = ledger.entries();
    if e.len() < 2 {
        return Err(KseError::AuditRefused("ledger too short".into()));
    }
    let tau_star = 4.0 / lambda;
    let t_end = e.last().unwrap().t;
    let interp = |t: f64| -> f64 {
        // Linear interpolation of ||phi_neq|| between samples.
        match e.binary_search_by(|x| x.t.partial_cmp(&t).unwrap()) {
            Ok(i) => e[i].norm_phi_neq,
            Err(i) => {
                let (a, b) = (&e[i - 1], &e[i]);
                let w = (t - a.t) / (b.t - a.t);
                a.norm_phi_neq * (1.0 - w) + b.norm_phi_neq * w
            }
        }
    };
    let inv_e = (-1.0f64).exp();
    let mut contraction = None;
    if e[0].t + tau_star <= t_end {
        let mut worst = 0.0f64;
        let (mut ws, mut wt) = (e[0].t, e[0].t);
        for s in e.iter().filter(|s| s.t + tau_star <= t_end) {
            let later = interp(s.t + tau_star);
            let ratio = if s.norm_phi_neq > 0.0 {
                later / (inv_e * s.norm_phi_neq)
            } else if later > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > worst {
                worst = ratio;
                ws = s.t;
                wt = s.t + tau_star;
            }
        }
        contraction = Some(report(
            "tau-star-contraction",
            ws,
            wt,
            worst,
            AUDIT_TOL,
            serde_json::json!({"lambda": lambda, "tau_star": tau_star, "factor": inv_e}),
        ));
    }
    let sqrt2 = 2.0f64.sqrt();
    let mut worst = 0.0f64;
    let (mut ws, mut wt) = (e[0].t, e[0].t);
    for (i, s) in e.iter().enumerate() {
        if s.norm_phi_neq == 0.0 {
            continue;
        }
        for t in e[i..].iter().take_while(|t| t.t <= s.t + tau_star) {
            let ratio = t.norm_phi_neq / (sqrt2 * s.norm_phi_neq);
            if ratio > worst {
                worst = ratio;
                ws = s.t;
                wt = t.t;
            }
        }
    }
    let growth_cap = report(
        "tau-star-growth-cap",
        ws,
        wt,
        worst,
        AUDIT_TOL,
        serde_json::json!({"lambda": lambda, "tau_star": tau_star, "factor": sqrt2}),
    );
    Ok(TauStarReport {
        tau_star,
        contraction,
        growth_cap,
    })
}

/// Centered-difference check of
/// `d phi_bar/dt = -(nu / 2 L1 L2) int |grad phi_neq|^2 - (nu / 2 L2) int psi^2`,
/// plus monotonicity of `phi_bar`. `worst_ratio` is the maximum relative
/// mismatch over interior samples divided by the tolerance.
pub fn mean_decay_check(ledger: &BootstrapLedger, tolerance: f64) -> Result<MeanDecayReport> {
    let e = ledger.entries();
    if e.len() < 3 {
        return Err(KseError::AuditRefused(
            "mean-decay check needs at least 3 samples".into(),
        ));
    }
    let mut worst = 0.0f64;
    let mut worst_t = e[0].t;
    let mut below_resolution = 0usize;
    let five_point = e.len() >= 5;
    let (lo, hi) = if five_point {
        (2usize, e.len() - 2)
    } else {
        (1usize, e.len() - 1)
    };
    for i in lo..hi {
        // Fourth-order centered difference where the stencil fits (the
        // right-hand side carries O(1)-rate shear-tilting dynamics that a
        // second-order stencil at the ledger cadence cannot resolve to
        // the required tolerance), second-order otherwise.
        let (lhs, span) = if five_point {
            let h = 0.25 * (e[i + 2].t - e[i - 2].t);
            (
                (-e[i + 2].phi_bar + 8.0 * e[i + 1].phi_bar - 8.0 * e[i - 1].phi_bar
                    + e[i - 2].phi_bar)
                    / (12.0 * h),
                2.0 * h,
            )
        } else {
            let span = e[i + 1].t - e[i - 1].t;
            ((e[i + 1].phi_bar - e[i - 1].phi_bar) / span, span)
        };
        let rhs = -(ledger.nu / (2.0 * ledger.l1 * ledger.l2)) * e[i].grad_neq_sq
            - (ledger.nu / (2.0 * ledger.l2)) * e[i].norm_psi * e[i].norm_psi;
        // The centered difference of phi_bar carries an absolute rounding
        // error of order eps |phi_bar| / span; mismatch below that floor is
        // not measurable in f64 and is forgiven, and samples where both
        // sides sink under the floor entirely are counted instead of
        // scored.
        let floor = 100.0 * f64::EPSILON * e[i].phi_bar.abs().max(1.0) / span;
        let scale = lhs.abs().max(rhs.abs());
        if scale <= floor {
            below_resolution += 1;
            continue;
        }
        let rel = ((lhs - rhs).abs() - floor).max(0.0) / scale;
        if rel > worst {
            worst = rel;
            worst_t = e[i].t;
        }
    }
    let mut nonincreasing = true;
    let mut strictly_decreasing = true;
    for w in e.windows(2) {
        if w[1].phi_bar > w[0].phi_bar {
            nonincreasing = false;
        }
        if w[1].phi_bar >= w[0].phi_bar {
            strictly_decreasing = false;
        }
    }
    Ok(MeanDecayReport {
        max_rel_mismatch: worst,
        worst_t,
        tolerance,
        nonincreasing,
        strictly_decreasing,
        below_resolution,
        pass: worst <= tolerance && nonincreasing,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanDecayReport {
    pub max_rel_mismatch: f64,
    pub worst_t: f64,
    pub tolerance: f64,
    pub nonincreasing: bool,
    pub strictly_decreasing: bool,
    /// Samples where both sides sat below the f64 measurement floor.
    pub below_resolution: usize,
    pub pass: bool,
}

/// Centered-difference energy-identity residual:
/// `|d/dt half||phi||^2 + nu lap_sq - nu grad_sq - nonlinear_inner|`,
/// must stay below `tol * max(1, ||phi||^3)` at every interior sample.
pub fn energy_identity_check(series: &EnergySeries, tolerance: f64) -> Result<EnergyReport> {
    let e = &series.entries;
    if e.len() < 3 {
        return Err(KseError::AuditRefused(
            "energy check needs at least 3 samples".into(),
        ));
    }
    let mut worst = 0.0f64;
    let mut worst_t = e[0].t;
    for i in 1..e.len() - 1 {
        let dedt = (e[i + 1].half_l2_sq - e[i - 1].half_l2_sq) / (e[i + 1].t - e[i - 1].t);
        let resid = dedt + series.nu * e[i].lap_sq - series.nu * e[i].grad_sq
            - e[i].nonlinear_inner;
        let norm = (2.0 * e[i].half_l2_sq).sqrt();
        let allowed = tolerance * norm.powi(3).max(1.0);
        let ratio = resid.abs() / allowed;
        if ratio > worst {
            worst = ratio;
            worst_t = e[i].t;
        }
    }
    Ok(EnergyReport {
        worst_ratio: worst,
        worst_t,
        tolerance,
        pass: worst <= 1.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    /// Max residual over its allowance; pass means <= 1.
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests;
