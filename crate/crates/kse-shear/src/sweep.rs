//! Deterministic parameter sweeps over (nu, kappa, profile, variant) and
//! the consolidated report join.
//!
//! Rows are evaluated in parallel but collected in grid order, and every
//! reduction inside a row is sequential, so sweep CSVs are byte-identical
//! across rerun and thread-count changes.

use crate::config::{ProfileConfig, SweepConfig};
use crate::error::{KseError, Result};
use crate::modeop::{fit_power_law, DecayMeasurement, ModeOperator, OperatorVariant};
use crate::shear::ShearProfile;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{BufRead, Write};

/// A sweep row that failed (the sweep continues past it).
#[derive(Debug, Clone, Serialize)]
pub struct RowError {
    pub variant: String,
    pub profile: String,
    pub nu: f64,
    pub kappa: f64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<DecayMeasurement>,
    pub errors: Vec<RowError>,
    pub fits: Vec<FitRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    pub profile: String,
    pub variant: String,
    pub quantity: String,
    pub swept: String,
    pub exponent: f64,
    pub prefactor: f64,
    pub max_rel_residual: f64,
    pub points: usize,
}

/// Effective critical-point order used in scaling predictions.
pub fn m_eff(profile: &ShearProfile) -> usize {
    profile.declared_order().max(2)
}

/// Evaluate one sweep cell.
pub fn measure_cell(
    profile: &ShearProfile,
    variant: OperatorVariant,
    nu: f64,
    kappa: f64,
    j_trunc: usize,
    search_tol_rel: f64,
    rate_threshold: Option<f64>,
    gp_times: &[f64],
) -> Result<DecayMeasurement> {
    let op = ModeOperator::assemble(nu, kappa, profile, j_trunc, variant)?;
    let search_tol = (search_tol_rel * op.psi_upper_bound()).max(1e-14);
    let r = op.psi(search_tol)?;
    let op2 = ModeOperator::assemble(nu, kappa, profile, 2 * j_trunc, variant)?;
    let r2 = op2.psi(search_tol)?;
    // Relative 1e-6 with an absolute floor at the f64 resolution of the
    // operator itself, so a genuinely singular operator (psi = 0 up to
    // roundoff, e.g. hypoelliptic with constant shear) still registers as
    // converged.
    let floor = 1e-14 * op.matrix().norm_1();
    let j_converged = (r2.psi - r.psi).abs() <= 1e-6 * r.psi + floor;
    let mut gp_margin = f64::INFINITY;
    for &t in gp_times {
        let norm = op.semigroup_norm(t)?.norm;
        let bound = (-t * r.psi + std::f64::consts::FRAC_PI_2).exp() + 1e-8;
        gp_margin = gp_margin.min(bound - norm);
    }
    let (rate_threshold, measured_rate) = match rate_threshold {
        Some(thr) => (thr, op.measured_decay_rate(thr)?.rate),
        None => (f64::NAN, f64::NAN),
    };
    Ok(DecayMeasurement {
        variant: variant.as_str().into(),
        profile: profile.label().into(),
        m_eff: m_eff(profile),
        nu,
        kappa,
        j_trunc,
        psi: r.psi,
        argmin_lambda: r.argmin_lambda,
        rate_threshold,
        measured_rate,
        gp_margin,
        j_converged,
        gp_times: gp_times.to_vec(),
        search_tol,
    })
}

/// Run the full sweep grid described by a [`SweepConfig`].
pub fn psi_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    let mut profiles: Vec<ShearProfile> = Vec::new();
    for p in &config.profiles {
        profiles.push(build_sweep_profile(p)?);
    }
    let variants: Vec<OperatorVariant> = config
        .variants
        .iter()
        .map(|v| v.parse())
        .collect::<Result<_>>()?;
    let mut cells: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (pi, _) in profiles.iter().enumerate() {
        for (vi, _) in variants.iter().enumerate() {
            for &nu in &config.nus {
                for &kappa in &config.kappas {
                    cells.push((pi, vi, nu, kappa));
                }
            }
        }
    }
    let results: Vec<std::result::Result<DecayMeasurement, RowError>> = cells
        .par_iter()
        .map(|&(pi, vi, nu, kappa)| {
            measure_cell(
                &profiles[pi],
                variants[vi],
                nu,
                kappa,
                config.j_trunc,
                config.search_tol_rel,
                config.rate_threshold,
                &config.gp_times,
            )
            .map_err(|e| RowError {
                variant: variants[vi].as_str().into(),
                profile: profiles[pi].label().into(),
                nu,
                kappa,
                error: e.to_string(),
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(m) => rows.push(m),
            Err(e) => errors.push(e),
        }
    }
    let fits = fit_groups(&rows);
    Ok(SweepOutcome { rows, errors, fits })
}

fn build_sweep_profile(p: &ProfileConfig) -> Result<ShearProfile> {
    // Sweep profiles must be self-contained (no grid to inherit from).
    p.build(None, None)
}

/// Group rows by (profile, variant) and fit whatever variable was swept
/// with the other fixed; a group contributes a fit when it has >= 4 points
/// spanning >= 2 decades.
pub fn fit_groups(rows: &[DecayMeasurement]) -> Vec<FitRow> {
    let mut keyed: std::collections::BTreeMap<(String, String, String), Vec<&DecayMeasurement>> =
        Default::default();
    for m in rows {
        // nu-sweep groups share a kappa; kappa-sweep groups share a nu.
        keyed
            .entry((
                m.profile.clone(),
                m.variant.clone(),
                format!("kappa={}", m.kappa),
            ))
            .or_default()
            .push(m);
        keyed
            .entry((m.profile.clone(), m.variant.clone(), format!("nu={}", m.nu)))
            .or_default()
            .push(m);
    }
    let mut fits = Vec::new();
    for ((profile, variant, fixed), group) in keyed {
        let swept_is_nu = fixed.starts_with("kappa=");
        for (quantity, values) in [
            ("psi", group.iter().map(|m| m.psi).collect::<Vec<_>>()),
            (
                "measured_rate",
                group.iter().map(|m| m.measured_rate).collect::<Vec<_>>(),
            ),
        ] {
            if values.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let points: Vec<(f64, f64)> = group
                .iter()
                .zip(values.iter())
                .map(|(m, &y)| (if swept_is_nu { m.nu } else { m.kappa.abs() }, y))
                .collect();
            if let Ok(fit) = fit_power_law(&points) {
                fits.push(FitRow {
                    profile: profile.clone(),
                    variant: variant.clone(),
                    quantity: quantity.into(),
                    swept: if swept_is_nu { "nu".into() } else { "kappa".into() },
                    exponent: fit.exponent,
                    prefactor: fit.prefactor,
                    max_rel_residual: fit.max_rel_residual,
                    points: fit.points,
                });
            }
        }
    }
    fits
}

pub const SWEEP_CSV_HEADER: &str = "variant,profile,m_eff,nu,kappa,j_trunc,psi,argmin_lambda,rate_threshold,measured_rate,gp_margin,j_converged";

pub fn write_sweep_csv<W: Write>(w: &mut W, rows: &[DecayMeasurement]) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for m in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            m.variant,
            m.profile,
            m.m_eff,
            m.nu,
            m.kappa,
            m.j_trunc,
            m.psi,
            m.argmin_lambda,
            m.rate_threshold,
            m.measured_rate,
            m.gp_margin,
            m.j_converged
        )?;
    }
    Ok(())
}

pub fn read_sweep_csv<R: BufRead>(r: &mut R) -> Result<Vec<DecayMeasurement>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| KseError::InvalidInput("empty sweep csv".into()))??;
    if header.trim() != SWEEP_CSV_HEADER {
        return Err(KseError::InvalidInput(format!(
            "sweep csv header mismatch: `{header}`"
        )));
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(KseError::InvalidInput(format!(
                "sweep row has {} fields, want 12",
                f.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| KseError::InvalidInput(format!("bad number `{s}`: {e}")))
        };
        rows.push(DecayMeasurement {
            variant: f[0].into(),
            profile: f[1].into(),
            m_eff: f[2]
                .trim()
                .parse()
                .map_err(|e| KseError::InvalidInput(format!("bad m_eff: {e}")))?,
            nu: parse(f[3])?,
            kappa: parse(f[4])?,
            j_trunc: f[5]
                .trim()
                .parse()
                .map_err(|e| KseError::InvalidInput(format!("bad j_trunc: {e}")))?,
            psi: parse(f[6])?,
            argmin_lambda: parse(f[7])?,
            rate_threshold: parse(f[8])?,
            measured_rate: parse(f[9])?,
            gp_margin: parse(f[10])?,
            j_converged: f[11].trim() == "true",
            gp_times: Vec::new(),
            search_tol: f64::NAN,
        });
    }
    Ok(rows)
}

pub const FITS_CSV_HEADER: &str =
    "profile,variant,quantity,swept,exponent,prefactor,max_rel_residual,points";

pub fn write_fits_csv<W: Write>(w: &mut W, fits: &[FitRow]) -> Result<()> {
    writeln!(w, "{FITS_CSV_HEADER}")?;
    for f in fits {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            f.profile,
            f.variant,
            f.quantity,
            f.swept,
            f.exponent,
            f.prefactor,
            f.max_rel_residual,
            f.points
        )?;
    }
    Ok(())
}

/// The measured crossover viscosity: the largest nu in a sweep at which a
/// predicate (e.g. "all bootstrap audits pass") holds, scanning downward.
pub fn crossover_nu(nus_descending: &[f64], mut passes: impl FnMut(f64) -> Result<bool>) -> Result<Option<f64>> {
    for &nu in nus_descending {
        if passes(nu)? {
            return Ok(Some(nu));
        }
    }
    Ok(None)
}

/// Fitted exponential decay rate of `norm_phi_neq` from a ledger, by least
/// squares on the log (zeros skipped). Used by the report join to compare
/// trajectory decay against the linear semigroup prediction.
pub fn trajectory_decay_rate(ledger: &crate::diagnostics::BootstrapLedger) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ledger
        .entries()
        .iter()
        .filter(|e| e.norm_phi_neq > 0.0)
        .map(|e| (e.t, e.norm_phi_neq.ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    Some(-(n * sty - st * sy) / (n * stt - st * st))
}

/// One row of the consolidated report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub profile: String,
    pub nu: f64,
    pub kappa: f64,
    pub psi: f64,
    pub linear_rate: f64,
    pub trajectory_rate: f64,
    pub audits_pass: bool,
    /// Trajectory decays slower than the linear semigroup prediction.
    pub slower_than_linear: bool,
}

pub const REPORT_CSV_HEADER: &str =
    "profile,nu,kappa,psi,linear_rate,trajectory_rate,audits_pass,slower_than_linear";

pub fn write_report_csv<W: Write>(w: &mut W, rows: &[ReportRow]) -> Result<()> {
    writeln!(w, "{REPORT_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.profile,
            r.nu,
            r.kappa,
            r.psi,
            r.linear_rate,
            r.trajectory_rate,
            r.audits_pass,
            r.slower_than_linear
        )?;
    }
    Ok(())
}
