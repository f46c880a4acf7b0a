//! Command-line front end: `simulate`, `psi-sweep`, `decay-fit`,
//! `assumption-check`, `report`.
//!
//! Exit codes: 0 ok, 2 config error, 3 blow-up, 4 audit failure.
//! `KSE_SHEAR_JOBS`, `KSE_SHEAR_SEED` and `KSE_SHEAR_OUT_DIR` override the
//! corresponding flags' defaults (flag > env > config).

use crate::config::{AssumptionConfig, SimulateConfig, SweepConfig};
use crate::diagnostics::{
    audit_decay, audit_dissipation, empirical_c1_constant, energy_identity_check,
    mean_decay_check, tau_star_contraction, AuditReport, EnergyReport, MeanDecayReport,
    TauStarReport,
};
use crate::error::{KseError, Result};
use crate::manifest::RunManifest;
use crate::modeop::{ModeOperator, OperatorVariant};
use crate::shear::{audit_assumption_default, largest_passing_delta0, AuditOptions};
use crate::solver;
use crate::spectral::checkpoint;
use crate::sweep;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

#[derive(Parser)]
#[command(
    name = "kse-shear",
    version,
    about = "Pseudospectral KSE-with-shear simulator and operator toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: physical cores; env KSE_SHEAR_JOBS).
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed override (env KSE_SHEAR_SEED).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the advective KSE and audit the trajectory.
    Simulate(CommonArgs),
    /// Sweep Psi / decay rates over (nu, kappa, profile, variant).
    PsiSweep(CommonArgs),
    /// Fit scaling exponents from an existing sweep CSV.
    DecayFit {
        /// Sweep CSV produced by psi-sweep.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Audit the shear lower-bound property.
    AssumptionCheck(CommonArgs),
    /// Join sweeps and trajectory audits into one summary table.
    Report {
        /// Manifest files of previous runs.
        manifests: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn env_override<T: std::str::FromStr>(name: &str) -> Option<T> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn resolve_jobs(flag: Option<usize>) -> usize {
    flag.or_else(|| env_override("KSE_SHEAR_JOBS"))
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn resolve_seed(flag: Option<u64>) -> Option<u64> {
    flag.or_else(|| env_override("KSE_SHEAR_SEED"))
}

fn resolve_out_dir(dir: PathBuf) -> PathBuf {
    if dir == Path::new("out") {
        if let Some(env_dir) = env_override::<PathBuf>("KSE_SHEAR_OUT_DIR") {
            return env_dir;
        }
    }
    dir
}

/// Entry point used by the thin binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let jobs = match &cli.command {
        Command::Simulate(a) | Command::PsiSweep(a) | Command::AssumptionCheck(a) => {
            resolve_jobs(a.jobs)
        }
        _ => resolve_jobs(None),
    };
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(
            &a.config,
            &resolve_out_dir(a.out_dir),
            resolve_seed(a.seed),
            jobs,
        ),
        Command::PsiSweep(a) => psi_sweep(&a.config, &resolve_out_dir(a.out_dir), jobs),
        Command::DecayFit { input, out_dir } => decay_fit(&input, &resolve_out_dir(out_dir)),
        Command::AssumptionCheck(a) => {
            assumption_check(&a.config, &resolve_out_dir(a.out_dir), jobs)
        }
        Command::Report { manifests, out_dir } => report(&manifests, &resolve_out_dir(out_dir)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                KseError::Config { .. } | KseError::InvalidGrid(_) | KseError::InvalidInput(_) => {
                    EXIT_CONFIG
                }
                KseError::BlowUp { .. } => EXIT_BLOWUP,
                _ => 1,
            }
        }
    }
}

/// Everything the trajectory audits produced, JSON-serialized next to the
/// ledger.
#[derive(Debug, Clone, Serialize)]
pub struct AuditBundle {
    pub profile: String,
    pub nu: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub rate_threshold: f64,
    pub j_trunc: usize,
    pub psi: f64,
    pub b1: AuditReport,
    pub h1: AuditReport,
    pub b2: AuditReport,
    pub h2: AuditReport,
    pub tau_star: TauStarReport,
    pub mean_decay: MeanDecayReport,
    pub energy: Option<EnergyReport>,
    pub empirical_c1: f64,
    pub trajectory_rate: Option<f64>,
    pub all_pass: bool,
}

/// Run the trajectory audits for a completed run.
pub fn audit_run(
    config: &solver::SolverConfig,
    audits: &crate::config::AuditSection,
    out: &solver::RunOutput,
) -> Result<AuditBundle> {
    let kappa = 2.0 * std::f64::consts::PI / config.grid.l1();
    let op = ModeOperator::assemble(
        config.nu,
        kappa,
        &config.profile,
        audits.j_trunc,
        OperatorVariant::Full,
    )?;
    let lambda = op.measured_decay_rate(audits.rate_threshold)?.rate;
    let psi = op.psi(1e-9 * op.psi_upper_bound().max(1e-9))?.psi;
    let b1 = audit_decay(&out.ledger, lambda, 4.0, 4.0)?;
    let h1 = audit_decay(&out.ledger, lambda, 8.0, 4.0)?;
    let b2 = audit_dissipation(&out.ledger, 2.0)?;
    let h2 = audit_dissipation(&out.ledger, 4.0)?;
    let tau = tau_star_contraction(&out.ledger, lambda)?;
    let mean = mean_decay_check(&out.ledger, audits.mean_decay_tol)?;
    let energy = if config.energy_series {
        Some(energy_identity_check(&out.energy, audits.energy_tol)?)
    } else {
        None
    };
    let c1 = empirical_c1_constant(&out.ledger)?;
    let all_pass = b1.pass
        && h1.pass
        && b2.pass
        && h2.pass
        && tau.contraction.as_ref().map_or(true, |c| c.pass)
        && tau.growth_cap.pass
        && mean.pass
        && energy.as_ref().map_or(true, |e| e.pass);
    Ok(AuditBundle {
        profile: config.profile.label().to_string(),
        nu: config.nu,
        kappa,
        lambda,
        rate_threshold: audits.rate_threshold,
        j_trunc: audits.j_trunc,
        psi,
        b1,
        h1,
        b2,
        h2,
        tau_star: tau,
        mean_decay: mean,
        energy,
        empirical_c1: c1,
        trajectory_rate: sweep::trajectory_decay_rate(&out.ledger),
        all_pass,
    })
}

pub fn simulate(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    jobs: usize,
) -> Result<i32> {
    let started = std::time::Instant::now();
    let cfg = SimulateConfig::load(config_path)?;
    let solver_config = cfg.build(seed_override)?;
    std::fs::create_dir_all(out_dir)?;
    let out = solver::run(&solver_config)?;
    let mut manifest = RunManifest::new(
        "simulate",
        serde_json::to_value(&cfg).unwrap_or_default(),
        Some(solver_config.seed),
        jobs,
    );
    manifest.steps = Some(out.steps);

    let ledger_path = out_dir.join("ledger.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&ledger_path)?);
        out.ledger.write_csv(&mut f)?;
    }
    manifest.add_output(&ledger_path);

    if solver_config.energy_series {
        let energy_path = out_dir.join("energy.csv");
        let mut f = std::io::BufWriter::new(std::fs::File::create(&energy_path)?);
        use std::io::Write;
        writeln!(f, "t,half_l2_sq,lap_sq,grad_sq,nonlinear_inner")?;
        for e in &out.energy.entries {
            writeln!(
                f,
                "{},{},{},{},{}",
                e.t, e.half_l2_sq, e.lap_sq, e.grad_sq, e.nonlinear_inner
            )?;
        }
        manifest.add_output(&energy_path);
    }

    for (i, state) in out.checkpoints.iter().enumerate() {
        let path = out_dir.join(format!("checkpoint_{i:03}.bin"));
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        checkpoint::write_field(&mut f, &state.phi)?;
        manifest.add_output(&path);
    }

    let mut exit = EXIT_OK;
    if let Some(info) = &out.blow_up {
        manifest.notes.push(format!(
            "blow-up at t = {} (step {}): {}",
            info.t, info.step_index, info.reason
        ));
        // Diagnostic snapshot of the truncated trajectory.
        if let Some(state) = out.checkpoints.last() {
            let path = out_dir.join("blowup_snapshot.bin");
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            checkpoint::write_field(&mut f, &state.phi)?;
            manifest.add_output(&path);
        }
        exit = EXIT_BLOWUP;
    } else if cfg.audits.enabled {
        let bundle = audit_run(&solver_config, &cfg.audits, &out)?;
        let audit_path = out_dir.join("audits.json");
        std::fs::write(
            &audit_path,
            serde_json::to_string_pretty(&bundle)
                .map_err(|e| KseError::InvalidInput(e.to_string()))?,
        )?;
        manifest.add_output(&audit_path);
        if !bundle.all_pass {
            exit = EXIT_AUDIT;
        }
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(exit)
}

pub fn psi_sweep(config_path: &Path, out_dir: &Path, jobs: usize) -> Result<i32> {
    let started = std::time::Instant::now();
    let cfg = SweepConfig::load(config_path)?;
    std::fs::create_dir_all(out_dir)?;
    let outcome = sweep::psi_sweep(&cfg)?;
    let mut manifest = RunManifest::new(
        "psi-sweep",
        serde_json::to_value(&cfg).unwrap_or_default(),
        None,
        jobs,
    );
    let csv_path = out_dir.join("psi_sweep.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        sweep::write_sweep_csv(&mut f, &outcome.rows)?;
    }
    manifest.add_output(&csv_path);
    let fits_path = out_dir.join("psi_sweep_fits.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&fits_path)?);
        sweep::write_fits_csv(&mut f, &outcome.fits)?;
    }
    manifest.add_output(&fits_path);
    for e in &outcome.errors {
        manifest.notes.push(format!(
            "row error: variant={} profile={} nu={} kappa={}: {}",
            e.variant, e.profile, e.nu, e.kappa, e.error
        ));
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(EXIT_OK)
}

pub fn decay_fit(input: &Path, out_dir: &Path) -> Result<i32> {
    let started = std::time::Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let rows = {
        let f = std::fs::File::open(input)?;
        sweep::read_sweep_csv(&mut std::io::BufReader::new(f))?
    };
    let fits = sweep::fit_groups(&rows);
    let mut manifest = RunManifest::new(
        "decay-fit",
        serde_json::json!({"input": input.display().to_string()}),
        None,
        1,
    );
    let fits_path = out_dir.join("fits.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&fits_path)?);
        sweep::write_fits_csv(&mut f, &fits)?;
    }
    manifest.add_output(&fits_path);
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(EXIT_OK)
}

pub fn assumption_check(config_path: &Path, out_dir: &Path, jobs: usize) -> Result<i32> {
    let started = std::time::Instant::now();
    let cfg = AssumptionConfig::load(config_path)?;
    std::fs::create_dir_all(out_dir)?;
    let profile = cfg.profile.build(None, None)?;
    let mut options = AuditOptions::default();
    if let Some(g) = cfg.fine_grid {
        options.fine_grid = g;
    }
    let audit = if cfg.search_delta0 {
        match largest_passing_delta0(&profile, cfg.m, cfg.n_centers, &options)? {
            Some((_, audit)) => audit,
            None => {
                // Report the default-delta0 failure.
                audit_assumption_default(&profile, cfg.m, cfg.n_centers, &options)?
            }
        }
    } else if let Some(delta0) = cfg.delta0 {
        crate::shear::audit_assumption(
            &profile,
            cfg.m,
            cfg.n_centers,
            delta0,
            &crate::shear::default_lambda_grid(&profile),
            &crate::shear::default_delta_grid(delta0),
            &options,
        )?
    } else {
        audit_assumption_default(&profile, cfg.m, cfg.n_centers, &options)?
    };
    let mut manifest = RunManifest::new(
        "assumption-check",
        serde_json::to_value(&cfg).unwrap_or_default(),
        None,
        jobs,
    );
    let audit_path = out_dir.join("assumption_audit.json");
    std::fs::write(
        &audit_path,
        serde_json::to_string_pretty(&audit).map_err(|e| KseError::InvalidInput(e.to_string()))?,
    )?;
    manifest.add_output(&audit_path);
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(if audit.pass { EXIT_OK } else { EXIT_AUDIT })
}

pub fn report(manifests: &[PathBuf], out_dir: &Path) -> Result<i32> {
    let started = std::time::Instant::now();
    std::fs::create_dir_all(out_dir)?;
    let mut sweep_rows: Vec<crate::modeop::DecayMeasurement> = Vec::new();
    let mut bundles: Vec<(AuditBundleLite, Option<f64>)> = Vec::new();
    let mut missing: Vec<String> = Vec::new();
    for path in manifests {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                missing.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let value: serde_json::Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                missing.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let outputs: Vec<String> = value["outputs"]
            .as_array()
            .map(|a| {
                a.iter()
                    .filter_map(|v| v.as_str().map(|s| s.to_string()))
                    .collect()
            })
            .unwrap_or_default();
        for out in outputs {
            if out.ends_with("psi_sweep.csv") {
                match std::fs::File::open(&out) {
                    Ok(f) => {
                        sweep_rows
                            .extend(sweep::read_sweep_csv(&mut std::io::BufReader::new(f))?);
                    }
                    Err(e) => missing.push(format!("{out}: {e}")),
                }
            } else if out.ends_with("audits.json") {
                match std::fs::read_to_string(&out) {
                    Ok(t) => match serde_json::from_str::<serde_json::Value>(&t) {
                        Ok(v) => {
                            let lite = AuditBundleLite {
                                profile: v["profile"].as_str().unwrap_or("?").to_string(),
                                nu: v["nu"].as_f64().unwrap_or(f64::NAN),
                                kappa: v["kappa"].as_f64().unwrap_or(f64::NAN),
                                psi: v["psi"].as_f64().unwrap_or(f64::NAN),
                                lambda: v["lambda"].as_f64().unwrap_or(f64::NAN),
                                all_pass: v["all_pass"].as_bool().unwrap_or(false),
                            };
                            let traj = v["trajectory_rate"].as_f64();
                            bundles.push((lite, traj));
                        }
                        Err(e) => missing.push(format!("{out}: {e}")),
                    },
                    Err(e) => missing.push(format!("{out}: {e}")),
                }
            }
        }
    }
    let mut rows: Vec<sweep::ReportRow> = Vec::new();
    for (b, traj) in &bundles {
        // Prefer a matching sweep row's psi when available.
        let matched = sweep_rows.iter().find(|r| {
            r.profile == b.profile
                && (r.nu - b.nu).abs() <= 1e-12 * b.nu.abs().max(1e-300)
                && (r.kappa - b.kappa).abs() <= 1e-9 * b.kappa.abs().max(1e-300)
        });
        let psi = matched.map(|m| m.psi).unwrap_or(b.psi);
        let linear_rate = matched
            .map(|m| m.measured_rate)
            .filter(|r| r.is_finite())
            .unwrap_or(b.lambda);
        let trajectory_rate = traj.unwrap_or(f64::NAN);
        rows.push(sweep::ReportRow {
            profile: b.profile.clone(),
            nu: b.nu,
            kappa: b.kappa,
            psi,
            linear_rate,
            trajectory_rate,
            audits_pass: b.all_pass,
            slower_than_linear: trajectory_rate.is_finite() && trajectory_rate < linear_rate,
        });
    }
    let mut manifest = RunManifest::new(
        "report",
        serde_json::json!({"manifests": manifests.iter().map(|p| p.display().to_string()).collect::<Vec<_>>()}),
        None,
        1,
    );
    for m in &missing {
        manifest.notes.push(format!("missing input: {m}"));
        eprintln!("missing input: {m}");
    }
    let report_path = out_dir.join("report.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&report_path)?);
        sweep::write_report_csv(&mut f, &rows)?;
    }
    manifest.add_output(&report_path);
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(EXIT_OK)
}

struct AuditBundleLite {
    profile: String,
    nu: f64,
    kappa: f64,
    psi: f64,
    lambda: f64,
    all_pass: bool,
}
