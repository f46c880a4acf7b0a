//! The mode operator `H = nu Delta_k^2 + i kappa u(y)` and its
//! pseudospectral quantity `Psi(H) = min_lambda sigma_min(H - i lambda)`:
//! resolvent curve, the minimizer, the trial-mode upper bound, and the
//! Gearhart-Pruss envelope `exp(-t Psi + pi/2)` on the semigroup norm.
//!
//! ```bash
//! cargo run --release -p kse-shear --example pseudospectral_bound
//! ```

use kse_shear::modeop::{ModeOperator, OperatorVariant};
use kse_shear::shear::ShearProfile;
use std::f64::consts::PI;

fn main() -> kse_shear::Result<()> {
    let l2 = 2.0 * PI;
    let profile = ShearProfile::sin_power(1, l2, 256)?;
    let (nu, kappa) = (1e-3, 1.0);
    let op = ModeOperator::assemble(nu, kappa, &profile, 64, OperatorVariant::Full)?;

    println!("sigma_min(H - i lambda) for u = sin(y), nu = {nu}, kappa = {kappa}:");
    for i in 0..=16 {
        let lambda = -1.2 + 2.4 * i as f64 / 16.0;
        let sv = op.resolvent_min_sv(lambda);
        let bar = "#".repeat((sv * 250.0) as usize);
        println!("  lambda = {lambda:+.3}: {sv:.5e} {bar}");
    }

    let r = op.psi(1e-10)?;
    println!("Psi = {:.6e} at lambda = {:+.5}", r.psi, r.argmin_lambda);
    println!("trial-mode upper bound: {:.6e}", op.psi_upper_bound());
    println!("plain diffusion floor nu kappa^4 = {:.6e}", nu * kappa.powi(4));

    println!("Gearhart-Pruss envelope check:");
    for t in [1.0, 10.0, 100.0] {
        let norm = op.semigroup_norm(t)?;
        let bound = (-t * r.psi + PI / 2.0).exp();
        println!(
            "  t = {t:>5}: |exp(-tH)| = {:.6e} <= {:.6e} (margin {:.2e})",
            norm.norm,
            bound,
            bound - norm.norm
        );
    }
    Ok(())
}
