//! Shear profiles and the lower-bound audit: detect critical points and
//! their orders, then measure the constant `c1` in
//! `|u(y) - lambda| >= c1 (delta/L2)^m` away from at most `N` bad
//! intervals, including the sharpness of the exponent.
//!
//! ```bash
//! cargo run --release -p kse-shear --example shear_assumption_audit
//! ```

use kse_shear::shear::{audit_assumption_default, AuditOptions, ShearProfile};
use std::f64::consts::PI;

fn main() -> kse_shear::Result<()> {
    let l2 = 2.0 * PI;
    let options = AuditOptions::default();

    for m in 1..=4 {
        let profile = ShearProfile::sin_power(m, l2, 128)?;
        let points = profile.critical_points(1e-6)?;
        let described: Vec<String> = points
            .iter()
            .map(|c| format!("y={:.4} (order {})", c.y, c.order))
            .collect();
        println!("u = sin^{m}: critical points {}", described.join(", "));

        let m_eff = m.max(2);
        let audit = audit_assumption_default(&profile, m_eff, 8, &options)?;
        println!(
            "  exponent {m_eff}: c1 = {:.4}, stability {:.3}, pass = {} (worst lambda {:+.4}, delta {:.4})",
            audit.c1_estimate, audit.stability_ratio, audit.pass, audit.worst_lambda, audit.worst_delta
        );
        let sharp = audit_assumption_default(&profile, m_eff - 1, 8, &options)?;
        println!(
            "  exponent {} (too small): c1 collapses, stability {:.4}, pass = {}",
            m_eff - 1,
            sharp.stability_ratio,
            sharp.pass
        );
    }

    // A constant shear has no usable level structure: the audit fails.
    let flat = ShearProfile::zero(l2, 64);
    let audit = audit_assumption_default(&flat, 2, 8, &options)?;
    println!(
        "u = 0: c1 = {}, pass = {} (violation set is the whole circle)",
        audit.c1_estimate, audit.pass
    );
    Ok(())
}
