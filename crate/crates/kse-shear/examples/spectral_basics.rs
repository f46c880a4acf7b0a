//! Spectral fields on the periodic rectangle: transforms, derivatives,
//! dealiased products, the kernel/fluctuation split, and checkpoint I/O.
//!
//! ```bash
//! cargo run --release -p kse-shear --example spectral_basics
//! ```

use kse_shear::spectral::{checkpoint, Axis2, Grid2D, SpectralField2D};
use ndarray::Array2;
use std::f64::consts::PI;

fn main() -> kse_shear::Result<()> {
    let (l1, l2) = (2.0 * PI, PI);
    let grid = Grid2D::new(64, 32, l1, l2)?;

    // A real field: cos(2 pi x / L1) + sin(2 pi y / L2) + 1/2.
    let samples = Array2::from_shape_fn((grid.nx(), grid.ny()), |(i, j)| {
        let x = i as f64 * l1 / grid.nx() as f64;
        let y = j as f64 * l2 / grid.ny() as f64;
        (2.0 * PI * x / l1).cos() + (2.0 * PI * y / l2).sin() + 0.5
    });
    let f = SpectralField2D::forward(grid, &samples)?;
    println!("coefficient convention (Fourier-series amplitudes):");
    println!("  c(1,0)  = {:+.3}  (cosine mode, expect +0.5)", f.coeff(1, 0).re);
    println!("  c(0,1)  = {:+.3}i (sine mode, expect -0.5i)", f.coeff(0, 1).im);
    println!("  c(0,0)  = {:+.3}  (mean)", f.coeff(0, 0).re);

    // Round trip and Parseval.
    let back = f.inverse();
    let max_err = (&back - &samples).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let quad = (grid.cell_area() * samples.iter().map(|v| v * v).sum::<f64>()).sqrt();
    println!("round-trip max error: {max_err:.2e}");
    println!("Parseval: |f|_L2 = {:.12} (quadrature {:.12})", f.l2_norm(), quad);

    // Spectral derivative.
    let fx = f.derivative(Axis2::X, 1)?;
    println!("d/dx amplitude at mode (1,0): {:.6} (expect 2 pi / L1 / 2 = {:.6})",
        fx.coeff(1, 0).norm(), PI / l1);

    // Dealiased product: cos^2 = 1/2 + 1/2 cos(2x').
    let p = f.dealiased_product(&f)?;
    println!("dealiased cutoffs: |k| <= {}, |j| <= {}", grid.dealias_kx(), grid.dealias_ky());
    println!("(f*f) coefficient at (2,0): {:+.4} (expect +0.25)", p.coeff(2, 0).re);

    // Kernel / fluctuation split.
    let (mean, fluct) = f.decompose();
    println!(
        "decompose: |<f>|^2 * L1 + |f_neq|^2 = {:.12} vs |f|^2 = {:.12}",
        grid.l1() * mean.l2_norm().powi(2) + fluct.l2_norm().powi(2),
        f.l2_norm().powi(2)
    );

    // Binary checkpoint round trip.
    let mut buf = Vec::new();
    checkpoint::write_field(&mut buf, &f)?;
    let g = checkpoint::read_field(&mut buf.as_slice())?;
    let same = f
        .coeffs()
        .iter()
        .zip(g.coeffs().iter())
        .all(|(a, b)| a == b);
    println!("checkpoint round trip exact: {same} ({} bytes)", buf.len());
    Ok(())
}
