//! Möbius maps and the invariant measure on the disk.

use holomorphic_channels::disk::{build_quadrature, invariant_measure_check, mobius, transporter, DiskPoint};
use holomorphic_channels::Complex64;

fn main() -> holomorphic_channels::Result<()> {
    let w = Complex64::new(0.3, -0.4);
    let g = transporter(w)?;
    println!("transporter({w}) sends 0 to {}", mobius(&g, &DiskPoint::origin()).z());

    // ∫ (1-|z|²)^s dι = 1/(s-1)
    let q = build_quadrature(40, 64, 3.0)?;
    let val = q.integrate(|p| p.defect().powi(3));
    println!("∫ (1-|z|²)^3 dι = {val:.15} (exact 0.5)");

    let h = |p: &DiskPoint| p.defect().powi(4) * (1.0 + p.z().re);
    println!("invariance defect under g: {:.2e}", invariant_measure_check(&g, h, &q));
    Ok(())
}
