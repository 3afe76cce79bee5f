//! Kernels, coherent states and the group action on a truncated space.

use holomorphic_channels::bergman::{coherent_vector, group_action_matrix, kernel_eval, TruncatedSpace};
use holomorphic_channels::disk::transporter;
use holomorphic_channels::Complex64;

fn main() -> holomorphic_channels::Result<()> {
    let nu = 4.0;
    let space = TruncatedSpace::new(nu, 40)?;
    let (x, y) = (Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.25));
    // K(x, y) = Σ ê_j(x) conj(ê_j(y))
    let bx = space.basis_values(x);
    let by = space.basis_values(y);
    let series: Complex64 = bx.iter().zip(&by).map(|(a, b)| a * b.conj()).sum();
    println!("kernel {:.12} vs basis sum {:.12}", kernel_eval(nu, x, y), series);

    let cv = coherent_vector(nu, Complex64::new(0.5, 0.0), 60)?;
    let norm: f64 = cv.coeffs.iter().map(|c| c.norm_sqr()).sum();
    println!("coherent state norm² {norm:.15} + tail {:.2e}", cv.tail);

    let g = transporter(Complex64::new(0.0, 0.3))?;
    let u = group_action_matrix(&g, nu, 120, 1e-2)?;
    let uu = u.matrix.adjoint() * &u.matrix;
    let mut defect: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            let id = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((uu[(i, j)] - id).norm());
        }
    }
    println!(
        "max |U*U - I| on degrees <= 10: {defect:.2e}, half-block tail {:.2e}",
        u.tail
    );
    Ok(())
}
