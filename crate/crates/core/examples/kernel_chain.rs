//! Monte Carlo estimates of the chained kernel integrals I_n(nu).

use holomorphic_channels::spectral::{chained_kernel_integral, chained_kernel_quadrature2};

fn main() -> holomorphic_channels::Result<()> {
    for nu in [4.0, 8.0, 16.0] {
        let mc = chained_kernel_integral(2, nu, 42, 200_000)?;
        let quad = chained_kernel_quadrature2(nu, 80, 512)?;
        println!(
            "I_2({nu:>2}) ≈ {:.5} ± {:.5}   quadrature {quad:.8}",
            mc.estimate, mc.half_width
        );
    }
    let mc = chained_kernel_integral(3, 8.0, 42, 200_000)?;
    println!("I_3(8) ≈ {:.5} ± {:.5}", mc.estimate, mc.half_width);
    Ok(())
}
