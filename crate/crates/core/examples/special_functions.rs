//! Pochhammer symbols, channel constants and Berezin eigenvalues.

use holomorphic_channels::specfun::{
    berezin_eigenvalue, berezin_eigenvalue_gamma, channel_constant_sq, gauss_2f1_unit, ln_gamma, pochhammer,
};

fn main() -> holomorphic_channels::Result<()> {
    println!("Γ(10) = {}", ln_gamma(10.0).exp());
    println!("(2.5)_4 = {}", pochhammer(2.5, 4));
    println!("2F1(-3, 2; 5; 1) = {}", gauss_2f1_unit(3, 2.0, 5.0)?);

    println!("\nC²(mu, nu, k) for mu = 2, nu = 3");
    for k in 0..5 {
        println!("  k = {k}: {:.12}", channel_constant_sq(2.0, 3.0, k)?);
    }

    println!("\nb_nu(lambda): product route vs Gamma route");
    for nu in [2.0, 5.0, 20.0] {
        for lambda in [0.0, 1.0, 4.0] {
            let p = berezin_eigenvalue(nu, lambda)?;
            let g = berezin_eigenvalue_gamma(nu, lambda)?;
            println!("  nu = {nu:>4}, lambda = {lambda}: {p:.15} {g:.15}");
        }
    }
    Ok(())
}
