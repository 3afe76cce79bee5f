//! Toeplitz operators, Berezin and Husimi transforms, and E_{mu,k}.

use holomorphic_channels::bergman::TruncatedOperator;
use holomorphic_channels::transforms::{
    berezin_transform, covariant_symbol, e_mu_k, husimi, husimi_integral, toeplitz_operator, DiskFunction,
};
use holomorphic_channels::Complex64;

fn main() -> holomorphic_channels::Result<()> {
    let f = DiskFunction::radial_poly(vec![0.0, 0.0, 1.0]);
    let nu = 5.0;
    let z = Complex64::new(0.3, 0.2);

    let mut t = toeplitz_operator(&f, nu, 300)?;
    t.matrix /= Complex64::new(nu - 1.0, 0.0);
    println!("B_nu f(z) closed form   {:.12}", berezin_transform(&f, nu, z)?.re);
    println!("covariant symbol of T_f {:.12}", covariant_symbol(&t, z)?.re);

    let a = TruncatedOperator::random_state(3.0, 4, 2, 3)?;
    for i in 0..3 {
        println!(
            "H^{i}(A)(z) = {:.10}, (mu-1) ∫ H dι = {:.12}",
            husimi(&a, i, z)?,
            2.0 * husimi_integral(&a, i)?
        );
    }

    for k in 0..3 {
        let e = e_mu_k(&f, 2.0, k, z, None)?;
        let e400 = e_mu_k(&f, 2.0, k, z, Some(400.0))?;
        println!("E_(2,{k}) f(z) = {:.10}, at nu = 400: {:.10}", e.re, e400.re);
    }
    Ok(())
}
