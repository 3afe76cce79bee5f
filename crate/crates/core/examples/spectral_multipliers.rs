//! Eigenfunctions of the Berezin transform and the inverse multipliers.

use holomorphic_channels::disk::DiskPoint;
use holomorphic_channels::spectral::{
    eigen_relation_residual, eigenfunction, inverse_multiplier, inverse_multiplier_bound, spherical_function,
    BoundaryPoint,
};
use holomorphic_channels::Complex64;

fn main() -> holomorphic_channels::Result<()> {
    let b = BoundaryPoint::from_angle(1.0);
    let p = DiskPoint::new(Complex64::new(0.4, -0.2))?;
    println!("e_(1,b)(z) = {:.12}", eigenfunction(1.0, b, &p));
    println!("phi_(0,1)(z) = {:.12}", spherical_function(0, 1.0, &p)?);

    let samples = [p, DiskPoint::new(Complex64::new(-0.1, 0.5))?];
    for nu in [4.0, 8.0] {
        println!(
            "nu = {nu}: eigen-relation residual {:.2e}",
            eigen_relation_residual(nu, 1.0, b, &samples)?
        );
    }

    let nu0 = 3;
    for nu in [5.0, 10.0, 40.0] {
        let worst = (0..200)
            .map(|i| inverse_multiplier(nu, nu0 as f64, i as f64 * 0.1))
            .collect::<Result<Vec<_>, _>>()?;
        let m = worst.iter().cloned().fold(0.0, f64::max);
        println!(
            "nu = {nu}: sup b_3/b_nu on a grid {m:.10}, bound {:.10}",
            inverse_multiplier_bound(nu, nu0)
        );
    }
    Ok(())
}
