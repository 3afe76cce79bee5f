//! Apply a channel to a random state and look at its output.

use holomorphic_channels::bergman::TruncatedOperator;
use holomorphic_channels::channel::{apply_channel, functional_trace, spectrum, ChannelParams};

fn main() -> holomorphic_channels::Result<()> {
    let (mu, nu, k) = (3.0, 6.0, 1);
    let a = TruncatedOperator::random_state(mu, 5, 2, 7)?;
    let params = ChannelParams::new(mu, nu, k, 400)?;
    let b = apply_channel(&a, &params)?;
    println!("Tr A = {:.12}", a.trace().re);
    println!("Tr T(A) on degrees <= 400: {:.12}", b.trace().re);
    println!("exact Tr T(A) = {:.12}", params.trace_ratio() * a.trace().re);

    let eig = spectrum(&b)?;
    println!("largest eigenvalues: {:?}", &eig[eig.len() - 5..]);
    println!("(1/nu) Tr T(A)^2 = {:.8}", functional_trace(&b, &[0.0, 0.0, 1.0])? / nu);
    Ok(())
}
