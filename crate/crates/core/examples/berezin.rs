//! Berezin transform of the flat Wick product, its logarithm, and the symbol of that logarithm.

use formal_groupoid::algebra::Chart;
use formal_groupoid::poisson::PoissonTensor;
use formal_groupoid::starprod::{berezin_transform, log_berezin, sigma, StarProduct};

fn main() -> formal_groupoid::Result<()> {
    let chart = Chart::complex(1, 4, 3);
    let star = StarProduct::new(chart, PoissonTensor::complex_identity(1))?;

    // z^2 w^2 has exponents [2, 2] in the order (z1, w1)
    println!("B(z1^2*w1^2) = {}", star.berezin_monomial(&[2, 2]));

    let b = berezin_transform(&star, 6);
    let x = log_berezin(&b)?;
    println!("nu log B     = {x}");
    println!("Laplacian    = {}", star.laplacian());
    println!("sigma        = {}", sigma(&x)?);
    Ok(())
}
