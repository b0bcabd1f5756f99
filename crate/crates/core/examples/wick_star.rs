//! The Wick product on a flat chart, and its left multiplication operators.

use formal_groupoid::algebra::{parse_poly, Chart};
use formal_groupoid::poisson::PoissonTensor;
use formal_groupoid::starprod::{sigma, StarProduct};

fn main() -> formal_groupoid::Result<()> {
    let chart = Chart::complex(1, 4, 4);
    let star = StarProduct::new(chart, PoissonTensor::complex_identity(1))?;
    let p = |s: &str| parse_poly(s, chart.base);

    println!("w1 * z1        = {}", star.star(&p("w1")?, &p("z1")?));
    println!("z1 * w1        = {}", star.star(&p("z1")?, &p("w1")?));
    println!("w1^2 * z1^2    = {}", star.star(&p("w1^2")?, &p("z1^2")?));

    let f = p("z1*w1^2")?;
    let l = star.left_op(&f);
    println!("L_f            = {l}");
    println!("sigma(L_f)     = {}", sigma(&l)?);
    Ok(())
}
