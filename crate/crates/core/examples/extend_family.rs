//! Extend the Jacobi family of H = x1^2 + x2^2 on the canonical plane and compare the new
//! operator with the reference one.

use formal_groupoid::algebra::{parse_poly, BaseSpace};
use formal_groupoid::coherent::{extend_family, jacobi_family, ExtendOptions, FamilyFile, Normalization};
use formal_groupoid::poisson::PoissonTensor;

fn main() -> formal_groupoid::Result<()> {
    let space = BaseSpace::real(2);
    let (zero, one) = (parse_poly("0", space)?, parse_poly("1", space)?);
    let eta = PoissonTensor::real(vec![vec![zero.clone(), one.clone()], vec![-&one, zero]])?;
    let h = parse_poly("x1^2 + x2^2", space)?;

    let reference = jacobi_family(eta.clone(), &h, 4);
    let start = jacobi_family(eta, &h, 2);
    let ext = extend_family(&start, &ExtendOptions::default())?;
    println!("C2 = {}", ext.operator(2));
    let deviation = ext.operator(2).sub(reference.operator(2));
    println!("deviation from the reference = {deviation}");
    println!("symmetric: {}", deviation.swap(0, 1) == deviation);

    // from C3 on the normalization matters
    for norm in [Normalization::Ascending, Normalization::Descending] {
        let c3 = extend_family(&ext, &ExtendOptions { normalization: norm })?;
        let d3 = c3.operator(3).sub(reference.operator(3));
        println!("{norm:?}: C3 deviates from the reference by {} terms", d3.terms().count());
    }

    let json = serde_json::to_string_pretty(&FamilyFile::from_family(&start)).expect("serializes");
    println!("{json}");
    Ok(())
}
