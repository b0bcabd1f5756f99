//! The inverse map I = Q ∘ τ* exchanges source and target.

use formal_groupoid::algebra::{parse_formal, parse_poly, BaseSpace, Chart};
use formal_groupoid::groupoid::{kp_check, GroupoidData};

fn main() -> formal_groupoid::Result<()> {
    let space = BaseSpace::complex(1);
    let chart = Chart::complex(1, 4, 0);
    let g = GroupoidData::assemble(kp_check(vec![vec![parse_poly("1 + z1*w1", space)?]])?, chart)?;

    let f = parse_poly("z1^2*w1", space)?;
    let i_s = g.inverse_map(&g.source(&f))?;
    println!("I(S f) - T f vanishes: {}", (&i_s - &g.target(&f)).is_zero_mod_valid());

    let a = parse_formal("z1*zeta1 + w1*zetab1^2", chart)?;
    let back = g.inverse_map(&g.inverse_map(&a)?)?;
    println!("A       = {a}");
    println!("I(I(A)) = {}", back.reliable_part());
    Ok(())
}
