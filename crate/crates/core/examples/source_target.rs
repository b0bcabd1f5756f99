//! Source and target maps, their duals, and the conjugation by Q = exp H_F.

use formal_groupoid::algebra::{parse_poly, BaseSpace, Chart};
use formal_groupoid::groupoid::{kp_check, GroupoidData};
use formal_groupoid::poisson::bracket_tm;

fn main() -> formal_groupoid::Result<()> {
    let space = BaseSpace::complex(1);
    let g = GroupoidData::assemble(kp_check(vec![vec![parse_poly("1 + z1*w1", space)?]])?, Chart::complex(1, 4, 0))?;

    for f in ["z1", "w1", "z1*w1"] {
        let f = parse_poly(f, space)?;
        let s = g.source(&f);
        let q = g.apply_q(&g.dual_source(&f))?;
        println!("S({f})      = {s}");
        println!("T({f})      = {}", g.target(&f));
        println!("Q(S~({f})) - S({f}) vanishes: {}", (&q - &s).is_zero_mod_valid());
    }

    let (sz, tw) = (g.source(&parse_poly("z1", space)?), g.target(&parse_poly("w1", space)?));
    println!("{{S z1, T w1}} = {}", bracket_tm(&sz, &tw)?.reliable_part());
    Ok(())
}
