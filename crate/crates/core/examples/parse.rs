//! Reading and printing polynomials and formal functions.

use formal_groupoid::algebra::{parse_formal, parse_poly, BaseSpace, Chart};

fn main() {
    let space = BaseSpace::complex(2);
    for s in ["(z1 + w2)^3", "1/2*z1*w1 - 3/4", "z1*z1*w1^0", "z3", "z1^"] {
        match parse_poly(s, space) {
            Ok(p) => println!("{s:>18} -> {p}"),
            Err(e) => println!("{s:>18} -> error: {e}"),
        }
    }
    let chart = Chart::complex(1, 3, 2);
    for s in ["nu*z1 + zeta1*zetab1", "zeta1^4", "nu^3"] {
        match parse_formal(s, chart) {
            Ok(f) => println!("{s:>18} -> {f} (valid {})", f.valid()),
            Err(e) => println!("{s:>18} -> error: {e}"),
        }
    }
}
