//! Solve for the generating Hamiltonian F of a curved one-dimensional chart.

use formal_groupoid::algebra::{parse_poly, BaseSpace, Chart};
use formal_groupoid::groupoid::{kp_check, solve_f, solve_f_permuted};

fn main() -> formal_groupoid::Result<()> {
    let space = BaseSpace::complex(1);
    let g = kp_check(vec![vec![parse_poly("1 + z1*w1", space)?]])?;
    let chart = Chart::complex(1, 6, 0);
    let f = solve_f(&g, chart)?;
    for k in 2..=chart.fiber_truncation {
        println!("F_{k} = {}", f.fiber_component(k));
    }
    println!("tau* F = F: {}", f.tau_star() == f);

    let flat2 = kp_check(vec![
        vec![parse_poly("2", BaseSpace::complex(2))?, parse_poly("1", BaseSpace::complex(2))?],
        vec![parse_poly("1", BaseSpace::complex(2))?, parse_poly("3", BaseSpace::complex(2))?],
    ])?;
    let c2 = Chart::complex(2, 4, 0);
    let f2 = solve_f(&flat2, c2)?;
    println!("flat d=2: F = {f2}");
    println!("reversed coordinates agree: {}", solve_f_permuted(&flat2, c2, &[1, 0])? == f2);
    Ok(())
}
