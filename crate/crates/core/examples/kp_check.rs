use formal_groupoid::algebra::{parse_poly, BaseSpace};
use formal_groupoid::groupoid::kp_check;

fn main() {
    let space = BaseSpace::complex(2);
    let cases: [[[&str; 2]; 2]; 3] = [
        [["1", "0"], ["0", "1"]],
        [["1 + z1*w1", "0"], ["0", "1"]],
        [["z2", "0"], ["0", "1"]],
    ];
    for rows in cases {
        let entries = rows
            .iter()
            .map(|r| r.iter().map(|e| parse_poly(e, space).unwrap()).collect())
            .collect();
        match kp_check(entries) {
            Ok(_) => println!("{rows:?}: ok"),
            Err(e) => println!("{rows:?}: {e}"),
        }
    }
}
