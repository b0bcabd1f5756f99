//! Seeded random test inputs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BaseSpace, Polynomial};
use crate::multiindex;
use crate::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A polynomial with one to four terms of total degree `<= max_degree` and small integer
/// coefficients.
pub fn random_poly(rng: &mut impl Rng, space: BaseSpace, max_degree: u32) -> Polynomial {
    let monomials = multiindex::up_to_degree(space.nvars(), max_degree);
    let nterms = rng.gen_range(1..=4);
    let mut p = Polynomial::zero(space);
    for _ in 0..nterms {
        let e = monomials[rng.gen_range(0..monomials.len())].clone();
        let mut c = rng.gen_range(-3i64..=3);
        if c == 0 {
            c = 1;
        }
        p = &p + &Polynomial::monomial(space, e, Rational::from_integer(c.into()));
    }
    p
}

/// A random polynomial without constant term, so that it is not annihilated trivially.
pub fn random_nonconstant(rng: &mut impl Rng, space: BaseSpace, max_degree: u32) -> Polynomial {
    loop {
        let p = random_poly(rng, space, max_degree.max(1));
        let c = Polynomial::constant(space, p.constant_term());
        let q = &p - &c;
        if !q.is_zero() {
            return q;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_reproducible() {
        let s = BaseSpace::complex(2);
        let a: Vec<_> = (0..5).map({
            let mut r = rng(7);
            move |_| random_poly(&mut r, s, 3)
        }).collect();
        let b: Vec<_> = (0..5).map({
            let mut r = rng(7);
            move |_| random_poly(&mut r, s, 3)
        }).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.total_degree().unwrap_or(0) <= 3));
    }
}
