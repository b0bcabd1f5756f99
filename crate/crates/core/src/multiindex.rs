//! Multi-index helpers shared by the operator calculi.

use num_bigint::BigInt;
use num_traits::One;

use crate::Rational;

/// All multi-indices over `n` slots with total degree `<= max`, ordered by degree then
/// lexicographically descending.
pub fn up_to_degree(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for deg in 0..=max {
        of_degree(n, deg, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// All multi-indices over `n` slots with total degree exactly `deg`.
pub fn exactly_degree(n: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    of_degree(n, deg, &mut Vec::with_capacity(n), &mut out);
    out
}

fn of_degree(n: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(deg);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    if n == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=deg).rev() {
        prefix.push(k);
        of_degree(n, deg - k, prefix, out);
        prefix.pop();
    }
}

/// Every `γ <= α` componentwise.
pub fn below(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha {
        let mut next = Vec::with_capacity(out.len() * (a as usize + 1));
        for prefix in &out {
            for k in 0..=a {
                let mut p = prefix.clone();
                p.push(k);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

pub fn degree(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `α!` as a rational.
pub fn factorial_multi(alpha: &[u32]) -> Rational {
    Rational::from_integer(alpha.iter().map(|&a| factorial(a)).product())
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `Π C(α_i, γ_i)`.
pub fn binomial_multi(alpha: &[u32], gamma: &[u32]) -> Rational {
    Rational::from_integer(
        alpha
            .iter()
            .zip(gamma)
            .map(|(&a, &g)| binomial(a, g))
            .product(),
    )
}

pub fn add(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// `a − b`, or `None` if some component would go negative.
pub fn sub(a: &[u32], b: &[u32]) -> Option<Vec<u32>> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y)).collect()
}

pub fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(up_to_degree(2, 2).len(), 6);
        assert_eq!(exactly_degree(3, 2).len(), 6);
        assert_eq!(below(&[2, 1]).len(), 6);
        assert_eq!(up_to_degree(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial_multi(&[2, 3], &[1, 1]), Rational::from_integer(6.into()));
        assert_eq!(factorial_multi(&[3, 2]), Rational::from_integer(12.into()));
    }
}
