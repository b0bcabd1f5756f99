use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::BaseSpace;
use crate::Rational;

/// Multivariate polynomial with exact rational coefficients in the base coordinates.
///
/// Terms are keyed by exponent vectors; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    space: BaseSpace,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn zero(space: BaseSpace) -> Self {
        Polynomial {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(space: BaseSpace) -> Self {
        Self::constant(space, Rational::one())
    }

    pub fn constant(space: BaseSpace, c: Rational) -> Self {
        let mut p = Self::zero(space);
        p.add_term(vec![0; space.nvars()], c);
        p
    }

    pub fn from_int(space: BaseSpace, c: i64) -> Self {
        Self::constant(space, Rational::from_integer(c.into()))
    }

    /// The coordinate function with index `i` (see [`BaseSpace::z`], [`BaseSpace::w`]).
    pub fn var(space: BaseSpace, i: usize) -> Self {
        let mut exps = vec![0; space.nvars()];
        exps[i] = 1;
        Self::monomial(space, exps, Rational::one())
    }

    pub fn monomial(space: BaseSpace, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), space.nvars());
        let mut p = Self::zero(space);
        p.add_term(exps, c);
        p
    }

    pub fn from_terms<I>(space: BaseSpace, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(space);
        for (e, c) in terms {
            assert_eq!(e.len(), space.nvars());
            p.add_term(e, c);
        }
        p
    }

    pub(crate) fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn space(&self) -> BaseSpace {
        self.space
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.nvars()])
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    /// True when no term involves any variable outside `vars`.
    pub fn depends_only_on(&self, vars: impl Fn(usize) -> bool) -> bool {
        self.terms
            .keys()
            .all(|e| e.iter().enumerate().all(|(i, &x)| x == 0 || vars(i)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.space);
        }
        Polynomial {
            space: self.space,
            terms: self
                .terms
                .iter()
                .map(|(e, x)| (e.clone(), x * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.space);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.space);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * Rational::from_integer(e[i].into()));
        }
        out
    }

    /// `∂^alpha` for a multi-index over the base coordinates.
    pub fn derivative_multi(&self, alpha: &[u32]) -> Self {
        let mut out = Self::zero(self.space);
        for (e, c) in &self.terms {
            if e.iter().zip(alpha).any(|(x, a)| x < a) {
                continue;
            }
            let mut factor = c.clone();
            let mut d = e.clone();
            for (k, &a) in alpha.iter().enumerate() {
                for j in 0..a {
                    factor *= Rational::from_integer((e[k] - j).into());
                }
                d[k] -= a;
            }
            out.add_term(d, factor);
        }
        out
    }

    /// Substitute `vars[i] -> images[i]` for every coordinate.
    pub fn substitute(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars());
        let target = images.first().map(|p| p.space).unwrap_or(self.space);
        let mut out = Polynomial::zero(target);
        for (e, c) in &self.terms {
            let mut term = Polynomial::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = &term * &images[i].pow(k);
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Relabel coordinates: variable `i` becomes variable `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Polynomial {
        let mut out = Polynomial::zero(self.space);
        for (e, c) in &self.terms {
            let mut d = vec![0; e.len()];
            for (i, &k) in e.iter().enumerate() {
                d[perm[i]] = k;
            }
            out.add_term(d, c.clone());
        }
        out
    }

    /// Terms in printing order: ascending total degree, then variables in chart order.
    pub fn canonical_terms(&self) -> Vec<(&[u32], &Rational)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            da.cmp(&db).then_with(|| b.0.cmp(a.0))
        });
        v
    }

    pub(crate) fn write_with(
        &self,
        f: &mut impl fmt::Write,
        name: impl Fn(usize) -> String,
    ) -> fmt::Result {
        let terms: Vec<(Vec<u32>, Rational)> = self
            .canonical_terms()
            .into_iter()
            .map(|(e, c)| (e.to_vec(), c.clone()))
            .collect();
        write_sum(f, &terms, &name)
    }
}

/// Writes `terms` (already in display order) as a signed sum; `0` when empty.
pub(crate) fn write_sum(
    f: &mut impl fmt::Write,
    terms: &[(Vec<u32>, Rational)],
    name: &impl Fn(usize) -> String,
) -> fmt::Result {
    if terms.is_empty() {
        return f.write_str("0");
    }
    for (n, (e, c)) in terms.iter().enumerate() {
        let mono = monomial_string(e, name);
        if n == 0 {
            write_term(f, c, &mono)?;
        } else if c.is_negative() {
            f.write_str(" - ")?;
            write_term(f, &-c, &mono)?;
        } else {
            f.write_str(" + ")?;
            write_term(f, c, &mono)?;
        }
    }
    Ok(())
}

pub(crate) fn monomial_string(e: &[u32], name: &impl Fn(usize) -> String) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| {
            if k == 1 {
                name(i)
            } else {
                format!("{}^{}", name(i), k)
            }
        })
        .collect();
    parts.join("*")
}

pub(crate) fn write_rational(f: &mut impl fmt::Write, c: &Rational) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn write_term(f: &mut impl fmt::Write, c: &Rational, mono: &str) -> fmt::Result {
    if mono.is_empty() {
        return write_rational(f, c);
    }
    if c.is_one() {
        return f.write_str(mono);
    }
    write_rational(f, c)?;
    write!(f, "*{}", mono)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let space = self.space;
        self.write_with(f, |i| space.var_name(i))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.space, rhs.space, "polynomials over different charts");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.space, rhs.space, "polynomials over different charts");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.space, rhs.space, "polynomials over different charts");
        let mut out = Polynomial::zero(self.space);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> BaseSpace {
        BaseSpace::complex(1)
    }

    #[test]
    fn binomial_square() {
        let z = Polynomial::var(space(), 0);
        let w = Polynomial::var(space(), 1);
        let s = (&z + &w).pow(2);
        assert_eq!(s.to_string(), "z1^2 + 2*z1*w1 + w1^2");
    }

    #[test]
    fn derivative_multi_matches_iterated() {
        let z = Polynomial::var(space(), 0);
        let w = Polynomial::var(space(), 1);
        let p = &(&z.pow(3) * &w.pow(2)) + &w;
        let a = p.derivative_multi(&[2, 1]);
        let b = p.derivative(0).derivative(0).derivative(1);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "12*z1*w1");
    }

    #[test]
    fn printing_signs() {
        let z = Polynomial::var(space(), 0);
        let one = Polynomial::one(space());
        assert_eq!((&one - &z).to_string(), "1 - z1");
        assert_eq!((-&z).to_string(), "-1*z1");
        assert_eq!(Polynomial::zero(space()).to_string(), "0");
        let half = Polynomial::constant(space(), Rational::new(1.into(), 2.into()));
        assert_eq!((&half * &z).to_string(), "1/2*z1");
    }
}
